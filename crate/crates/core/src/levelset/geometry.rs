//! Principal directions and strip deviations of polylines.

use serde::{Deserialize, Serialize};

use super::contour::{classify_component, extract_level_set, ComponentClass, LevelComponent};
use super::{LevelSetError, Window, DEFAULT_CELLS_PER_PERIOD};
use crate::Potential;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrincipalAxes {
    pub centroid: [f64; 2],
    /// Unit major axis, normalized to the upper half-plane.
    pub major: [f64; 2],
    pub var_major: f64,
    pub var_minor: f64,
}

pub(crate) fn upper_half_plane(v: [f64; 2]) -> [f64; 2] {
    if v[1] < 0.0 || (v[1] == 0.0 && v[0] < 0.0) {
        [-v[0], -v[1]]
    } else {
        v
    }
}

/// Centroid-centered least-squares axes of a point set.
pub fn principal_axes(points: &[[f64; 2]]) -> Option<PrincipalAxes> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let cx = points.iter().map(|p| p[0]).sum::<f64>() / n;
    let cy = points.iter().map(|p| p[1]).sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for p in points {
        let (dx, dy) = (p[0] - cx, p[1] - cy);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    let (sxx, sxy, syy) = (sxx / n, sxy / n, syy / n);
    let mean = 0.5 * (sxx + syy);
    let diff = (0.25 * (sxx - syy) * (sxx - syy) + sxy * sxy).sqrt();
    let (l1, l2) = (mean + diff, (mean - diff).max(0.0));
    let theta = 0.5 * (2.0 * sxy).atan2(sxx - syy);
    Some(PrincipalAxes {
        centroid: [cx, cy],
        major: upper_half_plane([theta.cos(), theta.sin()]),
        var_major: l1,
        var_minor: l2,
    })
}

/// Max distance of `points` from the line through `origin` along unit `dir`.
pub fn transverse_deviation(points: &[[f64; 2]], origin: [f64; 2], dir: [f64; 2]) -> f64 {
    points
        .iter()
        .map(|p| ((p[0] - origin[0]) * dir[1] - (p[1] - origin[1]) * dir[0]).abs())
        .fold(0.0, f64::max)
}

/// Principal direction of an open component; fails when the point cloud is nearly
/// isotropic (principal variances within 5%).
pub fn mean_direction(c: &LevelComponent) -> Result<[f64; 2], LevelSetError> {
    let axes = principal_axes(&c.points).ok_or(LevelSetError::IsotropicComponent)?;
    if axes.var_major <= 0.0 || (axes.var_major - axes.var_minor) < 0.05 * axes.var_major {
        return Err(LevelSetError::IsotropicComponent);
    }
    Ok(axes.major)
}

/// Length-weighted mean of the principal directions of several components, as an
/// undirected axis (averaged in doubled-angle space).
pub fn pooled_direction(components: &[&LevelComponent]) -> Option<[f64; 2]> {
    let (mut c2, mut s2) = (0.0, 0.0);
    for c in components {
        if let Ok(d) = mean_direction(c) {
            let w = c.length();
            let a = d[1].atan2(d[0]);
            c2 += w * (2.0 * a).cos();
            s2 += w * (2.0 * a).sin();
        }
    }
    if c2 == 0.0 && s2 == 0.0 {
        return None;
    }
    let a = 0.5 * s2.atan2(c2);
    Some(upper_half_plane([a.cos(), a.sin()]))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeviationSample {
    /// Full side length of the window (larger side).
    pub window_size: f64,
    /// Max strip deviation over spanning components; `None` when nothing spans.
    pub max_deviation: Option<f64>,
    pub spanning_count: usize,
}

/// Max strip deviation of spanning level lines per window.
pub fn strip_deviation_growth(
    p: &Potential,
    eps: f64,
    windows: &[Window],
) -> Result<Vec<DeviationSample>, LevelSetError> {
    strip_deviation_growth_with(p, eps, windows, DEFAULT_CELLS_PER_PERIOD)
}

pub fn strip_deviation_growth_with(
    p: &Potential,
    eps: f64,
    windows: &[Window],
    cells_per_period: usize,
) -> Result<Vec<DeviationSample>, LevelSetError> {
    if windows.windows(2).any(|w| w[1].size() <= w[0].size()) {
        return Err(LevelSetError::WindowsNotIncreasing);
    }
    let mut out = Vec::with_capacity(windows.len());
    for w in windows {
        let comps = extract_level_set(p, eps, *w, cells_per_period)?;
        let spanning: Vec<&LevelComponent> = comps
            .iter()
            .filter(|c| classify_component(c, w) == ComponentClass::OpenSpanning)
            .collect();
        let max_deviation = spanning.iter().map(|c| c.strip_deviation).reduce(f64::max);
        out.push(DeviationSample {
            window_size: w.size(),
            max_deviation,
            spanning_count: spanning.len(),
        });
    }
    if out.iter().all(|s| s.max_deviation.is_none()) {
        return Err(LevelSetError::NoOpenLines);
    }
    Ok(out)
}

/// Ratio of the last to the first available max deviation.
pub fn growth_ratio(samples: &[DeviationSample]) -> Option<f64> {
    let first = samples.iter().find_map(|s| s.max_deviation)?;
    let last = samples.iter().rev().find_map(|s| s.max_deviation)?;
    Some(last / first.max(1e-12))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn comp(points: Vec<[f64; 2]>) -> LevelComponent {
        LevelComponent {
            points,
            closed: false,
            touches_boundary: true,
            mean_direction: None,
            strip_deviation: 0.0,
        }
    }

    #[test]
    fn line_direction() {
        let c = comp((0..50).map(|i| [i as f64 * 0.1, 0.2 * i as f64]).collect());
        let d = mean_direction(&c).unwrap();
        let s = 5f64.sqrt();
        assert!((d[0] - 1.0 / s).abs() < 1e-12 && (d[1] - 2.0 / s).abs() < 1e-12);
    }

    #[test]
    fn direction_is_in_upper_half_plane() {
        let c = comp((0..50).map(|i| [-(i as f64), -0.5 * i as f64]).collect());
        let d = mean_direction(&c).unwrap();
        assert!(d[1] > 0.0);
        let c = comp((0..50).map(|i| [-(i as f64), 0.0]).collect());
        assert_eq!(mean_direction(&c).unwrap(), [1.0, 0.0]);
    }

    #[test]
    fn sinusoid_direction_oracle() {
        // Synthetic polyline: sinusoidal wiggle of amplitude 2 about an axis at 31°.
        let a = 31f64.to_radians();
        let (u, n) = ([a.cos(), a.sin()], [-a.sin(), a.cos()]);
        let pts: Vec<[f64; 2]> = (0..4000)
            .map(|i| {
                let s = i as f64 * 0.1;
                let t = 2.0 * (0.7 * s).sin();
                [s * u[0] + t * n[0], s * u[1] + t * n[1]]
            })
            .collect();
        let d = mean_direction(&comp(pts.clone())).unwrap();
        let err = (d[0] * u[1] - d[1] * u[0]).abs().asin().to_degrees();
        assert!(err < 1.0, "{err}");
        let dev = transverse_deviation(&pts, [200.0 * u[0], 200.0 * u[1]], u);
        assert!((dev - 2.0).abs() < 0.05);
    }

    #[test]
    fn isotropic_cloud_rejected() {
        let pts: Vec<[f64; 2]> = (0..360)
            .map(|i| {
                let t = (i as f64).to_radians();
                [t.cos(), t.sin()]
            })
            .collect();
        assert_eq!(
            mean_direction(&comp(pts)),
            Err(LevelSetError::IsotropicComponent)
        );
    }
}
