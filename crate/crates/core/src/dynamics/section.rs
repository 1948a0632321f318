//! Poincaré sections `y = y0, p_y > 0` and their thinness.

use serde::{Deserialize, Serialize};

use super::{DynamicsError, Trajectory};
use crate::levelset::geometry::principal_axes;
use crate::Potential;

/// Crossings required for a section.
pub const MIN_CROSSINGS: usize = 100;
/// Neighbours per point in the local thinness estimate.
const NEIGHBOURS: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Section {
    pub y0: f64,
    /// `x` is reduced modulo this length when set.
    pub period: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectionResult {
    /// `(x, p_x)` at each upward crossing.
    pub points: Vec<[f64; 2]>,
    /// Median over points of `sqrt(λ_min / λ_max)` of the local neighbourhood
    /// covariance, with both axes scaled to unit variance: near 0 on curves, order 1
    /// on area-filling clouds.
    pub thinness: f64,
}

/// Local principal-axis ratio of a point cloud.
pub fn thinness(points: &[[f64; 2]]) -> f64 {
    let n = points.len();
    if n < NEIGHBOURS + 1 {
        return f64::NAN;
    }
    let std = |k: usize| {
        let m = points.iter().map(|p| p[k]).sum::<f64>() / n as f64;
        (points.iter().map(|p| (p[k] - m).powi(2)).sum::<f64>() / n as f64)
            .sqrt()
            .max(1e-300)
    };
    let (sx, sy) = (std(0), std(1));
    let scaled: Vec<[f64; 2]> = points.iter().map(|p| [p[0] / sx, p[1] / sy]).collect();
    let mut ratios: Vec<f64> = scaled
        .iter()
        .map(|a| {
            let mut d: Vec<(f64, usize)> = scaled
                .iter()
                .enumerate()
                .map(|(j, b)| ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2), j))
                .collect();
            d.select_nth_unstable_by(NEIGHBOURS, |x, y| x.0.total_cmp(&y.0));
            let local: Vec<[f64; 2]> = d[..=NEIGHBOURS].iter().map(|&(_, j)| scaled[j]).collect();
            match principal_axes(&local) {
                Some(ax) if ax.var_major > 0.0 => (ax.var_minor / ax.var_major).sqrt(),
                _ => 0.0,
            }
        })
        .collect();
    ratios.sort_by(f64::total_cmp);
    ratios[ratios.len() / 2]
}

/// Upward crossings of `y = y0`, located by linear interpolation between samples and
/// one Newton step on the crossing time under the local force.
pub fn poincare_section(
    p: &Potential,
    traj: &Trajectory<f64>,
    section: &Section,
) -> Result<SectionResult, DynamicsError> {
    let m = traj.mass;
    let h = traj.sample_dt();
    let mut points = Vec::new();
    for w in traj.states.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        let (ya, yb) = (a.r[1] - section.y0, b.r[1] - section.y0);
        if !(ya < 0.0 && yb >= 0.0) {
            continue;
        }
        let g = p.gradient(a.r);
        let acc = [-g[0] / m, -g[1] / m];
        let v = [a.p[0] / m, a.p[1] / m];
        let mut tau = h * (-ya) / (yb - ya);
        let f = ya + v[1] * tau + 0.5 * acc[1] * tau * tau;
        let df = v[1] + acc[1] * tau;
        if df != 0.0 {
            tau -= f / df;
        }
        if v[1] + acc[1] * tau <= 0.0 {
            continue;
        }
        let mut x = a.r[0] + v[0] * tau + 0.5 * acc[0] * tau * tau;
        if let Some(period) = section.period {
            x = x.rem_euclid(period);
        }
        points.push([x, m * (v[0] + acc[0] * tau)]);
    }
    if points.len() < MIN_CROSSINGS {
        return Err(DynamicsError::TooFewCrossings {
            found: points.len(),
        });
    }
    let thinness = thinness(&points);
    Ok(SectionResult { points, thinness })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circle_is_thin_and_disc_is_not() {
        let circle: Vec<[f64; 2]> = (0..400)
            .map(|i| {
                let a = i as f64 * 2.399963;
                [a.cos(), 0.5 * a.sin()]
            })
            .collect();
        assert!(thinness(&circle) < 0.05);
        let disc: Vec<[f64; 2]> = (0..400)
            .map(|i| {
                let a = i as f64 * 2.399963;
                let r = ((i as f64 + 0.5) / 400.0).sqrt();
                [r * a.cos(), r * a.sin()]
            })
            .collect();
        assert!(thinness(&disc) > 0.3);
    }
}
