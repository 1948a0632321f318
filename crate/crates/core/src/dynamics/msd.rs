//! Time-averaged mean squared displacement of a single trajectory.

use serde::{Deserialize, Serialize};

use super::{DynamicsError, Trajectory};

/// Shortest trajectory accepted, in samples.
pub const MIN_SAMPLES: usize = 10_000;
/// Largest lag, as a fraction of the trajectory length.
const MAX_LAG_FRACTION: f64 = 0.1;
const LAGS_PER_DECADE: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MsdFit {
    /// `MSD ∼ t^alpha` over the central two decades of lag.
    pub alpha: f64,
    /// `MSD_∥ / 2t` and `MSD_⊥ / 2t` at the top of the fit range; total `MSD / 4t`
    /// when no reference direction is given.
    pub d_parallel: f64,
    pub d_perp: f64,
    /// Exponents of the two trajectory halves.
    pub alpha_halves: [f64; 2],
    /// `(lag time, MSD_∥, MSD_⊥)`; parallel is `x` without a reference direction.
    pub curve: Vec<(f64, f64, f64)>,
    pub fit_range: [f64; 2],
}

fn log_lags(max_lag: usize) -> Vec<usize> {
    let decades = (max_lag as f64).log10();
    let n = (decades * LAGS_PER_DECADE as f64).ceil() as usize;
    let mut lags: Vec<usize> = (0..=n)
        .map(|i| 10f64.powf(decades * i as f64 / n.max(1) as f64).round() as usize)
        .filter(|&l| l >= 1 && l <= max_lag)
        .collect();
    lags.dedup();
    lags
}

/// `(MSD_∥, MSD_⊥)` at `lag` over `pos`.
fn msd_at(pos: &[[f64; 2]], lag: usize, dir: [f64; 2]) -> (f64, f64) {
    let n = pos.len() - lag;
    let (mut a, mut b) = (0.0, 0.0);
    for i in 0..n {
        let d = [pos[i + lag][0] - pos[i][0], pos[i + lag][1] - pos[i][1]];
        let par = d[0] * dir[0] + d[1] * dir[1];
        let perp = d[0] * dir[1] - d[1] * dir[0];
        a += par * par;
        b += perp * perp;
    }
    (a / n as f64, b / n as f64)
}

/// Least-squares slope of `log MSD` against `log lag` over lags in `[lo, hi]`.
fn slope(pos: &[[f64; 2]], lags: &[usize], lo: f64, hi: f64) -> Option<f64> {
    let pts: Vec<(f64, f64)> = lags
        .iter()
        .filter(|&&l| (l as f64) >= lo && (l as f64) <= hi)
        .filter_map(|&l| {
            let (a, b) = msd_at(pos, l, [1.0, 0.0]);
            let m = a + b;
            (m > 0.0).then(|| ((l as f64).ln(), m.ln()))
        })
        .collect();
    if pts.len() < 3 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    Some(sxy / sxx)
}

fn central_range(max_lag: usize) -> [f64; 2] {
    let c = (max_lag as f64).sqrt();
    [(c / 10.0).max(1.0), c * 10.0]
}

/// Fits the MSD exponent over the central two decades of lag; with a reference
/// direction the displacement is split along and across it.
pub fn msd_analysis(
    traj: &Trajectory<f64>,
    reference: Option<[f64; 2]>,
) -> Result<MsdFit, DynamicsError> {
    let pos = traj.positions();
    if pos.len() < MIN_SAMPLES {
        return Err(DynamicsError::TooShort {
            len: pos.len(),
            needed: MIN_SAMPLES,
        });
    }
    let max_lag = ((pos.len() as f64 * MAX_LAG_FRACTION) as usize).max(100);
    let lags = log_lags(max_lag);
    let [lo, hi] = central_range(max_lag);
    let alpha = slope(&pos, &lags, lo, hi).ok_or(DynamicsError::TooShort {
        len: pos.len(),
        needed: MIN_SAMPLES,
    })?;

    let half = pos.len() / 2;
    let halves: Vec<f64> = [&pos[..half], &pos[half..]]
        .iter()
        .map(|part| {
            let ml = ((part.len() as f64 * MAX_LAG_FRACTION) as usize).max(10);
            let [lo, hi] = central_range(ml);
            slope(part, &log_lags(ml), lo, hi).unwrap_or(f64::NAN)
        })
        .collect();
    if !((halves[0] - halves[1]).abs() <= 0.3) {
        return Err(DynamicsError::FitUnstable {
            first: halves[0],
            second: halves[1],
        });
    }

    let dir = match reference {
        Some(d) => {
            let n = d[0].hypot(d[1]);
            [d[0] / n, d[1] / n]
        }
        None => [1.0, 0.0],
    };
    let tau = traj.sample_dt();
    let curve: Vec<(f64, f64, f64)> = lags
        .iter()
        .map(|&l| {
            let (a, b) = msd_at(&pos, l, dir);
            (l as f64 * tau, a, b)
        })
        .collect();
    let top = lags
        .iter()
        .copied()
        .filter(|&l| (l as f64) <= hi)
        .max()
        .unwrap_or(1);
    let (a, b) = msd_at(&pos, top, dir);
    let t = top as f64 * tau;
    let (d_parallel, d_perp) = if reference.is_some() {
        (a / (2.0 * t), b / (2.0 * t))
    } else {
        ((a + b) / (4.0 * t), (a + b) / (4.0 * t))
    };
    Ok(MsdFit {
        alpha,
        d_parallel,
        d_perp,
        alpha_halves: [halves[0], halves[1]],
        curve,
        fit_range: [lo * tau, hi * tau],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::PhaseState;

    fn traj_of(pos: Vec<[f64; 2]>) -> Trajectory<f64> {
        Trajectory {
            states: pos
                .into_iter()
                .map(|r| PhaseState::new(r, [0.0, 0.0]))
                .collect(),
            drift: Vec::new(),
            relative: true,
            energy0: 0.0,
            dt: 0.1,
            mass: 1.0,
            sample_stride: 1,
        }
    }

    #[test]
    fn ballistic_exponent() {
        let tr = traj_of(
            (0..20_000)
                .map(|i| [0.3 * i as f64, 0.1 * i as f64])
                .collect(),
        );
        let fit = msd_analysis(&tr, None).unwrap();
        assert!((fit.alpha - 2.0).abs() < 1e-9);
    }

    #[test]
    fn too_short() {
        let tr = traj_of(vec![[0.0, 0.0]; 100]);
        assert!(matches!(
            msd_analysis(&tr, None),
            Err(DynamicsError::TooShort { .. })
        ));
    }

    #[test]
    fn lags_are_log_spaced() {
        let l = log_lags(1000);
        assert_eq!(l[0], 1);
        assert_eq!(*l.last().unwrap(), 1000);
        assert!(l.windows(2).all(|w| w[1] > w[0]));
    }
}
