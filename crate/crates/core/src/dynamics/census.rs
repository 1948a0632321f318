//! Histogram of asymptotic directions of unbounded trajectories.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use super::integrate::{integrate, scaled_dt};
use super::regime::{regime_classify, RegimeContext, RegimeVerdict};
use super::sample::sample_microcanonical;
use super::{DynamicsConfig, DynamicsError};
use crate::levelset::Window;
use crate::Potential;

pub const BINS: usize = 180;
/// Half width of the circular boxcar used for peak finding, in bins.
const SMOOTH: isize = 1;
/// Half width of the running-median background window, in bins.
const BACKGROUND: isize = 10;
pub const PEAK_SIGMA: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CensusOptions {
    pub mass: f64,
    pub n_steps: usize,
    pub sample_stride: usize,
    /// Initial positions are drawn from a square of this many longest periods.
    pub window_periods: f64,
    /// Step coefficient passed to [`scaled_dt`]; coarser than the default because only
    /// asymptotic directions are recorded.
    pub dt_coefficient: f64,
    pub seed: u64,
}

impl Default for CensusOptions {
    fn default() -> Self {
        Self {
            mass: 1.0,
            n_steps: 200_000,
            sample_stride: 20,
            window_periods: 10.0,
            dt_coefficient: 0.005,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Peak {
    /// Count-weighted center, degrees in `[0, 180)`.
    pub angle_deg: f64,
    /// Counts in the three bins around the peak.
    pub count: f64,
    /// Counts above the local background.
    pub excess: f64,
    /// Excess in units of the background shot noise.
    pub sigma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CensusReport {
    /// One-degree bins over undirected angles `[0°, 180°)`.
    pub histogram: Vec<u32>,
    pub peaks: Vec<Peak>,
    pub selected: usize,
    pub total: usize,
    /// Chi-square p-value of the histogram against uniform.
    pub uniformity_p: f64,
    pub failures: usize,
}

/// Undirected angle of `v` in degrees, `[0, 180)`.
pub fn axis_angle_deg(v: [f64; 2]) -> f64 {
    v[1].atan2(v[0]).to_degrees().rem_euclid(180.0)
}

/// Circular distance between undirected angles in degrees.
pub fn axis_distance_deg(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(180.0);
    d.min(180.0 - d)
}

pub fn uniformity_p(hist: &[u32]) -> f64 {
    let n: u32 = hist.iter().sum();
    if n == 0 {
        return 1.0;
    }
    let e = n as f64 / hist.len() as f64;
    let chi2: f64 = hist.iter().map(|&c| (c as f64 - e).powi(2) / e).sum();
    let dist = ChiSquared::new((hist.len() - 1) as f64).expect("positive dof");
    1.0 - dist.cdf(chi2)
}

/// Local maxima of the three-bin smoothed histogram that stand more than
/// [`PEAK_SIGMA`] shot-noise deviations above a running-median background, strongest
/// first. The local background keeps narrow spikes on a broad hump detectable.
pub fn find_peaks(hist: &[u32]) -> Vec<Peak> {
    let n = hist.len() as isize;
    if hist.iter().all(|&c| c == 0) {
        return Vec::new();
    }
    let at = |k: isize| hist[k.rem_euclid(n) as usize] as f64;
    let median = |r: std::ops::RangeInclusive<isize>| {
        let mut w: Vec<f64> = r.map(at).collect();
        w.sort_by(f64::total_cmp);
        w[w.len() / 2]
    };
    // Lower of the two one-sided medians, so a spike at the foot of a broad hump is
    // measured against the flat side.
    let background: Vec<f64> = (0..n)
        .map(|i| {
            median(i - BACKGROUND..=i - SMOOTH - 1).min(median(i + SMOOTH + 1..=i + BACKGROUND))
        })
        .collect();
    let width = (2 * SMOOTH + 1) as f64;
    let smooth: Vec<f64> = (0..n)
        .map(|i| (i - SMOOTH..=i + SMOOTH).map(at).sum::<f64>())
        .collect();
    let sm = |k: isize| smooth[k.rem_euclid(n) as usize];
    let mut peaks = Vec::new();
    for i in 0..n {
        let s = smooth[i as usize];
        if !(s > sm(i - 1) && s >= sm(i + 1)) {
            continue;
        }
        // At least one count per bin keeps empty regions from producing infinite sigma.
        let bg = background[i as usize].max(1.0) * width;
        let sigma = (s - bg) / bg.sqrt();
        if sigma <= PEAK_SIGMA {
            continue;
        }
        // Center from the raw maximum and its two neighbours above background.
        let top = (i - SMOOTH..=i + SMOOTH)
            .max_by(|&a, &b| at(a).total_cmp(&at(b)).then(b.cmp(&a)))
            .expect("nonempty window");
        let (mut wsum, mut asum) = (0.0, 0.0);
        for k in top - 1..=top + 1 {
            let c = (at(k) - background[k.rem_euclid(n) as usize]).max(0.0);
            wsum += c;
            asum += c * (k as f64 + 0.5);
        }
        let angle = if wsum > 0.0 {
            asum / wsum
        } else {
            top as f64 + 0.5
        };
        peaks.push(Peak {
            angle_deg: (angle * 180.0 / n as f64).rem_euclid(180.0),
            count: s,
            excess: s - bg,
            sigma,
        });
    }
    peaks.sort_by(|a, b| b.sigma.total_cmp(&a.sigma));
    peaks
}

/// Integrates a microcanonical ensemble at `eps`, keeps ballistic and quasi-ballistic
/// members and histograms the direction of their displacement over the last half of
/// the run.
pub fn ballistic_census(
    p: &Potential,
    eps: f64,
    n_particles: usize,
    opts: &CensusOptions,
) -> Result<CensusReport, DynamicsError> {
    let w = Window::in_periods(p, opts.window_periods);
    let starts = sample_microcanonical(p, eps, &w, n_particles, opts.mass, opts.seed)?;
    let cfg = DynamicsConfig {
        mass: opts.mass,
        dt: scaled_dt(p, eps, opts.mass, opts.dt_coefficient),
        n_steps: opts.n_steps,
        sample_stride: opts.sample_stride,
        seed: opts.seed,
    };
    let ctx = RegimeContext::new(p);
    let outcomes: Vec<Option<Option<f64>>> = starts
        .par_iter()
        .map(|s0| {
            let traj = integrate(p, *s0, &cfg).ok()?;
            let report = regime_classify(&traj, &ctx).ok()?;
            if !matches!(
                report.verdict,
                RegimeVerdict::Ballistic { .. } | RegimeVerdict::QuasiBallistic { .. }
            ) {
                return Some(None);
            }
            let pos = traj.positions();
            let (a, b) = (pos[pos.len() / 2], pos[pos.len() - 1]);
            Some(Some(axis_angle_deg([b[0] - a[0], b[1] - a[1]])))
        })
        .collect();
    let mut histogram = vec![0u32; BINS];
    let mut selected = 0;
    let mut failures = 0;
    for o in &outcomes {
        match o {
            Some(Some(angle)) => {
                histogram[((angle / 180.0 * BINS as f64) as usize).min(BINS - 1)] += 1;
                selected += 1;
            }
            Some(None) => {}
            None => failures += 1,
        }
    }
    Ok(CensusReport {
        peaks: find_peaks(&histogram),
        uniformity_p: uniformity_p(&histogram),
        histogram,
        selected,
        total: n_particles,
        failures,
    })
}
