//! Decision tree over bounded, ballistic, Lévy-like and diffusive motion.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use super::msd::{msd_analysis, MsdFit};
use super::section::{poincare_section, Section};
use super::{DynamicsError, Trajectory};
use crate::Potential;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeThresholds {
    pub ballistic_alpha: f64,
    pub levy_alpha: f64,
    pub diffusive_alpha: f64,
    pub thinness: f64,
    /// Flight lengths beyond this multiple of the median count as exceedances.
    pub jump_exceedance: f64,
    /// Significance of the power-law versus exponential likelihood-ratio test.
    pub tail_p: f64,
    /// Bounded and sojourn radius, in longest periods.
    pub radius_periods: f64,
    /// Largest angle between segment and overall displacement for ballistic motion.
    pub direction_tolerance_deg: f64,
}

impl Default for RegimeThresholds {
    fn default() -> Self {
        Self {
            ballistic_alpha: 1.7,
            levy_alpha: 1.3,
            diffusive_alpha: 0.7,
            thinness: 0.05,
            jump_exceedance: 5.0,
            tail_p: 0.01,
            radius_periods: 2.0,
            direction_tolerance_deg: 10.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegimeContext<'a> {
    pub potential: &'a Potential,
    /// Zone direction `l` for parallel / perpendicular diffusion.
    pub reference_direction: Option<[f64; 2]>,
    pub thresholds: RegimeThresholds,
}

impl<'a> RegimeContext<'a> {
    pub fn new(potential: &'a Potential) -> Self {
        Self {
            potential,
            reference_direction: None,
            thresholds: RegimeThresholds::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JumpStats {
    pub sojourns: usize,
    pub flights: usize,
    pub median_flight: f64,
    pub max_flight: f64,
    pub exceedances: usize,
    /// Vuong statistic, positive when the power law fits better.
    pub lr_z: f64,
    pub lr_p: f64,
    pub heavy_tailed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum RegimeVerdict {
    Trapped,
    TorusLike {
        thinness: f64,
    },
    LevyLike {
        jumps: JumpStats,
    },
    Diffusive {
        d_parallel: f64,
        d_perp: f64,
        alpha: f64,
    },
    Ballistic {
        direction: [f64; 2],
        speed: f64,
    },
    QuasiBallistic {
        segment_directions: Vec<[f64; 2]>,
    },
}

impl RegimeVerdict {
    pub fn label(&self) -> &'static str {
        match self {
            RegimeVerdict::Trapped => "trapped",
            RegimeVerdict::TorusLike { .. } => "torus-like",
            RegimeVerdict::LevyLike { .. } => "levy-like",
            RegimeVerdict::Diffusive { .. } => "diffusive",
            RegimeVerdict::Ballistic { .. } => "ballistic",
            RegimeVerdict::QuasiBallistic { .. } => "quasi-ballistic",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeReport {
    pub verdict: RegimeVerdict,
    pub thresholds: RegimeThresholds,
    pub max_excursion: f64,
    pub thinness: Option<f64>,
    pub msd: Option<MsdFit>,
    pub jumps: Option<JumpStats>,
}

const SEGMENTS: usize = 8;

/// Sojourns are runs of at least `min_len` samples within `radius` of their first
/// point; flights are the distances between consecutive sojourns.
fn jump_stats(pos: &[[f64; 2]], radius: f64, min_len: usize, th: &RegimeThresholds) -> JumpStats {
    let dist = |a: [f64; 2], b: [f64; 2]| (a[0] - b[0]).hypot(a[1] - b[1]);
    let mut sojourns: Vec<(usize, usize)> = Vec::new();
    let mut i = 0;
    while i < pos.len() {
        let mut j = i + 1;
        while j < pos.len() && dist(pos[j], pos[i]) <= radius {
            j += 1;
        }
        if j - i >= min_len {
            sojourns.push((i, j - 1));
            i = j;
        } else {
            i += 1;
        }
    }
    let mut flights: Vec<f64> = sojourns
        .windows(2)
        .map(|w| dist(pos[w[0].1], pos[w[1].0]))
        .filter(|&d| d > 0.0)
        .collect();
    flights.sort_by(f64::total_cmp);
    let n = flights.len();
    let median = if n > 0 { flights[n / 2] } else { 0.0 };
    let max = flights.last().copied().unwrap_or(0.0);
    let exceedances = flights
        .iter()
        .filter(|&&f| f > th.jump_exceedance * median)
        .count();
    let tail: Vec<f64> = flights
        .iter()
        .copied()
        .filter(|&f| f >= median && median > 0.0)
        .collect();
    let (lr_z, lr_p) = vuong_pareto_vs_exponential(&tail, median);
    let heavy_tailed = tail.len() >= 20 && lr_z > 0.0 && lr_p < th.tail_p && exceedances > 0;
    JumpStats {
        sojourns: sojourns.len(),
        flights: n,
        median_flight: median,
        max_flight: max,
        exceedances,
        lr_z,
        lr_p,
        heavy_tailed,
    }
}

/// Normalized log-likelihood ratio of a Pareto against a shifted exponential fit
/// above `xmin`, with its two-sided p-value.
pub fn vuong_pareto_vs_exponential(x: &[f64], xmin: f64) -> (f64, f64) {
    let n = x.len();
    if n < 3 || xmin <= 0.0 {
        return (0.0, 1.0);
    }
    let nf = n as f64;
    let sum_log: f64 = x.iter().map(|v| (v / xmin).ln()).sum();
    let excess: f64 = x.iter().map(|v| v - xmin).sum();
    if sum_log <= 0.0 || excess <= 0.0 {
        return (0.0, 1.0);
    }
    let alpha = nf / sum_log;
    let lambda = nf / excess;
    let d: Vec<f64> = x
        .iter()
        .map(|v| {
            let lp = (alpha / xmin).ln() - (alpha + 1.0) * (v / xmin).ln();
            let le = lambda.ln() - lambda * (v - xmin);
            lp - le
        })
        .collect();
    let mean = d.iter().sum::<f64>() / nf;
    let var = d.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / nf;
    if var <= 0.0 {
        return (0.0, 1.0);
    }
    let z = mean * nf.sqrt() / var.sqrt();
    let normal = Normal::new(0.0, 1.0).expect("standard normal");
    (z, 2.0 * (1.0 - normal.cdf(z.abs())))
}

fn unit(v: [f64; 2]) -> Option<[f64; 2]> {
    let n = v[0].hypot(v[1]);
    (n > 0.0).then(|| [v[0] / n, v[1] / n])
}

/// Classifies one trajectory.
pub fn regime_classify(
    traj: &Trajectory<f64>,
    ctx: &RegimeContext,
) -> Result<RegimeReport, DynamicsError> {
    let th = ctx.thresholds;
    let pos = traj.positions();
    let Some(&start) = pos.first() else {
        return Err(DynamicsError::TooShort { len: 0, needed: 2 });
    };
    let radius = th.radius_periods * ctx.potential.longest_period();
    let max_excursion = pos
        .iter()
        .map(|p| (p[0] - start[0]).hypot(p[1] - start[1]))
        .fold(0.0, f64::max);
    let mut report = RegimeReport {
        verdict: RegimeVerdict::Trapped,
        thresholds: th,
        max_excursion,
        thinness: None,
        msd: None,
        jumps: None,
    };

    if max_excursion <= radius {
        let y0 = pos.iter().map(|p| p[1]).sum::<f64>() / pos.len() as f64;
        if let Ok(sec) = poincare_section(ctx.potential, traj, &Section { y0, period: None }) {
            report.thinness = Some(sec.thinness);
            if sec.thinness < th.thinness {
                report.verdict = RegimeVerdict::TorusLike {
                    thinness: sec.thinness,
                };
            }
        }
        return Ok(report);
    }

    let fit = msd_analysis(traj, ctx.reference_direction)?;
    let alpha = fit.alpha;
    report.msd = Some(fit.clone());
    let min_len = (pos.len() / 1000).max(10);
    let jumps = jump_stats(&pos, radius, min_len, &th);
    report.jumps = Some(jumps.clone());

    if alpha > th.ballistic_alpha {
        let end = *pos.last().unwrap();
        let total = [end[0] - start[0], end[1] - start[1]];
        let dir = unit(total).unwrap_or([1.0, 0.0]);
        let seg = pos.len() / SEGMENTS;
        let segs: Vec<[f64; 2]> = (0..SEGMENTS)
            .filter_map(|k| {
                let (a, b) = (pos[k * seg], pos[((k + 1) * seg).min(pos.len() - 1)]);
                unit([b[0] - a[0], b[1] - a[1]])
            })
            .collect();
        let cos_tol = th.direction_tolerance_deg.to_radians().cos();
        let stable = segs
            .iter()
            .all(|s| s[0] * dir[0] + s[1] * dir[1] >= cos_tol);
        let t = traj.sample_dt() * (pos.len() - 1) as f64;
        report.verdict = if stable {
            RegimeVerdict::Ballistic {
                direction: dir,
                speed: total[0].hypot(total[1]) / t,
            }
        } else {
            RegimeVerdict::QuasiBallistic {
                segment_directions: segs,
            }
        };
        return Ok(report);
    }
    if alpha > th.levy_alpha || jumps.heavy_tailed {
        report.verdict = RegimeVerdict::LevyLike { jumps };
        return Ok(report);
    }
    if alpha >= th.diffusive_alpha {
        report.verdict = RegimeVerdict::Diffusive {
            d_parallel: fit.d_parallel,
            d_perp: fit.d_perp,
            alpha,
        };
        return Ok(report);
    }
    Err(DynamicsError::Unclassified(format!(
        "unbounded motion with exponent {alpha:.3}"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vuong_prefers_true_model() {
        // Deterministic quantiles of each law.
        let n = 400;
        let pareto: Vec<f64> = (0..n)
            .map(|i| (1.0 - (i as f64 + 0.5) / n as f64).powf(-1.0 / 1.5))
            .collect();
        let expo: Vec<f64> = (0..n)
            .map(|i| 1.0 - (1.0 - (i as f64 + 0.5) / n as f64).ln())
            .collect();
        let (zp, pp) = vuong_pareto_vs_exponential(&pareto, 1.0);
        let (ze, pe) = vuong_pareto_vs_exponential(&expo, 1.0);
        assert!(zp > 0.0 && pp < 0.01, "{zp} {pp}");
        assert!(ze < 0.0 && pe < 0.01, "{ze} {pe}");
    }
}
