//! Regular / chaotic / periodic verdicts for a single potential.

use serde::{Deserialize, Serialize};

use super::fit::{fit_integer_direction, IntegerDirectionFit};
use super::monodromy::{measure_direction, monodromy_record, MonodromyOptions, MonodromyRecord};
use super::TopologyError;
use crate::levelset::geometry::{growth_ratio, strip_deviation_growth_with};
use crate::levelset::{
    open_line_interval_with, DeviationSample, GridSpec, IntervalOptions, LevelSetError,
    OpenIntervalEstimate, Window,
};
use crate::rationality::{classify_rationality, PotentialType, RationalityVerdict};
use crate::Potential;

/// Max-deviation ratio over an 8x window increase above which deviation counts as
/// unbounded.
pub const GROWTH_THRESHOLD: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassifyBudget {
    /// Grid samples allowed in any single grid.
    pub max_grid_samples: usize,
    /// Grid samples allowed over the whole pipeline.
    pub max_total_samples: usize,
    pub cells_per_period: usize,
    /// Interval windows double from `min_periods` up to `max_periods` longest periods.
    pub min_periods: f64,
    pub max_periods: f64,
    /// Window for the direction measurement and the largest deviation window.
    pub direction_periods: f64,
    pub tol: f64,
    pub max_coeff: i64,
    /// Residual tolerance of the integer direction fit (sine of the angular error).
    pub fit_tol: f64,
    pub monodromy: bool,
    pub monodromy_steps: usize,
}

impl Default for ClassifyBudget {
    fn default() -> Self {
        Self {
            max_grid_samples: 40_000_000,
            max_total_samples: 400_000_000,
            cells_per_period: 16,
            min_periods: 15.0,
            max_periods: 60.0,
            direction_periods: 40.0,
            tol: 1e-3,
            max_coeff: 12,
            fit_tol: 0.035,
            monodromy: true,
            monodromy_steps: 64,
        }
    }
}

impl ClassifyBudget {
    /// Smaller windows and no monodromy, for sphere scans.
    pub fn scan() -> Self {
        Self {
            max_grid_samples: 6_000_000,
            max_total_samples: 30_000_000,
            cells_per_period: 12,
            min_periods: 15.0,
            max_periods: 30.0,
            direction_periods: 24.0,
            tol: 2e-3,
            monodromy: false,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Verdict {
    Regular {
        m: Vec<i64>,
        big_m: Option<i64>,
        interval: [f64; 2],
    },
    /// `directed` marks chaotic lines of singly periodic potentials, which keep an
    /// asymptotic direction.
    Chaotic {
        v0: f64,
        growth: Vec<DeviationSample>,
        directed: bool,
    },
    /// `pair` is the direction of open lines in the basis of `periods`.
    Periodic {
        periods: Vec<[f64; 2]>,
        pair: Option<[i64; 2]>,
        interval: Option<[f64; 2]>,
    },
    Undetermined {
        reason: String,
    },
}

impl Verdict {
    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Regular { .. } => "regular",
            Verdict::Chaotic { .. } => "chaotic",
            Verdict::Periodic { .. } => "periodic",
            Verdict::Undetermined { .. } => "undetermined",
        }
    }

    pub fn m(&self) -> Option<&[i64]> {
        match self {
            Verdict::Regular { m, .. } => Some(m),
            _ => None,
        }
    }
}

/// Everything measured on the way to a verdict.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Evidence {
    pub rationality: Option<RationalityVerdict>,
    pub interval: Option<OpenIntervalEstimate>,
    /// Level at which directions and deviations were measured.
    pub level: Option<f64>,
    pub direction: Option<[f64; 2]>,
    pub fit: Option<IntegerDirectionFit>,
    pub deviation: Vec<DeviationSample>,
    pub growth_ratio: Option<f64>,
    pub monodromy: Option<MonodromyRecord>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub verdict: Verdict,
    pub evidence: Evidence,
    pub samples_spent: usize,
    pub growth_threshold: f64,
}

struct Meter<'a> {
    budget: &'a ClassifyBudget,
    spent: usize,
}

impl Meter<'_> {
    /// Charges square grids of the given widths in longest periods; false when any
    /// grid or the total is over budget.
    fn charge(&mut self, p: &Potential, widths: &[f64]) -> Result<bool, TopologyError> {
        let mut total = 0;
        for &periods in widths {
            let spec = GridSpec::for_potential(
                p,
                Window::in_periods(p, periods),
                self.budget.cells_per_period,
            )?;
            if spec.samples() > self.budget.max_grid_samples {
                return Ok(false);
            }
            total += spec.samples();
        }
        if self.spent + total > self.budget.max_total_samples {
            return Ok(false);
        }
        self.spent += total;
        Ok(true)
    }

    fn exhausted(&self, evidence: Evidence, stage: &str) -> TopologyError {
        TopologyError::BudgetExhausted {
            stage: stage.to_string(),
            samples_spent: self.spent,
            evidence: Box::new(evidence),
        }
    }
}

fn interval_schedule(b: &ClassifyBudget) -> Vec<f64> {
    let mut out = Vec::new();
    let mut w = b.min_periods.min(b.max_periods);
    while w < b.max_periods {
        out.push(w);
        w *= 2.0;
    }
    out.push(b.max_periods);
    out
}

fn deviation_widths(periods: f64) -> [f64; 4] {
    [0.125, 0.25, 0.5, 1.0].map(|f| periods * f)
}

fn deviation_windows(p: &Potential, periods: f64) -> Vec<Window> {
    deviation_widths(periods)
        .iter()
        .map(|&w| Window::in_periods(p, w))
        .collect()
}

/// Rationality, open-line interval, then either direction fit with a deviation
/// plateau (regular) or a deviation growth test at the single open level (chaotic).
/// Degenerate intervals without growth stay undetermined.
pub fn classify_potential(
    p: &Potential,
    budget: &ClassifyBudget,
) -> Result<ClassificationReport, TopologyError> {
    let mut ev = Evidence::default();
    let mut meter = Meter { budget, spent: 0 };
    let rat = classify_rationality(p, budget.max_coeff, 1e-9)?;
    ev.rationality = Some(rat.clone());

    let opts = IntervalOptions {
        cells_per_period: budget.cells_per_period,
        max_samples: budget.max_grid_samples,
        ..IntervalOptions::default()
    };
    let mut interval: Option<OpenIntervalEstimate> = None;
    for periods in interval_schedule(budget) {
        if !meter.charge(p, &[periods])? {
            break;
        }
        match open_line_interval_with(p, Window::in_periods(p, periods), budget.tol, &opts) {
            Ok(est) => {
                let converged = interval.as_ref().is_some_and(|prev| {
                    (prev.v1 - est.v1).abs() <= 2.0 * budget.tol
                        && (prev.v2 - est.v2).abs() <= 2.0 * budget.tol
                });
                interval = Some(est);
                if converged {
                    break;
                }
            }
            Err(LevelSetError::WindowTooSmall {
                disagreeing,
                probes,
            }) => {
                ev.notes.push(format!("{periods} periods: window and half window disagree on {disagreeing}/{probes} levels"));
            }
            Err(e) => return Err(e.into()),
        }
    }
    let Some(interval) = interval else {
        return Err(meter.exhausted(ev, "interval"));
    };
    ev.interval = Some(interval);
    let level = interval.center();
    ev.level = Some(level);

    let dev_periods = budget.direction_periods;
    if !meter.charge(p, &deviation_widths(dev_periods))? {
        return Err(meter.exhausted(ev, "deviation"));
    }
    let growth = match strip_deviation_growth_with(
        p,
        level,
        &deviation_windows(p, dev_periods),
        budget.cells_per_period,
    ) {
        Ok(g) => g,
        Err(LevelSetError::NoOpenLines) => {
            ev.notes.push(format!("no spanning line at level {level}"));
            Vec::new()
        }
        Err(e) => return Err(e.into()),
    };
    let ratio = growth_ratio(&growth);
    ev.deviation = growth.clone();
    ev.growth_ratio = ratio;
    let grows = ratio.is_some_and(|r| r > GROWTH_THRESHOLD);

    let done = |verdict, ev, meter: &Meter| {
        Ok(ClassificationReport {
            verdict,
            evidence: ev,
            samples_spent: meter.spent,
            growth_threshold: GROWTH_THRESHOLD,
        })
    };

    if interval.degenerate {
        let verdict = if rat.kind == PotentialType::TypeI {
            // A doubly periodic potential has open lines at one level at most, or a
            // singular net there.
            Verdict::Periodic {
                periods: rat.periods.clone(),
                pair: None,
                interval: None,
            }
        } else if grows {
            Verdict::Chaotic {
                v0: level,
                growth,
                directed: rat.kind == PotentialType::TypeII,
            }
        } else {
            Verdict::Undetermined {
                reason: match ratio {
                    Some(r) => format!(
                        "degenerate interval at {level:.4} with bounded deviation (ratio {r:.2})"
                    ),
                    None => format!("degenerate interval at {level:.4} without spanning lines"),
                },
            }
        };
        return done(verdict, ev, &meter);
    }

    if !meter.charge(p, &[dev_periods])? {
        return Err(meter.exhausted(ev, "direction"));
    }
    let l = match measure_direction(p, level, dev_periods, budget.cells_per_period) {
        Ok(l) => l,
        Err(TopologyError::NotRegular) => {
            let reason = format!("no spanning line at the interval center {level:.4}");
            return done(Verdict::Undetermined { reason }, ev, &meter);
        }
        Err(e) => return Err(e),
    };
    ev.direction = Some(l);
    let interval_pair = [interval.v1, interval.v2];

    if rat.kind == PotentialType::TypeI {
        // Open lines of a doubly periodic potential run along a lattice vector.
        let lperp = [-l[1], l[0]];
        let pair =
            match fit_integer_direction(lperp, &rat.periods, budget.max_coeff, budget.fit_tol) {
                Ok(f) => Some([f.m[0], f.m[1]]),
                Err(e) => {
                    ev.notes.push(format!("period pair: {e}"));
                    None
                }
            };
        let verdict = Verdict::Periodic {
            periods: rat.periods.clone(),
            pair,
            interval: Some(interval_pair),
        };
        return done(verdict, ev, &meter);
    }

    let fit = fit_integer_direction(l, &p.wavevectors(), budget.max_coeff, budget.fit_tol);
    match &fit {
        Ok(f) => ev.fit = Some(f.clone()),
        Err(e) => ev.notes.push(format!("direction fit: {e}")),
    }

    if budget.monodromy {
        let mopts = MonodromyOptions {
            cells_per_period: budget.cells_per_period,
            steps: budget.monodromy_steps,
            ..MonodromyOptions::default()
        };
        match monodromy_record(p, level, Some(l), &mopts) {
            Ok(rec) => ev.monodromy = Some(rec),
            Err(e) => ev.notes.push(format!("monodromy: {e}")),
        }
    }

    if grows {
        let reason = format!(
            "non-degenerate interval but deviation ratio {:.2} at {level:.4}",
            ratio.unwrap_or(f64::NAN)
        );
        return done(Verdict::Undetermined { reason }, ev, &meter);
    }
    if ratio.is_none() {
        let reason = format!("no deviation samples at {level:.4}");
        return done(Verdict::Undetermined { reason }, ev, &meter);
    }
    let from_monodromy = ev.monodromy.as_ref().map(|r| r.m.clone());
    let m = match (ev.fit.as_ref().map(|f| f.m.clone()), from_monodromy) {
        (Some(a), Some(b)) if a != b => {
            let reason = format!("direction fit {a:?} and monodromy {b:?} disagree");
            return done(Verdict::Undetermined { reason }, ev, &meter);
        }
        (Some(a), _) => a,
        (None, Some(b)) => b,
        (None, None) => {
            let reason = "no integer vector fits the measured direction".to_string();
            return done(Verdict::Undetermined { reason }, ev, &meter);
        }
    };
    let big_m = ev.monodromy.as_ref().map(|r| r.big_m);
    done(
        Verdict::Regular {
            m,
            big_m,
            interval: interval_pair,
        },
        ev,
        &meter,
    )
}
