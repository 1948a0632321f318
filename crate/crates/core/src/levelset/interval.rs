//! Energy interval `[V₁, V₂]` carrying open level lines.
//!
//! A level line crosses the window iff both `{V ≤ ε}` and `{V > ε}` cross it (see
//! [`Percolator`]). The first predicate is monotone increasing in `ε`, the second
//! decreasing, so the two interval edges are bisected independently. An edge counts
//! only when reproduced in the central half window.

use serde::{Deserialize, Serialize};

use super::grid::{GridSpec, ValueGrid};
use super::sublevel::{Percolator, Side};
use super::{LevelSetError, Window, DEFAULT_CELLS_PER_PERIOD};
use crate::Potential;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntervalOptions {
    pub cells_per_period: usize,
    /// Levels at which the verdicts of the two window scales are compared.
    pub probe_levels: usize,
    /// Memory budget: maximum number of grid samples.
    pub max_samples: usize,
}

impl Default for IntervalOptions {
    fn default() -> Self {
        Self {
            cells_per_period: DEFAULT_CELLS_PER_PERIOD,
            probe_levels: 64,
            max_samples: 40_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OpenIntervalEstimate {
    pub v1: f64,
    pub v2: f64,
    pub degenerate: bool,
    /// Largest window used.
    pub confidence_window: Window,
    pub tol: f64,
    /// Edges measured in the full window and in its central half.
    pub edges_full: [f64; 2],
    pub edges_half: [f64; 2],
    /// `v1 + v2`, reported for the equal-amplitude three-cosine family whose interval is
    /// symmetric about zero.
    pub symmetry_defect: Option<f64>,
}

impl OpenIntervalEstimate {
    /// Midpoint, the single open level when degenerate.
    pub fn center(&self) -> f64 {
        0.5 * (self.v1 + self.v2)
    }

    pub fn width(&self) -> f64 {
        self.v2 - self.v1
    }
}

/// Unit-amplitude three-wave potential without constant term.
pub fn is_symmetric_family(p: &Potential) -> bool {
    p.dim() == 3
        && p.constant() == 0.0
        && p.waves()
            .iter()
            .all(|w| (w.amplitude - p.waves()[0].amplitude).abs() < 1e-15)
}

fn bisect(lo: f64, hi: f64, tol: f64, mut pred: impl FnMut(f64) -> bool) -> f64 {
    // pred(lo) false, pred(hi) true; returns the threshold within tol.
    let (mut lo, mut hi) = (lo, hi);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if pred(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

fn edges(
    p: &Potential,
    grid: &ValueGrid,
    sub: (&GridSpec, usize, usize),
    tol: f64,
    perc: &mut Percolator,
) -> [f64; 2] {
    let [vmin, vmax] = p.value_bounds();
    let (lo, hi) = (vmin - tol, vmax + tol);
    let v1 = bisect(lo, hi, tol, |e| perc.spans(p, grid, sub, e, Side::Below));
    let v2 = bisect(lo, hi, tol, |e| !perc.spans(p, grid, sub, e, Side::Above));
    [v1, v2]
}

pub fn open_line_interval(
    p: &Potential,
    w_max: Window,
    tol: f64,
) -> Result<OpenIntervalEstimate, LevelSetError> {
    open_line_interval_with(p, w_max, tol, &IntervalOptions::default())
}

pub fn open_line_interval_with(
    p: &Potential,
    w_max: Window,
    tol: f64,
    opts: &IntervalOptions,
) -> Result<OpenIntervalEstimate, LevelSetError> {
    if !(tol > 0.0) {
        return Err(LevelSetError::BadTolerance(tol));
    }
    let spec = GridSpec::for_potential(p, w_max, opts.cells_per_period)?;
    if spec.samples() > opts.max_samples {
        return Err(LevelSetError::OverBudget {
            samples: spec.samples(),
            budget: opts.max_samples,
        });
    }
    let grid = ValueGrid::sample(p, spec);
    let mut perc = Percolator::new();
    let full = edges(p, &grid, (&spec, 0, 0), tol, &mut perc);
    let (half_spec, i0, j0) = spec.central_half();
    let half = edges(p, &grid, (&half_spec, i0, j0), tol, &mut perc);

    let [vmin, vmax] = p.value_bounds();
    let n = opts.probe_levels.max(1);
    let disagree = (0..n)
        .map(|k| vmin + (vmax - vmin) * (k as f64 + 0.5) / n as f64)
        .filter(|&e| (full[0] <= e && e <= full[1]) != (half[0] <= e && e <= half[1]))
        .count();
    if disagree * 10 > n {
        return Err(LevelSetError::WindowTooSmall {
            disagreeing: disagree,
            probes: n,
        });
    }

    let mut v1 = full[0].max(half[0]);
    let mut v2 = full[1].min(half[1]);
    let degenerate = v2 - v1 <= 2.0 * tol;
    if v2 < v1 {
        let c = 0.5 * (v1 + v2);
        v1 = c;
        v2 = c;
    }
    let symmetry_defect = is_symmetric_family(p).then_some(v1 + v2);
    Ok(OpenIntervalEstimate {
        v1,
        v2,
        degenerate,
        confidence_window: w_max,
        tol,
        edges_full: full,
        edges_half: half,
        symmetry_defect,
    })
}
