//! Level lines `{V = ε}` and sublevel regions `{V ≤ ε}` in finite windows.

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub mod contour;
pub mod geometry;
pub mod grid;
pub mod interval;
pub mod sublevel;

pub use contour::{
    classify_component, extract_level_set, extract_on_grid, ComponentClass, LevelComponent,
};
pub use geometry::{mean_direction, strip_deviation_growth, DeviationSample};
pub use grid::{GridSpec, ValueGrid};
pub use interval::{
    open_line_interval, open_line_interval_with, IntervalOptions, OpenIntervalEstimate,
};
pub use sublevel::{sublevel_region, SublevelLabeling};

use crate::Potential;

/// Cells per shortest wave period.
pub const DEFAULT_CELLS_PER_PERIOD: usize = 16;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LevelSetError {
    #[error("need at least 8 cells per shortest period, got {0}")]
    ResolutionTooLow(usize),
    #[error("principal variances within 5%: direction undefined")]
    IsotropicComponent,
    #[error("windows must be strictly increasing")]
    WindowsNotIncreasing,
    #[error("no window contains a spanning level line")]
    NoOpenLines,
    #[error("window and half window disagree on {disagreeing} of {probes} probe levels")]
    WindowTooSmall { disagreeing: usize, probes: usize },
    #[error("tolerance must be positive, got {0}")]
    BadTolerance(f64),
    #[error("grid of {samples} samples exceeds the budget of {budget}")]
    OverBudget { samples: usize, budget: usize },
}

/// Axis-aligned rectangle `center ± half_extent`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub center: [f64; 2],
    pub half_extent: [f64; 2],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Side {
    Left,
    Right,
    Bottom,
    Top,
}

impl Side {
    pub fn opposite(self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
            Side::Bottom => Side::Top,
            Side::Top => Side::Bottom,
        }
    }
}

impl Window {
    pub fn new(center: [f64; 2], half_extent: [f64; 2]) -> Self {
        assert!(
            half_extent[0] > 0.0 && half_extent[1] > 0.0,
            "window half extent must be positive"
        );
        Self {
            center,
            half_extent,
        }
    }

    pub fn square(center: [f64; 2], half: f64) -> Self {
        Self::new(center, [half, half])
    }

    /// Square window centered at the origin, `periods` longest wave periods wide.
    pub fn in_periods(p: &Potential, periods: f64) -> Self {
        Self::square([0.0, 0.0], 0.5 * periods * p.longest_period())
    }

    /// Larger full side length.
    pub fn size(&self) -> f64 {
        2.0 * self.half_extent[0].max(self.half_extent[1])
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self::new(
            self.center,
            [self.half_extent[0] * factor, self.half_extent[1] * factor],
        )
    }

    pub fn contains(&self, p: [f64; 2]) -> bool {
        (p[0] - self.center[0]).abs() <= self.half_extent[0]
            && (p[1] - self.center[1]).abs() <= self.half_extent[1]
    }

    /// Edge a boundary point lies on (within round-off), if any.
    pub fn side_of(&self, p: [f64; 2]) -> Option<Side> {
        let tol = 1e-9 * self.size();
        let dx = p[0] - self.center[0];
        let dy = p[1] - self.center[1];
        if (dx + self.half_extent[0]).abs() <= tol {
            Some(Side::Left)
        } else if (dx - self.half_extent[0]).abs() <= tol {
            Some(Side::Right)
        } else if (dy + self.half_extent[1]).abs() <= tol {
            Some(Side::Bottom)
        } else if (dy - self.half_extent[1]).abs() <= tol {
            Some(Side::Top)
        } else {
            None
        }
    }
}
