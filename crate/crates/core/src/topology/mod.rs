//! Integer invariants of regular open level lines and stability-zone maps.

use thiserror::Error;

pub mod classify;
pub mod fit;
pub mod monodromy;
pub mod sphere;

pub use classify::{
    classify_potential, ClassificationReport, ClassifyBudget, Evidence, Verdict, GROWTH_THRESHOLD,
};
pub use fit::{fit_integer_direction, IntegerDirectionFit};
pub use monodromy::{monodromy_numbers, monodromy_record, MonodromyOptions, MonodromyRecord};
pub use sphere::{classify_direction, scan_directions, scan_sphere, zone_svg, ZoneRecord};

use crate::levelset::LevelSetError;
use crate::rationality::RationalityError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TopologyError {
    #[error("max_coeff must be at least 1")]
    BadBound,
    #[error("direction is not a unit vector (norm {0})")]
    NotUnit(f64),
    #[error("no integer vector fits the direction; best {best:?} with residual {residual:e}")]
    NoFit { best: Vec<i64>, residual: f64 },
    #[error("fit {:?} not unique: runner-up {:?} within a factor {:.2}", .0.m, .0.runner_up, .0.margin())]
    AmbiguousFit(Box<IntegerDirectionFit>),
    #[error("line tracking lost at {steps} phase steps")]
    TrackingLost { steps: usize },
    #[error("no spanning level lines")]
    NotRegular,
    #[error("every monodromy number is zero")]
    ZeroMonodromy,
    #[error("budget exhausted at stage {stage} after {samples_spent} samples")]
    BudgetExhausted {
        stage: String,
        samples_spent: usize,
        evidence: Box<classify::Evidence>,
    },
    #[error(transparent)]
    LevelSet(#[from] LevelSetError),
    #[error(transparent)]
    Rationality(#[from] RationalityError),
}
