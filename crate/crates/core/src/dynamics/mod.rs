//! Classical motion `H = |p|²/2m + V(r)`: integration, microcanonical ensembles and
//! trajectory regimes.

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub mod census;
pub mod integrate;
pub mod msd;
pub mod regime;
pub mod sample;
pub mod section;

pub use census::{ballistic_census, CensusOptions, CensusReport, Peak};
pub use integrate::{
    default_dt, energy, integrate, max_dt, scaled_dt, Aborted, Trajectory, DT_COEFFICIENT,
    DT_MAX_COEFFICIENT,
};
pub use msd::{msd_analysis, MsdFit};
pub use regime::{regime_classify, RegimeContext, RegimeReport, RegimeThresholds, RegimeVerdict};
pub use sample::sample_microcanonical;
pub use section::{poincare_section, Section, SectionResult};

use crate::scalar::{Scalar, Vec2};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseState<T> {
    pub r: Vec2<T>,
    pub p: Vec2<T>,
    pub t: T,
}

impl<T: Scalar> PhaseState<T> {
    pub fn new(r: Vec2<T>, p: Vec2<T>) -> Self {
        Self { r, p, t: T::zero() }
    }

    pub fn is_finite(&self) -> bool {
        self.r
            .iter()
            .chain(&self.p)
            .chain([&self.t])
            .all(|x| x.is_finite())
    }

    /// Same point with momentum reversed.
    pub fn reversed(&self) -> Self {
        Self {
            r: self.r,
            p: [-self.p[0], -self.p[1]],
            t: self.t,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DynamicsConfig<T> {
    pub mass: T,
    pub dt: T,
    pub n_steps: usize,
    /// Steps between stored samples.
    pub sample_stride: usize,
    pub seed: u64,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error("invalid configuration: {0}")]
    BadConfig(String),
    #[error("energy drift {drift:e} exceeds 1e-3 at step {step}")]
    Instability { step: usize, drift: f64 },
    #[error("sublevel acceptance {acceptance:e} after {trials} trials")]
    EmptySublevel { acceptance: f64, trials: usize },
    #[error("trajectory has {len} samples, {needed} needed")]
    TooShort { len: usize, needed: usize },
    #[error("half-trajectory exponents {first:.3} and {second:.3} differ by more than 0.3")]
    FitUnstable { first: f64, second: f64 },
    #[error("{found} section crossings, at least 100 needed")]
    TooFewCrossings { found: usize },
    #[error("no regime matches: {0}")]
    Unclassified(String),
}
