//! Quasiperiodic potentials on the plane: level lines, stability zones of open
//! level lines, and classical particle dynamics.
//!
//! The potential and the integrator are generic over [`Scalar`] (`f32`/`f64`);
//! grid and topology computations run in `f64` through the [`Potential`] alias.

pub mod dynamics;
pub mod levelset;
pub mod potential;
pub mod potential_file;
pub mod presets;
pub mod rationality;
pub mod scalar;
pub mod topology;

pub use potential::{
    embedding_normal, from_sphere_direction, PotentialError, QuasiPotential, SphereDirection,
    SphereEmbedding, WaveSpec,
};
pub use rationality::{classify_rationality, PotentialType, RationalityError, RationalityVerdict};
pub use scalar::{Scalar, Vec2};

/// Double-precision potential used by the grid, topology and dynamics layers.
pub type Potential = QuasiPotential<f64>;
/// Single-precision potential.
pub type Potential32 = QuasiPotential<f32>;
pub type Wave = WaveSpec<f64>;
