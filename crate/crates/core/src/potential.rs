//! Quasiperiodic potentials as restrictions of `Σ V_i cos X^i` on the torus to an
//! affine plane `X^i = k_i·r + δ_i`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::{dot2, norm2, Scalar, Vec2};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PotentialError {
    #[error("wave {index} has a zero wavevector")]
    ZeroWavevector { index: usize },
    #[error("wave {index} has a non-finite field")]
    NonFinite { index: usize },
    #[error("potential needs at least one wave")]
    Empty,
    #[error("direction is not a unit vector (norm {norm})")]
    NotUnit { norm: f64 },
}

/// One standing wave `V cos(k·r + δ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar + Serialize + for<'a> Deserialize<'a>")]
pub struct WaveSpec<T> {
    pub k: Vec2<T>,
    pub amplitude: T,
    /// Normalized to `[0, 2π)`.
    pub phase: T,
}

impl<T: Scalar> WaveSpec<T> {
    pub fn new(k: Vec2<T>, amplitude: T, phase: T) -> Self {
        Self {
            k,
            amplitude,
            phase: normalize_phase(phase),
        }
    }

    /// Unit-amplitude wave `cos(a x + b y + c)`.
    pub fn unit(a: T, b: T, c: T) -> Self {
        Self::new([a, b], T::one(), c)
    }

    /// Torus coordinate `k·r + δ`.
    #[inline]
    pub fn lift(&self, r: Vec2<T>) -> T {
        dot2(self.k, r) + self.phase
    }

    pub fn period(&self) -> T {
        T::two_pi() / norm2(self.k)
    }
}

pub fn normalize_phase<T: Scalar>(phase: T) -> T {
    let two_pi = T::two_pi();
    let p = phase % two_pi;
    let p = if p < T::zero() { p + two_pi } else { p };
    // `p + 2π` can round up to exactly 2π for tiny negative inputs.
    if p >= two_pi {
        T::zero()
    } else {
        p
    }
}

/// `V(r) = constant + Σ_i V_i cos(k_i·r + δ_i)`.
///
/// The constant only appears when a wave with a vanishing wavevector is folded away
/// (degenerate embeddings); it is zero for every potential built from explicit waves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Scalar + Serialize + for<'a> Deserialize<'a>")]
pub struct QuasiPotential<T> {
    waves: Vec<WaveSpec<T>>,
    #[serde(default)]
    constant: T,
}

impl<T: Scalar> QuasiPotential<T> {
    /// Builds a potential, dropping waves with zero amplitude.
    pub fn new(waves: Vec<WaveSpec<T>>) -> Result<Self, PotentialError> {
        let waves: Vec<_> = waves
            .into_iter()
            .filter(|w| w.amplitude != T::zero())
            .collect();
        if waves.is_empty() {
            return Err(PotentialError::Empty);
        }
        Self::with_zero_amplitudes(waves)
    }

    /// Builds a potential keeping zero-amplitude waves (e.g. a free-particle control
    /// that still carries a wavevector scale).
    pub fn with_zero_amplitudes(waves: Vec<WaveSpec<T>>) -> Result<Self, PotentialError> {
        if waves.is_empty() {
            return Err(PotentialError::Empty);
        }
        for (index, w) in waves.iter().enumerate() {
            let finite = w.k[0].is_finite()
                && w.k[1].is_finite()
                && w.amplitude.is_finite()
                && w.phase.is_finite();
            if !finite {
                return Err(PotentialError::NonFinite { index });
            }
            if w.k[0] == T::zero() && w.k[1] == T::zero() {
                return Err(PotentialError::ZeroWavevector { index });
            }
        }
        let waves = waves
            .into_iter()
            .map(|w| WaveSpec::new(w.k, w.amplitude, w.phase))
            .collect();
        Ok(Self {
            waves,
            constant: T::zero(),
        })
    }

    /// `cos(a_i x + b_i y + c_i)` summed over rows `[a, b, c]`.
    pub fn from_coefficients(rows: &[[T; 3]]) -> Result<Self, PotentialError> {
        Self::new(
            rows.iter()
                .map(|&[a, b, c]| WaveSpec::unit(a, b, c))
                .collect(),
        )
    }

    pub(crate) fn with_constant(mut self, constant: T) -> Self {
        self.constant = constant;
        self
    }

    pub fn waves(&self) -> &[WaveSpec<T>] {
        &self.waves
    }

    pub fn constant(&self) -> T {
        self.constant
    }

    /// Number of quasiperiods `d`.
    pub fn dim(&self) -> usize {
        self.waves.len()
    }

    pub fn wavevectors(&self) -> Vec<Vec2<T>> {
        self.waves.iter().map(|w| w.k).collect()
    }

    /// Torus point `X(r)` of the affine embedding.
    pub fn lift(&self, r: Vec2<T>) -> Vec<T> {
        self.waves.iter().map(|w| w.lift(r)).collect()
    }

    /// Evaluates the periodic torus function `constant + Σ V_i cos X^i`.
    pub fn torus_value(&self, x: &[T]) -> T {
        self.waves
            .iter()
            .zip(x)
            .fold(self.constant, |acc, (w, &xi)| acc + w.amplitude * xi.cos())
    }

    #[inline]
    pub fn evaluate(&self, r: Vec2<T>) -> T {
        self.waves
            .iter()
            .fold(self.constant, |acc, w| acc + w.amplitude * w.lift(r).cos())
    }

    /// `∂V/∂r = −Σ V_i sin(k_i·r + δ_i) k_i`.
    #[inline]
    pub fn gradient(&self, r: Vec2<T>) -> Vec2<T> {
        let mut g = [T::zero(); 2];
        for w in &self.waves {
            let s = w.amplitude * w.lift(r).sin();
            g[0] = g[0] - s * w.k[0];
            g[1] = g[1] - s * w.k[1];
        }
        g
    }

    /// Value and gradient in one pass.
    #[inline]
    pub fn value_and_gradient(&self, r: Vec2<T>) -> (T, Vec2<T>) {
        let mut v = self.constant;
        let mut g = [T::zero(); 2];
        for w in &self.waves {
            let (s, c) = w.lift(r).sin_cos();
            v = v + w.amplitude * c;
            let s = w.amplitude * s;
            g[0] = g[0] - s * w.k[0];
            g[1] = g[1] - s * w.k[1];
        }
        (v, g)
    }

    /// Closure of the value set of the torus function, `constant ± Σ|V_i|`.
    ///
    /// When the waves are independent torus coordinates (no harmonics) this is also the
    /// closure of the planar value set for aperiodic embeddings; with harmonics it is an
    /// outer bound.
    pub fn value_bounds(&self) -> [T; 2] {
        let total = self.amplitude_sum();
        [self.constant - total, self.constant + total]
    }

    pub fn amplitude_sum(&self) -> T {
        self.waves
            .iter()
            .fold(T::zero(), |acc, w| acc + w.amplitude.abs())
    }

    pub fn k_max(&self) -> T {
        self.waves
            .iter()
            .fold(T::zero(), |acc, w| acc.max(norm2(w.k)))
    }

    pub fn k_min(&self) -> T {
        self.waves
            .iter()
            .fold(T::infinity(), |acc, w| acc.min(norm2(w.k)))
    }

    pub fn longest_period(&self) -> T {
        T::two_pi() / self.k_min()
    }

    pub fn shortest_period(&self) -> T {
        T::two_pi() / self.k_max()
    }

    /// Same potential with `δ_i → δ_i + k_i·s`, i.e. `V'(r) = V(r + s)`.
    pub fn translated(&self, s: Vec2<T>) -> Self {
        let waves = self
            .waves
            .iter()
            .map(|w| WaveSpec::new(w.k, w.amplitude, w.phase + dot2(w.k, s)))
            .collect();
        Self {
            waves,
            constant: self.constant,
        }
    }

    /// Sets the phase of one wave, leaving the embedding direction unchanged.
    pub fn with_phase(&self, index: usize, phase: T) -> Self {
        let mut out = self.clone();
        let w = &mut out.waves[index];
        w.phase = normalize_phase(phase);
        out
    }

    /// Sets every phase (length must match `dim`).
    pub fn with_phases(&self, phases: &[T]) -> Self {
        let mut out = self.clone();
        for (w, &p) in out.waves.iter_mut().zip(phases) {
            w.phase = normalize_phase(p);
        }
        out
    }

    /// Uniform length rescaling `k_i → factor·k_i`.
    pub fn rescaled(&self, factor: T) -> Self {
        let waves = self
            .waves
            .iter()
            .map(|w| WaveSpec {
                k: [w.k[0] * factor, w.k[1] * factor],
                ..*w
            })
            .collect();
        Self {
            waves,
            constant: self.constant,
        }
    }

    /// Rotates the plane coordinates by `angle`: `V'(r) = V(R(−angle) r)`.
    ///
    /// A feature along direction `u` in `V` lies along `R(angle) u` in the result.
    pub fn rotated(&self, angle: T) -> Self {
        let (s, c) = angle.sin_cos();
        let waves = self
            .waves
            .iter()
            .map(|w| WaveSpec {
                k: [c * w.k[0] - s * w.k[1], s * w.k[0] + c * w.k[1]],
                ..*w
            })
            .collect();
        Self {
            waves,
            constant: self.constant,
        }
    }

    /// Negated potential `−V`.
    pub fn negated(&self) -> Self {
        let waves = self
            .waves
            .iter()
            .map(|w| WaveSpec {
                amplitude: -w.amplitude,
                ..*w
            })
            .collect();
        Self {
            waves,
            constant: -self.constant,
        }
    }

    /// Converts to another scalar type.
    pub fn cast<U: Scalar>(&self) -> QuasiPotential<U> {
        let c = |x: T| U::lit(x.as_f64());
        QuasiPotential {
            waves: self
                .waves
                .iter()
                .map(|w| WaveSpec {
                    k: [c(w.k[0]), c(w.k[1])],
                    amplitude: c(w.amplitude),
                    phase: c(w.phase),
                })
                .collect(),
            constant: c(self.constant),
        }
    }
}

/// Unit normal of an embedded plane in ℝ³.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SphereDirection([f64; 3]);

impl SphereDirection {
    pub fn new(n: [f64; 3]) -> Result<Self, PotentialError> {
        let norm = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
        if (norm - 1.0).abs() > 1e-12 || !norm.is_finite() {
            return Err(PotentialError::NotUnit { norm });
        }
        Ok(Self(n))
    }

    /// Normalizes any nonzero vector.
    pub fn normalized(n: [f64; 3]) -> Result<Self, PotentialError> {
        let norm = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(PotentialError::NotUnit { norm });
        }
        Ok(Self([n[0] / norm, n[1] / norm, n[2] / norm]))
    }

    pub fn as_array(&self) -> [f64; 3] {
        self.0
    }

    /// Angle to another direction, in radians.
    pub fn angle_to(&self, other: &SphereDirection) -> f64 {
        let d: f64 = self.0.iter().zip(other.0.iter()).map(|(a, b)| a * b).sum();
        d.clamp(-1.0, 1.0).acos()
    }

    /// Parallel to a coordinate axis within `1e-12`.
    pub fn is_axis_aligned(&self) -> bool {
        self.0.iter().filter(|c| c.abs() < 1e-12).count() >= 2
    }
}

/// Result of [`from_sphere_direction`].
#[derive(Debug, Clone)]
pub struct SphereEmbedding {
    pub potential: QuasiPotential<f64>,
    /// The direction is parallel to a coordinate axis; one wave lost its planar
    /// variation and was folded into the constant term.
    pub degenerate: bool,
}

/// Builds `cos X¹ + cos X² + cos X³` restricted to the plane orthogonal to `n`.
///
/// The x-axis is the intersection of the plane with `(X¹, X²)`, so the third
/// wavevector has zero x-component. The rows `(k_i.x)` and `(k_i.y)` are the
/// orthonormal in-plane axes `e_x`, `e_y` with `e_x × e_y = n`.
pub fn from_sphere_direction(n: SphereDirection, phases: [f64; 3]) -> SphereEmbedding {
    let [n1, n2, n3] = n.as_array();
    let rho = n1.hypot(n2);
    let (ex, ey) = if rho < 1e-12 {
        let s = n3.signum();
        ([1.0, 0.0, 0.0], [0.0, s, 0.0])
    } else {
        let ex = [-n2 / rho, n1 / rho, 0.0];
        let ey = [-n3 * n1 / rho, -n3 * n2 / rho, rho];
        (ex, ey)
    };
    let mut waves = Vec::with_capacity(3);
    let mut constant = 0.0;
    for i in 0..3 {
        let k = [ex[i], ey[i]];
        if k[0].hypot(k[1]) < 1e-12 {
            constant += phases[i].cos();
        } else {
            waves.push(WaveSpec::new(k, 1.0, phases[i]));
        }
    }
    let potential = QuasiPotential::new(waves)
        .expect("at most one wave degenerates")
        .with_constant(constant);
    SphereEmbedding {
        potential,
        degenerate: n.is_axis_aligned(),
    }
}

/// Plane normal `e_x × e_y` of a three-wave embedding, built from the wavevector
/// columns. `None` unless `dim == 3` and the columns are independent.
pub fn embedding_normal(p: &QuasiPotential<f64>) -> Option<SphereDirection> {
    if p.dim() != 3 {
        return None;
    }
    let ex: Vec<f64> = p.waves().iter().map(|w| w.k[0]).collect();
    let ey: Vec<f64> = p.waves().iter().map(|w| w.k[1]).collect();
    let n = [
        ex[1] * ey[2] - ex[2] * ey[1],
        ex[2] * ey[0] - ex[0] * ey[2],
        ex[0] * ey[1] - ex[1] * ey[0],
    ];
    SphereDirection::normalized(n).ok()
}
