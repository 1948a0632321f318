//! Velocity Verlet with analytic forces.

use serde::{Deserialize, Serialize};

use super::{DynamicsConfig, DynamicsError, PhaseState};
use crate::potential::QuasiPotential;
use crate::scalar::Scalar;

/// `dt = DT_COEFFICIENT / (k_max · sqrt(E / m))` with `E = max(ΣV_i, ε − V_min)`.
pub const DT_COEFFICIENT: f64 = 2e-4;
/// Largest coefficient accepted by [`max_dt`]; keeps the energy error near 1e-4.
pub const DT_MAX_COEFFICIENT: f64 = 0.02;

/// Relative (or absolute, for zero energy) drift that aborts integration.
pub const INSTABILITY_DRIFT: f64 = 1e-3;

pub fn energy<T: Scalar>(p: &QuasiPotential<T>, s: &PhaseState<T>, mass: T) -> T {
    (s.p[0] * s.p[0] + s.p[1] * s.p[1]) / (T::lit(2.0) * mass) + p.evaluate(s.r)
}

/// `coefficient / (k_max · sqrt(E / m))`.
pub fn scaled_dt<T: Scalar>(p: &QuasiPotential<T>, eps: T, mass: T, coefficient: f64) -> T {
    let [vmin, _] = p.value_bounds();
    let e = p.amplitude_sum().max(eps - vmin);
    let k = p.k_max();
    if e <= T::zero() || k <= T::zero() {
        // Free motion: any step is exact.
        return T::lit(coefficient);
    }
    T::lit(coefficient) / (k * (e / mass).sqrt())
}

/// Default time step for motion at energy `eps`.
pub fn default_dt<T: Scalar>(p: &QuasiPotential<T>, eps: T, mass: T) -> T {
    scaled_dt(p, eps, mass, DT_COEFFICIENT)
}

/// Largest admissible time step at energy `eps`.
pub fn max_dt<T: Scalar>(p: &QuasiPotential<T>, eps: T, mass: T) -> T {
    scaled_dt(p, eps, mass, DT_MAX_COEFFICIENT)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory<T> {
    pub states: Vec<PhaseState<T>>,
    /// `|H(t) − H(0)|`, divided by `|H(0)|` unless `relative` is false.
    pub drift: Vec<T>,
    pub relative: bool,
    pub energy0: T,
    pub dt: T,
    pub mass: T,
    pub sample_stride: usize,
}

impl<T: Scalar> Trajectory<T> {
    pub fn max_drift(&self) -> T {
        self.drift.iter().copied().fold(T::zero(), T::max)
    }

    /// Time between stored samples.
    pub fn sample_dt(&self) -> T {
        self.dt * T::from_usize(self.sample_stride).unwrap()
    }

    pub fn positions(&self) -> Vec<[f64; 2]> {
        self.states
            .iter()
            .map(|s| [s.r[0].as_f64(), s.r[1].as_f64()])
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Aborted<T> {
    pub error: DynamicsError,
    pub partial: Trajectory<T>,
}

impl<T: std::fmt::Debug> std::fmt::Display for Aborted<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} ({} samples kept)",
            self.error,
            self.partial.states.len()
        )
    }
}

impl<T: std::fmt::Debug> std::error::Error for Aborted<T> {}

fn force<T: Scalar>(p: &QuasiPotential<T>, r: [T; 2]) -> [T; 2] {
    let g = p.gradient(r);
    [-g[0], -g[1]]
}

/// Integrates `n_steps` velocity-Verlet steps from `s0`, storing every
/// `sample_stride`-th state including the first.
pub fn integrate<T: Scalar>(
    p: &QuasiPotential<T>,
    s0: PhaseState<T>,
    cfg: &DynamicsConfig<T>,
) -> Result<Trajectory<T>, Box<Aborted<T>>> {
    let empty = |error| {
        Box::new(Aborted {
            error,
            partial: Trajectory {
                states: Vec::new(),
                drift: Vec::new(),
                relative: true,
                energy0: T::zero(),
                dt: cfg.dt,
                mass: cfg.mass,
                sample_stride: cfg.sample_stride,
            },
        })
    };
    if !(cfg.dt > T::zero()) || !(cfg.mass > T::zero()) || cfg.sample_stride == 0 {
        return Err(empty(DynamicsError::BadConfig(
            "dt, mass and sample_stride must be positive".into(),
        )));
    }
    if !s0.is_finite() {
        return Err(empty(DynamicsError::BadConfig(
            "initial state is not finite".into(),
        )));
    }
    let m = cfg.mass;
    let dt = cfg.dt;
    let half = dt / T::lit(2.0);
    let h0 = energy(p, &s0, m);
    let scale = p.amplitude_sum().max(T::one());
    let relative = h0.abs() > T::lit(1e-9) * scale;
    let denom = if relative { h0.abs() } else { T::one() };

    let n_samples = cfg.n_steps / cfg.sample_stride + 1;
    let mut traj = Trajectory {
        states: Vec::with_capacity(n_samples),
        drift: Vec::with_capacity(n_samples),
        relative,
        energy0: h0,
        dt,
        mass: m,
        sample_stride: cfg.sample_stride,
    };
    traj.states.push(s0);
    traj.drift.push(T::zero());

    let (mut r, mut v) = (s0.r, s0.p);
    let mut f = force(p, r);
    for step in 1..=cfg.n_steps {
        v = [v[0] + half * f[0], v[1] + half * f[1]];
        r = [r[0] + dt * v[0] / m, r[1] + dt * v[1] / m];
        f = force(p, r);
        v = [v[0] + half * f[0], v[1] + half * f[1]];
        if step % cfg.sample_stride == 0 {
            let s = PhaseState {
                r,
                p: v,
                t: s0.t + dt * T::from_usize(step).unwrap(),
            };
            let drift = (energy(p, &s, m) - h0).abs() / denom;
            traj.states.push(s);
            traj.drift.push(drift);
            if !(drift.as_f64() <= INSTABILITY_DRIFT) {
                return Err(Box::new(Aborted {
                    error: DynamicsError::Instability {
                        step,
                        drift: drift.as_f64(),
                    },
                    partial: traj,
                }));
            }
        }
    }
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{Potential, Wave};

    fn free() -> Potential {
        Potential::with_zero_amplitudes(vec![Wave::new([1.0, 0.0], 0.0, 0.0)]).unwrap()
    }

    #[test]
    fn free_particle_is_straight() {
        let p = free();
        let s0 = PhaseState::new([0.5, -1.0], [0.3, 0.7]);
        let cfg = DynamicsConfig {
            mass: 2.0,
            dt: 0.01,
            n_steps: 1000,
            sample_stride: 100,
            seed: 0,
        };
        let tr = integrate(&p, s0, &cfg).unwrap();
        for s in &tr.states {
            assert!((s.r[0] - (0.5 + 0.15 * s.t)).abs() < 1e-12);
            assert!((s.r[1] - (-1.0 + 0.35 * s.t)).abs() < 1e-12);
        }
        assert_eq!(tr.states.len(), 11);
    }

    #[test]
    fn rejects_bad_config() {
        let cfg = DynamicsConfig {
            mass: 1.0,
            dt: 0.0,
            n_steps: 10,
            sample_stride: 1,
            seed: 0,
        };
        let err = integrate(&free(), PhaseState::new([0.0; 2], [1.0, 0.0]), &cfg).unwrap_err();
        assert!(matches!(err.error, DynamicsError::BadConfig(_)));
    }

    #[test]
    fn huge_step_aborts() {
        let p = Potential::from_coefficients(&[[1.0, 0.0, 0.0]]).unwrap();
        let cfg = DynamicsConfig {
            mass: 1.0,
            dt: 3.0,
            n_steps: 1000,
            sample_stride: 1,
            seed: 0,
        };
        let err = integrate(&p, PhaseState::new([0.3, 0.0], [0.0, 0.0]), &cfg).unwrap_err();
        assert!(matches!(err.error, DynamicsError::Instability { .. }));
        assert!(!err.partial.states.is_empty());
    }

    #[test]
    fn single_precision_runs() {
        let p = crate::presets::Preset::Regular100.potential().cast::<f32>();
        let dt = default_dt(&p, 0.5, 1.0);
        let cfg = DynamicsConfig {
            mass: 1.0f32,
            dt,
            n_steps: 2000,
            sample_stride: 100,
            seed: 0,
        };
        let tr = integrate(&p, PhaseState::new([0.1, 0.2], [0.5, 0.1]), &cfg).unwrap();
        assert!(tr.max_drift() < 1e-3);
    }
}
