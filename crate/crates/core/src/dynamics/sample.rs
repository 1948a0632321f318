//! Initial states uniform on the energy shell `H = ε` over a window.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{DynamicsError, PhaseState};
use crate::levelset::Window;
use crate::Potential;

/// Acceptance below which the sublevel set counts as empty.
pub const MIN_ACCEPTANCE: f64 = 1e-6;

/// Rejection-samples `r` uniform in `w` with `V(r) ≤ ε`, then `p` of magnitude
/// `sqrt(2m(ε − V(r)))` in a uniform direction.
pub fn sample_microcanonical(
    p: &Potential,
    eps: f64,
    w: &Window,
    n: usize,
    mass: f64,
    seed: u64,
) -> Result<Vec<PhaseState<f64>>, DynamicsError> {
    if n == 0 {
        return Err(DynamicsError::BadConfig(
            "sample count must be positive".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cap = 10_000_000 + 1000 * n;
    let mut out = Vec::with_capacity(n);
    let mut trials = 0usize;
    while out.len() < n && trials < cap {
        trials += 1;
        let r = [
            w.center[0] + w.half_extent[0] * rng.gen_range(-1.0..=1.0),
            w.center[1] + w.half_extent[1] * rng.gen_range(-1.0..=1.0),
        ];
        let v = p.evaluate(r);
        if v > eps {
            continue;
        }
        let speed = (2.0 * mass * (eps - v)).sqrt();
        let a = rng.gen_range(0.0..std::f64::consts::TAU);
        out.push(PhaseState::new(r, [speed * a.cos(), speed * a.sin()]));
    }
    let acceptance = out.len() as f64 / trials as f64;
    if out.len() < n || acceptance < MIN_ACCEPTANCE {
        return Err(DynamicsError::EmptySublevel { acceptance, trials });
    }
    Ok(out)
}
