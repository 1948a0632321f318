//! Integer vectors `m` with `(Σ m_i k_i) · l = 0` for a measured direction `l`.

use serde::{Deserialize, Serialize};

use super::TopologyError;
use crate::rationality::is_primitive;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntegerDirectionFit {
    /// Irreducible, first nonzero entry positive.
    pub m: Vec<i64>,
    /// `|(Σ m_i k_i)·l| / |Σ m_i k_i|`.
    pub residual: f64,
    /// Best residual among the other candidates of height at most `height`.
    pub runner_up_residual: f64,
    pub runner_up: Option<Vec<i64>>,
    /// `max |m_i|` of the accepted vector.
    pub height: i64,
}

impl IntegerDirectionFit {
    pub fn margin(&self) -> f64 {
        self.runner_up_residual / self.residual.max(f64::MIN_POSITIVE)
    }
}

/// Required ratio between runner-up and best residual.
pub const UNIQUENESS_MARGIN: f64 = 10.0;

/// Irreducible vectors of height exactly `h`, first nonzero entry positive.
fn shell(d: usize, h: i64) -> impl Iterator<Item = Vec<i64>> {
    let side = (2 * h + 1) as u64;
    let total = side.pow(d as u32);
    (0..total).filter_map(move |mut code| {
        let mut v = vec![0i64; d];
        for slot in v.iter_mut() {
            *slot = (code % side) as i64 - h;
            code /= side;
        }
        let first_positive = matches!(v.iter().find(|&&x| x != 0), Some(&f) if f > 0);
        (first_positive && v.iter().any(|x| x.abs() == h) && is_primitive(&v)).then_some(v)
    })
}

/// Searches irreducible `m` shell by shell in increasing height `max |m_i|`. The first
/// shell whose best candidate has residual below `tol` decides; the uniqueness margin
/// is taken against every other candidate up to that height. Vectors with
/// `Σ m_i k_i = 0` carry no direction and are skipped.
pub fn fit_integer_direction(
    l: [f64; 2],
    waves: &[[f64; 2]],
    max_coeff: i64,
    tol: f64,
) -> Result<IntegerDirectionFit, TopologyError> {
    if max_coeff < 1 {
        return Err(TopologyError::BadBound);
    }
    let ln = l[0].hypot(l[1]);
    if !((ln - 1.0).abs() < 1e-9) {
        return Err(TopologyError::NotUnit(ln));
    }
    let kscale = waves.iter().map(|k| k[0].hypot(k[1])).fold(0.0, f64::max);
    let d = waves.len();
    // (residual, m) sorted ascending over all heights searched so far; two kept.
    let mut best: Vec<(f64, Vec<i64>)> = Vec::new();
    let mut overall: Option<(f64, Vec<i64>)> = None;
    for h in 1..=max_coeff {
        for m in shell(d, h) {
            let v = waves.iter().zip(&m).fold([0.0, 0.0], |acc, (k, &c)| {
                [acc[0] + c as f64 * k[0], acc[1] + c as f64 * k[1]]
            });
            let vn = v[0].hypot(v[1]);
            if vn <= 1e-12 * kscale {
                continue;
            }
            let r = (v[0] * l[0] + v[1] * l[1]).abs() / vn;
            best.push((r, m));
            best.sort_by(|a, b| a.0.total_cmp(&b.0));
            best.truncate(2);
        }
        if let Some((r, m)) = best.first() {
            if overall.as_ref().is_none_or(|o| *r < o.0) {
                overall = Some((*r, m.clone()));
            }
            if *r < tol {
                let (runner_up_residual, runner_up) = best
                    .get(1)
                    .map_or((f64::INFINITY, None), |(r2, m2)| (*r2, Some(m2.clone())));
                let fit = IntegerDirectionFit {
                    m: m.clone(),
                    residual: *r,
                    runner_up_residual,
                    runner_up,
                    height: h,
                };
                if fit.margin() < UNIQUENESS_MARGIN {
                    return Err(TopologyError::AmbiguousFit(Box::new(fit)));
                }
                return Ok(fit);
            }
        }
    }
    let (residual, m) = overall.unwrap_or((f64::INFINITY, Vec::new()));
    Err(TopologyError::NoFit { best: m, residual })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orthogonal_to_first_wave() {
        let waves = [[1.0, 0.0], [0.3, 0.9], [-0.7, 0.5]];
        let fit = fit_integer_direction([0.0, 1.0], &waves, 12, 1e-9).unwrap();
        assert_eq!(fit.m, vec![1, 0, 0]);
        assert_eq!(fit.height, 1);
    }

    #[test]
    fn shell_counts() {
        // Height-1 shell in 3D: (3^3 - 1) / 2 vectors.
        assert_eq!(shell(3, 1).count(), 13);
        assert!(shell(3, 2).all(|v| is_primitive(&v) && v.iter().any(|x| x.abs() == 2)));
        assert!(shell(2, 2).all(|v| v != vec![2, 0]));
    }

    #[test]
    fn rejects_bad_input() {
        assert_eq!(
            fit_integer_direction([1.0, 0.0], &[[1.0, 0.0]], 0, 1e-3),
            Err(TopologyError::BadBound)
        );
        assert!(matches!(
            fit_integer_direction([2.0, 0.0], &[[1.0, 0.0]], 3, 1e-3),
            Err(TopologyError::NotUnit(_))
        ));
    }

    #[test]
    fn no_fit_reports_best() {
        let waves = [[1.0, 0.0], [0.0, 1.0]];
        let a = 0.123_f64;
        match fit_integer_direction([a.cos(), a.sin()], &waves, 2, 1e-9) {
            Err(TopologyError::NoFit { best, residual }) => {
                assert_eq!(best.len(), 2);
                assert!(residual > 1e-9);
            }
            other => panic!("{other:?}"),
        }
    }
}
