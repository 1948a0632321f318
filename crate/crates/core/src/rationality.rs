//! Rationality of the embedded plane: doubly periodic, singly periodic or aperiodic
//! planar potentials.
//!
//! A plane vector `e` is a period iff `k_i·e ∈ 2πℤ` for every wave, i.e. iff the
//! integer vector `n = K e / 2π` lies in the image plane `W = K ℝ²` of the
//! wavevector matrix. The number of independent periods is the rank of `W ∩ ℤ^d`.
//! Integer relations `Σ m_i k_i = 0` span `W^⊥ ∩ ℤ^d` and are reported alongside.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::potential::QuasiPotential;

pub const DEFAULT_MAX_COEFF: i64 = 12;
pub const DEFAULT_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RationalityError {
    #[error("max_coeff must be at least 1")]
    BadBound,
    #[error("integer vector {vector:?} misses exactness by {residual:e}, inside (tol, 10·tol)")]
    AmbiguousNearRelation { vector: Vec<i64>, residual: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PotentialType {
    /// Two independent periods.
    TypeI,
    /// Exactly one period direction.
    TypeII,
    /// No exact periods.
    TypeIII,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RationalityVerdict {
    pub kind: PotentialType,
    /// Verified period vectors, reduced (shortest first).
    pub periods: Vec<[f64; 2]>,
    /// Independent integer vectors `m` with `Σ m_i k_i = 0`, first nonzero entry positive.
    pub relations: Vec<Vec<i64>>,
}

/// Iterates integer vectors in `[-bound, bound]^d` whose first nonzero entry is positive.
pub(crate) fn half_box(d: usize, bound: i64) -> impl Iterator<Item = Vec<i64>> {
    let side = (2 * bound + 1) as u64;
    let total = side.pow(d as u32);
    (0..total).filter_map(move |mut code| {
        let mut v = vec![0i64; d];
        for slot in v.iter_mut() {
            *slot = (code % side) as i64 - bound;
            code /= side;
        }
        match v.iter().find(|&&x| x != 0) {
            Some(&first) if first > 0 => Some(v),
            _ => None,
        }
    })
}

pub(crate) fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

pub(crate) fn is_primitive(v: &[i64]) -> bool {
    v.iter().fold(0, |g, &x| gcd(g, x)) == 1
}

/// Rank of a set of integer vectors (Gaussian elimination in f64; entries are small).
fn rank(rows: &[Vec<f64>]) -> usize {
    let mut m: Vec<Vec<f64>> = rows.to_vec();
    let cols = m.first().map_or(0, |r| r.len());
    let mut r = 0;
    for c in 0..cols {
        let Some(piv) = (r..m.len()).max_by(|&a, &b| m[a][c].abs().total_cmp(&m[b][c].abs()))
        else {
            break;
        };
        if m[piv][c].abs() < 1e-9 {
            continue;
        }
        m.swap(r, piv);
        for i in 0..m.len() {
            if i != r {
                let f = m[i][c] / m[r][c];
                for j in c..cols {
                    let sub = f * m[r][j];
                    m[i][j] -= sub;
                }
            }
        }
        r += 1;
        if r == m.len() {
            break;
        }
    }
    r
}

fn greedy_independent(cands: Vec<Vec<i64>>) -> Vec<Vec<i64>> {
    let mut basis: Vec<Vec<i64>> = Vec::new();
    for c in cands {
        let mut rows: Vec<Vec<f64>> = basis
            .iter()
            .map(|b| b.iter().map(|&x| x as f64).collect())
            .collect();
        rows.push(c.iter().map(|&x| x as f64).collect());
        if rank(&rows) == rows.len() {
            basis.push(c);
        }
    }
    basis
}

fn cross(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

fn norm(a: [f64; 2]) -> f64 {
    a[0].hypot(a[1])
}

/// Lagrange–Gauss reduction of a 2D lattice basis.
fn reduce_basis(mut a: [f64; 2], mut b: [f64; 2]) -> ([f64; 2], [f64; 2]) {
    if norm(a) > norm(b) {
        std::mem::swap(&mut a, &mut b);
    }
    loop {
        let mu = ((a[0] * b[0] + a[1] * b[1]) / (a[0] * a[0] + a[1] * a[1])).round();
        b = [b[0] - mu * a[0], b[1] - mu * a[1]];
        if norm(b) >= norm(a) {
            return (a, b);
        }
        std::mem::swap(&mut a, &mut b);
    }
}

fn verify_period(p: &QuasiPotential<f64>, e: [f64; 2]) -> bool {
    let probes = [[0.0, 0.0], [0.37, -1.21], [5.3, 2.9], [-13.7, 8.1]];
    let scale = p.amplitude_sum().max(1e-300);
    probes.iter().all(|&r| {
        let shifted = [r[0] + e[0], r[1] + e[1]];
        (p.evaluate(shifted) - p.evaluate(r)).abs() <= 1e-8 * scale * (1.0 + norm(e))
    })
}

/// Searches integer relations and integer points of the embedded plane with
/// `|coefficient| ≤ max_coeff`, classifying the potential as type I/II/III.
pub fn classify_rationality(
    p: &QuasiPotential<f64>,
    max_coeff: i64,
    tol: f64,
) -> Result<RationalityVerdict, RationalityError> {
    if max_coeff < 1 {
        return Err(RationalityError::BadBound);
    }
    let ks = p.wavevectors();
    let d = ks.len();
    let kscale = p.k_max();

    // Relations Σ m_i k_i = 0.
    let mut relation_cands = Vec::new();
    let mut near: Option<(Vec<i64>, f64)> = None;
    let note_near = |v: &Vec<i64>, res: f64, near: &mut Option<(Vec<i64>, f64)>| {
        if res > tol && res < 10.0 * tol && near.as_ref().is_none_or(|(_, r)| res < *r) {
            *near = Some((v.clone(), res));
        }
    };
    for m in half_box(d, max_coeff) {
        if !is_primitive(&m) {
            continue;
        }
        let s = m.iter().zip(&ks).fold([0.0, 0.0], |acc, (&mi, k)| {
            [acc[0] + mi as f64 * k[0], acc[1] + mi as f64 * k[1]]
        });
        let res = norm(s) / kscale;
        if res <= tol {
            relation_cands.push(m);
        } else {
            note_near(&m, res, &mut near);
        }
    }
    relation_cands.sort_by_key(|m| m.iter().map(|x| x.abs()).sum::<i64>());
    let relations = greedy_independent(relation_cands);

    // Periods: integer points of W = K ℝ².
    let (g00, g01, g11) = ks.iter().fold((0.0, 0.0, 0.0), |(a, b, c), k| {
        (a + k[0] * k[0], b + k[0] * k[1], c + k[1] * k[1])
    });
    let det = g00 * g11 - g01 * g01;
    let two_pi = std::f64::consts::TAU;
    let mut periods_found: Vec<[f64; 2]> = Vec::new();
    if det.abs() <= 1e-14 * (g00 * g11).max(1e-300) {
        // All wavevectors parallel: constant along the orthogonal direction.
        let u = {
            let k = ks[0];
            let n = norm(k);
            [k[0] / n, k[1] / n]
        };
        let perp = [-u[1], u[0]];
        let along: Vec<f64> = ks.iter().map(|k| k[0] * u[0] + k[1] * u[1]).collect();
        // 1D commensurability: t along u with along_i t ∈ 2πℤ.
        let mut best: Option<f64> = None;
        for n0 in 1..=max_coeff {
            let t = two_pi * n0 as f64 / along[0].abs();
            let ok = along.iter().all(|&a| {
                let q = a * t / two_pi;
                (q - q.round()).abs() <= tol * (1.0 + q.abs())
            });
            if ok {
                best = Some(t);
                break;
            }
        }
        match best {
            Some(t) => {
                let e1 = [u[0] * t, u[1] * t];
                let e2 = [perp[0] * t, perp[1] * t];
                periods_found = vec![e1, e2];
            }
            None => periods_found.push(perp),
        }
    } else {
        let inv = [[g11 / det, -g01 / det], [-g01 / det, g00 / det]];
        for n in half_box(d, max_coeff) {
            if !is_primitive(&n) {
                continue;
            }
            // e = 2π (KᵀK)⁻¹ Kᵀ n
            let kt_n = n.iter().zip(&ks).fold([0.0, 0.0], |acc, (&ni, k)| {
                [acc[0] + ni as f64 * k[0], acc[1] + ni as f64 * k[1]]
            });
            let e = [
                two_pi * (inv[0][0] * kt_n[0] + inv[0][1] * kt_n[1]),
                two_pi * (inv[1][0] * kt_n[0] + inv[1][1] * kt_n[1]),
            ];
            let res = ks
                .iter()
                .zip(&n)
                .map(|(k, &ni)| {
                    let x = (k[0] * e[0] + k[1] * e[1]) / two_pi - ni as f64;
                    x * x
                })
                .sum::<f64>()
                .sqrt();
            if res <= tol {
                if verify_period(p, e) {
                    periods_found.push(e);
                }
            } else {
                note_near(&n, res, &mut near);
            }
        }
    }
    if let Some((vector, residual)) = near {
        return Err(RationalityError::AmbiguousNearRelation { vector, residual });
    }

    periods_found.sort_by(|a, b| norm(*a).total_cmp(&norm(*b)));
    let mut periods: Vec<[f64; 2]> = Vec::new();
    for e in periods_found {
        match periods.len() {
            0 => periods.push(e),
            1 => {
                if cross(periods[0], e).abs() > 1e-9 * norm(periods[0]) * norm(e) {
                    periods.push(e);
                }
            }
            _ => break,
        }
    }
    if periods.len() == 2 {
        let (a, b) = reduce_basis(periods[0], periods[1]);
        periods = vec![a, b];
    }
    let kind = match periods.len() {
        0 => PotentialType::TypeIII,
        1 => PotentialType::TypeII,
        _ => PotentialType::TypeI,
    };
    Ok(RationalityVerdict {
        kind,
        periods,
        relations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::WaveSpec;

    fn pot(ks: &[[f64; 2]]) -> QuasiPotential<f64> {
        QuasiPotential::new(ks.iter().map(|&k| WaveSpec::new(k, 1.0, 0.3)).collect()).unwrap()
    }

    #[test]
    fn square_plus_diagonal_is_type_one() {
        let v =
            classify_rationality(&pot(&[[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]]), 12, 1e-9).unwrap();
        assert_eq!(v.kind, PotentialType::TypeI);
        assert_eq!(v.relations, vec![vec![1, 1, -1]]);
        let tau = std::f64::consts::TAU;
        for e in &v.periods {
            assert!((norm(*e) - tau).abs() < 1e-9);
        }
    }

    #[test]
    fn irrational_third_wave_leaves_one_period() {
        let v = classify_rationality(
            &pot(&[[1.0, 0.0], [0.0, 1.0], [2f64.sqrt(), 0.0]]),
            12,
            1e-9,
        )
        .unwrap();
        assert_eq!(v.kind, PotentialType::TypeII);
        assert!(v.relations.is_empty());
        let e = v.periods[0];
        assert!(e[0].abs() < 1e-12 && (e[1].abs() - std::f64::consts::TAU).abs() < 1e-12);
    }

    #[test]
    fn bad_bound_rejected() {
        assert_eq!(
            classify_rationality(&pot(&[[1.0, 0.0]]), 0, 1e-9),
            Err(RationalityError::BadBound)
        );
    }

    #[test]
    fn near_relation_is_flagged() {
        let p = pot(&[[1.0, 0.0], [0.0, 1.0], [1.0 + 3e-9, 1.0]]);
        assert!(matches!(
            classify_rationality(&p, 4, 1e-9),
            Err(RationalityError::AmbiguousNearRelation { .. })
        ));
    }

    #[test]
    fn single_cosine_is_doubly_periodic() {
        let v = classify_rationality(&pot(&[[0.5, 0.0]]), 12, 1e-9).unwrap();
        assert_eq!(v.kind, PotentialType::TypeI);
    }

    #[test]
    fn half_box_has_one_sign_per_pair() {
        let all: Vec<_> = half_box(2, 1).collect();
        assert_eq!(all.len(), 4);
        assert!(all.contains(&vec![1, -1]) && !all.contains(&vec![-1, 1]));
    }
}
