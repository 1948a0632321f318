//! Stability-zone map over plane directions of `cos X¹ + cos X² + cos X³`.
//!
//! Signed permutations of the three axes map the family to itself, so only the
//! triangle `n₁ ≥ n₂ ≥ n₃ ≥ 0` is classified; labels of other directions are carried
//! over by the same group element.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::classify::{classify_potential, ClassifyBudget, Verdict};
use crate::potential::{from_sphere_direction, SphereDirection};

/// `g(n)_i = sign_i · n_{perm_i}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SignedPermutation {
    pub perm: [usize; 3],
    pub sign: [i8; 3],
}

impl SignedPermutation {
    pub fn apply(&self, v: [f64; 3]) -> [f64; 3] {
        std::array::from_fn(|i| self.sign[i] as f64 * v[self.perm[i]])
    }

    pub fn apply_int(&self, m: &[i64]) -> Vec<i64> {
        (0..3)
            .map(|i| self.sign[i] as i64 * m[self.perm[i]])
            .collect()
    }

    /// All 48 elements.
    pub fn group() -> Vec<SignedPermutation> {
        const PERMS: [[usize; 3]; 6] = [
            [0, 1, 2],
            [0, 2, 1],
            [1, 0, 2],
            [1, 2, 0],
            [2, 0, 1],
            [2, 1, 0],
        ];
        let mut out = Vec::with_capacity(48);
        for perm in PERMS {
            for bits in 0..8u8 {
                let sign = std::array::from_fn(|i| if bits >> i & 1 == 1 { -1 } else { 1 });
                out.push(SignedPermutation { perm, sign });
            }
        }
        out
    }
}

/// First nonzero entry positive.
pub fn canonical_sign(m: &[i64]) -> Vec<i64> {
    match m.iter().find(|&&x| x != 0) {
        Some(&f) if f < 0 => m.iter().map(|x| -x).collect(),
        _ => m.to_vec(),
    }
}

/// Representative `f` in the fundamental triangle and `g` with `n = g(f)`.
pub fn to_fundamental(n: [f64; 3]) -> ([f64; 3], SignedPermutation) {
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| n[b].abs().total_cmp(&n[a].abs()).then(a.cmp(&b)));
    let f = std::array::from_fn(|j| n[order[j]].abs());
    let mut perm = [0usize; 3];
    for (j, &i) in order.iter().enumerate() {
        perm[i] = j;
    }
    let sign = std::array::from_fn(|i| if n[i] < 0.0 { -1 } else { 1 });
    (f, SignedPermutation { perm, sign })
}

/// Barycentric subdivision of the triangle with corners `(1,0,0)`, `(1,1,0)/√2`,
/// `(1,1,1)/√3` into `4^level` cells; `(2^level + 1)(2^level + 2)/2` directions.
pub fn fundamental_samples(level: u32) -> Vec<SphereDirection> {
    let n = 1usize << level;
    let s2 = std::f64::consts::FRAC_1_SQRT_2;
    let s3 = 1.0 / 3f64.sqrt();
    let corners = [[1.0, 0.0, 0.0], [s2, s2, 0.0], [s3, s3, s3]];
    let mut out = Vec::with_capacity((n + 1) * (n + 2) / 2);
    for a in (0..=n).rev() {
        for b in (0..=n - a).rev() {
            let c = n - a - b;
            let w = [a as f64, b as f64, c as f64];
            let v: [f64; 3] = std::array::from_fn(|i| (0..3).map(|k| w[k] * corners[k][i]).sum());
            out.push(SphereDirection::normalized(v).expect("nonzero combination"));
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZoneRecord {
    pub index: usize,
    pub direction: [f64; 3],
    /// Image in the fundamental triangle that was classified.
    pub fundamental: [f64; 3],
    pub verdict: String,
    /// Zone label in the axes of `direction`.
    pub m: Option<Vec<i64>>,
    pub interval: Option<[f64; 2]>,
    pub phases: [f64; 3],
    pub seed: u64,
    pub samples_spent: usize,
    pub note: Option<String>,
}

fn direction_stream(seed: u64, f: [f64; 3]) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let key = f.iter().fold(0u64, |h, x| {
        (h ^ x.to_bits())
            .wrapping_mul(0x9E37_79B9_7F4A_7C15)
            .rotate_left(29)
    });
    rng.set_stream(key);
    rng
}

/// Classifies the fundamental image of `n` with phases drawn from `(seed, image)` and
/// maps the label back.
pub fn classify_direction(
    index: usize,
    n: SphereDirection,
    budget: &ClassifyBudget,
    seed: u64,
) -> ZoneRecord {
    let (f, g) = to_fundamental(n.as_array());
    let mut rng = direction_stream(seed, f);
    let phases: [f64; 3] = std::array::from_fn(|_| rng.gen_range(0.0..std::f64::consts::TAU));
    let fdir = SphereDirection::normalized(f).expect("unit input");
    let emb = from_sphere_direction(fdir, phases);
    let mut rec = ZoneRecord {
        index,
        direction: n.as_array(),
        fundamental: f,
        verdict: "undetermined".to_string(),
        m: None,
        interval: None,
        phases,
        seed,
        samples_spent: 0,
        note: None,
    };
    if emb.degenerate {
        rec.note = Some("plane contains a coordinate axis".to_string());
    }
    match classify_potential(&emb.potential, budget) {
        Ok(report) => {
            rec.verdict = report.verdict.label().to_string();
            rec.samples_spent = report.samples_spent;
            rec.interval = report.evidence.interval.map(|i| [i.v1, i.v2]);
            match &report.verdict {
                Verdict::Regular { m, .. } if m.len() == 3 => {
                    rec.m = Some(canonical_sign(&g.apply_int(m)))
                }
                Verdict::Undetermined { reason } => rec.note = Some(reason.clone()),
                _ => {}
            }
        }
        Err(e) => {
            rec.note = Some(e.to_string());
            if let super::TopologyError::BudgetExhausted { samples_spent, .. } = e {
                rec.samples_spent = samples_spent;
            }
        }
    }
    rec
}

/// Directions classified by a scan: the subdivision samples followed by `extra`.
pub fn scan_directions(level: u32, extra: &[SphereDirection]) -> Vec<SphereDirection> {
    let mut out = fundamental_samples(level);
    out.extend_from_slice(extra);
    out
}

/// One record per direction of [`scan_directions`], in index order.
pub fn scan_sphere(
    level: u32,
    budget: &ClassifyBudget,
    seed: u64,
    extra: &[SphereDirection],
) -> Vec<ZoneRecord> {
    let dirs = scan_directions(level, extra);
    let mut out: Vec<ZoneRecord> = dirs
        .into_par_iter()
        .enumerate()
        .map(|(i, n)| classify_direction(i, n, budget, seed))
        .collect();
    out.sort_by_key(|r| r.index);
    out
}

fn label_color(rec: &ZoneRecord, m: Option<&[i64]>) -> String {
    match (rec.verdict.as_str(), m) {
        ("regular", Some(m)) => {
            // Zones related by the symmetry share a hue family; the exact label fixes it.
            let h = m.iter().fold(17u64, |h, &x| {
                h.wrapping_mul(31).wrapping_add((x + 64) as u64)
            });
            let hue = (h.wrapping_mul(0x9E37_79B9) >> 7) % 360;
            format!("hsl({hue},70%,55%)")
        }
        ("chaotic", _) => "#000000".to_string(),
        ("periodic", _) => "#ffffff".to_string(),
        _ => "#b0b0b0".to_string(),
    }
}

/// Orthographic view along `(1,1,1)` of every symmetric image of every record.
pub fn zone_svg(records: &[ZoneRecord]) -> String {
    let size = 600.0;
    let r = 270.0;
    let c = size / 2.0;
    let s3 = 1.0 / 3f64.sqrt();
    let view = [s3, s3, s3];
    let u = [
        std::f64::consts::FRAC_1_SQRT_2,
        -std::f64::consts::FRAC_1_SQRT_2,
        0.0,
    ];
    let v = [1.0 / 6f64.sqrt(), 1.0 / 6f64.sqrt(), -2.0 / 6f64.sqrt()];
    let dot = |a: [f64; 3], b: [f64; 3]| a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
    let mut s = String::new();
    s.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{size}\" height=\"{size}\" viewBox=\"0 0 {size} {size}\">\n"
    ));
    s.push_str(&format!(
        "<rect width=\"{size}\" height=\"{size}\" fill=\"#f8f8f8\"/>\n"
    ));
    s.push_str(&format!(
        "<circle cx=\"{c}\" cy=\"{c}\" r=\"{r}\" fill=\"none\" stroke=\"#404040\"/>\n"
    ));
    let group = SignedPermutation::group();
    for rec in records {
        let (f, _) = to_fundamental(rec.fundamental);
        let base_m = rec.m.as_ref().map(|m| {
            let (_, g) = to_fundamental(rec.direction);
            // Label in fundamental axes: invert n = g(f) on m.
            let mut mf = vec![0i64; 3];
            for i in 0..3 {
                mf[g.perm[i]] = g.sign[i] as i64 * m[i];
            }
            mf
        });
        for g in &group {
            let n = g.apply(f);
            for n in [n, [-n[0], -n[1], -n[2]]] {
                if dot(n, view) < 0.0 {
                    continue;
                }
                let m = base_m.as_ref().map(|mf| canonical_sign(&g.apply_int(mf)));
                let x = c + r * dot(n, u);
                let y = c - r * dot(n, v);
                s.push_str(&format!(
                    "<circle cx=\"{x:.3}\" cy=\"{y:.3}\" r=\"4\" fill=\"{}\" stroke=\"#202020\" stroke-width=\"0.4\"/>\n",
                    label_color(rec, m.as_deref())
                ));
            }
        }
    }
    s.push_str("</svg>\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sample_count() {
        assert_eq!(fundamental_samples(3).len(), 45);
        assert_eq!(fundamental_samples(0).len(), 3);
        for n in fundamental_samples(3) {
            let a = n.as_array();
            assert!(a[0] >= a[1] - 1e-12 && a[1] >= a[2] - 1e-12 && a[2] >= -1e-12);
        }
    }

    #[test]
    fn fundamental_round_trip() {
        let n = [-0.2, 0.9, -0.4];
        let (f, g) = to_fundamental(n);
        assert_eq!(f, [0.9, 0.4, 0.2]);
        assert_eq!(g.apply(f), n);
        assert_eq!(SignedPermutation::group().len(), 48);
    }
}
