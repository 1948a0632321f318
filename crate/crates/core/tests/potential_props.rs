use std::f64::consts::{PI, TAU};

use proptest::prelude::*;
use quasilines::topology::sphere::{to_fundamental, SignedPermutation};
use quasilines::{embedding_normal, from_sphere_direction, Potential, SphereDirection, WaveSpec};

fn wave() -> impl Strategy<Value = WaveSpec<f64>> {
    (0.2f64..2.0, 0.0..TAU, 0.1f64..2.0, 0.0..TAU).prop_map(|(k, angle, amplitude, phase)| {
        WaveSpec::new([k * angle.cos(), k * angle.sin()], amplitude, phase)
    })
}

fn potential() -> impl Strategy<Value = Potential> {
    prop::collection::vec(wave(), 1..5).prop_map(|w| Potential::new(w).unwrap())
}

fn point() -> impl Strategy<Value = [f64; 2]> {
    [-50.0f64..50.0, -50.0f64..50.0]
}

/// Term-by-term sum, written out independently of the library.
fn direct_sum(p: &Potential, r: [f64; 2]) -> f64 {
    p.waves()
        .iter()
        .map(|w| w.amplitude * (w.k[0] * r[0] + w.k[1] * r[1] + w.phase).cos())
        .sum::<f64>()
        + p.constant()
}

fn unit_vector() -> impl Strategy<Value = [f64; 3]> {
    [-1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0].prop_filter_map("near zero", |v| {
        let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        (n > 0.1).then(|| [v[0] / n, v[1] / n, v[2] / n])
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn evaluation_is_the_term_sum(p in potential(), r in point()) {
        prop_assert!((p.evaluate(r) - direct_sum(&p, r)).abs() < 1e-12);
    }

    #[test]
    fn evaluation_factors_through_the_torus_lift(p in potential(), r in point()) {
        let x = p.lift(r);
        for (xi, w) in x.iter().zip(p.waves()) {
            prop_assert!((xi - (w.k[0] * r[0] + w.k[1] * r[1] + w.phase)).abs() < 1e-12);
        }
        prop_assert!((p.torus_value(&x) - p.evaluate(r)).abs() < 1e-12);
    }

    #[test]
    fn gradient_matches_central_differences(p in potential(), r in point()) {
        let h = 1e-5 / p.k_max();
        let g = p.gradient(r);
        let fd = [
            (p.evaluate([r[0] + h, r[1]]) - p.evaluate([r[0] - h, r[1]])) / (2.0 * h),
            (p.evaluate([r[0], r[1] + h]) - p.evaluate([r[0], r[1] - h])) / (2.0 * h),
        ];
        let scale = p.amplitude_sum() * p.k_max();
        prop_assert!((g[0] - fd[0]).abs() < 1e-6 * scale && (g[1] - fd[1]).abs() < 1e-6 * scale);
        let (v, g2) = p.value_and_gradient(r);
        // Same terms, different summation order.
        prop_assert!((v - p.evaluate(r)).abs() < 1e-12);
        prop_assert!((g2[0] - g[0]).abs() < 1e-12 && (g2[1] - g[1]).abs() < 1e-12);
    }

    #[test]
    fn translation_is_a_phase_shift(p in potential(), r in point(), s in point()) {
        prop_assert!((p.translated(s).evaluate(r) - p.evaluate([r[0] + s[0], r[1] + s[1]])).abs() < 1e-9);
    }

    #[test]
    fn negation_is_a_half_turn_of_every_phase(p in potential(), r in point()) {
        let phases: Vec<f64> = p.waves().iter().map(|w| w.phase + PI).collect();
        prop_assert!((p.negated().evaluate(r) + p.evaluate(r)).abs() < 1e-12);
        prop_assert!((p.with_phases(&phases).evaluate(r) - p.negated().evaluate(r)).abs() < 1e-9);
    }

    #[test]
    fn full_phase_cycle_is_the_identity(p in potential(), r in point(), i in 0usize..4) {
        let i = i % p.dim();
        let q = p.with_phase(i, p.waves()[i].phase + TAU);
        prop_assert!((q.evaluate(r) - p.evaluate(r)).abs() < 1e-12);
    }

    #[test]
    fn rescaling_and_rotation_move_points(p in potential(), r in point(), f in 0.25f64..4.0, a in 0.0..TAU) {
        prop_assert!((p.rescaled(f).evaluate([r[0] / f, r[1] / f]) - p.evaluate(r)).abs() < 1e-9);
        let (s, c) = a.sin_cos();
        let rr = [c * r[0] - s * r[1], s * r[0] + c * r[1]];
        prop_assert!((p.rotated(a).evaluate(rr) - p.evaluate(r)).abs() < 1e-9);
    }

    #[test]
    fn values_stay_within_bounds(p in potential(), r in point()) {
        let [lo, hi] = p.value_bounds();
        let v = p.evaluate(r);
        prop_assert!(lo - 1e-12 <= v && v <= hi + 1e-12);
    }

    #[test]
    fn single_precision_tracks_double(p in potential(), r in [-10.0f64..10.0, -10.0f64..10.0]) {
        let v32 = p.cast::<f32>().evaluate([r[0] as f32, r[1] as f32]) as f64;
        prop_assert!((v32 - p.evaluate(r)).abs() < 1e-4 * p.amplitude_sum().max(1.0));
    }

    #[test]
    fn sphere_embedding_round_trips(n in unit_vector(), phases in [0.0..TAU, 0.0..TAU, 0.0..TAU]) {
        let dir = SphereDirection::new(n).unwrap();
        prop_assume!(!dir.is_axis_aligned());
        let emb = from_sphere_direction(dir, phases);
        let back = embedding_normal(&emb.potential).unwrap().as_array();
        for i in 0..3 {
            prop_assert!((back[i] - n[i]).abs() < 1e-10);
        }
    }

    #[test]
    fn sphere_lift_lies_on_the_plane(n in unit_vector(), r in point()) {
        let dir = SphereDirection::new(n).unwrap();
        prop_assume!(!dir.is_axis_aligned());
        let p = from_sphere_direction(dir, [0.0; 3]).potential;
        let x = p.lift(r);
        prop_assert!((x[0] * n[0] + x[1] * n[1] + x[2] * n[2]).abs() < 1e-10 * (1.0 + r[0].hypot(r[1])));
    }

    #[test]
    fn fundamental_domain_is_reached(n in unit_vector()) {
        let (f, g) = to_fundamental(n);
        prop_assert!(f[0] >= f[1] && f[1] >= f[2] && f[2] >= 0.0);
        let back = g.apply(f);
        for i in 0..3 {
            prop_assert!((back[i] - n[i]).abs() < 1e-12);
        }
        prop_assert_eq!(SignedPermutation::group().len(), 48);
    }
}
