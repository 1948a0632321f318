use std::f64::consts::PI;

use proptest::prelude::*;
use quasilines::dynamics::census::find_peaks;
use quasilines::dynamics::{
    default_dt, energy, integrate, msd_analysis, poincare_section, regime_classify,
    sample_microcanonical, DynamicsConfig, PhaseState, RegimeContext, RegimeVerdict, Section,
};
use quasilines::levelset::Window;
use quasilines::presets::Preset;
use quasilines::{Potential, WaveSpec};

fn cos_x_cos_y() -> Potential {
    Potential::from_coefficients(&[[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]).unwrap()
}

fn config(dt: f64, n_steps: usize, sample_stride: usize) -> DynamicsConfig<f64> {
    DynamicsConfig {
        mass: 1.0,
        dt,
        n_steps,
        sample_stride,
        seed: 0,
    }
}

#[test]
fn single_cosine_conserves_energy() {
    let p = Potential::new(vec![WaveSpec::new([1.0, 0.0], 1.0, 0.0)]).unwrap();
    // Motion along k reduces to the pendulum.
    let s0 = PhaseState::new([0.3, 0.0], [0.9, 0.0]);
    let e0 = energy(&p, &s0, 1.0);
    let tr = integrate(&p, s0, &config(default_dt(&p, e0, 1.0), 1_000_000, 1000)).unwrap();
    assert!(tr.max_drift() < 1e-8, "drift {}", tr.max_drift());
}

#[test]
fn free_particle_is_ballistic() {
    let p = Potential::with_zero_amplitudes(vec![WaveSpec::new([1.0, 0.0], 0.0, 0.0)]).unwrap();
    let tr = integrate(
        &p,
        PhaseState::new([0.0, 0.0], [0.6, 0.8]),
        &config(0.01, 200_000, 10),
    )
    .unwrap();
    let fit = msd_analysis(&tr, None).unwrap();
    assert!((fit.alpha - 2.0).abs() < 0.01, "alpha {}", fit.alpha);
    assert!(fit.curve.iter().all(|c| c.1 >= 0.0 && c.2 >= 0.0));
}

#[test]
fn trapped_orbit_saturates() {
    // Below -1 the sublevel set of cos x + cos y is a union of disjoint wells.
    let p = cos_x_cos_y();
    let s0 = PhaseState::new([PI + 0.4, PI - 0.2], [0.3, -0.5]);
    let e = energy(&p, &s0, 1.0);
    assert!(e < -1.0);
    let tr = integrate(&p, s0, &config(0.01, 400_000, 10)).unwrap();
    let fit = msd_analysis(&tr, None).unwrap();
    assert!(fit.alpha < 0.3, "alpha {}", fit.alpha);
    // Bounded by the size of one well.
    assert!(fit.curve.iter().all(|c| c.1 + c.2 < 4.0 * PI * PI));
    let report = regime_classify(&tr, &RegimeContext::new(&p)).unwrap();
    assert!(
        matches!(
            report.verdict,
            RegimeVerdict::Trapped | RegimeVerdict::TorusLike { .. }
        ),
        "{:?}",
        report.verdict
    );
}

#[test]
fn separable_well_orbit_has_a_thin_section() {
    // Motion in one well of cos x + cos y separates into two 1D oscillations, so the
    // (x, p_x) section at y = π lies on a closed curve.
    let p = cos_x_cos_y();
    let s0 = PhaseState::new([PI + 0.5, PI], [0.0, 0.3]);
    let tr = integrate(&p, s0, &config(0.01, 600_000, 1)).unwrap();
    let sec = poincare_section(
        &p,
        &tr,
        &Section {
            y0: PI,
            period: None,
        },
    )
    .unwrap();
    assert!(sec.points.len() >= 100);
    assert!(sec.thinness < 0.05, "thinness {}", sec.thinness);
    let ex = (PI + 0.5).cos();
    for q in &sec.points {
        // The x oscillation keeps its own energy.
        assert!((0.5 * q[1] * q[1] + q[0].cos() - ex).abs() < 1e-3);
    }
}

#[test]
fn too_few_crossings_are_reported() {
    let p = cos_x_cos_y();
    let tr = integrate(
        &p,
        PhaseState::new([PI + 0.5, PI], [0.0, 0.3]),
        &config(0.01, 1000, 1),
    )
    .unwrap();
    assert!(poincare_section(
        &p,
        &tr,
        &Section {
            y0: PI,
            period: None
        }
    )
    .is_err());
}

#[test]
fn time_reversal_returns_to_the_start() {
    let p = Preset::Regular111.potential();
    let s0 = sample_microcanonical(&p, 0.5, &Window::in_periods(&p, 4.0), 1, 1.0, 3).unwrap()[0];
    let cfg = config(default_dt(&p, 0.5, 1.0), 20_000, 20_000);
    let fwd = integrate(&p, s0, &cfg).unwrap();
    let back = integrate(&p, fwd.states.last().unwrap().reversed(), &cfg).unwrap();
    let end = back.states.last().unwrap();
    assert!((end.r[0] - s0.r[0]).hypot(end.r[1] - s0.r[1]) < 1e-9);
}

#[test]
fn microcanonical_samples_sit_on_the_shell() {
    let p = Preset::Chaotic.potential();
    let w = Window::in_periods(&p, 5.0);
    for s in sample_microcanonical(&p, 0.0, &w, 500, 1.0, 4).unwrap() {
        assert!(p.evaluate(s.r) <= 0.0);
        assert!(w.contains(s.r));
        assert!(energy(&p, &s, 1.0).abs() < 1e-12);
    }
    let [lo, hi] = p.value_bounds();
    assert!(sample_microcanonical(&p, hi + 1.0, &w, 10, 1.0, 4).is_ok());
    assert!(sample_microcanonical(&p, lo, &w, 10, 1.0, 4).is_err());
}

#[test]
fn single_precision_integration_runs() {
    let p = Preset::Regular100.potential().cast::<f32>();
    let s0 = PhaseState::new([0.1f32, 0.2], [0.5, 0.0]);
    let e0 = energy(&p, &s0, 1.0);
    let dt = default_dt(&p, e0.max(0.5), 1.0) * 10.0;
    let tr = integrate(
        &p,
        s0,
        &DynamicsConfig {
            mass: 1.0f32,
            dt,
            n_steps: 10_000,
            sample_stride: 100,
            seed: 0,
        },
    )
    .unwrap();
    assert!(tr.max_drift() < 1e-3);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn flat_histograms_have_no_peaks(level in 20u32..400, seed in 0u64..1000) {
        // Counts within a small fraction of their shot noise.
        let hist: Vec<u32> = (0..180).map(|i| level + ((i as u64 * 7919 + seed) % 3) as u32).collect();
        prop_assert!(find_peaks(&hist).is_empty());
    }

    #[test]
    fn spikes_are_located(at in 0usize..180, height in 200u32..1000) {
        let mut hist = vec![30u32; 180];
        hist[at] += height;
        let peaks = find_peaks(&hist);
        prop_assert!(!peaks.is_empty());
        let d = (peaks[0].angle_deg - (at as f64 + 0.5)).abs();
        prop_assert!(d.min(180.0 - d) < 0.5, "{} vs {}", peaks[0].angle_deg, at);
    }

    #[test]
    fn energy_is_conserved_for_short_runs(x in -20.0f64..20.0, y in -20.0f64..20.0, a in 0.0f64..std::f64::consts::TAU, s in 0.1f64..1.5) {
        let p = Preset::Regular100.potential();
        let s0 = PhaseState::new([x, y], [s * a.cos(), s * a.sin()]);
        let e0 = energy(&p, &s0, 1.0);
        let tr = integrate(&p, s0, &config(default_dt(&p, e0, 1.0), 20_000, 100)).unwrap();
        for s in &tr.states {
            prop_assert!((energy(&p, s, 1.0) - e0).abs() < 1e-8 * p.amplitude_sum());
        }
    }
}
