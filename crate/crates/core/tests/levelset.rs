use std::f64::consts::PI;

use quasilines::levelset::geometry::growth_ratio;
use quasilines::levelset::{
    classify_component, extract_level_set, open_line_interval, strip_deviation_growth,
    sublevel_region, ComponentClass, Window,
};
use quasilines::potential_file::PotentialFile;
use quasilines::presets::Preset;
use quasilines::{Potential, WaveSpec};

fn cos_x_cos_y() -> Potential {
    Potential::from_coefficients(&[[1.0, 0.0, 0.0], [0.0, 1.0, 0.0]]).unwrap()
}

fn single_cosine() -> Potential {
    Potential::new(vec![WaveSpec::new([1.0, 0.0], 1.0, 0.0)]).unwrap()
}

/// Solutions of `cos x = eps` strictly inside `(lo, hi)`.
fn cosine_roots(eps: f64, lo: f64, hi: f64) -> usize {
    let a = eps.acos();
    let mut count = 0;
    let first = ((lo - a) / (2.0 * PI)).floor() as i64 - 1;
    let last = ((hi + a) / (2.0 * PI)).ceil() as i64 + 1;
    for n in first..=last {
        for x in [a + 2.0 * PI * n as f64, -a + 2.0 * PI * n as f64] {
            if lo < x && x < hi {
                count += 1;
            }
        }
    }
    count
}

#[test]
fn vertices_lie_on_the_level() {
    for preset in Preset::ALL {
        let p = preset.potential();
        for eps in [-0.6, 0.0, 0.45] {
            let comps = extract_level_set(&p, eps, Window::in_periods(&p, 4.0), 16).unwrap();
            assert!(!comps.is_empty());
            for c in &comps {
                for &r in &c.points {
                    assert!(
                        (p.evaluate(r) - eps).abs() < 1e-8,
                        "{} eps={eps}: V={}",
                        preset.name(),
                        p.evaluate(r)
                    );
                }
            }
        }
    }
}

#[test]
fn component_invariants_hold() {
    let p = Preset::Regular111.potential();
    let w = Window::in_periods(&p, 6.0);
    for c in extract_level_set(&p, 0.2, w, 16).unwrap() {
        assert!(c.strip_deviation >= 0.0);
        if c.closed {
            assert_eq!(c.points.first(), c.points.last());
            assert!(!c.touches_boundary);
        }
        let spans = classify_component(&c, &w) == ComponentClass::OpenSpanning;
        assert_eq!(c.mean_direction.is_some(), spans);
    }
}

#[test]
fn minima_ovals_match_the_separable_oracle() {
    // cos x + cos y = -1 encloses one oval per minimum at (π + 2πi, π + 2πj), reaching
    // π/2 from it along the axes; the window below holds 2 × 2 of them and meets no
    // other.
    let p = cos_x_cos_y();
    let w = Window::square([2.0 * PI, 2.0 * PI], 2.0 * PI - 0.2);
    let comps = extract_level_set(&p, -1.0, w, 24).unwrap();
    assert_eq!(comps.len(), 4);
    for c in &comps {
        assert!(c.closed);
        let n = c.points.len() as f64;
        let cx = c.points.iter().map(|q| q[0]).sum::<f64>() / n;
        let cy = c.points.iter().map(|q| q[1]).sum::<f64>() / n;
        let near = |x: f64| ((x - PI) / (2.0 * PI)).round() * 2.0 * PI + PI;
        assert!((cx - near(cx)).abs() < 0.05 && (cy - near(cy)).abs() < 0.05);
    }
}

#[test]
fn singular_net_touches_the_boundary() {
    let p = cos_x_cos_y();
    let w = Window::square([0.3, 0.7], 4.0 * PI);
    let comps = extract_level_set(&p, 0.0, w, 32).unwrap();
    assert!(!comps.is_empty());
    assert!(comps.iter().all(|c| !c.closed && c.touches_boundary));
}

#[test]
fn single_cosine_lines_are_straight_and_counted() {
    let p = single_cosine();
    let w = Window::square([0.4, -1.3], 5.0 * PI);
    for eps in [-0.9, -0.3, 0.0, 0.5, 0.95] {
        let comps = extract_level_set(&p, eps, w, 32).unwrap();
        let lo = w.center[0] - w.half_extent[0];
        let hi = w.center[0] + w.half_extent[0];
        assert_eq!(comps.len(), cosine_roots(eps, lo, hi), "eps={eps}");
        for c in &comps {
            assert_eq!(classify_component(c, &w), ComponentClass::OpenSpanning);
            assert!(c.strip_deviation < 1e-9, "eps={eps}: {}", c.strip_deviation);
            let d = c.mean_direction.unwrap();
            assert!(d[0].abs() < 1e-9);
        }
    }
}

#[test]
fn single_cosine_deviation_stays_zero() {
    let p = single_cosine();
    let windows: Vec<Window> = [4.0, 8.0, 16.0]
        .iter()
        .map(|&n| Window::in_periods(&p, n))
        .collect();
    let samples = strip_deviation_growth(&p, 0.3, &windows).unwrap();
    for s in &samples {
        assert!(s.max_deviation.unwrap() < 1e-9);
    }
}

#[test]
fn plateau_inside_a_zone() {
    // A weak incommensurate third wave keeps the level lines of cos x + cos y near 0 in
    // bounded strips.
    let golden = PI * (3.0 - 5f64.sqrt());
    let p = Potential::new(vec![
        WaveSpec::new([1.0, 0.0], 1.0, 0.0),
        WaveSpec::new([0.0, 1.0], 1.0, 0.0),
        WaveSpec::new([golden.cos(), golden.sin()], 0.1, 0.3),
    ])
    .unwrap();
    let windows: Vec<Window> = [10.0, 20.0, 40.0]
        .iter()
        .map(|&n| Window::in_periods(&p, n))
        .collect();
    let samples = strip_deviation_growth(&p, 0.05, &windows).unwrap();
    let ratio = growth_ratio(&samples).unwrap();
    assert!(ratio < 1.5, "ratio {ratio}: {samples:?}");
}

#[test]
fn chaotic_preset_has_no_spanning_line_above_the_interval() {
    let p = Preset::Chaotic.potential();
    for periods in [10.0, 20.0] {
        let w = Window::in_periods(&p, periods);
        let comps = extract_level_set(&p, 0.3, w, 12).unwrap();
        assert!(comps
            .iter()
            .all(|c| classify_component(c, &w) != ComponentClass::OpenSpanning));
    }
}

#[test]
fn sublevel_extremes() {
    let p = Preset::Regular100.potential();
    let w = Window::in_periods(&p, 4.0);
    let [lo, hi] = p.value_bounds();
    let empty = sublevel_region(&p, lo - 0.1, w, 12).unwrap();
    assert!(empty.regions.is_empty() && empty.labels.iter().all(|&l| l == 0));
    let full = sublevel_region(&p, hi + 0.1, w, 12).unwrap();
    assert_eq!(full.regions.len(), 1);
    assert!(full.spans_horizontal && full.spans_vertical);
}

#[test]
fn sublevel_labels_partition_the_cells() {
    let p = Preset::Regular111.potential();
    let s = sublevel_region(&p, 0.1, Window::in_periods(&p, 6.0), 12).unwrap();
    let total: usize = s.regions.iter().map(|r| r.cells).sum();
    assert_eq!(total, s.labels.iter().filter(|&&l| l != 0).count());
    for j in 0..s.ny {
        for i in 0..s.nx {
            assert_eq!(s.occupied(i, j), p.evaluate(s.cell_center(i, j)) <= 0.1);
        }
    }
    assert_eq!(
        s.spans_horizontal,
        s.regions.iter().any(|r| r.spans_horizontal)
    );
}

#[test]
fn chaotic_preset_sublevel_changes_character_across_zero() {
    // The periodic strips run close to horizontal, so vertical crossing needs a few
    // dozen periods.
    let p = Preset::Chaotic.potential();
    let w = Window::in_periods(&p, 24.0);
    let below = sublevel_region(&p, -0.05, w, 12).unwrap();
    let above = sublevel_region(&p, 0.05, w, 12).unwrap();
    assert!(!below.spans_horizontal && !below.spans_vertical);
    assert!(above.spans_horizontal && above.spans_vertical);
}

#[test]
fn separable_sublevel_percolates_only_above_zero() {
    let p = cos_x_cos_y();
    let w = Window::square([0.3, 0.7], 6.0 * PI);
    let above = sublevel_region(&p, 0.5, w, 16).unwrap();
    let below = sublevel_region(&p, -0.5, w, 16).unwrap();
    assert!(above.spans_horizontal && above.spans_vertical);
    assert!(!below.spans_horizontal && !below.spans_vertical);
}

#[test]
fn interval_is_ordered_and_mirrors_under_negation() {
    let p = Preset::Regular100.potential();
    let w = Window::in_periods(&p, 24.0);
    let a = open_line_interval(&p, w, 2e-3).unwrap();
    let b = open_line_interval(&p.negated(), w, 2e-3).unwrap();
    let [lo, hi] = p.value_bounds();
    assert!(lo < a.v1 && a.v1 <= a.v2 && a.v2 < hi);
    assert!(!a.degenerate);
    assert!(
        (b.v1 + a.v2).abs() < 5e-3 && (b.v2 + a.v1).abs() < 5e-3,
        "{a:?} vs {b:?}"
    );
}

#[test]
fn single_cosine_interval_is_the_full_range() {
    let p = single_cosine();
    let est = open_line_interval(&p, Window::in_periods(&p, 8.0), 1e-3).unwrap();
    assert!(est.v1 < -0.99 && est.v2 > 0.99, "{est:?}");
}

#[test]
fn potential_file_round_trips() {
    for preset in Preset::ALL {
        let p = preset.potential();
        let text = PotentialFile::from_potential(&p).to_toml();
        let q = PotentialFile::parse(&text).unwrap().build().unwrap();
        for r in [[0.0, 0.0], [1.7, -3.2], [40.0, 11.0]] {
            assert_eq!(p.evaluate(r), q.evaluate(r));
        }
    }
}
