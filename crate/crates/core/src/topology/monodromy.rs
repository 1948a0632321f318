//! Integer displacement of open level lines under a full phase cycle of one wave.
//!
//! The potential is rotated so the mean direction of open lines is `+x`. Open lines
//! are then recorded by their crossings with the transversal `x = 0`, inside a window
//! elongated along `x`.

use serde::{Deserialize, Serialize};

use super::TopologyError;
use crate::levelset::geometry::pooled_direction;
use crate::levelset::{classify_component, extract_level_set, ComponentClass, Side, Window};
use crate::rationality::gcd;
use crate::Potential;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonodromyOptions {
    pub cells_per_period: usize,
    /// Initial phase steps per cycle; doubled on lost tracking.
    pub steps: usize,
    pub max_steps: usize,
    /// Window length along the lines, in longest periods.
    pub along_periods: f64,
    /// Window height across the lines, in longest periods.
    pub across_periods: f64,
    /// Window used to measure the direction when none is supplied, in longest periods.
    pub direction_periods: f64,
}

impl Default for MonodromyOptions {
    fn default() -> Self {
        Self {
            cells_per_period: 16,
            steps: 64,
            max_steps: 1024,
            along_periods: 8.0,
            across_periods: 8.0,
            direction_periods: 20.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonodromyRecord {
    /// Net displacement, in lines, per wave.
    pub n: Vec<i64>,
    /// Signed multiplicity with `n = big_m · m`.
    pub big_m: i64,
    /// Irreducible, first nonzero entry positive.
    pub m: Vec<i64>,
    /// Line direction the displacements were measured across.
    pub direction: [f64; 2],
    pub steps_used: Vec<usize>,
}

/// Splits `n = M·m` with `m` irreducible and its first nonzero entry positive.
pub fn split_multiplicity(n: &[i64]) -> Option<(i64, Vec<i64>)> {
    let g = n.iter().fold(0, |g, &x| gcd(g, x));
    if g == 0 {
        return None;
    }
    let first = *n.iter().find(|&&x| x != 0)?;
    let big_m = if first > 0 { g } else { -g };
    Some((big_m, n.iter().map(|&x| x / big_m).collect()))
}

/// Mean direction of open lines at `eps`, pooled over the spanning components of a
/// square window `periods` longest periods wide.
pub fn measure_direction(
    p: &Potential,
    eps: f64,
    periods: f64,
    cells_per_period: usize,
) -> Result<[f64; 2], TopologyError> {
    let w = Window::in_periods(p, periods);
    let comps = extract_level_set(p, eps, w, cells_per_period)?;
    let spanning: Vec<_> = comps
        .iter()
        .filter(|c| classify_component(c, &w) == ComponentClass::OpenSpanning)
        .collect();
    pooled_direction(&spanning).ok_or(TopologyError::NotRegular)
}

struct Frame {
    q: Potential,
    eps: f64,
    along: f64,
    across: f64,
    cells_per_period: usize,
}

impl Frame {
    /// Sorted crossings with `x = 0` of the lines joining the left and right edges of
    /// the window centered at `(0, y)`.
    fn crossings(
        &self,
        q: &Potential,
        y: f64,
        half_across: f64,
    ) -> Result<Vec<f64>, TopologyError> {
        let w = Window::new([0.0, y], [0.5 * self.along, half_across]);
        let comps = extract_level_set(q, self.eps, w, self.cells_per_period)?;
        let mut out = Vec::new();
        for c in &comps {
            if classify_component(c, &w) != ComponentClass::OpenSpanning {
                continue;
            }
            let ends = (w.side_of(c.points[0]), w.side_of(*c.points.last().unwrap()));
            if !matches!(
                ends,
                (Some(Side::Left), Some(Side::Right)) | (Some(Side::Right), Some(Side::Left))
            ) {
                continue;
            }
            let mut ys: Vec<f64> = c
                .points
                .windows(2)
                .filter(|s| (s[0][0] <= 0.0) != (s[1][0] <= 0.0))
                .map(|s| {
                    let t = s[0][0] / (s[0][0] - s[1][0]);
                    s[0][1] + t * (s[1][1] - s[0][1])
                })
                .collect();
            if ys.is_empty() {
                continue;
            }
            ys.sort_by(f64::total_cmp);
            out.push(ys[ys.len() / 2]);
        }
        out.sort_by(f64::total_cmp);
        Ok(out)
    }
}

fn nearest(list: &[f64], y: f64) -> Option<usize> {
    list.iter()
        .enumerate()
        .min_by(|a, b| (a.1 - y).abs().total_cmp(&(b.1 - y).abs()))
        .map(|(i, _)| i)
}

/// Index shift `o` aligning `cur[j + o]` with `prev[j]`, by median displacement over the
/// lines of `prev` inside `[-band, band]`. `None` when two shifts fit about equally.
fn best_shift(prev: &[f64], cur: &[f64], band: f64) -> Option<i64> {
    let mut costs: Vec<(f64, i64)> = Vec::new();
    for o in -3i64..=3 {
        let mut d: Vec<f64> = prev
            .iter()
            .enumerate()
            .filter(|(_, y)| y.abs() <= band)
            .filter_map(|(j, y)| {
                let k = j as i64 + o;
                (k >= 0 && (k as usize) < cur.len()).then(|| (cur[k as usize] - y).abs())
            })
            .collect();
        if d.len() < 3 {
            continue;
        }
        d.sort_by(f64::total_cmp);
        costs.push((d[d.len() / 2], o));
    }
    costs.sort_by(|a, b| a.0.total_cmp(&b.0));
    match costs.as_slice() {
        [] => None,
        [(_, o)] => Some(*o),
        [(c0, o), (c1, _), ..] => (*c0 < 0.5 * c1).then_some(*o),
    }
}

/// Open level lines never cross, so their order along the transversal is preserved
/// between phase steps and only the alignment of consecutive lists is unknown.
fn track_once(frame: &Frame, index: usize, steps: usize) -> Result<i64, TopologyError> {
    let half = 0.5 * frame.across;
    let band = 0.6 * half;
    let start = frame.crossings(&frame.q, 0.0, half)?;
    let i0 = nearest(&start, 0.0).ok_or(TopologyError::NotRegular)?;
    if start.iter().filter(|y| y.abs() <= band).count() < MIN_LINES {
        return Err(TopologyError::NotRegular);
    }
    let mut mark = i0 as i64;
    let mut prev = start.clone();
    let delta = frame.q.waves()[index].phase;
    for k in 1..=steps {
        let theta = delta + std::f64::consts::TAU * k as f64 / steps as f64;
        let cur = frame.crossings(&frame.q.with_phase(index, theta), 0.0, half)?;
        let o = best_shift(&prev, &cur, band).ok_or(TopologyError::TrackingLost { steps })?;
        mark += o;
        if mark < 0 || mark as usize >= cur.len() || cur[mark as usize].abs() > half - 0.5 * band {
            // Marked line left the window.
            return Err(TopologyError::TrackingLost { steps });
        }
        prev = cur;
    }
    if best_shift(&start, &prev, band) != Some(0) {
        return Err(TopologyError::TrackingLost { steps });
    }
    Ok(mark - i0 as i64)
}

/// Lines needed inside the central band of the transversal.
const MIN_LINES: usize = 5;

fn frame_for(
    p: &Potential,
    eps: f64,
    direction: [f64; 2],
    opts: &MonodromyOptions,
) -> Result<Frame, TopologyError> {
    let angle = direction[1].atan2(direction[0]);
    let period = p.longest_period();
    let mut frame = Frame {
        q: p.rotated(-angle),
        eps,
        along: opts.along_periods * period,
        across: opts.across_periods * period,
        cells_per_period: opts.cells_per_period,
    };
    for _ in 0..4 {
        let half = 0.5 * frame.across;
        let lines = frame.crossings(&frame.q, 0.0, half)?;
        if lines.iter().filter(|y| y.abs() <= 0.6 * half).count() >= MIN_LINES {
            break;
        }
        frame.across *= 2.0;
    }
    Ok(frame)
}

fn track(
    frame: &Frame,
    index: usize,
    opts: &MonodromyOptions,
) -> Result<(i64, usize), TopologyError> {
    let mut steps = opts.steps.max(64);
    loop {
        match track_once(frame, index, steps) {
            Err(TopologyError::TrackingLost { .. }) if steps * 2 <= opts.max_steps => steps *= 2,
            other => return other.map(|n| (n, steps)),
        }
    }
}

/// Net number of line positions an open line at `eps` moves while the phase of wave
/// `index` advances by `2π`. Counted positive towards the left of the measured
/// direction.
pub fn monodromy_numbers(
    p: &Potential,
    eps: f64,
    index: usize,
    steps: usize,
) -> Result<i64, TopologyError> {
    let opts = MonodromyOptions {
        steps,
        ..MonodromyOptions::default()
    };
    let l = measure_direction(p, eps, opts.direction_periods, opts.cells_per_period)?;
    track(&frame_for(p, eps, l, &opts)?, index, &opts).map(|(n, _)| n)
}

/// Monodromy numbers of every wave and their split `N = M·m`.
pub fn monodromy_record(
    p: &Potential,
    eps: f64,
    direction: Option<[f64; 2]>,
    opts: &MonodromyOptions,
) -> Result<MonodromyRecord, TopologyError> {
    let l = match direction {
        Some(l) => l,
        None => measure_direction(p, eps, opts.direction_periods, opts.cells_per_period)?,
    };
    let frame = frame_for(p, eps, l, opts)?;
    let mut n = Vec::with_capacity(p.dim());
    let mut steps_used = Vec::with_capacity(p.dim());
    for i in 0..p.dim() {
        let (ni, s) = track(&frame, i, opts)?;
        n.push(ni);
        steps_used.push(s);
    }
    let (big_m, m) = split_multiplicity(&n).ok_or(TopologyError::ZeroMonodromy)?;
    Ok(MonodromyRecord {
        n,
        big_m,
        m,
        direction: l,
        steps_used,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Wave;

    #[test]
    fn split_signs() {
        assert_eq!(split_multiplicity(&[-2, 0, 0]), Some((-2, vec![1, 0, 0])));
        assert_eq!(split_multiplicity(&[0, 4, -2]), Some((2, vec![0, 2, -1])));
        assert_eq!(split_multiplicity(&[0, 0]), None);
    }

    #[test]
    fn separable_shift_moves_two_lines() {
        // cos x + 0.5 cos y has two vertical open lines per period in x; a full cycle
        // of the first phase translates them by one period.
        let p = Potential::new(vec![
            Wave::new([1.0, 0.0], 1.0, 0.0),
            Wave::new([0.0, 1.0], 0.5, 0.0),
        ])
        .unwrap();
        let rec = monodromy_record(&p, 0.1, None, &MonodromyOptions::default()).unwrap();
        assert_eq!(rec.n[1], 0);
        assert_eq!(rec.n[0].abs(), 2);
        assert_eq!(rec.m, vec![1, 0]);
    }
}
