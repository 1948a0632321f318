//! Stage runners. Each returns the files it produced; the caller writes them
//! atomically and records their hashes.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{bail, Context};
use quasilines::dynamics::{
    ballistic_census, census::axis_angle_deg, integrate, poincare_section, regime_classify,
    sample_microcanonical, scaled_dt, CensusReport, DynamicsConfig, PhaseState, RegimeContext,
    RegimeReport, Section,
};
use quasilines::levelset::{
    classify_component, extract_level_set, sublevel_region, ComponentClass, LevelComponent, Window,
};
use quasilines::topology::{
    classify_direction, classify_potential, scan_directions, zone_svg, ClassifyBudget, ZoneRecord,
};
use quasilines::{Potential, SphereDirection};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{CensusStage, LevelsetStage, ScanStage, SimulateStage, StageConfig};
use crate::io::{to_csv, to_json, write_atomic};
use crate::render::{render_bytes, PlotKind, PlotSpec};

pub struct StageOutput {
    /// `(file name, content)` in the stage directory.
    pub files: Vec<(String, Vec<u8>)>,
    pub undetermined: bool,
    pub message: Option<String>,
}

impl StageOutput {
    fn new() -> Self {
        Self {
            files: Vec::new(),
            undetermined: false,
            message: None,
        }
    }

    fn add(&mut self, name: impl Into<String>, bytes: Vec<u8>) {
        self.files.push((name.into(), bytes));
    }

    /// Adds `data` and the plot rendered from it.
    fn add_plotted(
        &mut self,
        name: &str,
        data: Vec<u8>,
        kind: PlotKind,
        plot: &str,
    ) -> anyhow::Result<()> {
        let svg = render_bytes(&PlotSpec::new(kind), &data)?;
        self.add(name, data);
        self.add(plot, svg.into_bytes());
        Ok(())
    }
}

/// Per-stage seed, split from the run seed by stage index (SplitMix64 finalizer).
pub fn stage_seed(seed: u64, index: usize) -> u64 {
    let mut z = seed.wrapping_add((index as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn run_stage(
    p: &Potential,
    seed: u64,
    index: usize,
    stage: &StageConfig,
    dir: &Path,
) -> anyhow::Result<StageOutput> {
    let seed = stage_seed(seed, index);
    match stage {
        StageConfig::Eval(s) => {
            let mut out = StageOutput::new();
            let rows = s.points.iter().map(|&r| {
                let (v, g) = p.value_and_gradient(r);
                vec![r[0], r[1], v, g[0], g[1]]
            });
            out.add("eval.csv", to_csv(&["x", "y", "V", "dVdx", "dVdy"], rows));
            Ok(out)
        }
        StageConfig::Levelset(s) => levelset_stage(p, s),
        StageConfig::Classify(s) => {
            let report = classify_potential(p, &s.budget)?;
            let mut out = StageOutput::new();
            out.undetermined = report.verdict.label() == "undetermined";
            out.message = Some(report.verdict.label().to_string());
            out.add("classification.json", to_json(&report));
            Ok(out)
        }
        StageConfig::ScanSphere(s) => scan_stage(s, seed, dir),
        StageConfig::Simulate(s) => simulate_stage(p, s, seed),
        StageConfig::Census(s) => census_stage(p, s, seed),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelsetData {
    pub eps: f64,
    pub window: Window,
    pub cells_per_period: usize,
    pub closed: usize,
    pub open_spanning: usize,
    pub truncated: usize,
    pub classes: Vec<ComponentClass>,
    pub components: Vec<LevelComponent>,
}

/// `{V ≤ ε}` on the cell lattice as horizontal runs `[row, first, end)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SublevelData {
    pub eps: f64,
    pub window: Window,
    pub nx: usize,
    pub ny: usize,
    pub regions: usize,
    pub spans_horizontal: bool,
    pub spans_vertical: bool,
    pub runs: Vec<[usize; 3]>,
}

fn levelset_stage(p: &Potential, s: &LevelsetStage) -> anyhow::Result<StageOutput> {
    let w = Window::in_periods(p, s.window_periods);
    let components = extract_level_set(p, s.eps, w, s.cells_per_period)?;
    let classes: Vec<ComponentClass> = components
        .iter()
        .map(|c| classify_component(c, &w))
        .collect();
    let count = |k: ComponentClass| classes.iter().filter(|&&c| c == k).count();
    let data = LevelsetData {
        eps: s.eps,
        window: w,
        cells_per_period: s.cells_per_period,
        closed: count(ComponentClass::Closed),
        open_spanning: count(ComponentClass::OpenSpanning),
        truncated: count(ComponentClass::Truncated),
        classes,
        components,
    };
    let lab = sublevel_region(p, s.eps, w, s.cells_per_period)?;
    let mut runs = Vec::new();
    for j in 0..lab.ny {
        let mut i = 0;
        while i < lab.nx {
            if lab.occupied(i, j) {
                let start = i;
                while i < lab.nx && lab.occupied(i, j) {
                    i += 1;
                }
                runs.push([j, start, i]);
            } else {
                i += 1;
            }
        }
    }
    let sub = SublevelData {
        eps: s.eps,
        window: w,
        nx: lab.nx,
        ny: lab.ny,
        regions: lab.regions.len(),
        spans_horizontal: lab.spans_horizontal,
        spans_vertical: lab.spans_vertical,
        runs,
    };
    let mut out = StageOutput::new();
    out.message = Some(format!(
        "{} closed, {} open, {} truncated",
        data.closed, data.open_spanning, data.truncated
    ));
    out.add_plotted(
        "levelset.json",
        to_json(&data),
        PlotKind::Levelset,
        "levelset.svg",
    )?;
    out.add_plotted(
        "sublevel.json",
        to_json(&sub),
        PlotKind::Sublevel,
        "sublevel.svg",
    )?;
    Ok(out)
}

pub const PROGRESS_FILE: &str = "progress.json";

/// Checkpoint of a sphere scan: completed sample indices and their records.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanProgress {
    pub level: u32,
    pub seed: u64,
    pub budget: ClassifyBudget,
    pub total: usize,
    pub completed: Vec<usize>,
    pub records: Vec<ZoneRecord>,
}

/// Classifies the scan directions in chunks, checkpointing to `progress.json` after
/// each chunk; a compatible checkpoint in `dir` is resumed.
pub fn scan_stage(s: &ScanStage, seed: u64, dir: &Path) -> anyhow::Result<StageOutput> {
    let extra: Vec<SphereDirection> = s
        .extra
        .iter()
        .map(|&n| SphereDirection::normalized(n))
        .collect::<Result<_, _>>()?;
    let dirs = scan_directions(s.level, &extra);
    let path = dir.join(PROGRESS_FILE);
    let fresh = ScanProgress {
        level: s.level,
        seed,
        budget: s.budget,
        total: dirs.len(),
        completed: Vec::new(),
        records: Vec::new(),
    };
    let mut progress = std::fs::read(&path)
        .ok()
        .and_then(|b| serde_json::from_slice::<ScanProgress>(&b).ok())
        .filter(|p| {
            p.level == fresh.level
                && p.seed == fresh.seed
                && p.budget == fresh.budget
                && p.total == fresh.total
        })
        .unwrap_or(fresh);
    let pending: Vec<usize> = (0..dirs.len())
        .filter(|i| !progress.completed.contains(i))
        .collect();
    for chunk in pending.chunks(s.chunk) {
        let recs: Vec<ZoneRecord> = chunk
            .par_iter()
            .map(|&i| classify_direction(i, dirs[i], &s.budget, seed))
            .collect();
        progress.records.extend(recs);
        progress.completed.extend_from_slice(chunk);
        progress.records.sort_by_key(|r| r.index);
        progress.completed.sort_unstable();
        write_atomic(&path, &to_json(&progress)).context("writing scan checkpoint")?;
    }
    let mut out = StageOutput::new();
    let regular = progress
        .records
        .iter()
        .filter(|r| r.verdict == "regular")
        .count();
    out.undetermined = progress.records.iter().all(|r| r.verdict == "undetermined");
    out.message = Some(format!(
        "{regular} of {} directions regular",
        progress.records.len()
    ));
    out.add("zones.json", to_json(&progress.records));
    out.add("zones.svg", zone_svg(&progress.records).into_bytes());
    out.add(PROGRESS_FILE, to_json(&progress));
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParticleResult {
    pub index: usize,
    pub initial: PhaseState<f64>,
    pub max_drift: Option<f64>,
    /// Regime label, `aborted` or `unclassified`.
    pub verdict: String,
    pub error: Option<String>,
    pub report: Option<RegimeReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulateData {
    pub eps: f64,
    pub dt: f64,
    pub counts: BTreeMap<String, usize>,
    pub particles: Vec<ParticleResult>,
}

fn simulate_stage(p: &Potential, s: &SimulateStage, seed: u64) -> anyhow::Result<StageOutput> {
    let w = Window::in_periods(p, s.window_periods);
    let starts = sample_microcanonical(p, s.eps, &w, s.particles, s.mass, seed)?;
    let cfg = DynamicsConfig {
        mass: s.mass,
        dt: scaled_dt(p, s.eps, s.mass, s.dt_coefficient),
        n_steps: s.steps,
        sample_stride: s.stride,
        seed,
    };
    let mut ctx = RegimeContext::new(p);
    ctx.reference_direction = s.reference_direction;
    let results: Vec<(ParticleResult, Vec<(String, Vec<u8>)>)> = starts
        .par_iter()
        .enumerate()
        .map(|(index, &s0)| {
            let mut res = ParticleResult {
                index,
                initial: s0,
                max_drift: None,
                verdict: "aborted".into(),
                error: None,
                report: None,
            };
            let traj = match integrate(p, s0, &cfg) {
                Ok(t) => t,
                Err(a) => {
                    res.error = Some(a.error.to_string());
                    return (res, Vec::new());
                }
            };
            res.max_drift = Some(traj.max_drift());
            match regime_classify(&traj, &ctx) {
                Ok(r) => {
                    res.verdict = r.verdict.label().to_string();
                    res.report = Some(r);
                }
                Err(e) => {
                    res.verdict = "unclassified".into();
                    res.error = Some(e.to_string());
                }
            }
            let mut files = Vec::new();
            if index < s.save_trajectories {
                let rows = traj
                    .states
                    .iter()
                    .map(|st| vec![st.t, st.r[0], st.r[1], st.p[0], st.p[1]]);
                files.push((
                    format!("trajectory-{index:03}.csv"),
                    to_csv(&["t", "x", "y", "px", "py"], rows),
                ));
                let y0 =
                    traj.states.iter().map(|st| st.r[1]).sum::<f64>() / traj.states.len() as f64;
                if let Ok(sec) = poincare_section(p, &traj, &Section { y0, period: None }) {
                    let rows = sec.points.iter().map(|q| vec![q[0], q[1]]);
                    files.push((
                        format!("section-{index:03}.csv"),
                        to_csv(&["x", "px"], rows),
                    ));
                }
                if let Some(msd) = res.report.as_ref().and_then(|r| r.msd.as_ref()) {
                    let rows = msd.curve.iter().map(|&(t, a, b)| vec![t, a, b]);
                    files.push((
                        format!("msd-{index:03}.csv"),
                        to_csv(&["lag", "msd_parallel", "msd_perp"], rows),
                    ));
                }
            }
            (res, files)
        })
        .collect();
    let mut out = StageOutput::new();
    let mut counts = BTreeMap::new();
    let mut particles = Vec::new();
    for (res, files) in results {
        *counts.entry(res.verdict.clone()).or_insert(0) += 1;
        particles.push(res);
        for (name, bytes) in files {
            let kind = if name.starts_with("trajectory") {
                Some(PlotKind::Trajectory)
            } else if name.starts_with("section") {
                Some(PlotKind::Section)
            } else {
                None
            };
            if let Some(kind) = kind {
                let svg = render_bytes(&PlotSpec::new(kind), &bytes)?;
                out.add(name.replace(".csv", ".svg"), svg.into_bytes());
            }
            out.add(name, bytes);
        }
    }
    if particles.iter().all(|r| r.verdict == "aborted") {
        bail!(
            "every trajectory aborted: {}",
            particles[0].error.as_deref().unwrap_or("unknown")
        );
    }
    out.message = Some(
        counts
            .iter()
            .map(|(k, v)| format!("{k} {v}"))
            .collect::<Vec<_>>()
            .join(", "),
    );
    let data = SimulateData {
        eps: s.eps,
        dt: cfg.dt,
        counts,
        particles,
    };
    out.add("regimes.json", to_json(&data));
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CensusData {
    pub eps: f64,
    /// Directions of the level lines of the individual waves, degrees in `[0, 180)`.
    pub level_line_angles: Vec<f64>,
    pub report: CensusReport,
}

fn census_stage(p: &Potential, s: &CensusStage, seed: u64) -> anyhow::Result<StageOutput> {
    let report = ballistic_census(p, s.eps, s.particles, &s.options(seed))?;
    let level_line_angles = p
        .wavevectors()
        .iter()
        .map(|k| axis_angle_deg([-k[1], k[0]]))
        .collect();
    let mut out = StageOutput::new();
    out.message = Some(format!(
        "{} of {} ballistic, {} peaks",
        report.selected,
        report.total,
        report.peaks.len()
    ));
    let rows: Vec<Vec<f64>> = report
        .histogram
        .iter()
        .enumerate()
        .map(|(i, &c)| {
            let w = 180.0 / report.histogram.len() as f64;
            vec![i as f64 * w, (i + 1) as f64 * w, c as f64]
        })
        .collect();
    out.add(
        "census.csv",
        to_csv(&["angle_lo", "angle_hi", "count"], rows),
    );
    let data = CensusData {
        eps: s.eps,
        level_line_angles,
        report,
    };
    out.add_plotted(
        "census.json",
        to_json(&data),
        PlotKind::Histogram,
        "census.svg",
    )?;
    Ok(out)
}
