//! Run configuration files.
//!
//! ```toml
//! schema_version = 1
//! seed = 7
//!
//! [potential]
//! preset = "regular-100"
//!
//! [[stage]]
//! kind = "levelset"
//! eps = 0.0
//! ```

use quasilines::dynamics::{CensusOptions, DT_COEFFICIENT};
use quasilines::levelset::DEFAULT_CELLS_PER_PERIOD;
use quasilines::potential_file::PotentialFile;
use quasilines::topology::ClassifyBudget;
use quasilines::Potential;
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

/// Configs shipped with the tool, one per reference potential.
pub const BUNDLED: [(&str, &str); 3] = [
    ("regular-100", include_str!("../configs/regular-100.toml")),
    ("regular-111", include_str!("../configs/regular-111.toml")),
    ("chaotic", include_str!("../configs/chaotic.toml")),
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    #[serde(default)]
    pub seed: u64,
    pub potential: PotentialFile,
    #[serde(default, rename = "stage")]
    pub stages: Vec<StageConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum StageConfig {
    Eval(EvalStage),
    Levelset(LevelsetStage),
    Classify(ClassifyStage),
    ScanSphere(ScanStage),
    Simulate(SimulateStage),
    Census(CensusStage),
}

impl StageConfig {
    pub fn kind(&self) -> &'static str {
        match self {
            StageConfig::Eval(_) => "eval",
            StageConfig::Levelset(_) => "levelset",
            StageConfig::Classify(_) => "classify",
            StageConfig::ScanSphere(_) => "scan-sphere",
            StageConfig::Simulate(_) => "simulate",
            StageConfig::Census(_) => "census",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalStage {
    pub points: Vec<[f64; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LevelsetStage {
    pub eps: f64,
    /// Square window side, in longest periods.
    #[serde(default = "default_levelset_periods")]
    pub window_periods: f64,
    #[serde(default = "default_cells")]
    pub cells_per_period: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassifyStage {
    #[serde(default)]
    pub budget: ClassifyBudget,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanStage {
    pub level: u32,
    #[serde(default = "ClassifyBudget::scan")]
    pub budget: ClassifyBudget,
    /// Directions classified in addition to the subdivision samples.
    #[serde(default)]
    pub extra: Vec<[f64; 3]>,
    /// Samples classified between progress checkpoints.
    #[serde(default = "default_chunk")]
    pub chunk: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateStage {
    pub eps: f64,
    #[serde(default = "one_usize")]
    pub particles: usize,
    pub steps: usize,
    #[serde(default = "default_stride")]
    pub stride: usize,
    #[serde(default = "default_sample_periods")]
    pub window_periods: f64,
    #[serde(default = "default_dt_coefficient")]
    pub dt_coefficient: f64,
    #[serde(default = "one_f64")]
    pub mass: f64,
    /// Zone direction for parallel and perpendicular diffusion constants.
    #[serde(default)]
    pub reference_direction: Option<[f64; 2]>,
    /// Particles whose trajectory, section and MSD curve are written out.
    #[serde(default = "one_usize")]
    pub save_trajectories: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CensusStage {
    pub eps: f64,
    pub particles: usize,
    #[serde(default = "default_census_steps")]
    pub steps: usize,
    #[serde(default = "default_census_stride")]
    pub stride: usize,
    #[serde(default = "default_sample_periods")]
    pub window_periods: f64,
    #[serde(default = "default_census_dt")]
    pub dt_coefficient: f64,
    #[serde(default = "one_f64")]
    pub mass: f64,
}

impl CensusStage {
    pub fn options(&self, seed: u64) -> CensusOptions {
        CensusOptions {
            mass: self.mass,
            n_steps: self.steps,
            sample_stride: self.stride,
            window_periods: self.window_periods,
            dt_coefficient: self.dt_coefficient,
            seed,
        }
    }
}

fn default_levelset_periods() -> f64 {
    4.0
}
fn default_cells() -> usize {
    DEFAULT_CELLS_PER_PERIOD
}
fn default_chunk() -> usize {
    8
}
fn one_usize() -> usize {
    1
}
fn one_f64() -> f64 {
    1.0
}
fn default_stride() -> usize {
    10
}
fn default_sample_periods() -> f64 {
    10.0
}
fn default_dt_coefficient() -> f64 {
    DT_COEFFICIENT
}
fn default_census_steps() -> usize {
    CensusOptions::default().n_steps
}
fn default_census_stride() -> usize {
    CensusOptions::default().sample_stride
}
fn default_census_dt() -> f64 {
    CensusOptions::default().dt_coefficient
}

fn invalid(field: impl Into<String>, message: impl Into<String>) -> CliError {
    CliError::ConfigInvalid {
        field: field.into(),
        message: message.into(),
    }
}

fn positive(field: String, v: f64) -> Result<(), CliError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(invalid(
            field,
            format!("must be positive and finite, got {v}"),
        ))
    }
}

fn finite(field: String, v: f64) -> Result<(), CliError> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(invalid(field, format!("must be finite, got {v}")))
    }
}

fn nonzero(field: String, v: usize) -> Result<(), CliError> {
    if v > 0 {
        Ok(())
    } else {
        Err(invalid(field, "must be at least 1"))
    }
}

/// Best-effort field path for a deserialization error. Errors inside a tagged stage
/// span the whole table, so the unknown field is read from the message instead.
fn syntax_error_field(text: &str, e: &toml::de::Error) -> String {
    let span = e.span();
    let unknown = e
        .message()
        .strip_prefix("unknown field `")
        .and_then(|m| m.split('`').next());
    let stage = span.clone().and_then(|s| {
        text[..s.start.min(text.len())]
            .matches("[[stage]]")
            .count()
            .checked_sub(1)
    });
    let local = match (unknown, &span) {
        (Some(name), _) => name.to_string(),
        (None, Some(s)) => text[s.clone()].trim().to_string(),
        (None, None) => String::new(),
    };
    match stage {
        Some(i) if !local.starts_with("[[stage]]") => format!("stage[{i}].{local}"),
        Some(i) => format!("stage[{i}]"),
        None => local,
    }
}

impl RunConfig {
    /// Parses and validates; errors name the offending field.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = toml::from_str(text)
            .map_err(|e| invalid(syntax_error_field(text, &e), e.message().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn bundled(name: &str) -> Option<Self> {
        BUNDLED
            .iter()
            .find(|(n, _)| *n == name)
            .map(|(_, text)| Self::parse(text).expect("bundled configs are valid"))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn build_potential(&self) -> Result<Potential, CliError> {
        self.potential
            .build()
            .map_err(|e| invalid("potential", e.to_string()))
    }

    pub fn validate(&self) -> Result<(), CliError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(invalid(
                "schema_version",
                format!(
                    "unsupported version {}, expected {SCHEMA_VERSION}",
                    self.schema_version
                ),
            ));
        }
        self.build_potential()?;
        for (i, stage) in self.stages.iter().enumerate() {
            let f = |name: &str| format!("stage[{i}].{name}");
            match stage {
                StageConfig::Eval(s) => {
                    for (j, p) in s.points.iter().enumerate() {
                        finite(f(&format!("points[{j}]")), p[0] + p[1])?;
                    }
                }
                StageConfig::Levelset(s) => {
                    finite(f("eps"), s.eps)?;
                    positive(f("window_periods"), s.window_periods)?;
                    if s.cells_per_period < 8 {
                        return Err(invalid(f("cells_per_period"), "must be at least 8"));
                    }
                }
                StageConfig::Classify(s) => validate_budget(&s.budget, &f("budget"))?,
                StageConfig::ScanSphere(s) => {
                    if s.level > 8 {
                        return Err(invalid(f("level"), "must be at most 8"));
                    }
                    validate_budget(&s.budget, &f("budget"))?;
                    nonzero(f("chunk"), s.chunk)?;
                    for (j, n) in s.extra.iter().enumerate() {
                        let norm = n.iter().map(|x| x * x).sum::<f64>().sqrt();
                        positive(format!("stage[{i}].extra[{j}]"), norm)?;
                    }
                }
                StageConfig::Simulate(s) => {
                    finite(f("eps"), s.eps)?;
                    nonzero(f("particles"), s.particles)?;
                    nonzero(f("steps"), s.steps)?;
                    nonzero(f("stride"), s.stride)?;
                    positive(f("window_periods"), s.window_periods)?;
                    positive(f("dt_coefficient"), s.dt_coefficient)?;
                    positive(f("mass"), s.mass)?;
                    if s.dt_coefficient > quasilines::dynamics::DT_MAX_COEFFICIENT {
                        return Err(invalid(
                            f("dt_coefficient"),
                            format!(
                                "must not exceed {}",
                                quasilines::dynamics::DT_MAX_COEFFICIENT
                            ),
                        ));
                    }
                    if let Some(d) = s.reference_direction {
                        positive(f("reference_direction"), d[0].hypot(d[1]))?;
                    }
                }
                StageConfig::Census(s) => {
                    finite(f("eps"), s.eps)?;
                    nonzero(f("particles"), s.particles)?;
                    nonzero(f("steps"), s.steps)?;
                    nonzero(f("stride"), s.stride)?;
                    positive(f("window_periods"), s.window_periods)?;
                    positive(f("dt_coefficient"), s.dt_coefficient)?;
                    positive(f("mass"), s.mass)?;
                    if s.dt_coefficient > quasilines::dynamics::DT_MAX_COEFFICIENT {
                        return Err(invalid(
                            f("dt_coefficient"),
                            format!(
                                "must not exceed {}",
                                quasilines::dynamics::DT_MAX_COEFFICIENT
                            ),
                        ));
                    }
                }
            }
        }
        Ok(())
    }
}

fn validate_budget(b: &ClassifyBudget, path: &str) -> Result<(), CliError> {
    let f = |name: &str| format!("{path}.{name}");
    positive(f("tol"), b.tol)?;
    positive(f("fit_tol"), b.fit_tol)?;
    nonzero(f("max_grid_samples"), b.max_grid_samples)?;
    nonzero(f("max_total_samples"), b.max_total_samples)?;
    if b.cells_per_period < 8 {
        return Err(invalid(f("cells_per_period"), "must be at least 8"));
    }
    if b.min_periods <= 0.0 || b.max_periods < b.min_periods {
        return Err(invalid(
            f("max_periods"),
            "need 0 < min_periods <= max_periods",
        ));
    }
    nonzero(f("max_coeff"), b.max_coeff as usize)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_configs_parse() {
        for (name, _) in BUNDLED {
            let cfg = RunConfig::bundled(name).unwrap();
            assert_eq!(cfg.stages.len(), 1);
            assert_eq!(cfg.potential.waves.as_ref().unwrap().len(), 3);
        }
    }

    #[test]
    fn unknown_field_is_named() {
        let text = "schema_version = 1\n[potential]\npreset = \"chaotic\"\n[[stage]]\nkind = \"levelset\"\neps = 0.0\nwindow = 3\n";
        match RunConfig::parse(text) {
            Err(CliError::ConfigInvalid { message, .. }) => {
                assert!(message.contains("window"), "{message}")
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn semantic_errors_carry_the_path() {
        let text = "schema_version = 1\n[potential]\npreset = \"chaotic\"\n[[stage]]\nkind = \"simulate\"\neps = 0.0\nsteps = 0\n";
        match RunConfig::parse(text) {
            Err(CliError::ConfigInvalid { field, .. }) => assert_eq!(field, "stage[0].steps"),
            other => panic!("{other:?}"),
        }
        let text = "schema_version = 2\n[potential]\npreset = \"chaotic\"\n";
        assert!(
            matches!(RunConfig::parse(text), Err(CliError::ConfigInvalid { field, .. }) if field == "schema_version")
        );
    }

    #[test]
    fn round_trips_through_toml() {
        let cfg = RunConfig::bundled("chaotic").unwrap();
        assert_eq!(RunConfig::parse(&cfg.to_toml()).unwrap(), cfg);
    }
}
