//! Run directories: one subdirectory per stage and a `manifest.json` recording the
//! resolved config, stage status and artifact hashes.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::io::{sha256_hex, to_json, write_atomic};
use crate::stages::{run_stage, StageOutput};
use crate::CliError;

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StageStatus {
    Pending,
    Done,
    /// Completed, but every verdict it produced was undetermined.
    Undetermined,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub index: usize,
    pub kind: String,
    pub status: StageStatus,
    pub message: Option<String>,
    /// Path relative to the run directory → SHA-256 of the content.
    pub artifacts: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub seed: u64,
    pub config: RunConfig,
    pub started_unix: u64,
    pub finished_unix: Option<u64>,
    pub stages: Vec<StageRecord>,
}

impl RunManifest {
    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| CliError::ConfigInvalid {
            field: "manifest".into(),
            message: e.to_string(),
        })
    }

    /// All artifact hashes across stages.
    pub fn artifact_hashes(&self) -> BTreeMap<String, String> {
        self.stages
            .iter()
            .flat_map(|s| s.artifacts.clone())
            .collect()
    }

    fn write(&self, dir: &Path) -> Result<(), CliError> {
        write_atomic(&dir.join(MANIFEST_FILE), &to_json(self))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RunOptions {
    /// Ignore any previous manifest in the output directory.
    pub fresh: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub manifest: RunManifest,
    pub dir: PathBuf,
    /// Stages skipped because a previous run completed them.
    pub reused: Vec<usize>,
}

impl RunOutcome {
    /// [`crate::exit::UNDETERMINED`] when some stage produced only undetermined verdicts.
    pub fn exit_code(&self) -> i32 {
        if self
            .manifest
            .stages
            .iter()
            .any(|s| s.status == StageStatus::Undetermined)
        {
            crate::exit::UNDETERMINED
        } else {
            crate::exit::SUCCESS
        }
    }
}

fn now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

pub fn stage_dir_name(index: usize, kind: &str) -> String {
    format!("{index:02}-{kind}")
}

fn verified(dir: &Path, rec: &StageRecord) -> bool {
    matches!(rec.status, StageStatus::Done | StageStatus::Undetermined)
        && rec.artifacts.iter().all(|(name, hash)| {
            std::fs::read(dir.join(name)).is_ok_and(|b| sha256_hex(&b) == *hash)
        })
}

/// Executes the stages of `cfg` in order inside `dir`. Stages completed by an earlier
/// run with the same config, whose artifacts still match their hashes, are kept.
pub fn run(cfg: &RunConfig, dir: &Path, opts: RunOptions) -> Result<RunOutcome, CliError> {
    cfg.validate()?;
    let potential = cfg.build_potential()?;
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let previous = if opts.fresh {
        None
    } else {
        RunManifest::read(&dir.join(MANIFEST_FILE)).ok()
    };
    let previous = previous.filter(|m| m.config == *cfg);

    let mut manifest = RunManifest {
        tool: env!("CARGO_PKG_NAME").to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        seed: cfg.seed,
        config: cfg.clone(),
        started_unix: now(),
        finished_unix: None,
        stages: cfg
            .stages
            .iter()
            .enumerate()
            .map(|(index, s)| StageRecord {
                index,
                kind: s.kind().to_string(),
                status: StageStatus::Pending,
                message: None,
                artifacts: BTreeMap::new(),
            })
            .collect(),
    };
    let mut reused = Vec::new();
    if let Some(prev) = &previous {
        for (rec, old) in manifest.stages.iter_mut().zip(&prev.stages) {
            if verified(dir, old) {
                *rec = old.clone();
                reused.push(rec.index);
            }
        }
    }
    manifest.write(dir)?;

    for (index, stage) in cfg.stages.iter().enumerate() {
        if reused.contains(&index) {
            continue;
        }
        let sub = stage_dir_name(index, stage.kind());
        let stage_dir = dir.join(&sub);
        match run_stage(&potential, cfg.seed, index, stage, &stage_dir) {
            Ok(StageOutput {
                files,
                undetermined,
                message,
            }) => {
                let rec = &mut manifest.stages[index];
                for (name, bytes) in files {
                    write_atomic(&stage_dir.join(&name), &bytes)?;
                    rec.artifacts
                        .insert(format!("{sub}/{name}"), sha256_hex(&bytes));
                }
                rec.status = if undetermined {
                    StageStatus::Undetermined
                } else {
                    StageStatus::Done
                };
                rec.message = message;
                manifest.write(dir)?;
            }
            Err(e) => {
                let rec = &mut manifest.stages[index];
                rec.status = StageStatus::Failed;
                rec.message = Some(e.to_string());
                manifest.write(dir)?;
                return Err(CliError::StageFailed {
                    index,
                    kind: stage.kind().to_string(),
                    message: e.to_string(),
                });
            }
        }
    }
    manifest.finished_unix = Some(now());
    manifest.write(dir)?;
    Ok(RunOutcome {
        manifest,
        dir: dir.to_path_buf(),
        reused,
    })
}
