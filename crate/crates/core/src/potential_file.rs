//! Potential description files (TOML).
//!
//! ```toml
//! [[waves]]
//! kx = 1.0
//! ky = 0.0
//! amplitude = 1.0
//! phase = 0.0
//! ```
//!
//! or `sphere_direction = [nx, ny, nz]` with optional `phases = [δ1, δ2, δ3]`,
//! or `preset = "regular-100" | "regular-111" | "chaotic"`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::potential::{
    from_sphere_direction, PotentialError, QuasiPotential, SphereDirection, WaveSpec,
};
use crate::presets::Preset;

#[derive(Debug, Error)]
pub enum PotentialFileError {
    #[error("parse error: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("file must give exactly one of `waves`, `sphere_direction` or `preset`")]
    Ambiguous,
    #[error("unknown preset `{0}`")]
    UnknownPreset(String),
    #[error(transparent)]
    Potential(#[from] PotentialError),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveEntry {
    pub kx: f64,
    pub ky: f64,
    #[serde(default = "one")]
    pub amplitude: f64,
    #[serde(default)]
    pub phase: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sphere_direction: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phases: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub waves: Option<Vec<WaveEntry>>,
}

impl PotentialFile {
    pub fn parse(text: &str) -> Result<Self, PotentialFileError> {
        Ok(toml::from_str(text)?)
    }

    pub fn read(path: &std::path::Path) -> Result<Self, PotentialFileError> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("potential file serializes")
    }

    pub fn from_potential(p: &QuasiPotential<f64>) -> Self {
        let waves = p
            .waves()
            .iter()
            .map(|w| WaveEntry {
                kx: w.k[0],
                ky: w.k[1],
                amplitude: w.amplitude,
                phase: w.phase,
            })
            .collect();
        Self {
            waves: Some(waves),
            ..Default::default()
        }
    }

    pub fn build(&self) -> Result<QuasiPotential<f64>, PotentialFileError> {
        let given = self.preset.is_some() as u8
            + self.sphere_direction.is_some() as u8
            + self.waves.is_some() as u8;
        if given != 1 {
            return Err(PotentialFileError::Ambiguous);
        }
        if let Some(name) = &self.preset {
            return Preset::from_name(name)
                .map(Preset::potential)
                .ok_or_else(|| PotentialFileError::UnknownPreset(name.clone()));
        }
        if let Some(n) = self.sphere_direction {
            let n = SphereDirection::normalized(n)?;
            return Ok(from_sphere_direction(n, self.phases.unwrap_or([0.0; 3])).potential);
        }
        let waves = self
            .waves
            .as_ref()
            .expect("checked above")
            .iter()
            .map(|w| WaveSpec::new([w.kx, w.ky], w.amplitude, w.phase))
            .collect();
        Ok(QuasiPotential::new(waves)?)
    }
}
