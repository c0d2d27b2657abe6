//! JSON field configurations.

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use zml_core::automorphic::{
    AutomorphicForm, LATTICE_FORM_TRUNCATION, LATTICE_SEED_CENTER, LATTICE_SEED_POWER,
};
use zml_core::fuchsian::surface_group_generators;
use zml_core::magnetics::FieldConfig;
use zml_core::DiscPoint;

use crate::error::CliError;

/// Element cap used when a lattice field needs the ball of radius 8.
pub const LATTICE_ELEMENT_CAP: usize = 8_000_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolenoidSpec {
    pub re: f64,
    pub im: f64,
    pub theta: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum ConfigFile {
    Finite {
        solenoids: Vec<SolenoidSpec>,
    },
    Uniform {
        #[serde(rename = "B")]
        strength: f64,
    },
    Radial {
        #[serde(rename = "B")]
        strength: f64,
        r0: f64,
    },
    Lattice {
        genus: u32,
        k: u32,
        theta: f64,
        #[serde(default = "default_seed_power")]
        seed_power: u32,
        #[serde(default)]
        seed_center: Option<[f64; 2]>,
        #[serde(default)]
        truncation: Option<u32>,
    },
}

fn default_seed_power() -> u32 {
    LATTICE_SEED_POWER
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Usage(format!("malformed config: {e}")))
    }

    pub fn is_lattice(&self) -> bool {
        matches!(self, ConfigFile::Lattice { .. })
    }

    /// Builds the field. Lattice groups are enumerated to `max_len`.
    pub fn build(&self, max_len: u32) -> Result<FieldConfig, CliError> {
        Ok(match self {
            ConfigFile::Finite { solenoids } => {
                let mut list = Vec::with_capacity(solenoids.len());
                for s in solenoids {
                    list.push((DiscPoint::new(s.re, s.im).map_err(zml_core::Error::from)?, s.theta));
                }
                FieldConfig::finite(&list).map_err(zml_core::Error::from)?
            }
            ConfigFile::Uniform { strength } => FieldConfig::uniform(*strength).map_err(zml_core::Error::from)?,
            ConfigFile::Radial { strength, r0 } => {
                FieldConfig::radial_compact(*strength, *r0).map_err(zml_core::Error::from)?
            }
            ConfigFile::Lattice {
                genus,
                k,
                theta,
                seed_power,
                seed_center,
                truncation,
            } => {
                let truncation = truncation.unwrap_or(LATTICE_FORM_TRUNCATION);
                let [x, y] = seed_center.unwrap_or([LATTICE_SEED_CENTER.0, LATTICE_SEED_CENTER.1]);
                let center = DiscPoint::new(x, y).map_err(zml_core::Error::from)?;
                let group = surface_group_generators(*genus)
                    .map_err(zml_core::Error::from)?
                    .with_cap(LATTICE_ELEMENT_CAP)
                    .enumerate_elements(max_len.max(truncation))
                    .map_err(zml_core::Error::from)?;
                let form = AutomorphicForm::with_seed_center(Arc::new(group), *k, *seed_power, truncation, center)?;
                FieldConfig::lattice(Arc::new(form), *theta).map_err(zml_core::Error::from)?
            }
        })
    }
}
