//! Run configuration. Every key is required and unknown keys are rejected,
//! so a config file always spells out the full parameter set.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bayes::NetworkSpec;
use crate::error::{Error, Result};
use crate::features::NeighborhoodSpec;
use crate::occupancy::GridParams;
use crate::recon::ReconParams;
use crate::shape::ShapeParams;
use crate::textures::FusionParams;
use crate::uncertainty::UncertaintySpec;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvalParams {
    pub iou_threshold: f64,
    /// Rays an opening must receive to count as measured.
    pub k_min: usize,
}

impl Default for EvalParams {
    fn default() -> Self {
        EvalParams {
            iou_threshold: 0.5,
            k_min: 20,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimParams {
    pub seed: u64,
}

impl Default for SimParams {
    fn default() -> Self {
        SimParams { seed: 2016 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub uncertainty: UncertaintySpec,
    pub grid: GridParams,
    pub fusion: FusionParams,
    pub features: NeighborhoodSpec,
    pub bn: NetworkSpec,
    pub shape: ShapeParams,
    pub recon: ReconParams,
    pub eval: EvalParams,
    pub sim: SimParams,
}

impl Config {
    pub fn validate(&self) -> Result<()> {
        self.uncertainty.validate()?;
        self.grid.validate()?;
        self.fusion.validate()?;
        self.features.validate()?;
        self.bn.validate()?;
        self.shape.validate()?;
        self.recon.validate()?;
        if !(0.0..=1.0).contains(&self.eval.iou_threshold) {
            return Err(Error::Config(format!(
                "eval.iou_threshold must lie in [0, 1], got {}",
                self.eval.iou_threshold
            )));
        }
        Ok(())
    }

    /// Parses and validates.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Config = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_toml_string()?).map_err(|e| Error::io(path, e))
    }
}

/// Network specification with its table checked.
pub fn load_cpt(config: &Config) -> Result<NetworkSpec> {
    config.bn.validate()?;
    Ok(config.bn)
}
