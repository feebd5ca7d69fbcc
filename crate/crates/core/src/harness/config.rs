use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::channel::{ChannelMode, RadioConfig};
use crate::error::{Error, Result};
use crate::placement::{OptimizerConfig, SearchConfig};
use crate::scenario::GenerationConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModeKind {
    #[default]
    Expected,
    Sampled,
}

impl ModeKind {
    /// Channel mode for a trial; sampled fading reuses the trial seed.
    pub fn channel_mode(self, seed: u64) -> ChannelMode {
        match self {
            ModeKind::Expected => ChannelMode::Expected,
            ModeKind::Sampled => ChannelMode::Sampled { seed },
        }
    }
}

impl std::str::FromStr for ModeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "expected" => Ok(ModeKind::Expected),
            "sampled" => Ok(ModeKind::Sampled),
            other => Err(Error::InvalidInput(format!(
                "mode must be `expected` or `sampled`, got `{other}`"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Sweeps {
    pub obstacle_counts: Option<Vec<usize>>,
    pub rician_k: Option<Vec<f64>>,
}

/// Everything needed to rerun an experiment bit for bit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub trials: usize,
    pub base_seed: u64,
    pub mode: ModeKind,
    pub out_dir: PathBuf,
    pub generation: GenerationConfig,
    pub radio: RadioConfig,
    pub optimizer: OptimizerConfig,
    pub search: SearchConfig,
    pub sweeps: Sweeps,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            trials: 20,
            base_seed: 1,
            mode: ModeKind::Expected,
            out_dir: PathBuf::from("results"),
            generation: GenerationConfig::default(),
            radio: RadioConfig::default(),
            optimizer: OptimizerConfig::default(),
            search: SearchConfig::default(),
            sweeps: Sweeps::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let mut errs = Vec::new();
        if self.trials < 1 {
            errs.push("trials: must be >= 1".to_string());
        }
        errs.extend(self.generation.range_errors());
        errs.extend(self.radio.range_errors());
        errs.extend(self.optimizer.range_errors());
        errs.extend(self.search.range_errors());
        if matches!(&self.sweeps.obstacle_counts, Some(v) if v.is_empty()) {
            errs.push("sweeps.obstacle_counts: must not be empty".into());
        }
        match &self.sweeps.rician_k {
            Some(v) if v.is_empty() => errs.push("sweeps.rician_k: must not be empty".into()),
            Some(v) if v.iter().any(|k| !(*k >= 0.0) || !k.is_finite()) => {
                errs.push("sweeps.rician_k: values must be finite and >= 0".into())
            }
            _ => {}
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::ConfigRange(errs))
        }
    }
}

/// Parses the `[section]` / `key = value` config text. Missing keys take
/// their defaults; unknown keys are rejected.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| {
        let line = e
            .span()
            .map(|span| text[..span.start.min(text.len())].matches('\n').count() + 1)
            .unwrap_or(0);
        Error::ConfigParse {
            line,
            message: e.message().to_string(),
        }
    })?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)?;
    parse_config(&text)
}
