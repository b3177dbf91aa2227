use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::ValueEnum;
use nsrand_core::lp::{Mode, DEFAULT_FLOAT_TOLERANCE};
use serde::{Deserialize, Serialize};

use crate::Failure;

pub const DEFAULT_CONFIG_FILE: &str = "nsrand.toml";

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ModeName {
    #[default]
    Exact,
    Float,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    /// Directory for output files whose path is not given on the command line.
    pub output_dir: PathBuf,
}

impl Default for Paths {
    fn default() -> Self {
        Paths { output_dir: PathBuf::from(".") }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub mode: ModeName,
    pub float_tolerance: f64,
    pub orth_tolerance: f64,
    pub output_format: Format,
    /// Only seeds randomized self-tests; no command output depends on it.
    pub seed: u64,
    pub paths: Paths,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            mode: ModeName::Exact,
            float_tolerance: DEFAULT_FLOAT_TOLERANCE,
            orth_tolerance: nsrand_core::ks::DEFAULT_TOL,
            output_format: Format::Csv,
            seed: 0,
            paths: Paths::default(),
        }
    }
}

impl RunConfig {
    /// Reads `path`, or `nsrand.toml` in the working directory when present,
    /// or falls back to defaults.
    pub fn load(path: Option<&Path>) -> Result<(Self, Option<PathBuf>)> {
        let path = match path {
            Some(p) => Some(p.to_path_buf()),
            None => Some(PathBuf::from(DEFAULT_CONFIG_FILE)).filter(|p| p.is_file()),
        };
        let Some(path) = path else {
            return Ok((RunConfig::default(), None));
        };
        let text = std::fs::read_to_string(&path)
            .map_err(|e| Failure::input(format!("cannot read config {}: {e}", path.display())))?;
        let cfg: RunConfig = toml::from_str(&text)
            .map_err(|e| Failure::input(format!("config {}: {e}", path.display())))?;
        cfg.validate().with_context(|| format!("config {}", path.display()))?;
        Ok((cfg, Some(path)))
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("float_tolerance", self.float_tolerance), ("orth_tolerance", self.orth_tolerance)] {
            if !(v > 0.0 && v.is_finite()) {
                bail!(Failure::input(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }

    pub fn lp_mode(&self) -> Mode {
        match self.mode {
            ModeName::Exact => Mode::Exact,
            ModeName::Float => Mode::Float(self.float_tolerance),
        }
    }
}
