//! Effective settings: command-line flags over a JSON config file over defaults.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::Fail;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

/// Every tunable a subcommand may read. All fields are optional so the same
/// type serves as flag set, config file and merged result.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize, clap::Args)]
#[serde(deny_unknown_fields)]
pub struct Settings {
    /// Norm descriptor JSON file.
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub norm: Option<PathBuf>,
    /// Instance JSON file.
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub instance: Option<PathBuf>,
    /// Supermodularity exponent.
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    /// Smoothing or learning-rate parameter.
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Sample count for sampled checks and Monte Carlo estimates.
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    /// Relative Euler step for covering.
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub step: Option<f64>,
    /// Pass/fail threshold on the worst violation, overriding the built-in one.
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    /// Number of consecutive seeds to run, starting at --seed.
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub runs: Option<u64>,
    #[arg(long, global = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
}

impl Settings {
    /// Fills every unset field from `lower`.
    pub fn over(self, lower: Settings) -> Settings {
        Settings {
            norm: self.norm.or(lower.norm),
            instance: self.instance.or(lower.instance),
            p: self.p.or(lower.p),
            eps: self.eps.or(lower.eps),
            seed: self.seed.or(lower.seed),
            samples: self.samples.or(lower.samples),
            step: self.step.or(lower.step),
            tol: self.tol.or(lower.tol),
            runs: self.runs.or(lower.runs),
            out: self.out.or(lower.out),
            format: self.format.or(lower.format),
        }
    }

    /// Reads a config file. Relative paths inside it resolve against its directory.
    pub fn from_file(path: &Path) -> Result<Settings, Fail> {
        let text = read(path)?;
        let mut s: Settings =
            serde_json::from_str(&text).map_err(|e| Fail::Input(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [&mut s.norm, &mut s.instance, &mut s.out].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(s)
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    pub fn format(&self) -> Format {
        self.format.unwrap_or(Format::Json)
    }

    pub fn norm_path(&self) -> Result<&Path, Fail> {
        self.norm.as_deref().ok_or_else(|| Fail::Input("--norm is required".into()))
    }

    pub fn instance_path(&self) -> Result<&Path, Fail> {
        self.instance.as_deref().ok_or_else(|| Fail::Input("--instance is required".into()))
    }
}

pub fn read(path: &Path) -> Result<String, Fail> {
    std::fs::read_to_string(path).map_err(|e| Fail::Input(format!("{}: {e}", path.display())))
}
