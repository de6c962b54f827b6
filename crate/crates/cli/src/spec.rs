//! TOML experiment specs.
//!
//! ```toml
//! experiment = "sinr_vs_m"
//! output = "sinr.csv"         # optional
//! format = "csv"              # or "csv+plot-script"
//!
//! [system]                    # SystemConfig overrides; keys are case-insensitive
//! M = 50
//! scenario = { kind = "circle", cell_radius_m = 1000.0, user_circle_radius_m = 600.0 }
//!
//! [params]                    # ExperimentParams overrides
//! trials = 100
//! sweep = [50, 100, 200]
//! ```
//!
//! Overrides are laid over the experiment's defaults; unknown keys and
//! ill-typed values are rejected.

use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use superpilot::simharness::{ExperimentKind, ExperimentParams};
use superpilot::SystemConfig;
use toml::{Table, Value};

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Deserialize)]
pub enum OutputFormat {
    #[default]
    #[serde(rename = "csv")]
    Csv,
    #[serde(rename = "csv+plot-script")]
    CsvPlotScript,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    experiment: String,
    output: Option<PathBuf>,
    #[serde(default)]
    format: OutputFormat,
    #[serde(default)]
    system: Table,
    #[serde(default)]
    params: Table,
}

/// A fully resolved experiment request.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentSpec {
    pub kind: ExperimentKind,
    pub config: SystemConfig,
    pub params: ExperimentParams,
    pub output: Option<PathBuf>,
    pub format: OutputFormat,
}

impl ExperimentSpec {
    /// Defaults of `kind` with no overrides.
    pub fn defaults(kind: ExperimentKind) -> Self {
        ExperimentSpec {
            kind,
            config: kind.default_config(),
            params: ExperimentParams::defaults(kind),
            output: None,
            format: OutputFormat::Csv,
        }
    }
}

pub fn parse_config(path: &Path) -> Result<ExperimentSpec, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io { path: path.to_path_buf(), source: e })?;
    parse_str(&text).map_err(|e| match e {
        CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn parse_str(text: &str) -> Result<ExperimentSpec, CliError> {
    let raw: RawSpec = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
    let kind: ExperimentKind =
        raw.experiment.parse().map_err(|e: superpilot::Error| CliError::Config(e.to_string()))?;
    let base = ExperimentSpec::defaults(kind);
    let config: SystemConfig = overlay(&base.config, &raw.system, "system")?;
    config.validate().map_err(|e| CliError::Config(e.to_string()))?;
    let params: ExperimentParams = overlay(&base.params, &raw.params, "params")?;
    Ok(ExperimentSpec { kind, config, params, output: raw.output, format: raw.format })
}

/// Replaces top-level fields of `base` with `overrides`, matching keys
/// case-insensitively, then re-reads the result as `T`.
fn overlay<T: Serialize + DeserializeOwned>(base: &T, overrides: &Table, section: &str) -> Result<T, CliError> {
    let mut table = match Value::try_from(base) {
        Ok(Value::Table(t)) => t,
        _ => return Err(CliError::Config(format!("[{section}] defaults are not a table"))),
    };
    for (key, value) in overrides {
        let lower = key.to_ascii_lowercase();
        match table.get_mut(&lower) {
            Some(slot) => *slot = value.clone(),
            None => return Err(CliError::Config(format!("unknown key `{key}` in [{section}]"))),
        }
    }
    Value::Table(table)
        .try_into()
        .map_err(|e: toml::de::Error| CliError::Config(format!("[{section}]: {}", e.message())))
}
