//! Report structures written by `run`, plus small JSON/CSV file helpers.
//!
//! Reports are deterministic for a fixed configuration and seed: they carry
//! no timestamps or timings (those go to stderr), so byte-identical reruns
//! stay byte-identical.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use bellsim_core::{BellResult, Implementation, ResourceReport};
use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, MitigationMode};
use crate::CliError;

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunReport {
    pub schema_version: u32,
    pub seed: u64,
    /// True when distributions were evaluated exactly instead of sampled.
    pub exact: bool,
    /// The resolved configuration the run used (defaults filled in).
    pub config: ExperimentConfig,
    pub combinations: Vec<CombinationReport>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Ok,
    Skipped,
    Error,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CombinationReport {
    pub n: usize,
    pub d: usize,
    pub implementation: Implementation,
    pub mitigation: MitigationMode,
    pub status: RunStatus,
    /// Skip reason or error text.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
    /// Absent in exact mode.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shots_per_setting: Option<u64>,
    /// Functional value before readout unfolding (equals `result.izg` when
    /// no unfolding is applied).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub raw_izg: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub result: Option<BellResult>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_value: Option<PvalueReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resources: Option<ResourceReport>,
    /// Setting label ("x1y1", ...) to counts file path relative to the
    /// output directory.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub counts_files: BTreeMap<String, String>,
}

/// Finite-statistics tail bound treating the run as `trials` independent
/// uniform-setting trials scoring at the observed mean.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PvalueReport {
    pub rule: String,
    pub trials: u64,
    pub mean_score: f64,
    pub p_value: f64,
}

pub fn ensure_dir(path: &Path) -> Result<(), CliError> {
    fs::create_dir_all(path)
        .map_err(|e| CliError::Runtime(format!("creating {}: {e}", path.display())))
}

pub fn write_json_file<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| CliError::Runtime(format!("serializing {}: {e}", path.display())))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| CliError::Runtime(format!("writing {}: {e}", path.display())))
}

/// Writes one CSV file; rows must already be formatted as strings.
pub fn write_csv_file(
    path: &Path,
    header: &[&str],
    rows: &[Vec<String>],
) -> Result<(), CliError> {
    let io_err = |e: csv::Error| CliError::Runtime(format!("writing {}: {e}", path.display()));
    let mut writer = csv::Writer::from_path(path)
        .map_err(|e| CliError::Runtime(format!("creating {}: {e}", path.display())))?;
    writer.write_record(header).map_err(io_err)?;
    for row in rows {
        writer.write_record(row).map_err(io_err)?;
    }
    writer
        .flush()
        .map_err(|e| CliError::Runtime(format!("flushing {}: {e}", path.display())))
}
