//! CSV result files and their JSON sidecars.

use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use super::config::ExperimentConfig;
use super::ExperimentError;
use crate::instance::Constants;

/// Floats in result files carry 10 significant digits.
pub fn fmt_float(v: f64) -> String {
    format!("{v:.9e}")
}

/// One trial of the identification game.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRecord {
    pub trial: u64,
    pub omega_index: usize,
    pub queries: u64,
    pub success: bool,
    /// Zero unless timing was requested, so that result files stay reproducible.
    pub wall_ms: u64,
}

pub const GAME_HEADER: &str = "trial,omega_index,queries,success,wall_ms";
pub const SCALING_HEADER: &str = "x,value,stderr";

pub fn game_csv(records: &[TrialRecord]) -> String {
    let mut sorted: Vec<&TrialRecord> = records.iter().collect();
    sorted.sort_by_key(|r| r.trial);
    let mut out = String::from(GAME_HEADER);
    out.push('\n');
    for r in sorted {
        let _ = writeln!(out, "{},{},{},{},{}", r.trial, r.omega_index, r.queries, r.success as u8, r.wall_ms);
    }
    out
}

/// One row of a scaling table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalingRow {
    pub x: f64,
    pub value: f64,
    pub stderr: f64,
}

pub fn scaling_csv(rows: &[ScalingRow]) -> String {
    let mut out = String::from(SCALING_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(out, "{},{},{}", fmt_float(r.x), fmt_float(r.value), fmt_float(r.stderr));
    }
    out
}

/// Provenance written next to every result file.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Sidecar<S: Serialize> {
    pub config_hash: String,
    pub seed: u64,
    pub constants: Constants,
    pub code_version: &'static str,
    pub summary: S,
}

impl<S: Serialize> Sidecar<S> {
    pub fn new(config: &ExperimentConfig, summary: S) -> Self {
        Sidecar {
            config_hash: config.hash(),
            seed: config.seed,
            constants: config.constants,
            code_version: env!("CARGO_PKG_VERSION"),
            summary,
        }
    }
}

/// Writes `csv` to `path` and the sidecar next to it as `<stem>.meta.json`.
pub fn write_result<S: Serialize>(path: &Path, csv: &str, sidecar: &Sidecar<S>) -> Result<(), ExperimentError> {
    std::fs::write(path, csv)?;
    let side = serde_json::to_string_pretty(sidecar).map_err(|e| ExperimentError::Config(e.to_string()))?;
    std::fs::write(sidecar_path(path), side + "\n")?;
    Ok(())
}

/// `out.csv` maps to `out.meta.json`.
pub fn sidecar_path(path: &Path) -> std::path::PathBuf {
    path.with_extension("meta.json")
}
