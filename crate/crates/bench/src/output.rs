//! CSV records. Absent measurements serialize as empty fields.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use robust_mdp::{RobustMdp, SolveReport};
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::CliError;

pub const TRACE_COLUMNS: [&str; 15] = [
    "run_id",
    "method",
    "norm_pair",
    "p",
    "q",
    "S",
    "A",
    "uncertainty_kind",
    "alpha",
    "seed",
    "epoch",
    "iteration",
    "residual_inf",
    "certified_gap",
    "elapsed_seconds",
];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceRecord {
    pub run_id: String,
    pub method: String,
    pub norm_pair: Option<String>,
    pub p: Option<u32>,
    pub q: Option<u32>,
    #[serde(rename = "S")]
    pub num_states: usize,
    #[serde(rename = "A")]
    pub num_actions: usize,
    pub uncertainty_kind: String,
    pub alpha: f64,
    pub seed: Option<u64>,
    pub epoch: usize,
    pub iteration: u64,
    pub residual_inf: Option<f64>,
    pub certified_gap: Option<f64>,
    pub elapsed_seconds: f64,
}

/// Identifies a run in every CSV row.
#[derive(Debug, Clone)]
pub struct RunLabel<'a> {
    pub run_id: &'a str,
    pub config: &'a RunConfig,
    pub instance: &'a RobustMdp,
    pub seed: Option<u64>,
}

impl RunLabel<'_> {
    pub fn trace_records(&self, report: &SolveReport) -> Vec<TraceRecord> {
        let spec = self.instance.uncertainty();
        report
            .trace
            .iter()
            .map(|row| TraceRecord {
                run_id: self.run_id.to_string(),
                method: self.config.method.as_str().to_string(),
                norm_pair: self.config.norm_pair.map(|n| n.as_str().to_string()),
                p: self.config.p,
                q: self.config.q,
                num_states: self.instance.num_states(),
                num_actions: self.instance.num_actions(),
                uncertainty_kind: spec.kind.as_str().to_string(),
                alpha: spec.radius,
                seed: self.seed,
                epoch: row.epoch,
                iteration: row.iteration,
                residual_inf: row.residual_inf,
                certified_gap: row.certified_gap,
                elapsed_seconds: row.elapsed_seconds,
            })
            .collect()
    }
}

/// One row of a sweep's aggregate CSV.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRecord {
    pub run_id: String,
    pub method: String,
    pub norm_pair: Option<String>,
    pub p: Option<u32>,
    pub q: Option<u32>,
    #[serde(rename = "S")]
    pub num_states: usize,
    #[serde(rename = "A")]
    pub num_actions: usize,
    pub uncertainty_kind: String,
    pub alpha: f64,
    pub seed: u64,
    pub converged: Option<bool>,
    pub stop_reason: Option<String>,
    pub epochs: Option<usize>,
    pub iterations: Option<u64>,
    pub return_value: Option<f64>,
    pub certified_gap: Option<f64>,
    pub elapsed_seconds: Option<f64>,
    pub error: Option<String>,
}

/// Writes records with a header even when there are none.
pub fn write_csv<T: Serialize>(path: &Path, header: &[&str], records: &[T]) -> Result<(), CliError> {
    let file = File::create(path).map_err(|e| CliError::io(format!("creating {}", path.display()), e))?;
    let mut writer = csv::WriterBuilder::new().has_headers(false).from_writer(file);
    writer.write_record(header)?;
    for r in records {
        writer.serialize(r)?;
    }
    writer.flush().map_err(|e| CliError::io(format!("writing {}", path.display()), e))?;
    Ok(())
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    let mut file = File::create(path).map_err(|e| CliError::io(format!("creating {}", path.display()), e))?;
    file.write_all(text.as_bytes())
        .map_err(|e| CliError::io(format!("writing {}", path.display()), e))
}

pub const BENCH_COLUMNS: [&str; 18] = [
    "run_id",
    "method",
    "norm_pair",
    "p",
    "q",
    "S",
    "A",
    "uncertainty_kind",
    "alpha",
    "seed",
    "converged",
    "stop_reason",
    "epochs",
    "iterations",
    "return_value",
    "certified_gap",
    "elapsed_seconds",
    "error",
];
