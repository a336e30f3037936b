//! Solver output shared by FOM-VI and the value-iteration baselines.

use serde::{Deserialize, Serialize};

use crate::error::{Result, RmdpError};
use crate::gap::GapReport;
use crate::model::{return_value, AdversarialKernel, Policy, RobustMdp, ValueVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    FomVi,
    Vi,
    GsVi,
    Avi,
    AndersonVi,
}

impl Method {
    pub const ALL: [Method; 5] = [Method::FomVi, Method::Vi, Method::GsVi, Method::Avi, Method::AndersonVi];

    pub fn as_str(&self) -> &'static str {
        match self {
            Method::FomVi => "fom_vi",
            Method::Vi => "vi",
            Method::GsVi => "gs_vi",
            Method::Avi => "avi",
            Method::AndersonVi => "anderson_vi",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = RmdpError;
    fn from_str(s: &str) -> Result<Self> {
        let key = s.to_ascii_lowercase().replace('-', "_");
        match key.as_str() {
            "fom_vi" | "fomvi" | "fom" => Ok(Method::FomVi),
            "vi" => Ok(Method::Vi),
            "gs_vi" | "gsvi" | "gs" => Ok(Method::GsVi),
            "avi" => Ok(Method::Avi),
            "anderson_vi" | "anderson" | "andersonvi" => Ok(Method::AndersonVi),
            _ => Err(RmdpError::Config(format!("unknown method '{s}'"))),
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Converged,
    MaxEpochs,
    MaxIterations,
    WallTime,
}

impl StopReason {
    pub fn as_str(&self) -> &'static str {
        match self {
            StopReason::Converged => "converged",
            StopReason::MaxEpochs => "max_epochs",
            StopReason::MaxIterations => "max_iterations",
            StopReason::WallTime => "wall_time",
        }
    }
}

/// One line of a run trace. Absent measurements stay `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub epoch: usize,
    /// Cumulative inner iterations (PDA steps for FOM-VI, sweeps for baselines).
    pub iteration: u64,
    pub residual_inf: Option<f64>,
    pub certified_gap: Option<f64>,
    pub elapsed_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub method: Method,
    pub converged: bool,
    pub stop_reason: StopReason,
    pub policy: Policy,
    pub kernel: AdversarialKernel,
    pub value: ValueVector,
    pub epochs: usize,
    pub iterations: u64,
    /// Inner solves performed by multiplier searches.
    pub prox_evaluations: u64,
    pub final_gap: Option<GapReport>,
    pub trace: Vec<TraceRow>,
    pub elapsed_seconds: f64,
}

impl SolveReport {
    /// The run's scalar answer. FOM-VI reports the certified worst-case value
    /// of its averaged policy, since `value` is the lagging value iterate;
    /// the baselines report `return_value` of their final value vector.
    pub fn reported_value(&self, instance: &RobustMdp) -> f64 {
        match (self.method, &self.final_gap) {
            (Method::FomVi, Some(gap)) => gap.worst_case_value,
            _ => return_value(instance, &self.value),
        }
    }
}
