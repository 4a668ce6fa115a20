use erlang_queue::{Method, PerformanceMeasures, QueueParams, SimConfig, SimResult};
use serde::{Deserialize, Serialize};

/// Result of solving one instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputRecord {
    pub params: QueueParams,
    pub rho: f64,
    pub method: Method,
    #[serde(rename = "N")]
    pub n_states: usize,
    /// `p_n[n]` is the probability of `n` customers in the system.
    pub p_n: Vec<f64>,
    pub measures: PerformanceMeasures,
    pub residual: f64,
    pub iterations: usize,
    pub wall_time_s: f64,
    /// Largest pairwise max-norm gap between the three solvers, when checked.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solver_agreement: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableCell {
    #[serde(rename = "K")]
    pub k: usize,
    pub rho: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub record: Option<OutputRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl TableCell {
    pub fn mean_size(&self) -> Option<f64> {
        self.record.as_ref().map(|r| r.measures.l)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub r: usize,
    pub c: usize,
    pub mu: f64,
    pub method: Method,
    pub rhos: Vec<f64>,
    pub ks: Vec<usize>,
    /// Row-major: all densities for the first queue limit, then the next.
    pub cells: Vec<TableCell>,
}

impl Table {
    pub fn cell(&self, k: usize, rho: f64) -> Option<&TableCell> {
        self.cells.iter().find(|c| c.k == k && c.rho == rho)
    }

    pub fn has_failures(&self) -> bool {
        self.cells.iter().any(|c| c.error.is_some())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub r: usize,
    pub c: usize,
    #[serde(rename = "K")]
    pub k: usize,
    pub rho: f64,
    #[serde(rename = "N")]
    pub n_states: usize,
    pub seconds: f64,
    #[serde(rename = "L")]
    pub l: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationRecord {
    pub config: SimConfig,
    pub result: SimResult,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub analytic_l: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub covered: Option<bool>,
}
