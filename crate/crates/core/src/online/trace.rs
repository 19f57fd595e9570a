use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

pub const CSV_VERSION_LINE: &str = "# supernorm-csv v1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceStep {
    pub step: usize,
    pub decision: Vec<f64>,
    pub objective_value: f64,
    pub feasible: bool,
    /// Continuous time for covering; the number of processed steps elsewhere.
    pub cumulative_time: f64,
}

/// Replayable record of one online run. Contains no wall-clock data, so equal
/// inputs give byte-identical serializations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunTrace {
    pub algorithm: String,
    pub seed: u64,
    pub steps: Vec<TraceStep>,
    pub final_objective: f64,
    #[serde(default)]
    pub diagnostics: BTreeMap<String, f64>,
}

impl RunTrace {
    pub fn new(algorithm: &str, seed: u64) -> Self {
        RunTrace { algorithm: algorithm.into(), seed, steps: Vec::new(), final_objective: 0.0, diagnostics: BTreeMap::new() }
    }

    pub(crate) fn push(&mut self, decision: Vec<f64>, objective_value: f64, feasible: bool, cumulative_time: f64) {
        let step = self.steps.len();
        self.steps.push(TraceStep { step, decision, objective_value, feasible, cumulative_time });
    }

    pub(crate) fn diag(&mut self, key: &str, value: f64) {
        self.diagnostics.insert(key.into(), value);
    }

    pub fn all_feasible(&self) -> bool {
        self.steps.iter().all(|s| s.feasible)
    }
}

/// Formats a float with 17 significant digits.
pub fn fmt_num(v: f64) -> String {
    format!("{v:.16e}")
}

/// CSV export of several traces, ordered by (seed, step). `config` is stamped
/// into the header as a single JSON line.
pub fn traces_to_csv(traces: &[RunTrace], config: &serde_json::Value) -> String {
    let mut order: Vec<&RunTrace> = traces.iter().collect();
    order.sort_by_key(|t| t.seed);
    let mut out = String::new();
    out.push_str(CSV_VERSION_LINE);
    out.push('\n');
    let _ = writeln!(out, "# config: {}", serde_json::to_string(config).unwrap_or_else(|_| "{}".into()));
    out.push_str("seed,step,decision,objective_value,feasible,cumulative_time\n");
    for t in order {
        for s in &t.steps {
            let decision: Vec<String> = s.decision.iter().map(|&d| fmt_num(d)).collect();
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                t.seed,
                s.step,
                decision.join(";"),
                fmt_num(s.objective_value),
                s.feasible,
                fmt_num(s.cumulative_time)
            );
        }
    }
    out
}
