//! Online algorithms driven by supermodular norms, with small exact oracles.

pub mod cover;
pub mod loadbalance;
pub mod olo;
pub mod pack;
pub mod trace;

use serde::{Deserialize, Serialize};
use serde_json::Value;

pub use cover::{offline_opt_cover, solve_cover, CoverOptMode, CoveringInstance, ReducedCover};
pub use loadbalance::{assignment_of, brute_opt_loadbalance, greedy_bound, greedy_loadbalance, LoadBalanceInstance};
pub use olo::{olo_experts, olo_ftpl};
pub use pack::{offline_opt_pack, offline_opt_pack_grid, solve_pack, PackingInstance};
pub use trace::{traces_to_csv, RunTrace, TraceStep, CSV_VERSION_LINE};

use crate::error::{Error, Result};
use crate::norm::NormDescriptor;

/// Online linear optimization input: gains in [0,1]^d against a dual norm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OloInstance {
    pub dual_norm: NormDescriptor,
    pub gains: Vec<Vec<f64>>,
    pub p: f64,
    pub eps: f64,
}

/// An instance file `{"type": ..., "objective": <norm>, "data": {...}}`.
#[derive(Debug, Clone, PartialEq)]
pub enum OnlineInstance {
    LoadBalance(LoadBalanceInstance),
    Cover(CoveringInstance),
    Pack(PackingInstance),
    Olo(OloInstance),
}

#[derive(Deserialize)]
struct Envelope {
    #[serde(rename = "type")]
    kind: String,
    objective: NormDescriptor,
    data: Value,
}

#[derive(Serialize, Deserialize)]
struct LoadBalanceData {
    sizes: Vec<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
struct CoverData {
    rows: Vec<Vec<f64>>,
    inners: Vec<NormDescriptor>,
    sets: Vec<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    step: Option<f64>,
}

#[derive(Serialize, Deserialize)]
struct PackData {
    values: Vec<f64>,
    sizes: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    opt_estimate: Option<(f64, f64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    surrogate: Option<NormDescriptor>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    rho: Option<f64>,
}

#[derive(Serialize, Deserialize)]
struct OloData {
    gains: Vec<Vec<f64>>,
    p: f64,
    eps: f64,
}

impl OnlineInstance {
    pub fn from_json_str(s: &str) -> Result<Self> {
        let env: Envelope = serde_json::from_str(s)?;
        let objective = env.objective;
        match env.kind.as_str() {
            "loadbalance" => {
                let d: LoadBalanceData = serde_json::from_value(env.data)?;
                Ok(Self::LoadBalance(LoadBalanceInstance::new(d.sizes, objective)?))
            }
            "cover" => {
                let d: CoverData = serde_json::from_value(env.data)?;
                let n = d.rows.first().map(|r| r.len()).unwrap_or_else(|| d.sets.iter().flatten().max().map_or(0, |m| m + 1));
                let mut inst = CoveringInstance::new(n, d.rows, objective, d.inners, d.sets)?;
                inst.delta = d.delta;
                if let Some(step) = d.step {
                    inst.step = step;
                }
                inst.validate()?;
                Ok(Self::Cover(inst))
            }
            "pack" => {
                let d: PackData = serde_json::from_value(env.data)?;
                let mut inst = PackingInstance::new(d.values, d.sizes, objective)?;
                inst.opt_estimate = d.opt_estimate;
                inst.surrogate = d.surrogate;
                inst.rho = d.rho;
                inst.validate()?;
                Ok(Self::Pack(inst))
            }
            "olo" => {
                let d: OloData = serde_json::from_value(env.data)?;
                Ok(Self::Olo(OloInstance { dual_norm: objective, gains: d.gains, p: d.p, eps: d.eps }))
            }
            other => Err(Error::Parse(format!("unknown instance type {other:?}"))),
        }
    }

    pub fn to_json_value(&self) -> Value {
        let (kind, objective, data) = match self {
            Self::LoadBalance(i) => ("loadbalance", &i.objective, serde_json::to_value(LoadBalanceData { sizes: i.sizes.clone() })),
            Self::Cover(i) => (
                "cover",
                &i.outer,
                serde_json::to_value(CoverData {
                    rows: i.rows.clone(),
                    inners: i.inners.clone(),
                    sets: i.sets.clone(),
                    delta: i.delta,
                    step: Some(i.step),
                }),
            ),
            Self::Pack(i) => (
                "pack",
                &i.p_norm,
                serde_json::to_value(PackData {
                    values: i.values.clone(),
                    sizes: i.sizes.clone(),
                    opt_estimate: i.opt_estimate,
                    surrogate: i.surrogate.clone(),
                    rho: i.rho,
                }),
            ),
            Self::Olo(i) => ("olo", &i.dual_norm, serde_json::to_value(OloData { gains: i.gains.clone(), p: i.p, eps: i.eps })),
        };
        serde_json::json!({ "type": kind, "objective": objective, "data": data.unwrap_or(Value::Null) })
    }

    pub fn to_json_string(&self) -> String {
        self.to_json_value().to_string()
    }
}
