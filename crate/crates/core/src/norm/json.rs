//! JSON form of norm descriptors: `{"kind": ..., "dim": n, "params": {...}}`.

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::{json, Map, Value};

use super::{NormDescriptor, NormKind};
use crate::error::{Error, Result};
use crate::orlicz::OrliczFunction;

#[derive(Serialize, Deserialize)]
struct NormJson {
    kind: String,
    dim: usize,
    #[serde(default)]
    params: Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    supermod_p: Option<f64>,
}

impl NormDescriptor {
    pub fn to_json_value(&self) -> Value {
        let params = match &self.kind {
            NormKind::Lp { p } => json!({ "p": p }),
            NormKind::Linf | NormKind::L1PlusL2 => json!({}),
            NormKind::TopK { k } => json!({ "k": k }),
            NormKind::WeightedLinear { w } | NormKind::WeightedLinf { w } => json!({ "w": w }),
            NormKind::SumLinfBlocks { block_size } => json!({ "block_size": block_size }),
            NormKind::Max { inners } => json!({ "inners": inners }),
            NormKind::BudgetPrefix { c } => json!({ "c": c }),
            NormKind::Orlicz { g, tol } => json!({ "G": g, "tol": tol }),
            NormKind::LinearCompose { a, inner } => json!({ "A": a, "inner": inner }),
            NormKind::LpCombine { p, weights, inners } => json!({ "p": p, "weights": weights, "inners": inners }),
            NormKind::Smoothed { inner, eps, seed, samples, .. } => {
                json!({ "inner": inner, "eps": eps, "seed": seed, "samples": samples })
            }
            NormKind::SymmetricApprox { inner, outer_p, distortion } => {
                json!({ "inner": inner, "outer_p": outer_p, "distortion": distortion.map(|(a, b)| [a, b]) })
            }
        };
        serde_json::to_value(NormJson {
            kind: self.kind_name().to_string(),
            dim: self.dim,
            params,
            supermod_p: self.supermod_p,
        })
        .expect("norm JSON is always representable")
    }

    pub fn from_json_value(v: &Value) -> Result<Self> {
        let raw: NormJson = serde_json::from_value(v.clone())?;
        let empty = Map::new();
        let params = raw.params.as_object().unwrap_or(&empty);
        let dim = raw.dim;
        let norm = match raw.kind.as_str() {
            "lp" => NormDescriptor::lp(dim, get(params, "p")?)?,
            "linf" => NormDescriptor::linf(dim)?,
            "topk" => NormDescriptor::topk(dim, get(params, "k")?)?,
            "weighted_linear" => NormDescriptor::weighted_linear(get(params, "w")?)?,
            "weighted_linf" => NormDescriptor::weighted_linf(get(params, "w")?)?,
            "sum_linf_blocks" => NormDescriptor::sum_linf_blocks(dim, get(params, "block_size")?)?,
            "l1_plus_l2" => NormDescriptor::l1_plus_l2(dim)?,
            "max" => NormDescriptor::max_of(get(params, "inners")?)?,
            "budget_prefix" => NormDescriptor::budget_prefix(dim, get(params, "c")?)?,
            "orlicz" => {
                let g: OrliczFunction = get(params, "G")?;
                let tol = match params.get("tol") {
                    Some(t) => serde_json::from_value(t.clone())?,
                    None => crate::orlicz::DEFAULT_TOL,
                };
                NormDescriptor::orlicz_with_tol(g, dim, tol)?
            }
            "linear_compose" => {
                let inner: NormDescriptor = get(params, "inner")?;
                inner.compose_linear(get(params, "A")?)?
            }
            "lp_combine" => NormDescriptor::lp_combine(get(params, "inners")?, get(params, "weights")?, get(params, "p")?)?,
            "smoothed" => {
                let inner: NormDescriptor = get(params, "inner")?;
                inner.smooth(get(params, "eps")?, get(params, "seed")?, get(params, "samples")?)?
            }
            "symmetric_approx" => {
                let inner: NormDescriptor = get(params, "inner")?;
                let outer_p: f64 = get(params, "outer_p")?;
                let distortion: Option<[f64; 2]> = match params.get("distortion") {
                    Some(d) => serde_json::from_value(d.clone())?,
                    None => None,
                };
                NormDescriptor::symmetric_approx(inner, outer_p, distortion.map(|[a, b]| (a, b)))
            }
            other => return Err(Error::Parse(format!("unknown norm kind '{other}'"))),
        };
        if norm.dim != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: norm.dim });
        }
        Ok(match raw.supermod_p {
            Some(p) => norm.with_supermod_p(Some(p)),
            None => norm,
        })
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string(self).expect("norm JSON is always representable")
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let v: Value = serde_json::from_str(s)?;
        Self::from_json_value(&v)
    }
}

fn get<T: serde::de::DeserializeOwned>(params: &Map<String, Value>, key: &str) -> Result<T> {
    let v = params.get(key).ok_or_else(|| Error::Parse(format!("missing parameter '{key}'")))?;
    serde_json::from_value(v.clone()).map_err(|e| Error::Parse(format!("parameter '{key}': {e}")))
}

impl Serialize for NormDescriptor {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json_value().serialize(s)
    }
}

impl<'de> Deserialize<'de> for NormDescriptor {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Value::deserialize(d)?;
        NormDescriptor::from_json_value(&v).map_err(D::Error::custom)
    }
}
