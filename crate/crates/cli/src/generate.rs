//! Seeded random instances. Parameters arrive as `--param key=value`; unknown
//! keys and out-of-range values are rejected.

use std::collections::BTreeMap;

use rand::Rng;

use supernorm::online::{CoveringInstance, LoadBalanceInstance, OloInstance, OnlineInstance, PackingInstance};
use supernorm::probing::{Feasibility, ProbingInstance};
use supernorm::sampling::seeded_rng;
use supernorm::NormDescriptor;

use crate::Fail;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Kind {
    Loadbalance,
    Cover,
    FacilityLocationCover,
    Pack,
    Probe,
    OloExperts,
}

pub fn parse_param(s: &str) -> Result<(String, f64), String> {
    let (k, v) = s.split_once('=').ok_or_else(|| format!("expected key=value, got {s:?}"))?;
    let v: f64 = v.parse().map_err(|_| format!("{k}: not a number: {v:?}"))?;
    Ok((k.to_string(), v))
}

/// Parameter lookup with defaults and ranges; consumes keys so leftovers can be reported.
struct Params(BTreeMap<String, f64>);

impl Params {
    fn real(&mut self, key: &str, default: f64, lo: f64, hi: f64) -> Result<f64, Fail> {
        let v = self.0.remove(key).unwrap_or(default);
        if !(lo..=hi).contains(&v) {
            return Err(Fail::Input(format!("parameter {key} = {v} outside [{lo}, {hi}]")));
        }
        Ok(v)
    }

    fn count(&mut self, key: &str, default: usize, lo: usize, hi: usize) -> Result<usize, Fail> {
        let v = self.real(key, default as f64, lo as f64, hi as f64)?;
        if v.fract() != 0.0 {
            return Err(Fail::Input(format!("parameter {key} = {v} must be an integer")));
        }
        Ok(v as usize)
    }

    fn finish(self) -> Result<(), Fail> {
        match self.0.keys().next() {
            Some(k) => Err(Fail::Input(format!("unknown parameter {k:?}"))),
            None => Ok(()),
        }
    }
}

pub fn generate(kind: Kind, params: &[(String, f64)], seed: u64) -> Result<String, Fail> {
    let mut ps = Params(params.iter().cloned().collect());
    let mut rng = seeded_rng(seed, kind as u64);
    let text = match kind {
        Kind::Loadbalance => {
            let t_len = ps.count("T", 4, 1, 10_000)?;
            let n = ps.count("n", 2, 1, 1_000)?;
            let p = ps.real("p", 2.0, 1.0, 64.0)?;
            let max = ps.real("max_size", 4.0, 1e-9, 1e9)?;
            let sizes = (0..t_len).map(|_| (0..n).map(|_| rng.gen::<f64>() * max).collect()).collect();
            let inst = LoadBalanceInstance::new(sizes, NormDescriptor::lp(n, p)?)?;
            OnlineInstance::LoadBalance(inst).to_json_string()
        }
        Kind::Cover => {
            let n = ps.count("n", 3, 1, 1_000)?;
            let rows = ps.count("rows", 4, 1, 10_000)?;
            let p = ps.real("p", 2.0, 1.0, 64.0)?;
            let density = ps.real("density", 0.7, 0.01, 1.0)?;
            let rows = (0..rows)
                .map(|_| {
                    let mut r: Vec<f64> = (0..n).map(|_| if rng.gen_bool(density) { rng.gen_range(0.1..1.0) } else { 0.0 }).collect();
                    if r.iter().all(|&a| a == 0.0) {
                        r[rng.gen_range(0..n)] = rng.gen_range(0.1..1.0);
                    }
                    r
                })
                .collect();
            let inst = CoveringInstance::separable(rows, NormDescriptor::lp(n, p)?.with_supermod_p(Some(p)))?;
            OnlineInstance::Cover(inst).to_json_string()
        }
        Kind::FacilityLocationCover => {
            let demands = ps.count("demands", 3, 1, 200)?;
            let facilities = ps.count("facilities", 2, 1, 200)?;
            let open: Vec<f64> = (0..facilities).map(|_| rng.gen_range(1.0..5.0)).collect();
            let connect: Vec<Vec<f64>> = (0..demands).map(|_| (0..facilities).map(|_| rng.gen_range(0.5..3.0)).collect()).collect();
            OnlineInstance::Cover(facility_location(&open, &connect)?).to_json_string()
        }
        Kind::Pack => {
            let items = ps.count("T", 6, 1, 10_000)?;
            let n = ps.count("n", 2, 1, 1_000)?;
            let p = ps.real("p", 2.0, 1.0, 64.0)?;
            let values = (0..items).map(|_| rng.gen_range(0.2..2.0)).collect();
            let mut sizes: Vec<Vec<f64>> =
                (0..n).map(|_| (0..items).map(|_| if rng.gen_bool(0.25) { 0.0 } else { rng.gen_range(0.05..1.0) }).collect()).collect();
            for t in 0..items {
                if sizes.iter().all(|r| r[t] == 0.0) {
                    sizes[0][t] = rng.gen_range(0.05..1.0);
                }
            }
            let inst = PackingInstance::new(values, sizes, NormDescriptor::lp(n, p)?.with_supermod_p(Some(p)))?;
            OnlineInstance::Pack(inst).to_json_string()
        }
        Kind::Probe => {
            let n = ps.count("n", 3, 1, 20)?;
            let card = ps.count("card", 2.min(n), 1, n)?;
            let p = ps.real("p", 2.0, 1.0, 64.0)?;
            let items = (0..n)
                .map(|_| {
                    let q = rng.gen_range(0.05..0.95);
                    vec![(0.0, 1.0 - q), (rng.gen_range(0.5..10.0), q)]
                })
                .collect();
            ProbingInstance::new(items, Feasibility::Card(card), NormDescriptor::lp(n, p)?)?.to_json_string()
        }
        Kind::OloExperts => {
            let d = ps.count("d", 4, 1, 1_000)?;
            let t_len = ps.count("T", 50, 1, 100_000)?;
            let eps = ps.real("eps", 0.5, 1e-6, 10.0)?;
            let gains = (0..t_len).map(|_| (0..d).map(|_| rng.gen::<f64>()).collect()).collect();
            OnlineInstance::Olo(OloInstance { dual_norm: NormDescriptor::linf(d)?, gains, p: 1.0, eps }).to_json_string()
        }
    };
    ps.finish()?;
    Ok(text + "\n")
}

/// Fractional facility location as covering: variable y_ij sits at i·m + j,
/// each demand row asks Σ_j y_ij ≥ 1, and the cost is the ℓ1 sum of
/// c_j·max_i y_ij over facilities and d_ij·y_ij over pairs.
pub fn facility_location(open: &[f64], connect: &[Vec<f64>]) -> Result<CoveringInstance, Fail> {
    let (n, m) = (connect.len(), open.len());
    let var = |i: usize, j: usize| i * m + j;
    let mut inners = Vec::with_capacity(m + n * m);
    let mut sets = Vec::with_capacity(m + n * m);
    for (j, &c) in open.iter().enumerate() {
        inners.push(NormDescriptor::weighted_linf(vec![c; n])?);
        sets.push((0..n).map(|i| var(i, j)).collect());
    }
    for (i, row) in connect.iter().enumerate() {
        for (j, &d) in row.iter().enumerate() {
            inners.push(NormDescriptor::weighted_linf(vec![d])?);
            sets.push(vec![var(i, j)]);
        }
    }
    let rows = (0..n).map(|i| (0..n * m).map(|v| if v / m == i { 1.0 } else { 0.0 }).collect()).collect();
    let outer = NormDescriptor::lp(m + n * m, 1.0)?;
    Ok(CoveringInstance::new(n * m, rows, outer, inners, sets)?)
}
