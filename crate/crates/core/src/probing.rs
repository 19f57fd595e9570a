//! Stochastic probing: exact adaptive optimum on tiny instances, the
//! hallucination strategy, and the tangent-sequence decoupling check.

use std::collections::{BTreeMap, HashMap};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::certify::{CertReport, Property};
use crate::error::{Error, Result};
use crate::norm::NormDescriptor;
use crate::sampling::{seeded_rng, DetRng};

/// Limit on memoized DP states and on exactly enumerated outcome profiles.
pub const STATE_LIMIT: usize = 1_000_000;
pub const PROB_TOL: f64 = 1e-12;
/// Default bound on C = ratio/p in the decoupling and adaptivity-gap checks.
pub const DEFAULT_ENVELOPE: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Feasibility {
    /// Any set of at most k items.
    Card(usize),
    /// An explicit downward-closed family.
    Sets(Vec<Vec<usize>>),
}

/// Finite discrete distribution per item: (value, probability) pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbingInstance {
    pub items: Vec<Vec<(f64, f64)>>,
    pub feasible: Feasibility,
    pub objective: NormDescriptor,
}

impl ProbingInstance {
    pub fn new(items: Vec<Vec<(f64, f64)>>, feasible: Feasibility, objective: NormDescriptor) -> Result<Self> {
        let inst = ProbingInstance { items, feasible, objective };
        inst.validate()?;
        Ok(inst)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let inst: Self = serde_json::from_str(s)?;
        inst.validate()?;
        Ok(inst)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string(self).expect("probing instance serializes")
    }

    pub fn n(&self) -> usize {
        self.items.len()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.n();
        if n == 0 || n > 63 {
            return Err(Error::InvalidParameter(format!("need 1..=63 items, got {n}")));
        }
        if self.objective.dim() != n {
            return Err(Error::DimensionMismatch { expected: n, got: self.objective.dim() });
        }
        for (i, dist) in self.items.iter().enumerate() {
            if dist.is_empty() || dist.iter().any(|&(v, p)| !(v >= 0.0) || !v.is_finite() || !(p >= 0.0)) {
                return Err(Error::InvalidParameter(format!("item {i} needs nonnegative values and probabilities")));
            }
            let total: f64 = dist.iter().map(|d| d.1).sum();
            if (total - 1.0).abs() > PROB_TOL {
                return Err(Error::InvalidParameter(format!("item {i} probabilities sum to {total}")));
            }
        }
        if let Feasibility::Sets(sets) = &self.feasible {
            let masks = self.family_masks()?;
            for (s, &m) in sets.iter().zip(&masks) {
                for k in 0..n {
                    let sub = m & !(1u64 << k);
                    if m & (1u64 << k) != 0 && sub != 0 && !masks.contains(&sub) {
                        return Err(Error::InvalidParameter(format!("family is not downward closed: {s:?} minus {k} is missing")));
                    }
                }
            }
        }
        Ok(())
    }

    fn family_masks(&self) -> Result<Vec<u64>> {
        let Feasibility::Sets(sets) = &self.feasible else { return Ok(Vec::new()) };
        sets.iter()
            .map(|s| {
                s.iter().try_fold(0u64, |m, &i| {
                    if i >= self.n() {
                        Err(Error::InvalidParameter(format!("set element {i} out of range")))
                    } else {
                        Ok(m | 1u64 << i)
                    }
                })
            })
            .collect()
    }

    /// Whether the probed set `mask` is feasible.
    pub fn is_feasible(&self, mask: u64) -> bool {
        match &self.feasible {
            Feasibility::Card(k) => mask.count_ones() as usize <= *k,
            Feasibility::Sets(_) => mask == 0 || self.family_masks().map(|f| f.contains(&mask)).unwrap_or(false),
        }
    }

    /// Maximal feasible sets, as bit masks.
    pub fn maximal_sets(&self) -> Vec<u64> {
        let n = self.n();
        let family: Vec<u64> = match &self.feasible {
            Feasibility::Card(k) => {
                let k = (*k).min(n);
                (0u64..1 << n).filter(|m| m.count_ones() as usize == k).collect()
            }
            Feasibility::Sets(_) => {
                let mut f = self.family_masks().unwrap_or_default();
                f.push(0);
                f
            }
        };
        let mut out: Vec<u64> = family.iter().copied().filter(|&m| !family.iter().any(|&o| o != m && o & m == m)).collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    fn mean(&self, i: usize) -> f64 {
        self.items[i].iter().map(|(v, p)| v * p).sum()
    }

    fn draw(&self, rng: &mut DetRng, i: usize) -> usize {
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        for (k, &(_, p)) in self.items[i].iter().enumerate() {
            acc += p;
            if u < acc {
                return k;
            }
        }
        self.items[i].len() - 1
    }

    /// E f(X_S) by enumerating the joint outcomes on S, or None past the limit.
    fn exact_set_value(&self, mask: u64) -> Option<f64> {
        let members: Vec<usize> = (0..self.n()).filter(|&i| mask >> i & 1 == 1).collect();
        let count = members.iter().try_fold(1usize, |acc, &i| acc.checked_mul(self.items[i].len()))?;
        if count > STATE_LIMIT {
            return None;
        }
        let mut x = vec![0.0; self.n()];
        let mut idx = vec![0usize; members.len()];
        let mut total = 0.0;
        loop {
            let mut prob = 1.0;
            for (slot, &i) in members.iter().enumerate() {
                let (v, p) = self.items[i][idx[slot]];
                x[i] = v;
                prob *= p;
            }
            if prob > 0.0 {
                total += prob * self.objective.value(&x);
            }
            let mut pos = 0;
            while pos < members.len() {
                idx[pos] += 1;
                if idx[pos] < self.items[members[pos]].len() {
                    break;
                }
                idx[pos] = 0;
                pos += 1;
            }
            if pos == members.len() {
                return Some(total);
            }
        }
    }
}

/// An adaptive policy: for each reachable state (per item, unprobed or the
/// index of its observed value), the next item to probe or `None` to stop.
#[derive(Debug, Clone, PartialEq)]
pub struct AdaptivePolicy {
    pub value: f64,
    actions: HashMap<Vec<u8>, Option<usize>>,
}

const UNPROBED: u8 = u8::MAX;

impl AdaptivePolicy {
    pub fn states(&self) -> usize {
        self.actions.len()
    }

    /// Next probe given observations (`Some(k)` = item showed its k-th value).
    pub fn next_probe(&self, observed: &[Option<usize>]) -> Option<usize> {
        let key: Vec<u8> = observed.iter().map(|o| o.map_or(UNPROBED, |k| k as u8)).collect();
        self.actions.get(&key).copied().flatten()
    }

    /// Runs the policy on a full outcome profile and returns the probed set.
    pub fn probed_set(&self, outcomes: &[usize]) -> u64 {
        let mut state = vec![UNPROBED; outcomes.len()];
        let mut mask = 0u64;
        while let Some(i) = self.actions.get(&state).copied().flatten() {
            state[i] = outcomes[i] as u8;
            mask |= 1 << i;
        }
        mask
    }
}

struct Dp<'a> {
    inst: &'a ProbingInstance,
    memo: HashMap<Vec<u8>, (f64, Option<usize>)>,
}

impl Dp<'_> {
    fn solve(&mut self, state: &mut Vec<u8>) -> Result<f64> {
        if let Some(&(v, _)) = self.memo.get(state.as_slice()) {
            return Ok(v);
        }
        if self.memo.len() >= STATE_LIMIT {
            return Err(Error::BudgetExceeded(format!("more than {STATE_LIMIT} policy states")));
        }
        let x: Vec<f64> = state
            .iter()
            .enumerate()
            .map(|(i, &s)| if s == UNPROBED { 0.0 } else { self.inst.items[i][s as usize].0 })
            .collect();
        let mask = state.iter().enumerate().filter(|(_, &s)| s != UNPROBED).fold(0u64, |m, (i, _)| m | 1 << i);
        let mut best = (self.inst.objective.value(&x), None);
        for i in 0..state.len() {
            if state[i] != UNPROBED || !self.inst.is_feasible(mask | 1 << i) {
                continue;
            }
            let mut v = 0.0;
            for k in 0..self.inst.items[i].len() {
                let p = self.inst.items[i][k].1;
                if p == 0.0 {
                    continue;
                }
                state[i] = k as u8;
                v += p * self.solve(state)?;
            }
            state[i] = UNPROBED;
            if v > best.0 * (1.0 + 1e-12) {
                best = (v, Some(i));
            }
        }
        self.memo.insert(state.clone(), best);
        Ok(best.0)
    }
}

/// Optimal adaptive policy by backward induction, with stopping allowed everywhere.
pub fn adaptive_opt(inst: &ProbingInstance) -> Result<AdaptivePolicy> {
    inst.validate()?;
    if inst.items.iter().any(|d| d.len() >= UNPROBED as usize) {
        return Err(Error::Unsupported("supports larger than 254 values".into()));
    }
    let mut dp = Dp { inst, memo: HashMap::new() };
    let value = dp.solve(&mut vec![UNPROBED; inst.n()])?;
    let actions = dp.memo.into_iter().map(|(k, (_, a))| (k, a)).collect();
    Ok(AdaptivePolicy { value, actions })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NonAdaptiveResult {
    pub set: Vec<usize>,
    pub value: f64,
    /// Zero when every set was evaluated exactly.
    pub stderr: f64,
}

/// Best fixed probe set. Only maximal sets are compared, which suffices for a
/// monotone objective. Sets with too many joint outcomes use `mc` samples.
pub fn nonadaptive_opt(inst: &ProbingInstance, mc: usize, seed: u64) -> Result<NonAdaptiveResult> {
    inst.validate()?;
    let mut best = NonAdaptiveResult { set: Vec::new(), value: f64::NEG_INFINITY, stderr: 0.0 };
    for mask in inst.maximal_sets() {
        let (value, stderr) = match inst.exact_set_value(mask) {
            Some(v) => (v, 0.0),
            None => mc_set_value(inst, mask, mc, seed),
        };
        if value > best.value {
            best = NonAdaptiveResult { set: (0..inst.n()).filter(|&i| mask >> i & 1 == 1).collect(), value, stderr };
        }
    }
    Ok(best)
}

fn mc_set_value(inst: &ProbingInstance, mask: u64, mc: usize, seed: u64) -> (f64, f64) {
    let mut rng = seeded_rng(seed, 0x4e41 ^ mask);
    let mut x = vec![0.0; inst.n()];
    let samples: Vec<f64> = (0..mc.max(2))
        .map(|_| {
            for i in 0..inst.n() {
                x[i] = if mask >> i & 1 == 1 { inst.items[i][inst.draw(&mut rng, i)].0 } else { 0.0 };
            }
            inst.objective.value(&x)
        })
        .collect();
    mean_stderr(&samples)
}

pub fn mean_stderr(samples: &[f64]) -> (f64, f64) {
    let m = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / m;
    let var = samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (m - 1.0).max(1.0);
    (mean, (var / m).sqrt())
}

/// Exact hallucination value: the policy is driven by an independent copy X̄,
/// and the probed set S̄ is scored with the true values, E f(X_{S̄}).
pub fn hallucination_exact(inst: &ProbingInstance, policy: &AdaptivePolicy) -> Result<f64> {
    let mut cache: HashMap<u64, f64> = HashMap::new();
    let mut state = vec![UNPROBED; inst.n()];
    walk_leaves(inst, policy, &mut state, 0, 1.0, &mut cache)
}

fn walk_leaves(
    inst: &ProbingInstance,
    policy: &AdaptivePolicy,
    state: &mut Vec<u8>,
    mask: u64,
    prob: f64,
    cache: &mut HashMap<u64, f64>,
) -> Result<f64> {
    let Some(i) = policy.actions.get(state.as_slice()).copied().flatten() else {
        let v = match cache.get(&mask) {
            Some(&v) => v,
            None => {
                let v = inst
                    .exact_set_value(mask)
                    .ok_or_else(|| Error::BudgetExceeded("probed set has too many outcomes for exact scoring".into()))?;
                cache.insert(mask, v);
                v
            }
        };
        return Ok(prob * v);
    };
    let mut total = 0.0;
    for k in 0..inst.items[i].len() {
        let p = inst.items[i][k].1;
        if p == 0.0 {
            continue;
        }
        state[i] = k as u8;
        total += walk_leaves(inst, policy, state, mask | 1 << i, prob * p, cache)?;
    }
    state[i] = UNPROBED;
    Ok(total)
}

/// Monte Carlo hallucination value (mean, stderr). Each sample draws the pair
/// (X_i, X̄_i) item by item from one stream.
pub fn hallucination_value(inst: &ProbingInstance, policy: &AdaptivePolicy, mc: usize, seed: u64) -> (f64, f64) {
    let mut rng = seeded_rng(seed, 0x4841);
    let n = inst.n();
    let mut real = vec![0usize; n];
    let mut ghost = vec![0usize; n];
    let mut x = vec![0.0; n];
    let samples: Vec<f64> = (0..mc.max(2))
        .map(|_| {
            for i in 0..n {
                real[i] = inst.draw(&mut rng, i);
                ghost[i] = inst.draw(&mut rng, i);
            }
            let mask = policy.probed_set(&ghost);
            for i in 0..n {
                x[i] = if mask >> i & 1 == 1 { inst.items[i][real[i]].0 } else { 0.0 };
            }
            inst.objective.value(&x)
        })
        .collect();
    mean_stderr(&samples)
}

/// Source of adapted pairs (V_t, V̄_t): V̄_t is an independent copy of V_t given
/// the history of the V sequence.
#[derive(Debug, Clone, PartialEq)]
pub enum TangentGenerator {
    /// V_t = X_t·e_c with c uniform and X_t from `values`; no adaptivity.
    Iid { dim: usize, steps: usize, values: Vec<(f64, f64)> },
    /// The coordinate is the argmax of the running sum of V (lowest index on ties).
    MaxCoordinate { dim: usize, steps: usize, values: Vec<(f64, f64)> },
    /// Pairs induced by running an adaptive policy: V_t = X_i e_i, V̄_t = X̄_i e_i.
    Probing { instance: ProbingInstance, policy: AdaptivePolicy },
}

impl TangentGenerator {
    pub fn dim(&self) -> usize {
        match self {
            Self::Iid { dim, .. } | Self::MaxCoordinate { dim, .. } => *dim,
            Self::Probing { instance, .. } => instance.n(),
        }
    }

    /// One path: (ΣV_t, ΣV̄_t).
    fn path(&self, rng: &mut DetRng) -> (Vec<f64>, Vec<f64>) {
        let d = self.dim();
        let (mut s, mut s_bar) = (vec![0.0; d], vec![0.0; d]);
        match self {
            Self::Iid { steps, values, .. } | Self::MaxCoordinate { steps, values, .. } => {
                let adaptive = matches!(self, Self::MaxCoordinate { .. });
                for _ in 0..*steps {
                    let c = if adaptive {
                        (0..d).fold(0, |b, i| if s[i] > s[b] { i } else { b })
                    } else {
                        rng.gen_range(0..d)
                    };
                    s[c] += values[draw_index(rng, values)].0;
                    s_bar[c] += values[draw_index(rng, values)].0;
                }
            }
            Self::Probing { instance, policy } => {
                let mut state = vec![UNPROBED; d];
                while let Some(i) = policy.actions.get(&state).copied().flatten() {
                    let (k, k_bar) = (instance.draw(rng, i), instance.draw(rng, i));
                    state[i] = k as u8;
                    s[i] += instance.items[i][k].0;
                    s_bar[i] += instance.items[i][k_bar].0;
                }
            }
        }
        (s, s_bar)
    }
}

fn draw_index(rng: &mut DetRng, values: &[(f64, f64)]) -> usize {
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    for (k, &(_, p)) in values.iter().enumerate() {
        acc += p;
        if u < acc {
            return k;
        }
    }
    values.len() - 1
}

/// Estimates E‖ΣV_t‖ and E‖ΣV̄_t‖ over `mc` paths and reports C = ratio/p,
/// passing when C ≤ `envelope`. Params: lhs, rhs, ratio, c, lhs_stderr,
/// rhs_stderr, envelope, p.
pub fn decoupling_check(
    generator: &TangentGenerator,
    norm: &NormDescriptor,
    p: f64,
    mc: usize,
    seed: u64,
    envelope: f64,
) -> Result<CertReport> {
    if norm.dim() != generator.dim() {
        return Err(Error::DimensionMismatch { expected: generator.dim(), got: norm.dim() });
    }
    if let TangentGenerator::Iid { values, .. } | TangentGenerator::MaxCoordinate { values, .. } = generator {
        let total: f64 = values.iter().map(|v| v.1).sum();
        if values.is_empty() || (total - 1.0).abs() > PROB_TOL {
            return Err(Error::InvalidParameter("tangent value distribution must sum to 1".into()));
        }
    }
    let mut rng = seeded_rng(seed, 0x4443);
    let mut lhs = Vec::with_capacity(mc);
    let mut rhs = Vec::with_capacity(mc);
    for _ in 0..mc.max(2) {
        let (s, s_bar) = generator.path(&mut rng);
        lhs.push(norm.value(&s));
        rhs.push(norm.value(&s_bar));
    }
    let (l, l_err) = mean_stderr(&lhs);
    let (r, r_err) = mean_stderr(&rhs);
    let ratio = if r > 0.0 { l / r } else if l > 0.0 { f64::INFINITY } else { 1.0 };
    let c = ratio / p;
    let params: BTreeMap<String, f64> = [
        ("lhs", l),
        ("rhs", r),
        ("ratio", ratio),
        ("c", c),
        ("lhs_stderr", l_err),
        ("rhs_stderr", r_err),
        ("envelope", envelope),
        ("p", p),
    ]
    .into_iter()
    .map(|(k, v)| (k.to_string(), v))
    .collect();
    Ok(CertReport {
        property: Property::Decoupling,
        samples: lhs.len(),
        skipped: 0,
        worst_violation: c,
        tolerance: envelope,
        passed: c <= envelope,
        witness: None,
        params,
        seed,
        label: "sampled".into(),
    })
}

/// Largest single-item contribution max_i E f(X_i e_i), for diagnostics.
pub fn max_single_item(inst: &ProbingInstance) -> f64 {
    (0..inst.n()).map(|i| inst.exact_set_value(1 << i).unwrap_or_else(|| inst.mean(i))).fold(0.0, f64::max)
}
