//! Online packing: items arrive with a value c_t and a size column a_t; the
//! aggregate load must stay in P = {z ≥ 0 : ‖z‖_P ≤ 1}.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::trace::RunTrace;
use crate::error::{Error, Result};
use crate::norm::{NormDescriptor, DEFAULT_FD_STEP};
use crate::sampling::seeded_rng;
use crate::vector::dot;

const BISECTION_ITERS: usize = 100;
const EXCHANGE_SWEEPS: usize = 200;
const GOLDEN_ITERS: usize = 80;
/// Points per axis of the simplex grid used for T ≤ 3.
const SIMPLEX_GRID: usize = 400;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PackingInstance {
    pub values: Vec<f64>,
    /// n × T; `sizes[i][t]` is item t's load on resource i.
    pub sizes: Vec<Vec<f64>>,
    pub p_norm: NormDescriptor,
    /// (value, β) with OPT ∈ [value/β, value].
    #[serde(default)]
    pub opt_estimate: Option<(f64, f64)>,
    /// Supermodular stand-in for `p_norm` inside the potential. Feasibility is
    /// always judged by `p_norm`.
    #[serde(default)]
    pub surrogate: Option<NormDescriptor>,
    /// Upper bound on the width, used by the first-item estimator.
    #[serde(default)]
    pub rho: Option<f64>,
}

impl PackingInstance {
    pub fn new(values: Vec<f64>, sizes: Vec<Vec<f64>>, p_norm: NormDescriptor) -> Result<Self> {
        let inst = PackingInstance { values, sizes, p_norm, opt_estimate: None, surrogate: None, rho: None };
        inst.validate()?;
        Ok(inst)
    }

    pub fn with_opt(mut self, value: f64, beta: f64) -> Self {
        self.opt_estimate = Some((value, beta));
        self
    }

    pub fn with_surrogate(mut self, surrogate: NormDescriptor) -> Self {
        self.surrogate = Some(surrogate);
        self
    }

    pub fn items(&self) -> usize {
        self.values.len()
    }

    pub fn resources(&self) -> usize {
        self.p_norm.dim()
    }

    pub fn column(&self, t: usize) -> Vec<f64> {
        self.sizes.iter().map(|row| row[t]).collect()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.resources();
        if self.sizes.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: self.sizes.len() });
        }
        for row in &self.sizes {
            if row.len() != self.items() {
                return Err(Error::DimensionMismatch { expected: self.items(), got: row.len() });
            }
            crate::vector::check_coords(row)?;
        }
        if let Some(t) = self.values.iter().position(|&c| !(c > 0.0) || !c.is_finite()) {
            return Err(Error::InvalidParameter(format!("item {t} needs a positive finite value")));
        }
        for t in 0..self.items() {
            if self.sizes.iter().all(|row| row[t] == 0.0) {
                return Err(Error::Infeasible(format!("item {t} has no positive size, so the program is unbounded")));
            }
        }
        if let Some(s) = &self.surrogate {
            if s.dim() != n {
                return Err(Error::DimensionMismatch { expected: n, got: s.dim() });
            }
        }
        if let Some((v, b)) = self.opt_estimate {
            if !(v > 0.0) || !(b >= 1.0) {
                return Err(Error::InvalidParameter("opt_estimate needs value > 0 and beta >= 1".into()));
            }
        }
        Ok(())
    }

    /// max/min of a_it·‖e_i‖_P/c_t over positive sizes.
    pub fn width(&self) -> f64 {
        let unit: Vec<f64> = (0..self.resources()).map(|i| self.p_norm.value(&unit(self.resources(), i))).collect();
        let (mut lo, mut hi) = (f64::INFINITY, 0.0_f64);
        for (i, row) in self.sizes.iter().enumerate() {
            for (t, &a) in row.iter().enumerate() {
                if a > 0.0 {
                    let r = a * unit[i] / self.values[t];
                    lo = lo.min(r);
                    hi = hi.max(r);
                }
            }
        }
        hi / lo
    }

    /// Exponent of the potential: the supermodularity of the surrogate (or of
    /// `p_norm`), at least 2.
    pub fn potential_exponent(&self) -> Result<f64> {
        let norm = self.surrogate.as_ref().unwrap_or(&self.p_norm);
        norm.supermod_p()
            .map(|p| p.max(2.0))
            .ok_or_else(|| Error::Unsupported(format!("{} has no known supermodularity; supply a surrogate", norm.kind_name())))
    }

    /// (OPT~, β) with OPT ∈ [OPT~/β, OPT~].
    ///
    /// Without a supplied estimate, the first item alone gives one: taking the
    /// resource k maximizing a_k1‖e_k‖_P, OPT lies within a factor nρ of
    /// c_1/(a_k1‖e_k‖_P) on either side.
    pub fn estimate(&self) -> (f64, f64) {
        if let Some(e) = self.opt_estimate {
            return e;
        }
        let n = self.resources();
        let first = self.column(0);
        let load = (0..n).map(|k| first[k] * self.p_norm.value(&unit(n, k))).fold(0.0, f64::max);
        let base = self.values[0] / load;
        let spread = n as f64 * self.rho.unwrap_or_else(|| self.width()).max(1.0);
        (spread * base, spread * spread)
    }
}

fn unit(n: usize, k: usize) -> Vec<f64> {
    let mut e = vec![0.0; n];
    e[k] = 1.0;
    e
}

/// Guessing grid for the scale of OPT: ratio δ, number of levels K.
pub fn guess_grid(p: f64, beta: f64) -> (f64, usize) {
    if beta <= 1.0 {
        return (1.0, 0);
    }
    let delta = if p - 1.0 <= beta.ln() { (p - 1.0).exp() } else { beta };
    let k = (beta.ln() / delta.ln()).ceil().max(1.0) as usize;
    (delta, k)
}

/// Φ(z) = W‖z‖^p and its derivative along `a`.
struct Potential<'a> {
    norm: &'a NormDescriptor,
    w: f64,
    p: f64,
}

impl Potential<'_> {
    fn slope(&self, z: &[f64], a: &[f64]) -> Result<f64> {
        let v = self.norm.value(z);
        if v == 0.0 {
            return Ok(0.0);
        }
        let g = self.norm.gradient(z, DEFAULT_FD_STEP)?;
        Ok(self.w * self.p * v.powf(self.p - 1.0) * dot(&g, a))
    }

    /// argmax over x ≥ 0 of c·x − Φ(y + x·a) + Φ(y), a concave problem.
    fn best_amount(&self, y: &[f64], a: &[f64], c: f64) -> Result<f64> {
        let at = |x: f64| -> Vec<f64> { y.iter().zip(a).map(|(yi, ai)| yi + x * ai).collect() };
        if c - self.slope(y, a)? <= 0.0 {
            return Ok(0.0);
        }
        let mut hi = 1.0 / self.norm.value(a).max(1e-300);
        let mut guard = 0;
        while c - self.slope(&at(hi), a)? > 0.0 {
            hi *= 2.0;
            guard += 1;
            if guard > 2000 {
                return Err(Error::BudgetExceeded("packing bracket did not close".into()));
            }
        }
        let mut lo = 0.0;
        for _ in 0..BISECTION_ITERS {
            let mid = 0.5 * (lo + hi);
            if c - self.slope(&at(mid), a)? > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(lo)
    }
}

/// Lagrangian online packing with a randomly guessed OPT scale.
///
/// The internal solution x̃ greedily maximizes c·x − Ψ(Ax) item by item with
/// Ψ = (I·OPT~/β)‖·‖^p. The played solution x̄ follows x̃ until the first item
/// that would leave P and is zero from then on, so it is always feasible.
/// Each step's decision is the one-element vector [x̄_t]; objective_value is ⟨c, x̄⟩ so far.
pub fn solve_pack(inst: &PackingInstance, seed: u64) -> Result<RunTrace> {
    inst.validate()?;
    let p = inst.potential_exponent()?;
    let (opt, beta) = inst.estimate();
    let (delta, levels) = guess_grid(p, beta);
    let mut rng = seeded_rng(seed, 0x5041);
    let level = if levels == 0 { 0 } else { rng.gen_range(0..=levels) };
    let guess = delta.powi(level as i32);
    let w = guess * opt / beta;
    let pot = Potential { norm: inst.surrogate.as_ref().unwrap_or(&inst.p_norm), w, p };

    let n = inst.resources();
    let mut y_tilde = vec![0.0; n];
    let mut y_bar = vec![0.0; n];
    let (mut value_tilde, mut value_bar) = (0.0, 0.0);
    let mut stopped_at: Option<usize> = None;
    let mut trace = RunTrace::new("online_pack", seed);
    for t in 0..inst.items() {
        let a = inst.column(t);
        let c = inst.values[t];
        let x = pot.best_amount(&y_tilde, &a, c)?;
        for (yi, ai) in y_tilde.iter_mut().zip(&a) {
            *yi += x * ai;
        }
        value_tilde += c * x;
        let mut played = 0.0;
        if stopped_at.is_none() {
            let next: Vec<f64> = y_bar.iter().zip(&a).map(|(yi, ai)| yi + x * ai).collect();
            if inst.p_norm.value(&next) <= 1.0 {
                played = x;
                y_bar = next;
                value_bar += c * x;
            } else {
                stopped_at = Some(t);
            }
        }
        trace.push(vec![played], value_bar, inst.p_norm.value(&y_bar) <= 1.0, (t + 1) as f64);
    }
    trace.final_objective = value_bar;
    trace.diag("p", p);
    trace.diag("opt_estimate", opt);
    trace.diag("beta", beta);
    trace.diag("delta", delta);
    trace.diag("guess", guess);
    trace.diag("weight", w);
    trace.diag("internal_value", value_tilde);
    trace.diag("load_norm", inst.p_norm.value(&y_bar));
    trace.diag("stopped_at", stopped_at.map_or(-1.0, |s| s as f64));
    Ok(trace)
}

/// g(y) = ‖Σ_t y_t a_t/c_t‖_P on the simplex; OPT = 1/min g.
fn simplex_gauge(inst: &PackingInstance, y: &[f64]) -> f64 {
    let z: Vec<f64> = inst
        .sizes
        .iter()
        .map(|row| row.iter().zip(y).zip(&inst.values).map(|((a, yt), c)| a * yt / c).sum())
        .collect();
    inst.p_norm.value(&z)
}

/// Moves mass between pairs of coordinates by golden-section search until no
/// pair improves. g is convex, so each pair move is a 1-D convex problem.
fn exchange_descent(inst: &PackingInstance, y: &mut [f64]) -> f64 {
    let t_len = y.len();
    let mut best = simplex_gauge(inst, y);
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..EXCHANGE_SWEEPS {
        let before = best;
        for s in 0..t_len {
            for t in s + 1..t_len {
                let mass = y[s] + y[t];
                if mass <= 0.0 {
                    continue;
                }
                let original = y[s];
                let mut eval = |lam: f64| {
                    y[s] = lam;
                    y[t] = mass - lam;
                    simplex_gauge(inst, y)
                };
                let (mut lo, mut hi) = (0.0, mass);
                let mut m1 = hi - phi * (hi - lo);
                let mut m2 = lo + phi * (hi - lo);
                let (mut f1, mut f2) = (eval(m1), eval(m2));
                for _ in 0..GOLDEN_ITERS {
                    if f1 <= f2 {
                        hi = m2;
                        m2 = m1;
                        f2 = f1;
                        m1 = hi - phi * (hi - lo);
                        f1 = eval(m1);
                    } else {
                        lo = m1;
                        m1 = m2;
                        f1 = f2;
                        m2 = lo + phi * (hi - lo);
                        f2 = eval(m2);
                    }
                }
                let (mut arg, mut val) = (original, best);
                for lam in [0.0, mass, 0.5 * (lo + hi)] {
                    let v = eval(lam);
                    if v < val {
                        arg = lam;
                        val = v;
                    }
                }
                y[s] = arg;
                y[t] = mass - arg;
                best = val;
            }
        }
        if before - best <= 1e-14 * before {
            break;
        }
    }
    best
}

/// Offline optimum max{⟨c, x⟩ : ‖Ax‖_P ≤ 1, x ≥ 0}.
///
/// Writing x = s·diag(1/c)·y with y on the simplex gives OPT = 1/min_y g(y) for
/// the convex gauge g above. It is minimized by pairwise exchange from every
/// vertex, the barycenter and `budget` random points; for T ≤ 3 a dense simplex
/// grid is searched as well and the best value wins.
pub fn offline_opt_pack(inst: &PackingInstance, budget: usize, seed: u64) -> Result<f64> {
    inst.validate()?;
    let t_len = inst.items();
    if t_len == 0 {
        return Ok(0.0);
    }
    let mut best = f64::INFINITY;
    let mut starts: Vec<Vec<f64>> = (0..t_len).map(|t| unit(t_len, t)).collect();
    starts.push(vec![1.0 / t_len as f64; t_len]);
    let mut rng = seeded_rng(seed, 0x4f50);
    for _ in 0..budget {
        let raw: Vec<f64> = (0..t_len).map(|_| -rng.gen::<f64>().max(1e-300).ln()).collect();
        let sum: f64 = raw.iter().sum();
        starts.push(raw.iter().map(|r| r / sum).collect());
    }
    for mut y in starts {
        best = best.min(exchange_descent(inst, &mut y));
    }
    if t_len <= 3 {
        best = best.min(simplex_grid_min(inst, SIMPLEX_GRID));
    }
    Ok(1.0 / best)
}

/// Offline optimum by a simplex grid alone (T ≤ 3).
pub fn offline_opt_pack_grid(inst: &PackingInstance, resolution: usize) -> Result<f64> {
    inst.validate()?;
    if inst.items() > 3 {
        return Err(Error::Unsupported(format!("grid search needs T <= 3, got {}", inst.items())));
    }
    Ok(1.0 / simplex_grid_min(inst, resolution))
}

fn simplex_grid_min(inst: &PackingInstance, r: usize) -> f64 {
    let t_len = inst.items();
    let rf = r as f64;
    let mut best = f64::INFINITY;
    match t_len {
        1 => best = simplex_gauge(inst, &[1.0]),
        2 => {
            for a in 0..=r {
                let y = [a as f64 / rf, (r - a) as f64 / rf];
                best = best.min(simplex_gauge(inst, &y));
            }
        }
        _ => {
            for a in 0..=r {
                for b in 0..=r - a {
                    let y = [a as f64 / rf, b as f64 / rf, (r - a - b) as f64 / rf];
                    best = best.min(simplex_gauge(inst, &y));
                }
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_d(values: Vec<f64>, sizes: Vec<f64>) -> PackingInstance {
        let p = NormDescriptor::lp(1, 1.0).unwrap().with_supermod_p(Some(1.0));
        PackingInstance::new(values, vec![sizes], p).unwrap()
    }

    #[test]
    fn single_item_known_opt() {
        let inst = one_d(vec![1.0], vec![1.0]).with_opt(1.0, 1.0);
        let t = solve_pack(&inst, 0).unwrap();
        assert!(t.final_objective > 0.0);
        assert!(t.all_feasible());
        assert!((offline_opt_pack(&inst, 2, 0).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn orthogonal_items_linf() {
        let inst = PackingInstance::new(vec![2.0, 3.0], vec![vec![0.5, 0.0], vec![0.0, 2.0]], NormDescriptor::linf(2).unwrap()).unwrap();
        let opt = offline_opt_pack(&inst, 4, 0).unwrap();
        assert!((opt - (4.0 + 1.5)).abs() < 1e-6, "{opt}");
    }

    #[test]
    fn guess_grid_rule() {
        assert_eq!(guess_grid(3.0, 1.0), (1.0, 0));
        let (d, k) = guess_grid(2.0, 100.0);
        assert!((d - 1f64.exp()).abs() < 1e-15);
        assert_eq!(k, 5);
        let (d, k) = guess_grid(10.0, 4.0);
        assert_eq!((d, k), (4.0, 1));
    }

    #[test]
    fn zero_column_rejected() {
        let p = NormDescriptor::lp(2, 2.0).unwrap();
        let r = PackingInstance::new(vec![1.0], vec![vec![0.0], vec![0.0]], p);
        assert!(matches!(r, Err(Error::Infeasible(_))));
    }
}
