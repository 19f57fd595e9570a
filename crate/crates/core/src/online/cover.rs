//! Online covering with a composed objective ‖(f_1(y|S_1), …, f_k(y|S_k))‖.

use serde::{Deserialize, Serialize};

use super::trace::RunTrace;
use crate::error::{Error, Result};
use crate::norm::NormDescriptor;
use crate::vector::dot;

pub const DEFAULT_STEP: f64 = 1e-3;
/// δ is this fraction of the cheapest single-coordinate cover of the first row.
pub const DELTA_FRACTION: f64 = 1e-3;
/// Cap on copy-selector rows generated per original row by the overlap reduction.
pub const SELECTOR_LIMIT: usize = 100_000;
const MAX_EULER_STEPS: usize = 50_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoveringInstance {
    pub n: usize,
    /// Constraint rows ⟨A_r, y⟩ ≥ 1, entries in [0, 1], revealed in order.
    pub rows: Vec<Vec<f64>>,
    pub outer: NormDescriptor,
    /// `inners[l]` acts on the coordinates `sets[l]`, in that order.
    pub inners: Vec<NormDescriptor>,
    pub sets: Vec<Vec<usize>>,
    #[serde(default)]
    pub delta: Option<f64>,
    #[serde(default = "default_step")]
    pub step: f64,
}

fn default_step() -> f64 {
    DEFAULT_STEP
}

impl CoveringInstance {
    pub fn new(
        n: usize,
        rows: Vec<Vec<f64>>,
        outer: NormDescriptor,
        inners: Vec<NormDescriptor>,
        sets: Vec<Vec<usize>>,
    ) -> Result<Self> {
        let inst = CoveringInstance { n, rows, outer, inners, sets, delta: None, step: DEFAULT_STEP };
        inst.validate()?;
        Ok(inst)
    }

    /// One block per coordinate: ‖·‖ composed with the identity inner norms |y_i|.
    pub fn separable(rows: Vec<Vec<f64>>, outer: NormDescriptor) -> Result<Self> {
        let n = outer.dim();
        let inners = (0..n).map(|_| NormDescriptor::lp(1, 1.0)).collect::<Result<Vec<_>>>()?;
        let sets = (0..n).map(|i| vec![i]).collect();
        Self::new(n, rows, outer, inners, sets)
    }

    pub fn with_step(mut self, step: f64) -> Self {
        self.step = step;
        self
    }

    pub fn with_delta(mut self, delta: f64) -> Self {
        self.delta = Some(delta);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidParameter("covering instance needs n >= 1".into()));
        }
        if self.outer.dim() != self.sets.len() || self.inners.len() != self.sets.len() {
            return Err(Error::DimensionMismatch { expected: self.sets.len(), got: self.outer.dim() });
        }
        let mut covered = vec![false; self.n];
        for (f, s) in self.inners.iter().zip(&self.sets) {
            if f.dim() != s.len() {
                return Err(Error::DimensionMismatch { expected: s.len(), got: f.dim() });
            }
            for &i in s {
                if i >= self.n {
                    return Err(Error::InvalidParameter(format!("set index {i} out of range")));
                }
                covered[i] = true;
            }
        }
        if let Some(i) = covered.iter().position(|c| !c) {
            return Err(Error::InvalidParameter(format!("variable {i} belongs to no set")));
        }
        for (r, row) in self.rows.iter().enumerate() {
            if row.len() != self.n {
                return Err(Error::DimensionMismatch { expected: self.n, got: row.len() });
            }
            if row.iter().any(|&a| !(0.0..=1.0).contains(&a)) {
                return Err(Error::InvalidParameter(format!("row {r} has an entry outside [0, 1]")));
            }
            if row.iter().all(|&a| a == 0.0) {
                return Err(Error::Infeasible(format!("row {r} is identically zero")));
            }
        }
        if !(self.step > 0.0) {
            return Err(Error::InvalidParameter("step must be positive".into()));
        }
        Ok(())
    }

    /// Whether the sets partition the variables.
    pub fn is_partition(&self) -> bool {
        self.sets.iter().map(|s| s.len()).sum::<usize>() == self.n
    }

    /// d = max(largest row support, largest set).
    pub fn sparsity(&self) -> usize {
        let rows = self.rows.iter().map(|r| r.iter().filter(|&&a| a > 0.0).count()).max().unwrap_or(0);
        let sets = self.sets.iter().map(|s| s.len()).max().unwrap_or(0);
        rows.max(sets).max(1)
    }

    /// The exponent p' = max(outer supermodularity, 2) used in Ψ.
    pub fn outer_exponent(&self) -> f64 {
        self.outer.supermod_p().unwrap_or(2.0).max(2.0)
    }

    fn block_values(&self, y: &[f64]) -> Vec<f64> {
        self.inners
            .iter()
            .zip(&self.sets)
            .map(|(f, s)| {
                let sub: Vec<f64> = s.iter().map(|&i| y[i]).collect();
                f.value(&sub)
            })
            .collect()
    }

    pub fn cost(&self, y: &[f64]) -> f64 {
        self.outer.value(&self.block_values(y))
    }

    /// Ψ(y) = ‖F(y)‖^{p'}/p'.
    pub fn psi(&self, y: &[f64]) -> f64 {
        let p = self.outer_exponent();
        self.cost(y).powf(p) / p
    }

    /// ∇Ψ by the chain rule. A block at zero contributes its one-sided directional
    /// derivatives f_l(e_i).
    pub fn psi_gradient(&self, y: &[f64]) -> Result<Vec<f64>> {
        let p = self.outer_exponent();
        let blocks = self.block_values(y);
        let total = self.outer.value(&blocks);
        let mut grad = vec![0.0; self.n];
        if total == 0.0 {
            return Ok(grad);
        }
        let go = self.outer.gradient(&blocks, crate::norm::DEFAULT_FD_STEP)?;
        let coef = total.powf(p - 1.0);
        for ((f, s), &gl) in self.inners.iter().zip(&self.sets).zip(&go) {
            if gl == 0.0 {
                continue;
            }
            let sub: Vec<f64> = s.iter().map(|&i| y[i]).collect();
            let gi = if sub.iter().all(|&v| v == 0.0) {
                (0..s.len()).map(|k| f.value(&unit(s.len(), k))).collect()
            } else {
                f.gradient(&sub, crate::norm::DEFAULT_FD_STEP)?
            };
            for (&i, g) in s.iter().zip(gi) {
                grad[i] += coef * gl * g;
            }
        }
        Ok(grad)
    }

    /// Cheapest cover of the first row by a single coordinate, min_i cost(e_i/A_1i).
    pub fn first_row_cost(&self) -> f64 {
        let Some(row) = self.rows.first() else { return 1.0 };
        (0..self.n)
            .filter(|&i| row[i] > 0.0)
            .map(|i| {
                let mut y = vec![0.0; self.n];
                y[i] = 1.0 / row[i];
                self.cost(&y)
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Rewrites an instance with overlapping sets into one whose sets partition the
    /// variables: each variable gets one copy per set containing it, and every row
    /// becomes one row per copy selector on its support.
    pub fn reduce(&self) -> Result<ReducedCover> {
        let mut copies = Vec::new();
        let mut copy_ids: Vec<Vec<usize>> = vec![Vec::new(); self.n];
        let mut sets = Vec::with_capacity(self.sets.len());
        for s in &self.sets {
            let mut block = Vec::with_capacity(s.len());
            for &i in s {
                copy_ids[i].push(copies.len());
                block.push(copies.len());
                copies.push(i);
            }
            sets.push(block);
        }
        let m = copies.len();
        let mut rows = Vec::new();
        let mut row_origin = Vec::new();
        for (r, row) in self.rows.iter().enumerate() {
            let support: Vec<usize> = (0..self.n).filter(|&i| row[i] > 0.0).collect();
            let count = support.iter().try_fold(1usize, |acc, &i| acc.checked_mul(copy_ids[i].len()));
            match count {
                Some(c) if c <= SELECTOR_LIMIT => {}
                _ => return Err(Error::BudgetExceeded(format!("row {r} needs more than {SELECTOR_LIMIT} selector rows"))),
            }
            let mut choice = vec![0usize; support.len()];
            loop {
                let mut new_row = vec![0.0; m];
                for (slot, &i) in support.iter().enumerate() {
                    new_row[copy_ids[i][choice[slot]]] = row[i];
                }
                rows.push(new_row);
                row_origin.push(r);
                let mut pos = 0;
                while pos < support.len() {
                    choice[pos] += 1;
                    if choice[pos] < copy_ids[support[pos]].len() {
                        break;
                    }
                    choice[pos] = 0;
                    pos += 1;
                }
                if pos == support.len() {
                    break;
                }
            }
        }
        let instance = CoveringInstance {
            n: m,
            rows,
            outer: self.outer.clone(),
            inners: self.inners.clone(),
            sets,
            delta: self.delta,
            step: self.step,
        };
        Ok(ReducedCover { instance, copies, row_origin, original_n: self.n })
    }
}

fn unit(n: usize, k: usize) -> Vec<f64> {
    let mut e = vec![0.0; n];
    e[k] = 1.0;
    e
}

/// A partitioned instance equivalent to an overlapping one.
#[derive(Debug, Clone)]
pub struct ReducedCover {
    pub instance: CoveringInstance,
    /// Original variable of each copy.
    pub copies: Vec<usize>,
    /// Original row of each selector row.
    pub row_origin: Vec<usize>,
    pub original_n: usize,
}

impl ReducedCover {
    /// y_i = min over the copies of i.
    pub fn project(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![f64::INFINITY; self.original_n];
        for (&i, &v) in self.copies.iter().zip(x) {
            y[i] = y[i].min(v);
        }
        y
    }
}

/// State of the continuous covering process on a partitioned instance.
struct CoverState<'a> {
    inst: &'a CoveringInstance,
    x: Vec<f64>,
    tau: f64,
    delta: f64,
    inv_d: f64,
    euler_steps: usize,
    monotone: bool,
}

impl CoverState<'_> {
    /// Raises x along ẋ_i = A_i(x_i + 1/d)/(∇_iΨ(x) + δ) until ⟨A, x⟩ = 1.
    ///
    /// Each Euler step grows every x_i + 1/d by at most a factor 1 + step, and the
    /// final step is shortened to land on the constraint exactly.
    fn satisfy(&mut self, row: &[f64]) -> Result<()> {
        let step = self.inst.step;
        let mut rate = vec![0.0; self.x.len()];
        while dot(row, &self.x) < 1.0 {
            if self.euler_steps >= MAX_EULER_STEPS {
                return Err(Error::BudgetExceeded("covering ODE did not converge".into()));
            }
            let g = self.inst.psi_gradient(&self.x)?;
            let mut h = f64::INFINITY;
            for i in 0..self.x.len() {
                rate[i] = row[i] * (self.x[i] + self.inv_d) / (g[i] + self.delta);
                if row[i] > 0.0 {
                    h = h.min(step * (g[i] + self.delta) / row[i]);
                }
            }
            let gap = 1.0 - dot(row, &self.x);
            let speed = dot(row, &rate);
            let landing = speed * h >= gap;
            if landing {
                h = gap / speed;
            }
            for (xi, ri) in self.x.iter_mut().zip(&rate) {
                let next = *xi + h * ri;
                if next < *xi {
                    self.monotone = false;
                }
                *xi = next;
            }
            self.tau += h;
            self.euler_steps += 1;
            if landing {
                break;
            }
        }
        Ok(())
    }
}

/// Runs the continuous covering algorithm, one trace step per original row.
///
/// Overlapping sets are reduced to a partition first; the recorded decisions are
/// projected back to the original variables. Diagnostics: `psi_final` and
/// `tau_final` of the internal (reduced) iterate, `delta`, `p_prime`, `euler_steps`,
/// `monotone` (1 or 0).
pub fn solve_cover(inst: &CoveringInstance) -> Result<RunTrace> {
    inst.validate()?;
    let reduced = if inst.is_partition() { None } else { Some(inst.reduce()?) };
    let work = reduced.as_ref().map(|r| &r.instance).unwrap_or(inst);
    let delta = inst.delta.unwrap_or_else(|| DELTA_FRACTION * inst.first_row_cost());
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(Error::InvalidParameter(format!("delta must be positive, got {delta}")));
    }
    let mut state = CoverState {
        inst: work,
        x: vec![0.0; work.n],
        tau: 0.0,
        delta,
        inv_d: 1.0 / work.sparsity() as f64,
        euler_steps: 0,
        monotone: true,
    };
    let mut trace = RunTrace::new("online_cover", 0);
    let mut prev_y = vec![0.0; inst.n];
    let mut work_row = 0;
    for r in 0..inst.rows.len() {
        while work_row < work.rows.len() && reduced.as_ref().map_or(work_row == r, |red| red.row_origin[work_row] == r) {
            state.satisfy(&work.rows[work_row])?;
            work_row += 1;
        }
        let y = match &reduced {
            Some(red) => red.project(&state.x),
            None => state.x.clone(),
        };
        if y.iter().zip(&prev_y).any(|(a, b)| a < b) {
            state.monotone = false;
        }
        let feasible = inst.rows[..=r].iter().all(|row| dot(row, &y) >= 1.0 - 10.0 * inst.step);
        trace.push(y.clone(), inst.cost(&y), feasible, state.tau);
        prev_y = y;
    }
    trace.final_objective = inst.cost(&prev_y);
    trace.diag("psi_final", work.psi(&state.x));
    trace.diag("tau_final", state.tau);
    trace.diag("delta", delta);
    trace.diag("p_prime", work.outer_exponent());
    trace.diag("euler_steps", state.euler_steps as f64);
    trace.diag("monotone", if state.monotone { 1.0 } else { 0.0 });
    Ok(trace)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoverOptMode {
    /// Exhaustive grid with zoom refinement; n ≤ 6.
    Grid,
    /// Projected subgradient descent; iterates are repaired by cyclic halfspace projections.
    Subgradient,
}

/// Cap on grid points evaluated per refinement round.
const GRID_POINT_CAP: usize = 2_000_000;
const GRID_ROUNDS: usize = 8;

/// Offline optimum of the covering program, approximately.
pub fn offline_opt_cover(inst: &CoveringInstance, budget: usize, mode: CoverOptMode) -> Result<f64> {
    inst.validate()?;
    if budget < 2 {
        return Err(Error::InvalidParameter("budget must be >= 2".into()));
    }
    match mode {
        CoverOptMode::Grid => grid_opt(inst, budget),
        CoverOptMode::Subgradient => subgradient_opt(inst, budget),
    }
}

fn feasible(inst: &CoveringInstance, y: &[f64]) -> bool {
    inst.rows.iter().all(|row| dot(row, y) >= 1.0 - 1e-12)
}

/// Per-variable upper bound max_r 1/A_ri: beyond it a coordinate can be lowered
/// without losing feasibility.
fn coordinate_caps(inst: &CoveringInstance) -> Vec<f64> {
    (0..inst.n)
        .map(|i| inst.rows.iter().filter(|r| r[i] > 0.0).map(|r| 1.0 / r[i]).fold(0.0, f64::max))
        .collect()
}

fn grid_opt(inst: &CoveringInstance, budget: usize) -> Result<f64> {
    let n = inst.n;
    if n > 6 {
        return Err(Error::Unsupported(format!("grid mode needs n <= 6, got {n}")));
    }
    let caps = coordinate_caps(inst);
    let per_axis = (budget + 1).min((GRID_POINT_CAP as f64).powf(1.0 / n as f64).floor() as usize).max(3);
    let mut lo = vec![0.0; n];
    let mut hi = caps.clone();
    let mut best: Option<(f64, Vec<f64>)> = None;
    for _ in 0..GRID_ROUNDS {
        let mut idx = vec![0usize; n];
        let mut y = vec![0.0; n];
        loop {
            for i in 0..n {
                y[i] = lo[i] + (hi[i] - lo[i]) * idx[i] as f64 / (per_axis - 1) as f64;
            }
            if feasible(inst, &y) {
                let c = inst.cost(&y);
                if best.as_ref().is_none_or(|(b, _)| c < *b) {
                    best = Some((c, y.clone()));
                }
            }
            let mut pos = 0;
            while pos < n {
                idx[pos] += 1;
                if idx[pos] < per_axis {
                    break;
                }
                idx[pos] = 0;
                pos += 1;
            }
            if pos == n {
                break;
            }
        }
        let Some((_, center)) = &best else {
            return Err(Error::Infeasible("no feasible grid point".into()));
        };
        for i in 0..n {
            let cell = (hi[i] - lo[i]) / (per_axis - 1) as f64;
            lo[i] = (center[i] - 2.0 * cell).max(0.0);
            hi[i] = (center[i] + 2.0 * cell).min(caps[i]);
        }
    }
    Ok(best.map(|(c, _)| c).unwrap_or(f64::INFINITY))
}

/// Cyclic projections onto the violated halfspaces ⟨A_r, y⟩ ≥ 1, then a
/// uniform scale-up so that every row holds exactly.
fn repair(inst: &CoveringInstance, y: &mut [f64]) {
    for _ in 0..REPAIR_PASSES {
        let mut clean = true;
        for row in &inst.rows {
            let s = dot(row, y);
            if s < 1.0 {
                clean = false;
                let step = (1.0 - s) / dot(row, row);
                for (yi, a) in y.iter_mut().zip(row) {
                    *yi += step * a;
                }
            }
        }
        if clean {
            return;
        }
    }
    let worst = inst.rows.iter().map(|row| dot(row, y)).fold(f64::INFINITY, f64::min);
    if worst < 1.0 {
        for yi in y.iter_mut() {
            *yi /= worst;
        }
    }
}

const REPAIR_PASSES: usize = 50;

fn subgradient_opt(inst: &CoveringInstance, budget: usize) -> Result<f64> {
    let n = inst.n;
    let mut y: Vec<f64> = vec![0.0; n];
    repair(inst, &mut y);
    let mut best = inst.cost(&y);
    let scale = y.iter().fold(0.0_f64, |m, &v| m.max(v));
    let iters = 10 * budget;
    for k in 0..iters {
        let h = 1e-7 * scale.max(1e-12);
        let f0 = inst.cost(&y);
        let g: Vec<f64> = (0..n)
            .map(|i| {
                let mut yp = y.clone();
                yp[i] += h;
                (inst.cost(&yp) - f0) / h
            })
            .collect();
        let gmax = g.iter().fold(0.0_f64, |m, &v| m.max(v.abs()));
        if gmax == 0.0 {
            break;
        }
        let eta = 0.2 * scale / gmax / ((k + 1) as f64).sqrt();
        for (yi, gi) in y.iter_mut().zip(&g) {
            *yi = (*yi - eta * gi).max(0.0);
        }
        repair(inst, &mut y);
        best = best.min(inst.cost(&y));
    }
    Ok(best)
}
