//! Sampled certification and refutation of supermodularity-type properties.
//!
//! Every check is a pure function of its inputs and seed. Slacks are normalized
//! by the largest term involved, so tolerances are relative.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::norm::{NormDescriptor, NormKind, DEFAULT_FD_STEP};
use crate::sampling::{jitter, sample_mixed, sample_mixed_nonzero, sample_ratio_mix, seeded_rng, DetRng};

/// Pass threshold for checks built on closed-form values or gradients.
pub const ANALYTIC_TOL: f64 = 1e-7;
/// Pass threshold for checks that rely on finite differences.
pub const FD_TOL: f64 = 1e-4;
/// Slack allowed in the gradient-stability inequality.
pub const STABILITY_TOL: f64 = 1e-6;
/// Relative jitter that moves samples off tie sets.
pub const JITTER: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Property {
    FourPoint,
    GradientMonotone,
    Hessian,
    GradientStability,
    ApproxRatio,
    BlockChain,
    BudgetGauge,
    Decoupling,
}

/// The violating configuration: the points involved and, where relevant, coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub points: Vec<Vec<f64>>,
    #[serde(default)]
    pub coords: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertReport {
    pub property: Property,
    pub samples: usize,
    /// Samples dropped because a gradient was undefined there.
    pub skipped: usize,
    pub worst_violation: f64,
    pub tolerance: f64,
    pub passed: bool,
    pub witness: Option<Witness>,
    pub params: BTreeMap<String, f64>,
    pub seed: u64,
    /// "exact" for closed-form cases, "sampled" otherwise.
    pub label: String,
}

impl CertReport {
    fn finish(
        property: Property,
        samples: usize,
        skipped: usize,
        tracker: Tracker,
        tolerance: f64,
        params: &[(&str, f64)],
        seed: u64,
        exact: bool,
    ) -> Self {
        let passed = tracker.worst <= tolerance;
        CertReport {
            property,
            samples,
            skipped,
            worst_violation: tracker.worst,
            tolerance,
            passed,
            witness: if passed { None } else { tracker.witness },
            params: params.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            seed,
            label: if exact && passed { "exact" } else { "sampled" }.into(),
        }
    }

    /// One line: `PASS four_point worst=... (tol ...)` plus the witness, if any.
    pub fn summary(&self) -> String {
        let name = serde_json::to_value(self.property).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default();
        let mut s = format!(
            "{} {} worst={:.3e} tol={:.1e} samples={}",
            if self.passed { "PASS" } else { "FAIL" },
            name,
            self.worst_violation,
            self.tolerance,
            self.samples
        );
        if let Some(w) = &self.witness {
            s.push_str(&format!(" witness={}", serde_json::to_string(w).unwrap_or_default()));
        }
        s
    }
}

struct Tracker {
    worst: f64,
    witness: Option<Witness>,
}

impl Tracker {
    fn new() -> Self {
        Tracker { worst: f64::NEG_INFINITY, witness: None }
    }

    fn offer(&mut self, violation: f64, make: impl FnOnce() -> Witness) {
        if violation > self.worst {
            self.worst = violation;
            self.witness = Some(make());
        }
    }
}

fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

/// Scales a sample by 10^U(-1,1) so that relative magnitudes vary.
fn rescale(rng: &mut DetRng, x: &mut [f64]) {
    let s = 10f64.powf(rng.gen_range(-1.0..1.0));
    x.iter_mut().for_each(|c| *c *= s);
}

/// Whether a p-supermodularity claim for this norm follows from its closed form.
fn closed_form_supermodular(norm: &NormDescriptor, p: f64) -> bool {
    match norm.kind() {
        NormKind::Lp { p: q } => *q <= p,
        NormKind::WeightedLinear { .. } => p >= 1.0,
        _ => false,
    }
}

/// Four-point slack (‖u+w‖^p − ‖u‖^p) − (‖u+v+w‖^p − ‖u+v‖^p), normalized by ‖u+v+w‖^p.
pub fn four_point_violation(norm: &NormDescriptor, p: f64, u: &[f64], v: &[f64], w: &[f64]) -> f64 {
    let uv = add(u, v);
    let uw = add(u, w);
    let uvw = add(&uv, w);
    let top = norm.value(&uvw);
    if top == 0.0 {
        return 0.0;
    }
    let pw = |y: &[f64]| (norm.value(y) / top).powf(p);
    (pw(&uw) - pw(u)) - (1.0 - pw(&uv))
}

pub fn check_four_point(norm: &NormDescriptor, p: f64, samples: usize, seed: u64) -> Result<CertReport> {
    check_p(p)?;
    let n = norm.dim();
    let mut rng = seeded_rng(seed, 1);
    let mut t = Tracker::new();
    for _ in 0..samples {
        let u = sample_mixed(&mut rng, n);
        let mut v = sample_mixed(&mut rng, n);
        let mut w = sample_mixed(&mut rng, n);
        rescale(&mut rng, &mut v);
        rescale(&mut rng, &mut w);
        let viol = four_point_violation(norm, p, &u, &v, &w);
        t.offer(viol, || Witness { points: vec![u.clone(), v.clone(), w.clone()], coords: vec![] });
    }
    Ok(CertReport::finish(
        Property::FourPoint,
        samples,
        0,
        t,
        ANALYTIC_TOL,
        &[("p", p)],
        seed,
        closed_form_supermodular(norm, p),
    ))
}

/// ∇(‖y‖^p) = p‖y‖^{p−1}∇‖y‖.
pub fn power_gradient(norm: &NormDescriptor, p: f64, y: &[f64]) -> Result<Vec<f64>> {
    let g = norm.gradient(y, DEFAULT_FD_STEP)?;
    let s = p * norm.value(y).powf(p - 1.0);
    Ok(g.into_iter().map(|gi| s * gi).collect())
}

/// Largest normalized drop max_i (∇_i‖u‖^p − ∇_i‖u+v‖^p) / max(∇‖u‖^p, ∇‖u+v‖^p), with its coordinate.
pub fn gradient_monotone_violation(norm: &NormDescriptor, p: f64, u: &[f64], v: &[f64]) -> Result<(f64, usize)> {
    let gu = power_gradient(norm, p, u)?;
    let guv = power_gradient(norm, p, &add(u, v))?;
    let scale = gu.iter().chain(&guv).fold(0.0_f64, |m, &g| m.max(g.abs()));
    if scale == 0.0 {
        return Ok((0.0, 0));
    }
    Ok(gu
        .iter()
        .zip(&guv)
        .enumerate()
        .map(|(i, (a, b))| ((a - b) / scale, i))
        .fold((f64::NEG_INFINITY, 0), |acc, c| if c.0 > acc.0 { c } else { acc }))
}

pub fn check_gradient_monotone(norm: &NormDescriptor, p: f64, samples: usize, seed: u64) -> Result<CertReport> {
    check_p(p)?;
    let n = norm.dim();
    let mut rng = seeded_rng(seed, 2);
    let mut t = Tracker::new();
    let mut skipped = 0;
    for _ in 0..samples {
        let mut u = sample_mixed_nonzero(&mut rng, n);
        jitter(&mut rng, &mut u, JITTER);
        let mut v = sample_mixed(&mut rng, n);
        rescale(&mut rng, &mut v);
        match gradient_monotone_violation(norm, p, &u, &v) {
            Ok((viol, i)) => t.offer(viol, || Witness { points: vec![u.clone(), v.clone()], coords: vec![i] }),
            Err(Error::FlatRegion) | Err(Error::GradientAtOrigin) => skipped += 1,
            Err(e) => return Err(e),
        }
    }
    let tol = if norm.has_analytic_gradient() { ANALYTIC_TOL } else { FD_TOL };
    Ok(CertReport::finish(
        Property::GradientMonotone,
        samples,
        skipped,
        t,
        tol,
        &[("p", p)],
        seed,
        closed_form_supermodular(norm, p),
    ))
}

/// Finite-difference Hessian of the norm at x: differences of the analytic gradient
/// where one exists, second differences of values otherwise. One-sided in any
/// coordinate closer to zero than the step.
pub fn fd_hessian(norm: &NormDescriptor, x: &[f64], fd_step: f64) -> Result<Vec<Vec<f64>>> {
    let n = x.len();
    let h = fd_step * x.iter().fold(0.0_f64, |m, &v| m.max(v));
    if h == 0.0 {
        return Err(Error::GradientAtOrigin);
    }
    let mut hess = vec![vec![0.0; n]; n];
    if norm.has_analytic_gradient() {
        let mut buf = x.to_vec();
        for j in 0..n {
            let lo = if x[j] >= h { x[j] - h } else { x[j] };
            buf[j] = x[j] + h;
            let gp = norm.gradient(&buf, fd_step)?;
            buf[j] = lo;
            let gm = norm.gradient(&buf, fd_step)?;
            buf[j] = x[j];
            let width = x[j] + h - lo;
            for i in 0..n {
                hess[i][j] = (gp[i] - gm[i]) / width;
            }
        }
        // Symmetrize the two one-sided estimates of each mixed partial.
        for i in 0..n {
            for j in 0..i {
                let m = 0.5 * (hess[i][j] + hess[j][i]);
                hess[i][j] = m;
                hess[j][i] = m;
            }
        }
        return Ok(hess);
    }
    let f = |y: &[f64]| norm.value(y);
    let shift = |i: usize, di: f64, j: usize, dj: f64| {
        let mut y = x.to_vec();
        y[i] += di;
        y[j] += dj;
        y
    };
    // Forward differences keep all evaluation points in the orthant.
    for i in 0..n {
        let (si, hi) = if x[i] >= h { (-1.0, h) } else { (1.0, h) };
        for j in i..n {
            let (sj, hj) = if x[j] >= h { (-1.0, h) } else { (1.0, h) };
            let val = if i == j {
                if si < 0.0 {
                    (f(&shift(i, h, i, 0.0)) - 2.0 * f(x) + f(&shift(i, -h, i, 0.0))) / (h * h)
                } else {
                    (f(&shift(i, 2.0 * h, i, 0.0)) - 2.0 * f(&shift(i, h, i, 0.0)) + f(x)) / (h * h)
                }
            } else if si < 0.0 && sj < 0.0 {
                (f(&shift(i, h, j, h)) - f(&shift(i, h, j, -h)) - f(&shift(i, -h, j, h)) + f(&shift(i, -h, j, -h)))
                    / (4.0 * h * h)
            } else {
                (f(&shift(i, hi, j, hj)) - f(&shift(i, hi, j, 0.0)) - f(&shift(i, 0.0, j, hj)) + f(x)) / (hi * hj)
            };
            hess[i][j] = val;
            hess[j][i] = val;
        }
    }
    Ok(hess)
}

/// Worst normalized slack of H_ij ≥ −(p−1)∇_i∇_j/‖x‖ at x, and the pair attaining it.
/// Normalized by (max_i ∇_i)²/‖x‖.
pub fn hessian_violation(norm: &NormDescriptor, p: f64, x: &[f64], fd_step: f64) -> Result<(f64, usize, usize)> {
    let g = norm.gradient(x, fd_step)?;
    let hess = fd_hessian(norm, x, fd_step)?;
    let nx = norm.value(x);
    let gmax = g.iter().fold(0.0_f64, |m, &v| m.max(v.abs()));
    let scale = gmax * gmax / nx;
    if scale == 0.0 {
        return Ok((0.0, 0, 0));
    }
    let mut worst = (f64::NEG_INFINITY, 0, 0);
    for i in 0..x.len() {
        for j in 0..x.len() {
            let bound = -(p - 1.0) * g[i] * g[j] / nx;
            let viol = (bound - hess[i][j]) / scale;
            if viol > worst.0 {
                worst = (viol, i, j);
            }
        }
    }
    Ok(worst)
}

pub fn check_hessian(norm: &NormDescriptor, p: f64, samples: usize, fd_step: f64, seed: u64) -> Result<CertReport> {
    check_p(p)?;
    let n = norm.dim();
    let mut rng = seeded_rng(seed, 3);
    let mut t = Tracker::new();
    let mut skipped = 0;
    for _ in 0..samples {
        let mut x = sample_mixed_nonzero(&mut rng, n);
        jitter(&mut rng, &mut x, JITTER);
        match hessian_violation(norm, p, &x, fd_step) {
            Ok((viol, i, j)) => t.offer(viol, || Witness { points: vec![x.clone()], coords: vec![i, j] }),
            Err(Error::FlatRegion) | Err(Error::GradientAtOrigin) => skipped += 1,
            Err(e) => return Err(e),
        }
    }
    Ok(CertReport::finish(
        Property::Hessian,
        samples,
        skipped,
        t,
        FD_TOL,
        &[("p", p), ("fd_step", fd_step)],
        seed,
        false,
    ))
}

/// Ψ_ε(x) = max{(p−1)/ε, ‖x‖}.
pub fn stable_surrogate(norm: &NormDescriptor, p: f64, eps: f64, x: &[f64]) -> f64 {
    ((p - 1.0) / eps).max(norm.value(x))
}

/// ∇Ψ_ε: zero where ‖x‖ ≤ (p−1)/ε, the norm gradient elsewhere.
pub fn stable_surrogate_gradient(norm: &NormDescriptor, p: f64, eps: f64, x: &[f64]) -> Result<Vec<f64>> {
    if norm.value(x) <= (p - 1.0) / eps {
        return Ok(vec![0.0; x.len()]);
    }
    norm.gradient(x, DEFAULT_FD_STEP)
}

/// Normalized slack of ∇Ψ_ε(x+y) ≥ e^{−ε‖y‖}∇Ψ_ε(x) at (x, y), with its coordinate.
pub fn stability_violation(norm: &NormDescriptor, p: f64, eps: f64, x: &[f64], y: &[f64]) -> Result<(f64, usize)> {
    let gx = stable_surrogate_gradient(norm, p, eps, x)?;
    let gxy = stable_surrogate_gradient(norm, p, eps, &add(x, y))?;
    let decay = (-eps * norm.value(y)).exp();
    let scale = gx.iter().fold(0.0_f64, |m, &g| m.max(g.abs()));
    if scale == 0.0 {
        return Ok((f64::NEG_INFINITY, 0));
    }
    Ok(gx
        .iter()
        .zip(&gxy)
        .enumerate()
        .map(|(i, (a, b))| ((decay * a - b) / scale, i))
        .fold((f64::NEG_INFINITY, 0), |acc, c| if c.0 > acc.0 { c } else { acc }))
}

/// Checks gradient stability of Ψ_ε and the sandwich ‖x‖ ≤ Ψ_ε(x) ≤ ‖x‖ + (p−1)/ε.
///
/// Samples are scaled so that ‖x‖ lands around the threshold (p−1)/ε and ε‖y‖ is O(1),
/// which is where the inequality is tight. A sandwich failure counts as an infinite violation.
pub fn check_gradient_stability(norm: &NormDescriptor, p: f64, eps: f64, samples: usize, seed: u64) -> Result<CertReport> {
    check_p(p)?;
    if !(eps > 0.0) {
        return Err(Error::InvalidParameter(format!("eps must be positive, got {eps}")));
    }
    if let Some(q) = norm.supermod_p() {
        if q > p {
            return Err(Error::InvalidParameter(format!("norm is only {q}-supermodular, p = {p} given")));
        }
    }
    let n = norm.dim();
    let threshold = (p - 1.0) / eps;
    let mut rng = seeded_rng(seed, 4);
    let mut t = Tracker::new();
    let mut skipped = 0;
    for _ in 0..samples {
        let mut x = sample_mixed_nonzero(&mut rng, n);
        jitter(&mut rng, &mut x, JITTER);
        let target = threshold.max(1e-3) * 10f64.powf(rng.gen_range(-0.5..1.0));
        let sx = target / norm.value(&x);
        x.iter_mut().for_each(|c| *c *= sx);
        let mut y = sample_mixed(&mut rng, n);
        let ny = norm.value(&y);
        if ny > 0.0 {
            let sy = rng.gen_range(0.0..3.0) / (eps * ny);
            y.iter_mut().for_each(|c| *c *= sy);
        }
        let psi = stable_surrogate(norm, p, eps, &x);
        let nx = norm.value(&x);
        if !(nx <= psi && psi <= nx + threshold) {
            t.offer(f64::INFINITY, || Witness { points: vec![x.clone()], coords: vec![] });
            continue;
        }
        match stability_violation(norm, p, eps, &x, &y) {
            Ok((viol, i)) => t.offer(viol, || Witness { points: vec![x.clone(), y.clone()], coords: vec![i] }),
            Err(Error::FlatRegion) | Err(Error::GradientAtOrigin) => skipped += 1,
            Err(e) => return Err(e),
        }
    }
    if t.worst == f64::NEG_INFINITY {
        t.worst = 0.0;
    }
    Ok(CertReport::finish(
        Property::GradientStability,
        samples,
        skipped,
        t,
        STABILITY_TOL,
        &[("p", p), ("eps", eps)],
        seed,
        false,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioEstimate {
    pub lo: f64,
    pub hi: f64,
    pub samples: usize,
    /// Samples where `a` vanished on a nonzero vector.
    pub skipped: usize,
}

/// Range of b(x)/a(x) over sampled sparse, dense, flat and spiky vectors.
pub fn estimate_approx_ratio(a: &NormDescriptor, b: &NormDescriptor, samples: usize, seed: u64) -> Result<RatioEstimate> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), got: b.dim() });
    }
    let mut rng = seeded_rng(seed, 5);
    let (mut lo, mut hi, mut skipped) = (f64::INFINITY, f64::NEG_INFINITY, 0);
    for _ in 0..samples {
        let x = sample_ratio_mix(&mut rng, a.dim());
        let va = a.value(&x);
        if va == 0.0 {
            skipped += 1;
            continue;
        }
        let r = b.value(&x) / va;
        lo = lo.min(r);
        hi = hi.max(r);
    }
    Ok(RatioEstimate { lo, hi, samples, skipped })
}

/// Certifies lo·a ≤ b ≤ hi·a on samples; the violation is relative to a(x).
pub fn check_approx_ratio(
    a: &NormDescriptor,
    b: &NormDescriptor,
    lo: f64,
    hi: f64,
    samples: usize,
    seed: u64,
) -> Result<CertReport> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), got: b.dim() });
    }
    let mut rng = seeded_rng(seed, 5);
    let mut t = Tracker::new();
    let mut skipped = 0;
    for _ in 0..samples {
        let x = sample_ratio_mix(&mut rng, a.dim());
        let va = a.value(&x);
        if va == 0.0 {
            skipped += 1;
            continue;
        }
        let r = b.value(&x) / va;
        t.offer((lo - r).max(r - hi), || Witness { points: vec![x.clone()], coords: vec![] });
    }
    Ok(CertReport::finish(Property::ApproxRatio, samples, skipped, t, 1e-9, &[("lo", lo), ("hi", hi)], seed, false))
}

/// Outcome of the block-chain argument against a candidate f on m×m coordinates
/// claimed to be p-supermodular and an α-approximation of the sum of column maxima.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockChainEvidence {
    pub m: usize,
    /// Greedy column order; the last entry is the spare column.
    pub column_order: Vec<usize>,
    /// f on the diagonal of the first m−1 rows.
    pub f_diag: f64,
    /// f on the spare column's first m−1 rows.
    pub f_spare: f64,
    pub f_union: f64,
    /// (m−1)(2^{1/p}−1) − α: positive means the claim is impossible for any f.
    pub arithmetic_gap: f64,
}

/// Coordinate of cell (row i, column k) in the column-major block layout.
pub fn block_index(m: usize, i: usize, k: usize) -> usize {
    k * m + i
}

/// Runs the block-chain argument on `candidate` (dimension m²).
///
/// Columns are ordered greedily so that each diagonal step is no more expensive than
/// stepping into any later column. The last column is kept as the spare. On the
/// first m−1 rows, p-supermodularity forces 2^{1/p}·f(D) ≤ f(D ∪ S), and an
/// α-approximation needs f(D) ≥ m−1 and f(S) ≤ α. The report fails (claim refuted)
/// when any of these is violated by the candidate or when the arithmetic
/// (m−1)(2^{1/p}−1) > α rules out every candidate.
pub fn counterexample_block_chain(m: usize, candidate: &NormDescriptor, p: f64, alpha: f64) -> Result<(CertReport, BlockChainEvidence)> {
    check_p(p)?;
    if m < 2 {
        return Err(Error::InvalidParameter("need at least two blocks".into()));
    }
    if candidate.dim() != m * m {
        return Err(Error::DimensionMismatch { expected: m * m, got: candidate.dim() });
    }
    let n = m * m;
    let mut diag = vec![0.0; n];
    let mut remaining: Vec<usize> = (0..m).collect();
    let mut order = Vec::with_capacity(m);
    for i in 0..m {
        let mut best = (f64::INFINITY, 0);
        for (pos, &k) in remaining.iter().enumerate() {
            let mut trial = diag.clone();
            trial[block_index(m, i, k)] = 1.0;
            let v = candidate.value(&trial);
            if v < best.0 {
                best = (v, pos);
            }
        }
        let k = remaining.remove(best.1);
        if i + 1 < m {
            diag[block_index(m, i, k)] = 1.0;
        }
        order.push(k);
    }
    let spare = order[m - 1];
    let mut col = vec![0.0; n];
    for i in 0..m - 1 {
        col[block_index(m, i, spare)] = 1.0;
    }
    let union = add(&diag, &col);
    let f_diag = candidate.value(&diag);
    let f_spare = candidate.value(&col);
    let f_union = candidate.value(&union);
    let rows = (m - 1) as f64;
    let factor = 2f64.powf(1.0 / p);
    let arithmetic_gap = rows * (factor - 1.0) - alpha;

    let mut t = Tracker::new();
    let scale = rows.max(alpha);
    let checks = [
        arithmetic_gap / scale,
        (factor * f_diag - f_union) / f_union.max(1e-300),
        (rows - f_diag) / scale,
        (f_spare - alpha) / scale,
    ];
    for c in checks {
        t.offer(c, || Witness { points: vec![diag.clone(), col.clone()], coords: order.clone() });
    }
    let report = CertReport::finish(
        Property::BlockChain,
        1,
        0,
        t,
        ANALYTIC_TOL,
        &[("m", m as f64), ("p", p), ("alpha", alpha)],
        0,
        false,
    );
    Ok((report, BlockChainEvidence { m, column_order: order, f_diag, f_spare, f_union, arithmetic_gap }))
}

/// Gauge of {x : top_{2^j}(x) ≤ c^j for all j} by bisection on the scale, with
/// membership decided by enumerating every subset of each dyadic size.
/// Exponential in the dimension; meant for n ≤ 12.
pub fn budget_gauge_brute_force(x: &[f64], c: f64) -> f64 {
    let n = x.len();
    let sizes: Vec<usize> = (0..).map(|j| 1usize << j).take_while(|&k| k <= n).collect();
    let max_subset_sum = |k: usize| -> f64 {
        (0u32..1 << n)
            .filter(|mask| mask.count_ones() as usize == k)
            .map(|mask| (0..n).filter(|i| mask & (1 << i) != 0).map(|i| x[i]).sum::<f64>())
            .fold(0.0, f64::max)
    };
    let sums: Vec<f64> = sizes.iter().map(|&k| max_subset_sum(k)).collect();
    let inside = |alpha: f64| sums.iter().enumerate().all(|(j, s)| s / alpha <= c.powi(j as i32));
    let total: f64 = x.iter().sum();
    if total == 0.0 {
        return 0.0;
    }
    let (mut lo, mut hi) = (0.0, total.max(1e-300));
    while !inside(hi) {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if inside(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    hi
}

/// The vector with every budget constraint tight: x₁ = 1 and (c/2)^j(c−1) on
/// positions (2^j, 2^{j+1}]. Its budget-norm value is 1 when 1 < c ≤ 2; for larger
/// c the entries are not sorted and the value exceeds 1.
pub fn budget_tight_vector(n: usize, c: f64) -> Vec<f64> {
    let mut x = vec![0.0; n];
    if n == 0 {
        return x;
    }
    x[0] = 1.0;
    let mut j = 0;
    while (1usize << j) < n {
        let lo = 1usize << j;
        let hi = (lo << 1).min(n);
        let v = (c / 2.0).powi(j) * (c - 1.0);
        for slot in &mut x[lo..hi] {
            *slot = v;
        }
        j += 1;
    }
    x
}

/// Compares the budget-norm evaluator with the brute-force gauge on sampled vectors.
pub fn check_budget_gauge(n: usize, c: f64, samples: usize, seed: u64) -> Result<CertReport> {
    if n > 12 {
        return Err(Error::BudgetExceeded(format!("brute-force gauge limited to n <= 12, got {n}")));
    }
    let norm = NormDescriptor::budget_prefix(n, c)?;
    let mut rng = seeded_rng(seed, 6);
    let mut t = Tracker::new();
    let mut xs = vec![budget_tight_vector(n, c)];
    for _ in 0..samples {
        xs.push(sample_ratio_mix(&mut rng, n));
    }
    for x in &xs {
        let a = norm.value(x);
        let b = budget_gauge_brute_force(x, c);
        let viol = (a - b).abs() / b.max(1e-300);
        t.offer(viol, || Witness { points: vec![x.clone()], coords: vec![] });
    }
    Ok(CertReport::finish(Property::BudgetGauge, xs.len(), 0, t, 1e-6, &[("n", n as f64), ("c", c)], seed, false))
}

fn check_p(p: f64) -> Result<()> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(Error::InvalidParameter(format!("p must be finite and >= 1, got {p}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn four_point_single_triple() {
        let l2 = NormDescriptor::lp(1, 2.0).unwrap();
        // (9 − 4) ≥ (4 − 1): slack −2/9.
        let v = four_point_violation(&l2, 2.0, &[1.0], &[1.0], &[1.0]);
        assert!((v + 2.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn l1_is_modular() {
        let l1 = NormDescriptor::lp(5, 1.0).unwrap();
        let r = check_four_point(&l1, 1.0, 500, 3).unwrap();
        assert!(r.passed && r.worst_violation.abs() < 1e-12);
        assert_eq!(r.label, "exact");
    }

    #[test]
    fn stability_example() {
        let l2 = NormDescriptor::lp(2, 2.0).unwrap();
        let (v, _) = stability_violation(&l2, 2.0, 0.5, &[3.0, 4.0], &[1.0, 1.0]).unwrap();
        assert!(v <= 0.0);
        let (v0, _) = stability_violation(&l2, 2.0, 1.0, &[3.0, 4.0], &[0.0, 0.0]).unwrap();
        assert!(v0.abs() < 1e-15);
        assert_eq!(stable_surrogate_gradient(&l2, 2.0, 1.0, &[0.3, 0.4]).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn tight_budget_vector_has_norm_one() {
        let x = budget_tight_vector(8, 1.5);
        let norm = NormDescriptor::budget_prefix(8, 1.5).unwrap();
        assert!((norm.value(&x) - 1.0).abs() < 1e-12);
        assert!(x.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn block_index_layout() {
        let f = NormDescriptor::sum_linf_blocks(9, 3).unwrap();
        let mut x = vec![0.0; 9];
        x[block_index(3, 0, 1)] = 1.0;
        x[block_index(3, 2, 1)] = 1.0;
        assert_eq!(f.value(&x), 1.0);
    }
}
