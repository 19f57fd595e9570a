//! Monotone norms on the nonnegative orthant.
//!
//! A [`NormDescriptor`] is a closed description of a norm: it can be evaluated,
//! differentiated (analytically where a formula exists, by finite differences
//! otherwise), composed, and serialized. Every descriptor optionally carries the
//! exponent `p` for which its p-th power is known or claimed to be supermodular.

mod json;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::orlicz::{self, OrliczFunction};
use crate::sampling::{sample_bump, seeded_rng};
use crate::vector::{check_coords, dot, max_abs, NonNegVector};

/// Default relative step for finite-difference gradients.
pub const DEFAULT_FD_STEP: f64 = 1e-5;

/// The concrete family a norm belongs to.
#[derive(Debug, Clone, PartialEq)]
pub enum NormKind {
    /// (Σ x_i^p)^{1/p} for finite p ≥ 1.
    Lp { p: f64 },
    Linf,
    /// Sum of the k largest coordinates.
    TopK { k: usize },
    /// ⟨w, x⟩; a seminorm when some weight is zero.
    WeightedLinear { w: Vec<f64> },
    /// max_i w_i x_i.
    WeightedLinf { w: Vec<f64> },
    /// Sum over consecutive blocks of the block maximum.
    SumLinfBlocks { block_size: usize },
    /// ‖x‖₁ + ‖x‖₂.
    L1PlusL2,
    /// Pointwise maximum of several norms.
    Max { inners: Vec<NormDescriptor> },
    /// Gauge of {x : top_{2^j}(x) ≤ c^j for all j}, i.e. max_j top_{2^j}(x) / c^j.
    BudgetPrefix { c: f64 },
    Orlicz { g: OrliczFunction, tol: f64 },
    /// x ↦ ‖Ax‖ with `a` stored row-major, `inner.dim` rows by `dim` columns.
    LinearCompose { a: Vec<Vec<f64>>, inner: Box<NormDescriptor> },
    /// (Σ w_i^p f_i(x)^p)^{1/p}.
    LpCombine { p: f64, weights: Vec<f64>, inners: Vec<NormDescriptor> },
    /// Average of ‖R ∘ x‖ over pre-drawn scalings R ∈ [1, 1+eps]^dim.
    Smoothed { inner: Box<NormDescriptor>, eps: f64, seed: u64, samples: usize, scalings: Vec<f64> },
    /// Output of the symmetric-norm approximation; evaluates `inner`.
    SymmetricApprox { inner: Box<NormDescriptor>, outer_p: f64, distortion: Option<(f64, f64)> },
}

/// An evaluable monotone norm (or flagged seminorm) on R^dim_+.
#[derive(Debug, Clone, PartialEq)]
pub struct NormDescriptor {
    kind: NormKind,
    dim: usize,
    supermod_p: Option<f64>,
}

/// A gradient together with the point it was taken at.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GradientVector {
    pub coords: Vec<f64>,
    pub at: NonNegVector,
    /// True when the coordinates came from a closed form rather than finite differences.
    pub analytic: bool,
}

fn positive_dim(dim: usize) -> Result<()> {
    if dim == 0 {
        return Err(Error::InvalidParameter("dimension must be >= 1".into()));
    }
    Ok(())
}

fn check_weights(w: &[f64]) -> Result<()> {
    if w.is_empty() {
        return Err(Error::InvalidParameter("weight vector is empty".into()));
    }
    check_coords(w)
}

impl NormDescriptor {
    fn raw(kind: NormKind, dim: usize, supermod_p: Option<f64>) -> Self {
        Self { kind, dim, supermod_p }
    }

    pub fn lp(dim: usize, p: f64) -> Result<Self> {
        positive_dim(dim)?;
        if !(p >= 1.0) || !p.is_finite() {
            return Err(Error::InvalidParameter(format!("lp exponent must be finite and >= 1, got {p}")));
        }
        Ok(Self::raw(NormKind::Lp { p }, dim, Some(p)))
    }

    pub fn linf(dim: usize) -> Result<Self> {
        positive_dim(dim)?;
        Ok(Self::raw(NormKind::Linf, dim, None))
    }

    pub fn topk(dim: usize, k: usize) -> Result<Self> {
        positive_dim(dim)?;
        if k == 0 || k > dim {
            return Err(Error::InvalidParameter(format!("top-k needs 1 <= k <= {dim}, got {k}")));
        }
        let p = if k == dim { Some(1.0) } else { None };
        Ok(Self::raw(NormKind::TopK { k }, dim, p))
    }

    pub fn weighted_linear(w: Vec<f64>) -> Result<Self> {
        check_weights(&w)?;
        let dim = w.len();
        Ok(Self::raw(NormKind::WeightedLinear { w }, dim, Some(1.0)))
    }

    pub fn weighted_linf(w: Vec<f64>) -> Result<Self> {
        check_weights(&w)?;
        let dim = w.len();
        Ok(Self::raw(NormKind::WeightedLinf { w }, dim, None))
    }

    pub fn sum_linf_blocks(dim: usize, block_size: usize) -> Result<Self> {
        positive_dim(dim)?;
        if block_size == 0 || !dim.is_multiple_of(block_size) {
            return Err(Error::InvalidParameter(format!(
                "block size {block_size} must be positive and divide dim {dim}"
            )));
        }
        let p = if block_size == 1 { Some(1.0) } else { None };
        Ok(Self::raw(NormKind::SumLinfBlocks { block_size }, dim, p))
    }

    pub fn l1_plus_l2(dim: usize) -> Result<Self> {
        positive_dim(dim)?;
        Ok(Self::raw(NormKind::L1PlusL2, dim, None))
    }

    pub fn max_of(inners: Vec<NormDescriptor>) -> Result<Self> {
        let dim = common_dim(&inners)?;
        Ok(Self::raw(NormKind::Max { inners }, dim, None))
    }

    pub fn budget_prefix(dim: usize, c: f64) -> Result<Self> {
        positive_dim(dim)?;
        if !(c > 1.0) || !c.is_finite() {
            return Err(Error::InvalidParameter(format!("budget base c must exceed 1, got {c}")));
        }
        Ok(Self::raw(NormKind::BudgetPrefix { c }, dim, None))
    }

    /// Orlicz norm of `g` on R^dim_+ with the default bisection tolerance.
    pub fn orlicz(g: OrliczFunction, dim: usize) -> Result<Self> {
        Self::orlicz_with_tol(g, dim, orlicz::DEFAULT_TOL)
    }

    pub fn orlicz_with_tol(g: OrliczFunction, dim: usize, tol: f64) -> Result<Self> {
        positive_dim(dim)?;
        if !(tol > 0.0) {
            return Err(Error::InvalidParameter(format!("tolerance must be positive, got {tol}")));
        }
        g.validate()?;
        // Fails early for functions that never reach 1.
        g.inverse(1.0)?;
        Ok(Self::raw(NormKind::Orlicz { g, tol }, dim, None))
    }

    /// x ↦ ‖Ax‖ where `a` has `self.dim` rows; the new dimension is the column count.
    /// Zero columns make the result a seminorm; that is permitted and reported by
    /// [`NormDescriptor::is_seminorm`].
    pub fn compose_linear(&self, a: Vec<Vec<f64>>) -> Result<Self> {
        if a.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: a.len() });
        }
        let cols = a[0].len();
        positive_dim(cols)?;
        for row in &a {
            if row.len() != cols {
                return Err(Error::InvalidParameter("ragged matrix".into()));
            }
            check_coords(row)?;
        }
        Ok(Self::raw(
            NormKind::LinearCompose { a, inner: Box::new(self.clone()) },
            cols,
            self.supermod_p,
        ))
    }

    /// (Σ w_i^p f_i(x)^p)^{1/p}. Carries supermod_p = p when every inner norm is
    /// q-supermodular for some q ≤ p.
    pub fn lp_combine(inners: Vec<NormDescriptor>, weights: Vec<f64>, p: f64) -> Result<Self> {
        let dim = common_dim(&inners)?;
        if weights.len() != inners.len() {
            return Err(Error::InvalidParameter(format!(
                "{} weights for {} inner norms",
                weights.len(),
                inners.len()
            )));
        }
        check_coords(&weights)?;
        if !(p >= 1.0) || !p.is_finite() {
            return Err(Error::InvalidParameter(format!("combine exponent must be finite and >= 1, got {p}")));
        }
        let supermod = inners.iter().all(|f| matches!(f.supermod_p, Some(q) if q <= p)).then_some(p);
        Ok(Self::raw(NormKind::LpCombine { p, weights, inners }, dim, supermod))
    }

    /// The smoothed norm x ↦ E‖(R_1 x_1, …, R_d x_d)‖, estimated with `samples`
    /// scalings R_i = 1 + eps·B_i, B_i from the bump density on [0,1].
    /// The scalings are a function of (seed, sample index) only.
    pub fn smooth(&self, eps: f64, seed: u64, samples: usize) -> Result<Self> {
        if !(eps > 0.0) || !eps.is_finite() {
            return Err(Error::InvalidParameter(format!("eps must be positive, got {eps}")));
        }
        if samples == 0 {
            return Err(Error::InvalidParameter("need at least one smoothing sample".into()));
        }
        let scalings = smoothing_scalings(self.dim, eps, seed, samples);
        Ok(Self::raw(
            NormKind::Smoothed { inner: Box::new(self.clone()), eps, seed, samples, scalings },
            self.dim,
            self.supermod_p,
        ))
    }

    pub(crate) fn symmetric_approx(inner: NormDescriptor, outer_p: f64, distortion: Option<(f64, f64)>) -> Self {
        let dim = inner.dim;
        let p = inner.supermod_p;
        Self::raw(NormKind::SymmetricApprox { inner: Box::new(inner), outer_p, distortion }, dim, p)
    }

    /// Replaces the supermodularity parameter (a claim the caller takes responsibility for).
    pub fn with_supermod_p(mut self, p: Option<f64>) -> Self {
        self.supermod_p = p;
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> &NormKind {
        &self.kind
    }

    pub fn supermod_p(&self) -> Option<f64> {
        self.supermod_p
    }

    /// Short name of the kind as used in JSON.
    pub fn kind_name(&self) -> &'static str {
        match &self.kind {
            NormKind::Lp { .. } => "lp",
            NormKind::Linf => "linf",
            NormKind::TopK { .. } => "topk",
            NormKind::WeightedLinear { .. } => "weighted_linear",
            NormKind::WeightedLinf { .. } => "weighted_linf",
            NormKind::SumLinfBlocks { .. } => "sum_linf_blocks",
            NormKind::L1PlusL2 => "l1_plus_l2",
            NormKind::Max { .. } => "max",
            NormKind::BudgetPrefix { .. } => "budget_prefix",
            NormKind::Orlicz { .. } => "orlicz",
            NormKind::LinearCompose { .. } => "linear_compose",
            NormKind::LpCombine { .. } => "lp_combine",
            NormKind::Smoothed { .. } => "smoothed",
            NormKind::SymmetricApprox { .. } => "symmetric_approx",
        }
    }

    /// Measured (lo, hi) distortion for symmetric approximations, if recorded.
    pub fn distortion(&self) -> Option<(f64, f64)> {
        match &self.kind {
            NormKind::SymmetricApprox { distortion, .. } => *distortion,
            _ => None,
        }
    }

    /// True when the descriptor may vanish on a nonzero vector.
    pub fn is_seminorm(&self) -> bool {
        match &self.kind {
            NormKind::WeightedLinear { w } | NormKind::WeightedLinf { w } => w.contains(&0.0),
            NormKind::LinearCompose { a, inner } => {
                inner.is_seminorm() || (0..self.dim).any(|j| a.iter().all(|row| row[j] == 0.0))
            }
            NormKind::LpCombine { weights, inners, .. } => {
                // Vanishes somewhere iff some coordinate is invisible to every weighted inner norm.
                (0..self.dim).any(|j| {
                    let e = NonNegVector::unit(self.dim, j);
                    inners.iter().zip(weights).all(|(f, &w)| w == 0.0 || f.value(e.as_slice()) == 0.0)
                })
            }
            NormKind::Max { inners } => inners.iter().all(|f| f.is_seminorm()),
            NormKind::Smoothed { inner, .. } | NormKind::SymmetricApprox { inner, .. } => inner.is_seminorm(),
            _ => false,
        }
    }

    /// Whether [`NormDescriptor::gradient`] uses a closed form.
    pub fn has_analytic_gradient(&self) -> bool {
        match &self.kind {
            NormKind::Lp { .. } | NormKind::WeightedLinear { .. } | NormKind::L1PlusL2 | NormKind::Orlicz { .. } => true,
            NormKind::LinearCompose { inner, .. }
            | NormKind::Smoothed { inner, .. }
            | NormKind::SymmetricApprox { inner, .. } => inner.has_analytic_gradient(),
            NormKind::LpCombine { inners, .. } | NormKind::Max { inners } => {
                inners.iter().all(|f| f.has_analytic_gradient())
            }
            _ => false,
        }
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: x.len() });
        }
        check_coords(x)
    }

    /// Evaluates the norm at a validated vector.
    pub fn eval(&self, x: &NonNegVector) -> Result<f64> {
        self.check_input(x.as_slice())?;
        Ok(self.value(x.as_slice()))
    }

    /// Evaluates the norm at a raw slice, validating dimension and sign.
    pub fn eval_slice(&self, x: &[f64]) -> Result<f64> {
        self.check_input(x)?;
        Ok(self.value(x))
    }

    /// Unchecked evaluation. The caller guarantees `x.len() == dim` and `x ≥ 0`.
    pub fn value(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.dim);
        match &self.kind {
            NormKind::Lp { p } => lp_value(x, *p),
            NormKind::Linf => x.iter().fold(0.0, |m: f64, &v| m.max(v)),
            NormKind::TopK { k } => top_k_sum(x, *k),
            NormKind::WeightedLinear { w } => dot(w, x),
            NormKind::WeightedLinf { w } => w.iter().zip(x).fold(0.0, |m: f64, (a, b)| m.max(a * b)),
            NormKind::SumLinfBlocks { block_size } => {
                x.chunks(*block_size).map(|b| b.iter().fold(0.0, |m: f64, &v| m.max(v))).sum()
            }
            NormKind::L1PlusL2 => x.iter().sum::<f64>() + lp_value(x, 2.0),
            NormKind::Max { inners } => inners.iter().map(|f| f.value(x)).fold(0.0, f64::max),
            NormKind::BudgetPrefix { c } => budget_prefix_value(x, *c),
            NormKind::Orlicz { g, tol } => orlicz::orlicz_value(g, x, *tol),
            NormKind::LinearCompose { a, inner } => inner.value(&mat_vec(a, x)),
            NormKind::LpCombine { p, weights, inners } => {
                let terms: Vec<f64> = inners.iter().zip(weights).map(|(f, w)| w * f.value(x)).collect();
                lp_value(&terms, *p)
            }
            NormKind::Smoothed { inner, samples, scalings, .. } => {
                let mut buf = vec![0.0; self.dim];
                let mut acc = 0.0;
                for r in scalings.chunks(self.dim) {
                    for ((b, xi), ri) in buf.iter_mut().zip(x).zip(r) {
                        *b = xi * ri;
                    }
                    acc += inner.value(&buf);
                }
                acc / *samples as f64
            }
            NormKind::SymmetricApprox { inner, .. } => inner.value(x),
        }
    }

    /// Gradient at a validated nonzero vector.
    pub fn grad(&self, x: &NonNegVector, fd_step: f64) -> Result<GradientVector> {
        let coords = self.gradient(x.as_slice(), fd_step)?;
        Ok(GradientVector { coords, at: x.clone(), analytic: self.has_analytic_gradient() })
    }

    /// Gradient at a raw slice: closed form where available, central finite
    /// differences with step `fd_step·‖x‖∞` otherwise (forward differences for
    /// coordinates closer to zero than the step).
    pub fn gradient(&self, x: &[f64], fd_step: f64) -> Result<Vec<f64>> {
        self.check_input(x)?;
        if x.iter().all(|&v| v == 0.0) {
            return Err(Error::GradientAtOrigin);
        }
        self.gradient_unchecked(x, fd_step)
    }

    fn gradient_unchecked(&self, x: &[f64], fd_step: f64) -> Result<Vec<f64>> {
        match &self.kind {
            NormKind::Lp { p } => {
                let nrm = lp_value(x, *p);
                if *p == 1.0 {
                    return Ok(vec![1.0; x.len()]);
                }
                Ok(x.iter().map(|&v| (v / nrm).powf(p - 1.0)).collect())
            }
            NormKind::WeightedLinear { w } => Ok(w.clone()),
            NormKind::L1PlusL2 => {
                let n2 = lp_value(x, 2.0);
                Ok(x.iter().map(|&v| 1.0 + v / n2).collect())
            }
            NormKind::Orlicz { g, tol } => orlicz::orlicz_gradient(g, x, *tol),
            NormKind::LinearCompose { a, inner } if inner.has_analytic_gradient() => {
                let y = mat_vec(a, x);
                if y.iter().all(|&v| v == 0.0) {
                    return Err(Error::GradientAtOrigin);
                }
                let gy = inner.gradient_unchecked(&y, fd_step)?;
                let mut out = vec![0.0; self.dim];
                for (row, gi) in a.iter().zip(&gy) {
                    for (o, aij) in out.iter_mut().zip(row) {
                        *o += aij * gi;
                    }
                }
                Ok(out)
            }
            NormKind::LpCombine { p, weights, inners } if self.has_analytic_gradient() => {
                let vals: Vec<f64> = inners.iter().zip(weights).map(|(f, w)| w * f.value(x)).collect();
                let total = lp_value(&vals, *p);
                let mut out = vec![0.0; self.dim];
                for ((f, &w), &v) in inners.iter().zip(weights).zip(&vals) {
                    if w == 0.0 {
                        continue;
                    }
                    let factor = if *p == 1.0 {
                        1.0
                    } else if v == 0.0 {
                        continue;
                    } else {
                        (v / total).powf(p - 1.0)
                    };
                    let gf = if v == 0.0 { f.fd_gradient(x, fd_step) } else { f.gradient_unchecked(x, fd_step)? };
                    for (o, gi) in out.iter_mut().zip(&gf) {
                        *o += factor * w * gi;
                    }
                }
                Ok(out)
            }
            NormKind::Max { inners } if self.has_analytic_gradient() => {
                let mut best = 0;
                let mut best_val = f64::NEG_INFINITY;
                for (i, f) in inners.iter().enumerate() {
                    let v = f.value(x);
                    if v > best_val {
                        best = i;
                        best_val = v;
                    }
                }
                inners[best].gradient_unchecked(x, fd_step)
            }
            NormKind::Smoothed { inner, samples, scalings, .. } if inner.has_analytic_gradient() => {
                let mut buf = vec![0.0; self.dim];
                let mut out = vec![0.0; self.dim];
                for r in scalings.chunks(self.dim) {
                    for ((b, xi), ri) in buf.iter_mut().zip(x).zip(r) {
                        *b = xi * ri;
                    }
                    let g = inner.gradient_unchecked(&buf, fd_step)?;
                    for ((o, gi), ri) in out.iter_mut().zip(&g).zip(r) {
                        *o += gi * ri;
                    }
                }
                out.iter_mut().for_each(|o| *o /= *samples as f64);
                Ok(out)
            }
            NormKind::SymmetricApprox { inner, .. } => inner.gradient_unchecked(x, fd_step),
            _ => Ok(self.fd_gradient(x, fd_step)),
        }
    }

    /// Finite-difference gradient (central where the step stays in the orthant).
    pub fn fd_gradient(&self, x: &[f64], fd_step: f64) -> Vec<f64> {
        let h = fd_step * max_abs(x).max(1e-300);
        let mut buf = x.to_vec();
        let f0 = self.value(x);
        (0..x.len())
            .map(|i| {
                let xi = x[i];
                buf[i] = xi + h;
                let fp = self.value(&buf);
                let d = if xi >= h {
                    buf[i] = xi - h;
                    let fm = self.value(&buf);
                    (fp - fm) / (2.0 * h)
                } else {
                    (fp - f0) / h
                };
                buf[i] = xi;
                d
            })
            .collect()
    }

    /// Dual norm max_{‖w‖ ≤ 1, w ≥ 0} ⟨z, w⟩ for kinds with a closed-form dual.
    pub fn dual_eval(&self, z: &NonNegVector) -> Result<f64> {
        let z = z.as_slice();
        self.check_input(z)?;
        match &self.kind {
            NormKind::Lp { p } => {
                if *p == 1.0 {
                    Ok(z.iter().fold(0.0, |m: f64, &v| m.max(v)))
                } else {
                    Ok(lp_value(z, *p / (*p - 1.0)))
                }
            }
            NormKind::Linf => Ok(z.iter().sum()),
            NormKind::WeightedLinear { w } => Ok(z.iter().zip(w).fold(0.0, |m: f64, (&zi, &wi)| {
                if zi == 0.0 {
                    m
                } else if wi == 0.0 {
                    f64::INFINITY
                } else {
                    m.max(zi / wi)
                }
            })),
            NormKind::WeightedLinf { w } => Ok(z.iter().zip(w).map(|(&zi, &wi)| {
                if zi == 0.0 {
                    0.0
                } else if wi == 0.0 {
                    f64::INFINITY
                } else {
                    zi / wi
                }
            }).sum()),
            NormKind::TopK { k } => {
                let inf = z.iter().fold(0.0, |m: f64, &v| m.max(v));
                Ok(inf.max(z.iter().sum::<f64>() / *k as f64))
            }
            _ => Err(Error::Unsupported(format!("no closed-form dual for kind {}", self.kind_name()))),
        }
    }
}

fn common_dim(inners: &[NormDescriptor]) -> Result<usize> {
    let first = inners.first().ok_or_else(|| Error::InvalidParameter("empty list of inner norms".into()))?;
    for f in inners {
        if f.dim != first.dim {
            return Err(Error::DimensionMismatch { expected: first.dim, got: f.dim });
        }
    }
    Ok(first.dim)
}

/// Scale-stable (Σ x_i^p)^{1/p}.
pub(crate) fn lp_value(x: &[f64], p: f64) -> f64 {
    if p == 1.0 {
        return x.iter().sum();
    }
    let m = x.iter().fold(0.0, |m: f64, &v| m.max(v));
    if m == 0.0 {
        return 0.0;
    }
    if p == 2.0 {
        return m * x.iter().map(|&v| (v / m) * (v / m)).sum::<f64>().sqrt();
    }
    m * x.iter().map(|&v| (v / m).powf(p)).sum::<f64>().powf(1.0 / p)
}

pub(crate) fn top_k_sum(x: &[f64], k: usize) -> f64 {
    let mut s = x.to_vec();
    s.sort_unstable_by(|a, b| b.total_cmp(a));
    s[..k.min(s.len())].iter().sum()
}

fn budget_prefix_value(x: &[f64], c: f64) -> f64 {
    let mut s = x.to_vec();
    s.sort_unstable_by(|a, b| b.total_cmp(a));
    let mut best = 0.0_f64;
    let mut prefix = 0.0;
    let mut next = 1usize;
    let mut budget = 1.0;
    for (i, v) in s.iter().enumerate() {
        prefix += v;
        if i + 1 == next {
            best = best.max(prefix / budget);
            next *= 2;
            budget *= c;
        }
    }
    best
}

pub(crate) fn mat_vec(a: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    a.iter().map(|row| dot(row, x)).collect()
}

fn smoothing_scalings(dim: usize, eps: f64, seed: u64, samples: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(dim * samples);
    for s in 0..samples {
        let mut rng = seeded_rng(seed, s as u64);
        out.extend((0..dim).map(|_| 1.0 + eps * sample_bump(&mut rng)));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: &[f64]) -> NonNegVector {
        NonNegVector::new(x.to_vec()).unwrap()
    }

    #[test]
    fn closed_form_values() {
        assert_eq!(NormDescriptor::lp(2, 2.0).unwrap().eval(&v(&[3.0, 4.0])).unwrap(), 5.0);
        assert_eq!(NormDescriptor::topk(4, 2).unwrap().eval(&v(&[5.0, 1.0, 3.0, 2.0])).unwrap(), 8.0);
        assert_eq!(NormDescriptor::sum_linf_blocks(4, 2).unwrap().eval(&v(&[1.0, 2.0, 3.0, 4.0])).unwrap(), 6.0);
    }

    #[test]
    fn rejects_bad_inputs() {
        let n = NormDescriptor::lp(2, 2.0).unwrap();
        assert!(matches!(n.eval_slice(&[1.0]), Err(Error::DimensionMismatch { .. })));
        assert!(matches!(n.eval_slice(&[1.0, -1.0]), Err(Error::NegativeCoordinate { .. })));
        assert!(matches!(n.gradient(&[0.0, 0.0], DEFAULT_FD_STEP), Err(Error::GradientAtOrigin)));
    }

    #[test]
    fn budget_prefix_uses_dyadic_prefixes() {
        // Sorted (4,3,2,1): prefixes 4, 7, 10 against budgets 1, 2, 4.
        let n = NormDescriptor::budget_prefix(4, 2.0).unwrap();
        assert_eq!(n.value(&[1.0, 2.0, 3.0, 4.0]), 4.0);
        assert_eq!(n.value(&[1.0, 1.0, 1.0, 1.0]), 1.0);
    }

    #[test]
    fn seminorm_flags() {
        assert!(NormDescriptor::weighted_linear(vec![1.0, 0.0]).unwrap().is_seminorm());
        assert!(!NormDescriptor::weighted_linear(vec![1.0, 2.0]).unwrap().is_seminorm());
        let l2 = NormDescriptor::lp(1, 2.0).unwrap();
        assert!(l2.compose_linear(vec![vec![1.0, 0.0]]).unwrap().is_seminorm());
    }
}
