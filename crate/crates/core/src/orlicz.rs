//! Orlicz functions and norms, the growth-rate test, and the approximation
//! pipeline G → piecewise-linear G̃ → smoothed F.
//!
//! The Orlicz norm of x is the smallest α with Σ G(x_i/α) ≤ 1; it is computed by
//! bisection on α inside the bracket [‖x‖∞/s_hi, ‖x‖₁/s_lo] where G(s_hi) = 1 and
//! G(s_lo) = 1/n.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::norm::{GradientVector, NormDescriptor};
use crate::vector::{check_coords, NonNegVector};

/// Default relative tolerance of the norm bisection.
pub const DEFAULT_TOL: f64 = 1e-10;
/// Iteration cap of every bisection in this module.
pub const MAX_ITERS: usize = 200;

/// The hinge t ↦ max{0, a·t − b}; serialized as `[a, b]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Hinge {
    pub a: f64,
    pub b: f64,
}

impl From<[f64; 2]> for Hinge {
    fn from([a, b]: [f64; 2]) -> Self {
        Hinge { a, b }
    }
}

impl From<Hinge> for [f64; 2] {
    fn from(h: Hinge) -> Self {
        [h.a, h.b]
    }
}

/// One summand of a smoothed hinge sum (exponent p shared by the whole sum).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "class")]
pub enum SmoothTerm {
    /// coef·t^p, used for hinges with b ≥ 1; coef = 2(2a/(b+1))^p.
    #[serde(rename = "H")]
    High { coef: f64 },
    /// (b^p + (a·t)^p)^{1/p} − b, used for hinges with b < 1.
    #[serde(rename = "L")]
    Low { a: f64, b: f64 },
}

/// A convex nondecreasing G with G(0) = 0 that eventually exceeds 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "repr", rename_all = "snake_case")]
pub enum OrliczFunction {
    /// coef·t^exponent with exponent ≥ 1.
    Power { coef: f64, exponent: f64 },
    /// e^{rate·t} − 1.
    Exp { rate: f64 },
    /// Σ max{0, a_i t − b_i}.
    HingeSum { hinges: Vec<Hinge> },
    /// Σ f_i(t) with the smoothed hinge terms at a common exponent p.
    SmoothedSum { p: f64, terms: Vec<SmoothTerm> },
}

impl OrliczFunction {
    pub fn power(exponent: f64) -> Self {
        OrliczFunction::Power { coef: 1.0, exponent }
    }

    pub fn hinges(hinges: Vec<Hinge>) -> Self {
        OrliczFunction::HingeSum { hinges }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::NotOrlicz(m));
        match self {
            OrliczFunction::Power { coef, exponent } => {
                if !(*coef > 0.0 && coef.is_finite()) || !(*exponent >= 1.0 && exponent.is_finite()) {
                    return bad(format!("power needs coef > 0 and exponent >= 1, got {coef}, {exponent}"));
                }
            }
            OrliczFunction::Exp { rate } => {
                if !(*rate > 0.0 && rate.is_finite()) {
                    return bad(format!("exp needs rate > 0, got {rate}"));
                }
            }
            OrliczFunction::HingeSum { hinges } => {
                for h in hinges {
                    check_coords(&[h.a, h.b]).map_err(|e| Error::NotOrlicz(e.to_string()))?;
                }
                if !hinges.iter().any(|h| h.a > 0.0) {
                    return bad("hinge sum is identically zero".into());
                }
            }
            OrliczFunction::SmoothedSum { p, terms } => {
                if !(*p >= 1.0 && p.is_finite()) {
                    return bad(format!("smoothed sum needs p >= 1, got {p}"));
                }
                for t in terms {
                    let vals = match t {
                        SmoothTerm::High { coef } => vec![*coef],
                        SmoothTerm::Low { a, b } => vec![*a, *b],
                    };
                    check_coords(&vals).map_err(|e| Error::NotOrlicz(e.to_string()))?;
                }
            }
        }
        Ok(())
    }

    /// False only for hinge sums, whose derivative jumps at the kinks.
    pub fn is_differentiable(&self) -> bool {
        !matches!(self, OrliczFunction::HingeSum { .. })
    }

    pub fn value(&self, t: f64) -> f64 {
        match self {
            OrliczFunction::Power { coef, exponent } => coef * t.powf(*exponent),
            OrliczFunction::Exp { rate } => (rate * t).exp_m1(),
            OrliczFunction::HingeSum { hinges } => hinges.iter().map(|h| (h.a * t - h.b).max(0.0)).sum(),
            OrliczFunction::SmoothedSum { p, terms } => terms.iter().map(|term| term_value(term, *p, t)).sum(),
        }
    }

    /// G'(t); for hinge sums the right derivative.
    pub fn deriv(&self, t: f64) -> f64 {
        match self {
            OrliczFunction::Power { coef, exponent } => {
                if *exponent == 1.0 {
                    *coef
                } else {
                    coef * exponent * t.powf(exponent - 1.0)
                }
            }
            OrliczFunction::Exp { rate } => rate * (rate * t).exp(),
            OrliczFunction::HingeSum { hinges } => {
                hinges.iter().filter(|h| h.a > 0.0 && h.a * t >= h.b).map(|h| h.a).sum()
            }
            OrliczFunction::SmoothedSum { p, terms } => terms.iter().map(|term| term_deriv(term, *p, t).0).sum(),
        }
    }

    /// G''(t), or `None` for hinge sums.
    pub fn second_deriv(&self, t: f64) -> Option<f64> {
        match self {
            OrliczFunction::Power { coef, exponent } => Some(if *exponent == 1.0 {
                0.0
            } else if *exponent == 2.0 {
                2.0 * coef
            } else {
                coef * exponent * (exponent - 1.0) * t.powf(exponent - 2.0)
            }),
            OrliczFunction::Exp { rate } => Some(rate * rate * (rate * t).exp()),
            OrliczFunction::HingeSum { .. } => None,
            OrliczFunction::SmoothedSum { p, terms } => Some(terms.iter().map(|term| term_deriv(term, *p, t).1).sum()),
        }
    }

    /// Smallest t ≥ 0 with G(t) ≥ level (level > 0).
    pub fn inverse(&self, level: f64) -> Result<f64> {
        if let OrliczFunction::Power { coef, exponent } = self {
            return Ok((level / coef).powf(1.0 / exponent));
        }
        let mut hi = 1.0_f64;
        let mut doublings = 0;
        while !(self.value(hi) >= level) {
            hi *= 2.0;
            doublings += 1;
            if doublings > 1000 {
                return Err(Error::NotOrlicz(format!("G never reaches {level}")));
            }
        }
        let mut lo = 0.0_f64;
        for _ in 0..MAX_ITERS {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.value(mid) >= level {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(hi)
    }

    fn hinge_list(&self) -> Option<&[Hinge]> {
        match self {
            OrliczFunction::HingeSum { hinges } => Some(hinges),
            _ => None,
        }
    }
}

/// ln(1 + u^p) computed from ln u without overflow.
fn ln1p_pow(ln_u: f64, p: f64) -> f64 {
    let pl = p * ln_u;
    if pl > 36.0 {
        pl + (-pl).exp()
    } else {
        pl.exp().ln_1p()
    }
}

fn term_value(term: &SmoothTerm, p: f64, t: f64) -> f64 {
    match *term {
        SmoothTerm::High { coef } => coef * t.powf(p),
        SmoothTerm::Low { a, b } => {
            if a == 0.0 || t == 0.0 {
                0.0
            } else if b == 0.0 {
                a * t
            } else {
                let l = ln1p_pow((a * t / b).ln(), p);
                b * (l / p).exp_m1()
            }
        }
    }
}

/// (f'(t), f''(t)) of one smoothed term. For the low class with s = (b^p + (at)^p)^{1/p}:
/// f' = a (at/s)^{p-1} and f'' = ((p-1)/t) f' (1 - (at/s)^p).
fn term_deriv(term: &SmoothTerm, p: f64, t: f64) -> (f64, f64) {
    match *term {
        SmoothTerm::High { coef } => {
            let d1 = coef * p * t.powf(p - 1.0);
            let d2 = if p == 1.0 { 0.0 } else { coef * p * (p - 1.0) * t.powf(p - 2.0) };
            (d1, d2)
        }
        SmoothTerm::Low { a, b } => {
            if a == 0.0 {
                (0.0, 0.0)
            } else if b == 0.0 {
                (a, 0.0)
            } else if t == 0.0 {
                // f' ~ a (at/b)^{p-1} near zero.
                let d1 = if p == 1.0 { a } else { 0.0 };
                let d2 = if p == 2.0 { a * a / b } else { 0.0 };
                (d1, d2)
            } else {
                let ln_u = (a * t / b).ln();
                let l = ln1p_pow(ln_u, p);
                let d1 = a * ((p - 1.0) * (ln_u - l / p)).exp();
                let d2 = (p - 1.0) / t * d1 * (-l).exp();
                (d1, d2)
            }
        }
    }
}

fn phi(g: &OrliczFunction, x: &[f64], alpha: f64) -> f64 {
    x.iter().map(|&v| if v == 0.0 { 0.0 } else { g.value(v / alpha) }).sum()
}

/// Bisection for the Orlicz norm; NaN when G is not an Orlicz function.
pub(crate) fn orlicz_value(g: &OrliczFunction, x: &[f64], tol: f64) -> f64 {
    orlicz_value_checked(g, x, tol).unwrap_or(f64::NAN)
}

/// Root of Σ G(x_i/α) = 1 inside a bisection bracket. Steps are Newton steps
/// on ln Σ G against ln α, which is close to linear for power-like G; each
/// iterate is followed by a probe on the far side so the bracket closes too.
fn orlicz_value_checked(g: &OrliczFunction, x: &[f64], tol: f64) -> Result<f64> {
    let xinf = x.iter().fold(0.0_f64, |m, &v| m.max(v));
    if xinf == 0.0 {
        return Ok(0.0);
    }
    let (mut lo, mut hi) = (xinf, xinf);
    while phi(g, x, lo) < 1.0 {
        lo *= 0.5;
        if lo < f64::MIN_POSITIVE {
            return Err(Error::NotOrlicz("sum of G stays below 1 down to underflow".into()));
        }
    }
    let mut doublings = 0;
    while phi(g, x, hi) > 1.0 {
        hi *= 2.0;
        doublings += 1;
        if doublings > 2000 {
            return Err(Error::NotOrlicz("sum of G never drops to 1".into()));
        }
    }
    let mut alpha = 0.5 * (lo + hi);
    for _ in 0..MAX_ITERS {
        if hi - lo <= tol * hi {
            break;
        }
        let f = phi(g, x, alpha);
        if f >= 1.0 {
            lo = alpha;
        } else {
            hi = alpha;
        }
        // d ln φ / d ln α = −Σ t G'(t) / φ with t = x_i/α.
        let elasticity = -x.iter().map(|&v| if v == 0.0 { 0.0 } else { (v / alpha) * g.deriv(v / alpha) }).sum::<f64>() / f;
        let next = if f > 0.0 && elasticity < 0.0 { alpha * (-f.ln() / elasticity).exp() } else { f64::NAN };
        if next > lo && next < hi {
            // Nudge past the root so the next evaluation lands on the other side.
            let nudged = if next > alpha { next * (1.0 + 0.25 * tol) } else { next * (1.0 - 0.25 * tol) };
            alpha = nudged.clamp(lo, hi);
            if alpha == lo || alpha == hi {
                alpha = 0.5 * (lo + hi);
            }
        } else {
            alpha = 0.5 * (lo + hi);
        }
    }
    Ok(0.5 * (lo + hi))
}

/// ‖x‖_G = inf{α > 0 : Σ G(x_i/α) ≤ 1}, to relative tolerance `tol`.
pub fn orlicz_eval(g: &OrliczFunction, x: &NonNegVector, tol: f64) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance must be positive, got {tol}")));
    }
    g.validate()?;
    orlicz_value_checked(g, x.as_slice(), tol)
}

/// ∇_i‖x‖_G = G'(x̃_i)/γ(x) with x̃ = x/‖x‖_G and γ(x) = Σ_ℓ x̃_ℓ G'(x̃_ℓ).
pub(crate) fn orlicz_gradient(g: &OrliczFunction, x: &[f64], tol: f64) -> Result<Vec<f64>> {
    let alpha = orlicz_value_checked(g, x, tol)?;
    if alpha == 0.0 {
        return Err(Error::GradientAtOrigin);
    }
    let xt: Vec<f64> = x.iter().map(|&v| v / alpha).collect();
    let gp: Vec<f64> = xt.iter().map(|&t| g.deriv(t)).collect();
    let gamma: f64 = xt.iter().zip(&gp).map(|(t, d)| t * d).sum();
    if !(gamma > 0.0) {
        return Err(Error::FlatRegion);
    }
    Ok(gp.into_iter().map(|d| d / gamma).collect())
}

pub fn orlicz_grad(g: &OrliczFunction, x: &NonNegVector, tol: f64) -> Result<GradientVector> {
    if x.is_zero() {
        return Err(Error::GradientAtOrigin);
    }
    g.validate()?;
    let coords = orlicz_gradient(g, x.as_slice(), tol)?;
    Ok(GradientVector { coords, at: x.clone(), analytic: true })
}

/// Sampled check of G''(t)·t ≤ (p−1)·G'(t) on a log-spaced grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthCertificate {
    pub p: f64,
    pub grid: Vec<f64>,
    /// sup over the grid of G''(t)·t/G'(t) + 1 (grid points with G' = 0 are skipped).
    pub max_ratio: f64,
    pub passed: bool,
    /// Always "sampled": a grid check is not a proof.
    pub label: String,
}

pub fn growth_check(g: &OrliczFunction, p: f64, t_lo: f64, t_hi: f64, grid_size: usize) -> Result<GrowthCertificate> {
    if !g.is_differentiable() {
        return Err(Error::Unsupported("growth check needs a twice differentiable G".into()));
    }
    if grid_size < 2 || !(t_lo > 0.0) || !(t_hi > t_lo) {
        return Err(Error::InvalidParameter("need grid_size >= 2 and 0 < t_lo < t_hi".into()));
    }
    let (l0, l1) = (t_lo.ln(), t_hi.ln());
    let grid: Vec<f64> = (0..grid_size)
        .map(|i| (l0 + (l1 - l0) * i as f64 / (grid_size - 1) as f64).exp())
        .collect();
    let mut max_ratio = f64::NEG_INFINITY;
    for &t in &grid {
        let d1 = g.deriv(t);
        let d2 = g.second_deriv(t).expect("differentiable");
        if !(d1 > 0.0) || !d1.is_finite() || !d2.is_finite() {
            continue;
        }
        max_ratio = max_ratio.max(d2 * t / d1 + 1.0);
    }
    Ok(GrowthCertificate { p, grid, max_ratio, passed: max_ratio <= p + 1e-8, label: "sampled".into() })
}

/// Piecewise-linear G̃ interpolating G at the points t_i with G(t_i) = i/n.
pub fn piecewise_approx(g: &OrliczFunction, n: usize) -> Result<OrliczFunction> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be >= 1".into()));
    }
    g.validate()?;
    let nf = n as f64;
    let mut knots = vec![0.0];
    for i in 1..=n {
        knots.push(g.inverse(i as f64 / nf)?);
    }
    let mut hinges = Vec::with_capacity(n);
    let mut prev_slope = 0.0;
    for i in 1..=n {
        let width = knots[i] - knots[i - 1];
        if !(width > 0.0) {
            return Err(Error::NotOrlicz(format!("G has a jump before level {i}/{n}")));
        }
        // The cumulative slope on [t_{i-1}, t_i] is (1/n)/width; a_i is its increment.
        let slope = (1.0 / nf) / width;
        let a = (slope - prev_slope).max(0.0);
        hinges.push(Hinge { a, b: a * knots[i - 1] });
        prev_slope = prev_slope.max(slope);
    }
    Ok(OrliczFunction::HingeSum { hinges })
}

/// Smallest exponent accepted by [`smooth_hinges`] for `count` hinges.
pub fn smoothing_threshold(count: usize) -> f64 {
    2.0 * (count as f64).ln() + 1.0
}

/// Replaces each hinge by its smooth counterpart at exponent p: class H for
/// b ≥ 1, class L for b < 1.
pub fn smooth_hinges(gt: &OrliczFunction, p: f64) -> Result<OrliczFunction> {
    let hinges = gt.hinge_list().ok_or_else(|| Error::Unsupported("smoothing expects a hinge sum".into()))?;
    let required = smoothing_threshold(hinges.len());
    if p < required - 1e-12 {
        return Err(Error::ExponentTooSmall { p, required });
    }
    let terms = hinges
        .iter()
        .map(|h| {
            if h.b >= 1.0 {
                SmoothTerm::High { coef: 2.0 * (2.0 * h.a / (h.b + 1.0)).powf(p) }
            } else {
                SmoothTerm::Low { a: h.a, b: h.b }
            }
        })
        .collect();
    Ok(OrliczFunction::SmoothedSum { p, terms })
}

/// The pipeline exponent ⌈2 ln n⌉ + 1.
pub fn pipeline_exponent(n: usize) -> f64 {
    (2.0 * (n as f64).ln()).ceil() + 1.0
}

/// All three stages of the pipeline, for inspection.
#[derive(Debug, Clone)]
pub struct PipelineStages {
    pub p: f64,
    pub piecewise: OrliczFunction,
    pub smoothed: OrliczFunction,
    pub norm: NormDescriptor,
}

pub fn pipeline_stages(g: &OrliczFunction, n: usize) -> Result<PipelineStages> {
    if n < 2 {
        return Err(Error::InvalidParameter("the pipeline needs n >= 2".into()));
    }
    let p = pipeline_exponent(n);
    let piecewise = piecewise_approx(g, n)?;
    let smoothed = smooth_hinges(&piecewise, p)?;
    let norm = NormDescriptor::orlicz(smoothed.clone(), n)?.with_supermod_p(Some(2.0 * p - 1.0));
    Ok(PipelineStages { p, piecewise, smoothed, norm })
}

/// A twice-differentiable (2p−1)-supermodular Orlicz norm within a constant
/// factor of ‖·‖_G on R^n, with p = ⌈2 ln n⌉ + 1.
pub fn approximate_orlicz_norm(g: &OrliczFunction, n: usize) -> Result<NormDescriptor> {
    Ok(pipeline_stages(g, n)?.norm)
}

/// The surrogate G(t) = max{0, t − 1/k}, whose Orlicz norm lies in
/// [‖x‖_topk / 2, ‖x‖_topk].
pub fn topk_orlicz(k: usize) -> Result<OrliczFunction> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be >= 1".into()));
    }
    Ok(OrliczFunction::HingeSum { hinges: vec![Hinge { a: 1.0, b: 1.0 / k as f64 }] })
}
