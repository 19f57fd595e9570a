//! Online linear optimization over a downward-closed body by a shifted
//! follow-the-leader on the dual norm.

use super::trace::RunTrace;
use crate::error::{Error, Result};
use crate::norm::{NormDescriptor, DEFAULT_FD_STEP};
use crate::vector::dot;

const UNIT_TOL: f64 = 1e-12;

/// Plays x_t = ∇h(s_{t−1} + (p/ε)·1) where h is the dual norm and s the running
/// gain sum. Diagnostics: `total_gain`, `opt` = h(s_T),
/// `bound` = e^{−ε}(h(s_T) − p(h(1) − 1)/ε).
pub fn olo_ftpl(dual_norm: &NormDescriptor, gains: &[Vec<f64>], p: f64, eps: f64) -> Result<RunTrace> {
    let d = dual_norm.dim();
    if !(eps > 0.0) || !(p >= 1.0) {
        return Err(Error::InvalidParameter(format!("need eps > 0 and p >= 1, got eps = {eps}, p = {p}")));
    }
    if !dual_norm.has_analytic_gradient() {
        return Err(Error::Unsupported(format!("{} has no analytic gradient", dual_norm.kind_name())));
    }
    for i in 0..d {
        let mut e = vec![0.0; d];
        e[i] = 1.0;
        let v = dual_norm.value(&e);
        if (v - 1.0).abs() > UNIT_TOL {
            return Err(Error::InvalidParameter(format!("dual norm has ‖e_{i}‖ = {v}, expected 1")));
        }
    }
    for (t, g) in gains.iter().enumerate() {
        if g.len() != d {
            return Err(Error::DimensionMismatch { expected: d, got: g.len() });
        }
        if g.iter().any(|&v| !(0.0..=1.0).contains(&v)) {
            return Err(Error::InvalidParameter(format!("gain vector {t} leaves [0, 1]^{d}")));
        }
    }
    let shift = p / eps;
    let mut s = vec![0.0; d];
    let mut total = 0.0;
    let mut trace = RunTrace::new("olo_ftpl", 0);
    for (t, g) in gains.iter().enumerate() {
        let point: Vec<f64> = s.iter().map(|v| v + shift).collect();
        let x = dual_norm.gradient(&point, DEFAULT_FD_STEP)?;
        total += dot(&x, g);
        for (si, gi) in s.iter_mut().zip(g) {
            *si += gi;
        }
        trace.push(x, total, true, (t + 1) as f64);
    }
    let opt = dual_norm.value(&s);
    let ones = dual_norm.value(&vec![1.0; d]);
    let bound = (-eps).exp() * (opt - p * (ones - 1.0) / eps);
    trace.final_objective = total;
    trace.diag("total_gain", total);
    trace.diag("opt", opt);
    trace.diag("bound", bound);
    trace.diag("p", p);
    trace.diag("eps", eps);
    Ok(trace)
}

/// Prediction with experts: the simplex has dual ℓ_∞, replaced by ℓ_q with
/// q = max(ln d/ln(1+ε), 1) so that ‖·‖_∞ ≤ ‖·‖_q ≤ (1+ε)‖·‖_∞.
///
/// Plays are scaled by 1/(1+ε) and so lie in the simplex. Diagnostics add
/// `best_expert` and `experts_bound` = e^{−ε}(best − q(d^{1/q} − 1)/ε)/(1+ε).
pub fn olo_experts(gains: &[Vec<f64>], eps: f64) -> Result<RunTrace> {
    let d = gains.first().map_or(1, |g| g.len()).max(1);
    let q = ((d as f64).ln() / eps.ln_1p()).max(1.0);
    let norm = NormDescriptor::lp(d, q)?;
    let mut trace = olo_ftpl(&norm, gains, q, eps)?;
    let scale = 1.0 / (1.0 + eps);
    let mut total = 0.0;
    for (step, g) in trace.steps.iter_mut().zip(gains) {
        for v in &mut step.decision {
            *v *= scale;
        }
        total += dot(&step.decision, g);
        step.objective_value = total;
        step.feasible = step.decision.iter().sum::<f64>() <= 1.0 + 1e-12;
    }
    let mut sums = vec![0.0; d];
    for g in gains {
        for (s, v) in sums.iter_mut().zip(g) {
            *s += v;
        }
    }
    let best = sums.iter().fold(0.0_f64, |m, &v| m.max(v));
    let bound = (-eps).exp() * (best - q * ((d as f64).powf(1.0 / q) - 1.0) / eps) * scale;
    trace.algorithm = "olo_experts".into();
    trace.final_objective = total;
    trace.diag("total_gain", total);
    trace.diag("best_expert", best);
    trace.diag("experts_bound", bound);
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_sequence_is_vacuous() {
        let t = olo_ftpl(&NormDescriptor::lp(3, 2.0).unwrap(), &[], 2.0, 0.5).unwrap();
        assert_eq!(t.final_objective, 0.0);
        assert!(t.diagnostics["bound"] <= 0.0);
    }

    #[test]
    fn rejects_bad_gains() {
        let r = olo_ftpl(&NormDescriptor::lp(2, 2.0).unwrap(), &[vec![1.5, 0.0]], 2.0, 0.5);
        assert!(r.is_err());
    }

    #[test]
    fn experts_plays_in_simplex() {
        let gains: Vec<Vec<f64>> = (0..40).map(|t| if t % 2 == 0 { vec![1.0, 0.0, 0.0, 0.0] } else { vec![0.0, 1.0, 0.0, 0.0] }).collect();
        let t = olo_experts(&gains, 0.2).unwrap();
        assert!(t.all_feasible());
        assert!(t.final_objective >= t.diagnostics["experts_bound"]);
    }
}
