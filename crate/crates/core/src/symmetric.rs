//! Symmetric norms through dyadic Top-k norms.

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::certify::estimate_approx_ratio;
use crate::error::{Error, Result};
use crate::norm::{top_k_sum, NormDescriptor};
use crate::orlicz::{approximate_orlicz_norm, pipeline_exponent, topk_orlicz};
use crate::sampling::{sample_ratio_mix, seeded_rng};

pub const PERMUTATION_TRIALS: usize = 20;
pub const PERMUTATION_TOL: f64 = 1e-9;
/// Samples used to record the measured distortion of an approximation.
pub const DISTORTION_SAMPLES: usize = 400;

/// Permutation test: the value is unchanged (to 1e-9 relative) under
/// random coordinate permutations of random vectors.
pub fn is_symmetric(norm: &NormDescriptor, seed: u64) -> bool {
    let n = norm.dim();
    let mut rng = seeded_rng(seed, 0x5359);
    for _ in 0..PERMUTATION_TRIALS {
        let x = sample_ratio_mix(&mut rng, n);
        let mut y = x.clone();
        y.shuffle(&mut rng);
        let (a, b) = (norm.value(&x), norm.value(&y));
        if (a - b).abs() > PERMUTATION_TOL * a.max(b).max(1e-300) {
            return false;
        }
    }
    true
}

/// |||x||| = spread · max_j c_j·‖x‖_{top 2^j} over j = 0..log₂ n.
///
/// With c_j = ‖1_{2^j}‖/2^j the raw maximum never exceeds ‖x‖ and is at least
/// ‖x‖/(log₂ n + 1), so spread = log₂ n + 1 puts |||·||| above the source.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopkDecomposition {
    pub n: usize,
    pub scalars: Vec<f64>,
    pub spread: f64,
}

impl TopkDecomposition {
    pub fn levels(&self) -> usize {
        self.scalars.len()
    }

    /// max_j c_j·‖x‖_{top 2^j}; `x` may be shorter than `n` (implicit zero padding).
    pub fn raw_value(&self, x: &[f64]) -> f64 {
        self.scalars
            .iter()
            .enumerate()
            .map(|(j, c)| c * top_k_sum(x, (1usize << j).min(x.len())))
            .fold(0.0, f64::max)
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        self.spread * self.raw_value(x)
    }
}

/// Decomposes a symmetric norm of dimension ≤ n. `n` is rounded up to a power of two;
/// padded coordinates carry zero weight.
pub fn topk_decompose(norm: &NormDescriptor, n: usize) -> Result<TopkDecomposition> {
    let dim = norm.dim();
    if n < dim {
        return Err(Error::InvalidParameter(format!("n = {n} is below the norm dimension {dim}")));
    }
    if !is_symmetric(norm, 0) {
        return Err(Error::NotSymmetric(format!("{} fails the permutation test", norm.kind_name())));
    }
    let n = n.next_power_of_two();
    let levels = n.trailing_zeros() as usize + 1;
    let scalars = (0..levels)
        .map(|j| {
            let k = 1usize << j;
            let ones: Vec<f64> = (0..dim).map(|i| if i < k { 1.0 } else { 0.0 }).collect();
            norm.value(&ones) / k as f64
        })
        .collect();
    Ok(TopkDecomposition { n, scalars, spread: levels as f64 })
}

/// A (2p−1)-supermodular norm within a measured constant of a symmetric norm,
/// p = ⌈2 ln n⌉ + 1.
///
/// Each Top-2^j is replaced by twice the pipeline approximation of its Orlicz
/// surrogate (which dominates it), and the levels are combined with an outer
/// ℓ_{2p−1}. The measured (lo, hi) ratio against the source is stored on the result.
pub fn psupermodular_approx_symmetric(norm: &NormDescriptor, n: usize) -> Result<NormDescriptor> {
    let dec = topk_decompose(norm, n)?;
    let big_n = dec.n;
    let p = pipeline_exponent(big_n);
    let q = 2.0 * p - 1.0;
    let mut inners = Vec::with_capacity(dec.levels());
    let mut weights = Vec::with_capacity(dec.levels());
    for (j, c) in dec.scalars.iter().enumerate() {
        let f = approximate_orlicz_norm(&topk_orlicz(1 << j)?, big_n)?;
        let f = if big_n == norm.dim() { f } else { f.compose_linear(padding_selector(big_n, norm.dim()))? };
        inners.push(f);
        weights.push(2.0 * dec.spread * c);
    }
    let combined = NormDescriptor::lp_combine(inners, weights, q)?;
    let ratio = estimate_approx_ratio(norm, &combined, DISTORTION_SAMPLES, 0)?;
    Ok(NormDescriptor::symmetric_approx(combined, q, Some((ratio.lo, ratio.hi))))
}

/// The `big_n × dim` matrix embedding R^dim as the first coordinates of R^big_n.
fn padding_selector(big_n: usize, dim: usize) -> Vec<Vec<f64>> {
    (0..big_n).map(|r| (0..dim).map(|c| if r == c { 1.0 } else { 0.0 }).collect()).collect()
}

/// ‖v‖_p / ‖v‖_∞, the price of replacing a max by an ℓ_p sum. At most
/// count^{1/p}, hence at most 2 once p ≥ log₂(count).
pub fn lp_over_max(values: &[f64], p: f64) -> f64 {
    let m = values.iter().fold(0.0_f64, |a, &b| a.max(b));
    if m == 0.0 {
        return 1.0;
    }
    crate::norm::lp_value(values, p) / m
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalars_for_basic_norms() {
        let l1 = NormDescriptor::lp(4, 1.0).unwrap();
        assert_eq!(topk_decompose(&l1, 4).unwrap().scalars, vec![1.0, 1.0, 1.0]);
        let linf = NormDescriptor::linf(4).unwrap();
        assert_eq!(topk_decompose(&linf, 4).unwrap().scalars, vec![1.0, 0.5, 0.25]);
        let l2 = NormDescriptor::lp(4, 2.0).unwrap();
        let d = topk_decompose(&l2, 4).unwrap();
        assert!((d.raw_value(&[1.0; 4]) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn pads_to_power_of_two() {
        let l1 = NormDescriptor::lp(5, 1.0).unwrap();
        let d = topk_decompose(&l1, 5).unwrap();
        assert_eq!(d.n, 8);
        assert_eq!(d.scalars.len(), 4);
        assert!((d.scalars[3] - 5.0 / 8.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_weighted_norm() {
        let w = NormDescriptor::weighted_linear(vec![1.0, 2.0, 3.0]).unwrap();
        assert!(matches!(topk_decompose(&w, 4), Err(Error::NotSymmetric(_))));
    }

    #[test]
    fn lp_over_max_bound() {
        let v = [1.0, 0.5, 1.0, 0.25];
        assert!(lp_over_max(&v, 2.0) <= 4f64.powf(0.5) + 1e-12);
        assert_eq!(lp_over_max(&[0.0, 0.0], 3.0), 1.0);
    }
}
