use approx::assert_relative_eq;
use proptest::prelude::*;

use supernorm::orlicz::{approximate_orlicz_norm, topk_orlicz};
use supernorm::{NormDescriptor, OrliczFunction};

const N: usize = 6;

fn norm_zoo() -> Vec<NormDescriptor> {
    let w = vec![0.5, 1.0, 2.0, 0.25, 1.5, 3.0];
    let a: Vec<Vec<f64>> = (0..3).map(|r| (0..N).map(|c| ((r * 7 + c * 3) % 5) as f64 / 4.0).collect()).collect();
    vec![
        NormDescriptor::lp(N, 1.0).unwrap(),
        NormDescriptor::lp(N, 2.0).unwrap(),
        NormDescriptor::lp(N, 3.5).unwrap(),
        NormDescriptor::linf(N).unwrap(),
        NormDescriptor::topk(N, 2).unwrap(),
        NormDescriptor::weighted_linear(w.clone()).unwrap(),
        NormDescriptor::weighted_linf(w).unwrap(),
        NormDescriptor::sum_linf_blocks(N, 3).unwrap(),
        NormDescriptor::l1_plus_l2(N).unwrap(),
        NormDescriptor::max_of(vec![NormDescriptor::linf(N).unwrap(), NormDescriptor::lp(N, 2.0).unwrap()]).unwrap(),
        NormDescriptor::budget_prefix(N, 3.0).unwrap(),
        NormDescriptor::orlicz(OrliczFunction::power(2.0), N).unwrap(),
        NormDescriptor::orlicz(topk_orlicz(2).unwrap(), N).unwrap(),
        NormDescriptor::lp(3, 2.0).unwrap().compose_linear(a).unwrap(),
        NormDescriptor::lp_combine(
            vec![NormDescriptor::lp(N, 2.0).unwrap(), NormDescriptor::lp(N, 3.0).unwrap()],
            vec![1.0, 0.5],
            3.0,
        )
        .unwrap(),
        NormDescriptor::lp(N, 2.0).unwrap().smooth(0.1, 3, 16).unwrap(),
        approximate_orlicz_norm(&OrliczFunction::power(2.0), N).unwrap(),
    ]
}

fn nonneg(n: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(prop_oneof![3 => 0.0..10.0f64, 1 => Just(0.0)], n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn homogeneity(x in nonneg(N), t in 0.01..100.0f64) {
        for f in norm_zoo() {
            let scaled: Vec<f64> = x.iter().map(|v| v * t).collect();
            let (a, b) = (f.value(&scaled), t * f.value(&x));
            prop_assert!((a - b).abs() <= 1e-8 * b.max(1e-12), "{}: {a} vs {b}", f.kind_name());
        }
    }

    #[test]
    fn triangle_inequality(x in nonneg(N), y in nonneg(N)) {
        for f in norm_zoo() {
            let s: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a + b).collect();
            let lhs = f.value(&s);
            let rhs = f.value(&x) + f.value(&y);
            prop_assert!(lhs <= rhs * (1.0 + 1e-9) + 1e-12, "{}: {lhs} > {rhs}", f.kind_name());
        }
    }

    #[test]
    fn monotone_in_each_coordinate(x in nonneg(N), i in 0..N, bump in 0.0..5.0f64) {
        for f in norm_zoo() {
            let mut y = x.clone();
            y[i] += bump;
            prop_assert!(f.value(&y) >= f.value(&x) * (1.0 - 1e-9), "{}", f.kind_name());
        }
    }

    #[test]
    fn gradient_pairs_to_value(x in nonneg(N)) {
        prop_assume!(x.iter().all(|&v| v > 0.1));
        for f in norm_zoo().into_iter().filter(|f| f.has_analytic_gradient()) {
            let g = f.gradient(&x, 1e-6).unwrap();
            let pairing: f64 = g.iter().zip(&x).map(|(a, b)| a * b).sum();
            let v = f.value(&x);
            prop_assert!((pairing - v).abs() <= 1e-6 * v, "{}: <grad, x> = {pairing}, f = {v}", f.kind_name());
        }
    }

    #[test]
    fn gradient_is_scale_invariant(x in nonneg(N), t in 0.1..10.0f64) {
        prop_assume!(x.iter().all(|&v| v > 0.1));
        for f in norm_zoo().into_iter().filter(|f| f.has_analytic_gradient()) {
            let g1 = f.gradient(&x, 1e-6).unwrap();
            let xs: Vec<f64> = x.iter().map(|v| v * t).collect();
            let g2 = f.gradient(&xs, 1e-6).unwrap();
            for (a, b) in g1.iter().zip(&g2) {
                prop_assert!((a - b).abs() <= 1e-7 * a.abs().max(1.0), "{}", f.kind_name());
            }
        }
    }

    #[test]
    fn analytic_gradient_matches_finite_differences(x in nonneg(N)) {
        prop_assume!(x.iter().all(|&v| v > 0.5));
        for f in norm_zoo().into_iter().filter(|f| f.has_analytic_gradient()) {
            let g = f.gradient(&x, 1e-6).unwrap();
            let fd = f.fd_gradient(&x, 1e-6);
            for (a, b) in g.iter().zip(&fd) {
                prop_assert!((a - b).abs() <= 1e-4 * a.abs().max(1.0), "{}: {a} vs {b}", f.kind_name());
            }
        }
    }

    #[test]
    fn json_round_trip_preserves_values(x in nonneg(N)) {
        for f in norm_zoo() {
            let back = NormDescriptor::from_json_str(&f.to_json_string()).unwrap();
            prop_assert_eq!(back.value(&x).to_bits(), f.value(&x).to_bits(), "{}", f.kind_name());
            prop_assert_eq!(back.supermod_p(), f.supermod_p());
        }
    }
}

#[test]
fn lp_unit_vectors() {
    for &p in &[1.0, 2.0, 7.0] {
        let f = NormDescriptor::lp(4, p).unwrap();
        assert_relative_eq!(f.value(&[1.0, 1.0, 1.0, 1.0]), 4f64.powf(1.0 / p), max_relative = 1e-14);
        assert_eq!(f.value(&[0.0, 3.0, 0.0, 0.0]), 3.0);
    }
}

#[test]
fn evaluation_rejects_bad_input() {
    let f = NormDescriptor::lp(3, 2.0).unwrap();
    assert!(f.eval_slice(&[1.0, -1.0, 0.0]).is_err());
    assert!(f.eval_slice(&[1.0, 0.0]).is_err());
    assert!(f.eval_slice(&[f64::NAN, 0.0, 0.0]).is_err());
}

#[test]
fn budget_prefix_by_hand() {
    // max_j top_{2^j}(x)/c^j with c = 2: top1 = 3, top2/2 = 2.5, top4/4 = 2.
    let f = NormDescriptor::budget_prefix(4, 2.0).unwrap();
    assert_relative_eq!(f.value(&[3.0, 2.0, 2.0, 1.0]), 3.0);
    assert_relative_eq!(f.value(&[2.0, 2.0, 2.0, 2.0]), 2.0);
}

#[test]
fn orlicz_power_matches_lp() {
    // ‖x‖_G for G(t) = t^p is ℓ_p.
    let g = NormDescriptor::orlicz(OrliczFunction::power(3.0), 5).unwrap();
    let l3 = NormDescriptor::lp(5, 3.0).unwrap();
    let x = [0.3, 2.0, 0.0, 1.1, 4.0];
    assert_relative_eq!(g.value(&x), l3.value(&x), max_relative = 1e-9);
}
