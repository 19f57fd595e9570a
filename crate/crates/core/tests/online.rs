use proptest::prelude::*;
use rand::Rng;

use supernorm::online::cover::CoverOptMode;
use supernorm::online::{
    assignment_of, brute_opt_loadbalance, greedy_bound, greedy_loadbalance, offline_opt_cover, offline_opt_pack,
    offline_opt_pack_grid, olo_experts, olo_ftpl, solve_cover, solve_pack, traces_to_csv, CoveringInstance,
    LoadBalanceInstance, OnlineInstance, PackingInstance, CSV_VERSION_LINE,
};
use supernorm::sampling::seeded_rng;
use supernorm::NormDescriptor;

fn lp(n: usize, p: f64) -> NormDescriptor {
    NormDescriptor::lp(n, p).unwrap()
}

/// Second enumerator: depth-first over jobs, carrying the load vector.
fn recursive_opt(sizes: &[Vec<f64>], norm: &NormDescriptor, load: &mut Vec<f64>) -> f64 {
    let Some((row, rest)) = sizes.split_first() else { return norm.value(load) };
    let mut best = f64::INFINITY;
    for i in 0..load.len() {
        load[i] += row[i];
        best = best.min(recursive_opt(rest, norm, load));
        load[i] -= row[i];
    }
    best
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn brute_force_matches_recursive_enumerator(
        sizes in proptest::collection::vec(proptest::collection::vec(0.0..5.0f64, 2), 1..=5),
        p in prop_oneof![Just(1.0), Just(2.0), Just(3.0)],
    ) {
        let inst = LoadBalanceInstance::new(sizes.clone(), lp(2, p)).unwrap();
        let a = brute_opt_loadbalance(&inst).unwrap();
        let b = recursive_opt(&sizes, &inst.objective, &mut vec![0.0; 2]);
        prop_assert!((a - b).abs() <= 1e-12 * a.max(1.0));
    }

    #[test]
    fn greedy_is_optimal_for_l1(sizes in proptest::collection::vec(proptest::collection::vec(0.0..5.0f64, 3), 1..=6)) {
        let inst = LoadBalanceInstance::new(sizes.clone(), lp(3, 1.0)).unwrap();
        let expected: f64 = sizes.iter().map(|r| r.iter().cloned().fold(f64::INFINITY, f64::min)).sum();
        let got = greedy_loadbalance(&inst).final_objective;
        prop_assert!((got - expected).abs() <= 1e-12 * expected.max(1.0));
    }

    #[test]
    fn greedy_within_bound(sizes in proptest::collection::vec(proptest::collection::vec(0.0..5.0f64, 3), 1..=5)) {
        let inst = LoadBalanceInstance::new(sizes, lp(3, 2.0)).unwrap();
        let alg = greedy_loadbalance(&inst).final_objective;
        let opt = brute_opt_loadbalance(&inst).unwrap();
        prop_assert!(alg <= greedy_bound(2.0) * opt * (1.0 + 1e-9) + 1e-12);
    }
}

#[test]
fn single_job_goes_to_cheapest_machine() {
    let inst = LoadBalanceInstance::new(vec![vec![3.0, 1.0, 2.0]], lp(3, 2.0)).unwrap();
    assert_eq!(brute_opt_loadbalance(&inst).unwrap(), 1.0);
    assert_eq!(assignment_of(&greedy_loadbalance(&inst)), vec![1]);
}

#[test]
fn cover_two_unit_rows_l1() {
    let inst = CoveringInstance::separable(vec![vec![1.0, 0.0], vec![0.0, 1.0]], lp(2, 1.0)).unwrap();
    let grid = offline_opt_cover(&inst, 40, CoverOptMode::Grid).unwrap();
    let sub = offline_opt_cover(&inst, 200, CoverOptMode::Subgradient).unwrap();
    assert!((grid - 2.0).abs() < 1e-9);
    assert!((sub - 2.0).abs() < 1e-6);
    let t = solve_cover(&inst).unwrap();
    assert!((t.final_objective - 2.0).abs() < 1e-6);
}

#[test]
fn cover_grid_and_subgradient_agree() {
    let mut rng = seeded_rng(21, 0);
    for _ in 0..10 {
        let rows: Vec<Vec<f64>> = (0..3).map(|_| (0..3).map(|_| rng.gen_range(0.1..1.0)).collect()).collect();
        let inst = CoveringInstance::separable(rows, lp(3, 2.0)).unwrap();
        let grid = offline_opt_cover(&inst, 40, CoverOptMode::Grid).unwrap();
        let sub = offline_opt_cover(&inst, 300, CoverOptMode::Subgradient).unwrap();
        assert!((grid - sub).abs() <= 0.02 * grid, "grid {grid} vs subgradient {sub}");
        // Both are feasible values, so neither can be far below the true optimum.
        let alg = solve_cover(&inst).unwrap().final_objective;
        assert!(alg >= grid * (1.0 - 0.02));
    }
}

#[test]
fn cover_overlapping_sets_stay_feasible_and_monotone() {
    let outer = lp(2, 2.0);
    let inners = vec![lp(2, 2.0), NormDescriptor::linf(2).unwrap()];
    let rows = vec![vec![1.0, 0.5, 0.0], vec![0.0, 1.0, 1.0], vec![0.3, 0.0, 0.9]];
    let inst = CoveringInstance::new(3, rows.clone(), outer, inners, vec![vec![0, 1], vec![1, 2]]).unwrap();
    let t = solve_cover(&inst).unwrap();
    assert!(t.all_feasible());
    assert_eq!(t.diagnostics["monotone"], 1.0);
    assert!(t.diagnostics["psi_final"] <= 2.0 * t.diagnostics["tau_final"] * (1.0 + 5.0 * inst.step));
    let y = &t.steps.last().unwrap().decision;
    for row in &rows {
        assert!(row.iter().zip(y).map(|(a, b)| a * b).sum::<f64>() >= 1.0 - 10.0 * inst.step);
    }
}

#[test]
fn cover_replays_exactly() {
    let inst = CoveringInstance::separable(vec![vec![0.4, 0.9, 0.1], vec![0.7, 0.0, 0.5]], lp(3, 3.0)).unwrap();
    assert_eq!(solve_cover(&inst).unwrap(), solve_cover(&inst).unwrap());
    let coarse = solve_cover(&inst.clone().with_step(1e-2)).unwrap();
    let fine = solve_cover(&inst).unwrap();
    assert!((coarse.final_objective - fine.final_objective).abs() < 0.05 * fine.final_objective);
}

#[test]
fn pack_unit_items_always_feasible() {
    let p = lp(1, 2.0).with_supermod_p(Some(2.0));
    let inst = PackingInstance::new(vec![1.0; 10], vec![vec![1.0; 10]], p).unwrap();
    for seed in 0..50 {
        let t = solve_pack(&inst, seed).unwrap();
        assert!(t.all_feasible() && t.diagnostics["load_norm"] <= 1.0);
    }
}

#[test]
fn pack_single_item_opt_is_scaled_to_boundary() {
    let inst = PackingInstance::new(vec![3.0], vec![vec![0.5], vec![2.0]], lp(2, 2.0)).unwrap();
    let expected = 3.0 / lp(2, 2.0).value(&[0.5, 2.0]);
    assert!((offline_opt_pack(&inst, 2, 0).unwrap() - expected).abs() < 1e-9);
}

#[test]
fn pack_exchange_matches_grid() {
    let mut rng = seeded_rng(22, 0);
    for _ in 0..10 {
        let values: Vec<f64> = (0..2).map(|_| rng.gen_range(0.5..2.0)).collect();
        let sizes: Vec<Vec<f64>> = (0..3).map(|_| (0..2).map(|_| rng.gen_range(0.0..1.0)).collect()).collect();
        let inst = PackingInstance::new(values, sizes, lp(3, 3.0)).unwrap();
        let a = offline_opt_pack(&inst, 4, 0).unwrap();
        let b = offline_opt_pack_grid(&inst, 2_000).unwrap();
        assert!((a - b).abs() <= 0.01 * b, "exchange {a} vs grid {b}");
    }
}

#[test]
fn pack_with_surrogate_checks_real_norm() {
    // P is the ℓ∞ box; the potential uses ℓ_4, which is within a factor 3^{1/4}.
    let p = NormDescriptor::linf(3).unwrap();
    let sizes = vec![vec![1.0, 0.5, 0.2, 0.9], vec![0.3, 1.0, 0.6, 0.1], vec![0.0, 0.4, 1.0, 0.7]];
    let inst = PackingInstance::new(vec![1.0, 2.0, 1.5, 0.5], sizes, p).unwrap().with_surrogate(lp(3, 4.0));
    for seed in 0..20 {
        let t = solve_pack(&inst, seed).unwrap();
        assert!(t.all_feasible());
        assert_eq!(t.diagnostics["p"], 4.0);
    }
    assert!(solve_pack(&inst.clone().with_opt(1.0, 1.0), 0).is_ok());
    let bare = PackingInstance::new(vec![1.0], vec![vec![1.0], vec![1.0], vec![1.0]], NormDescriptor::linf(3).unwrap()).unwrap();
    assert!(solve_pack(&bare, 0).is_err());
}

#[test]
fn pack_is_seed_deterministic() {
    let inst = PackingInstance::new(vec![1.0, 1.0, 2.0], vec![vec![0.5, 0.7, 0.9], vec![0.2, 0.1, 0.8]], lp(2, 2.0)).unwrap();
    assert_eq!(solve_pack(&inst, 5).unwrap(), solve_pack(&inst, 5).unwrap());
}

#[test]
fn olo_single_direction() {
    let gains = vec![vec![1.0, 0.0, 0.0]; 50];
    let t = olo_ftpl(&lp(3, 2.0), &gains, 2.0, 0.5).unwrap();
    let bound = (-0.5f64).exp() * (50.0 - 2.0 * (3f64.sqrt() - 1.0) / 0.5);
    assert!((t.diagnostics["bound"] - bound).abs() < 1e-9);
    assert!(t.final_objective >= bound);
    // Plays tilt toward e_1 and stay on the dual sphere.
    let last = &t.steps[49].decision;
    assert!(last[0] > last[1]);
    assert!((lp(3, 2.0).value(last) - 1.0).abs() < 1e-12);
}

#[test]
fn olo_requires_unit_basis_and_analytic_gradient() {
    let scaled = NormDescriptor::weighted_linear(vec![2.0, 1.0]).unwrap();
    assert!(olo_ftpl(&scaled, &[vec![1.0, 0.0]], 1.0, 0.5).is_err());
    assert!(olo_ftpl(&NormDescriptor::linf(2).unwrap(), &[vec![1.0, 0.0]], 1.0, 0.5).is_err());
}

#[test]
fn experts_against_best_expert() {
    let gains: Vec<Vec<f64>> = (0..300).map(|t| (0..4).map(|i| if (t / 3) % 4 == i { 1.0 } else { 0.0 }).collect()).collect();
    for &eps in &[0.1, 0.3] {
        let t = olo_experts(&gains, eps).unwrap();
        assert!(t.all_feasible());
        assert!(t.final_objective >= t.diagnostics["experts_bound"]);
    }
}

#[test]
fn instance_json_round_trip() {
    let cases = [
        OnlineInstance::LoadBalance(LoadBalanceInstance::new(vec![vec![1.0, 2.0]], lp(2, 2.0)).unwrap()),
        OnlineInstance::Cover(CoveringInstance::separable(vec![vec![0.5, 1.0]], lp(2, 3.0)).unwrap().with_delta(1e-4)),
        OnlineInstance::Pack(PackingInstance::new(vec![1.0], vec![vec![1.0]], lp(1, 2.0)).unwrap().with_opt(1.0, 1.0)),
    ];
    for inst in cases {
        let back = OnlineInstance::from_json_str(&inst.to_json_string()).unwrap();
        assert_eq!(back, inst);
    }
    let bad = r#"{"type":"pack","objective":{"kind":"lp","dim":1,"params":{"p":2}},"data":{"values":[1],"sizes":[[0]]}}"#;
    assert!(OnlineInstance::from_json_str(bad).is_err());
    assert!(OnlineInstance::from_json_str(r#"{"type":"nope","objective":{"kind":"linf","dim":1},"data":{}}"#).is_err());
}

#[test]
fn csv_is_ordered_and_versioned() {
    let inst = PackingInstance::new(vec![1.0, 2.0], vec![vec![0.5, 0.5]], lp(1, 2.0)).unwrap();
    let traces: Vec<_> = [3u64, 1, 2].iter().map(|&s| solve_pack(&inst, s).unwrap()).collect();
    let csv = traces_to_csv(&traces, &serde_json::json!({"cmd": "pack"}));
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], CSV_VERSION_LINE);
    assert_eq!(lines[2], "seed,step,decision,objective_value,feasible,cumulative_time");
    let seeds: Vec<&str> = lines[3..].iter().map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(seeds, vec!["1", "1", "2", "2", "3", "3"]);
}
