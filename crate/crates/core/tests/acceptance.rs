//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

use std::time::{Duration, Instant};

use rand::Rng;
use supernorm::certify::{
    check_budget_gauge, check_four_point, check_gradient_monotone, check_gradient_stability, check_hessian,
    counterexample_block_chain, estimate_approx_ratio, hessian_violation, stable_surrogate,
};
use supernorm::online::cover::CoverOptMode;
use supernorm::online::{
    brute_opt_loadbalance, greedy_bound, greedy_loadbalance, offline_opt_cover, offline_opt_pack, olo_ftpl, solve_cover,
    solve_pack, CoveringInstance, LoadBalanceInstance, PackingInstance,
};
use supernorm::orlicz::{approximate_orlicz_norm, pipeline_stages, topk_orlicz};
use supernorm::probing::{adaptive_opt, hallucination_exact, nonadaptive_opt, Feasibility, ProbingInstance};
use supernorm::sampling::{sample_ratio_mix, seeded_rng};
use supernorm::symmetric::psupermodular_approx_symmetric;
use supernorm::{NormDescriptor, OrliczFunction};

// Tolerances, pinned.
const LP_TOL: f64 = 1e-7;
const TOPK_SLACK: f64 = 1e-9;
const PIECEWISE_RANGE: (f64, f64) = (1.0, 2.0);
const SMOOTHING_RANGE: (f64, f64) = (1.0, 12.0);
const RATIO_SLACK: f64 = 1e-9;
const SYMMETRIC_FACTOR: f64 = 50.0;
const GREEDY_SLACK: f64 = 1e-9;
const COVER_FEAS_STEPS: f64 = 10.0;
const COVER_TAU_STEPS: f64 = 5.0;
const COVER_ENVELOPE: f64 = 50.0;
const PACK_ENVELOPE: f64 = 10.0;
const PROBE_ENVELOPE: f64 = 10.0;
const PROBE_ORDER_TOL: f64 = 1e-9;
const OLO_SLACK: f64 = 1e-9;
const SANDWICH_SLACK: f64 = 1e-12;
const BUDGET_GAUGE_TOL: f64 = 1e-6;

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn e2s<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn lp(n: usize, p: f64) -> NormDescriptor {
    NormDescriptor::lp(n, p).unwrap()
}

fn c1_lp_self_certification() -> Check {
    let mut worst: f64 = 0.0;
    for &p in &[1.0, 2.0, 3.0, 8.0] {
        for &n in &[2, 8, 64] {
            let norm = lp(n, p);
            let fp = check_four_point(&norm, p, 10_000, 1).map_err(e2s)?;
            let gm = check_gradient_monotone(&norm, p, 10_000, 2).map_err(e2s)?;
            for r in [&fp, &gm] {
                ensure(r.worst_violation <= LP_TOL, || format!("p={p} n={n}: {}", r.summary()))?;
                worst = worst.max(r.worst_violation);
            }
        }
    }
    Ok(format!("24 checks x 10^4 samples, worst violation {worst:.2e}"))
}

/// Smallest p at which the Hessian condition holds for the pair (i, j) of the
/// ℓ1+ℓ2 norm, in closed form.
fn l1l2_threshold(x: &[f64], i: usize, j: usize) -> f64 {
    let l1: f64 = x.iter().sum();
    let l2 = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    1.0 + x[i] * x[j] * (l1 + l2) / (l2 * (l2 + x[i]) * (l2 + x[j]))
}

fn c2_l1_plus_l2_refutation() -> Check {
    let norm = NormDescriptor::l1_plus_l2(16).map_err(e2s)?;
    let fail = check_hessian(&norm, 1.3, 2_000, 1e-4, 7).map_err(e2s)?;
    ensure(!fail.passed && fail.witness.is_some(), || format!("p=1.3 was not refuted: {}", fail.summary()))?;
    let w = fail.witness.as_ref().unwrap();
    let (wi, wj) = (w.coords[0], w.coords[1]);
    let wt = l1l2_threshold(&w.points[0], wi, wj);
    ensure(wt > 1.3, || format!("witness threshold {wt} does not exceed 1.3"))?;

    let mut x = vec![1.0; 16];
    x[0] = 4.0;
    x[1] = 4.0;
    let oracle = l1l2_threshold(&x, 0, 1);
    ensure(oracle > 1.3 && oracle < 3.0, || format!("oracle threshold {oracle}"))?;
    let (v3, _, _) = hessian_violation(&norm, 3.0, &x, 1e-4).map_err(e2s)?;
    ensure(v3 <= 1e-4, || format!("p=3 witness violation {v3}"))?;
    let (below, _, _) = hessian_violation(&norm, oracle - 0.05, &x, 1e-4).map_err(e2s)?;
    ensure(below > 1e-4, || format!("no violation just below the oracle threshold ({below})"))?;
    Ok(format!("p=1.3 witness threshold {wt:.4}; (4,4,1..) pair threshold {oracle:.4}, p=3 violation {v3:.1e}"))
}

fn c3_topk_sandwich() -> Check {
    let mut range = (f64::INFINITY, 0.0_f64);
    for &(n, k) in &[(4, 2), (8, 3), (16, 8)] {
        let g = NormDescriptor::orlicz(topk_orlicz(k).map_err(e2s)?, n).map_err(e2s)?;
        let t = NormDescriptor::topk(n, k).map_err(e2s)?;
        let mut rng = seeded_rng(3, n as u64);
        for _ in 0..200 {
            let x = sample_ratio_mix(&mut rng, n);
            let tv = t.value(&x);
            if tv == 0.0 {
                continue;
            }
            let r = g.value(&x) / tv;
            ensure((0.5 - TOPK_SLACK..=1.0 + TOPK_SLACK).contains(&r), || format!("(n,k)=({n},{k}) ratio {r} at {x:?}"))?;
            range = (range.0.min(r), range.1.max(r));
        }
    }
    Ok(format!("600 vectors, ratio range [{:.4}, {:.4}]", range.0, range.1))
}

fn c4_orlicz_pipeline() -> Check {
    let mut lines = Vec::new();
    for &n in &[8usize, 64] {
        let sources = [
            ("t", OrliczFunction::power(1.0)),
            ("t^2", OrliczFunction::power(2.0)),
            ("topk", topk_orlicz((n / 4).max(1)).map_err(e2s)?),
        ];
        for (name, g) in sources {
            let st = pipeline_stages(&g, n).map_err(e2s)?;
            let base = NormDescriptor::orlicz(g.clone(), n).map_err(e2s)?;
            let pw = NormDescriptor::orlicz(st.piecewise.clone(), n).map_err(e2s)?;
            let r1 = estimate_approx_ratio(&base, &pw, 300, 11).map_err(e2s)?;
            let r2 = estimate_approx_ratio(&pw, &st.norm, 300, 12).map_err(e2s)?;
            ensure(r1.lo >= PIECEWISE_RANGE.0 - RATIO_SLACK && r1.hi <= PIECEWISE_RANGE.1 + RATIO_SLACK, || {
                format!("{name} n={n}: piecewise ratio [{}, {}]", r1.lo, r1.hi)
            })?;
            ensure(r2.lo >= SMOOTHING_RANGE.0 - RATIO_SLACK && r2.hi <= SMOOTHING_RANGE.1 + RATIO_SLACK, || {
                format!("{name} n={n}: smoothing ratio [{}, {}]", r2.lo, r2.hi)
            })?;
            let q = 2.0 * st.p - 1.0;
            let fp = check_four_point(&st.norm, q, 200, 13).map_err(e2s)?;
            ensure(fp.passed, || format!("{name} n={n}: {}", fp.summary()))?;
            lines.push(format!("{name}/n={n}: [{:.2},{:.2}] [{:.2},{:.2}]", r1.lo, r1.hi, r2.lo, r2.hi));
        }
    }
    Ok(lines.join("; "))
}

fn c5_symmetric() -> Check {
    let n = 8;
    let third = NormDescriptor::weighted_linear(vec![1.0 / 3.0; n]).map_err(e2s)?;
    let sources = [
        ("l1", lp(n, 1.0)),
        ("linf", NormDescriptor::linf(n).map_err(e2s)?),
        ("max(linf,l1/3)", NormDescriptor::max_of(vec![NormDescriptor::linf(n).map_err(e2s)?, third]).map_err(e2s)?),
    ];
    let mut lines = Vec::new();
    for (name, src) in sources {
        let approx = psupermodular_approx_symmetric(&src, n).map_err(e2s)?;
        let (lo, hi) = approx.distortion().ok_or("no recorded distortion")?;
        let factor = hi / lo;
        ensure(lo >= 1.0 - RATIO_SLACK && factor <= SYMMETRIC_FACTOR, || format!("{name}: ratio [{lo}, {hi}]"))?;
        let q = approx.supermod_p().ok_or("no exponent")?;
        let gm = check_gradient_monotone(&approx, q, 300, 5).map_err(e2s)?;
        ensure(gm.passed, || format!("{name}: {}", gm.summary()))?;
        lines.push(format!("{name}: factor {factor:.2} at q={q}"));
    }
    Ok(lines.join("; "))
}

fn c6_load_balancing() -> Check {
    let mut rng = seeded_rng(6, 0);
    let mut worst = [0.0_f64; 2];
    for trial in 0..500 {
        let (idx, p) = if trial % 2 == 0 { (0, 2.0) } else { (1, 3.0) };
        let t_len = rng.gen_range(1..=6);
        let n = rng.gen_range(2..=3);
        let sizes: Vec<Vec<f64>> = (0..t_len).map(|_| (0..n).map(|_| rng.gen::<f64>() * 4.0).collect()).collect();
        let inst = LoadBalanceInstance::new(sizes, lp(n, p)).map_err(e2s)?;
        let alg = greedy_loadbalance(&inst).final_objective;
        let opt = brute_opt_loadbalance(&inst).map_err(e2s)?;
        let ratio = if opt > 0.0 { alg / opt } else { 1.0 };
        ensure(ratio <= greedy_bound(p) * (1.0 + GREEDY_SLACK), || format!("trial {trial}: ratio {ratio} > {}", greedy_bound(p)))?;
        worst[idx] = worst[idx].max(ratio);
    }
    Ok(format!(
        "500 instances; worst l2 {:.4} (bound {:.4}), worst l3 {:.4} (bound {:.4})",
        worst[0],
        greedy_bound(2.0),
        worst[1],
        greedy_bound(3.0)
    ))
}

fn random_cover(rng: &mut impl Rng, p: f64) -> CoveringInstance {
    let rows = rng.gen_range(1..=4);
    let rows: Vec<Vec<f64>> = (0..rows)
        .map(|_| loop {
            let r: Vec<f64> = (0..3).map(|_| if rng.gen_bool(0.3) { 0.0 } else { rng.gen_range(0.1..1.0) }).collect();
            if r.iter().any(|&a| a > 0.0) {
                break r;
            }
        })
        .collect();
    let outer = lp(3, p).with_supermod_p(Some(p));
    CoveringInstance::separable(rows, outer).unwrap()
}

fn c7_covering() -> Check {
    let mut rng = seeded_rng(7, 0);
    let mut worst_ratio: f64 = 0.0;
    let mut worst_psi: f64 = 0.0;
    for trial in 0..100 {
        let p = if trial % 2 == 0 { 2.0 } else { 3.0 };
        let inst = random_cover(&mut rng, p);
        let trace = solve_cover(&inst).map_err(e2s)?;
        ensure(trace.diagnostics["monotone"] == 1.0, || format!("trial {trial}: not monotone"))?;
        for w in trace.steps.windows(2) {
            ensure(w[0].decision.iter().zip(&w[1].decision).all(|(a, b)| a <= b), || format!("trial {trial}: decreasing step"))?;
        }
        for (r, s) in trace.steps.iter().enumerate() {
            for row in &inst.rows[..=r] {
                let cov: f64 = row.iter().zip(&s.decision).map(|(a, y)| a * y).sum();
                ensure(cov >= 1.0 - COVER_FEAS_STEPS * inst.step, || format!("trial {trial}: row coverage {cov}"))?;
            }
        }
        let (psi, tau) = (trace.diagnostics["psi_final"], trace.diagnostics["tau_final"]);
        ensure(psi <= 2.0 * tau * (1.0 + COVER_TAU_STEPS * inst.step), || format!("trial {trial}: psi {psi} > 2 tau {tau}"))?;
        worst_psi = worst_psi.max(psi / (2.0 * tau));
        let opt = offline_opt_cover(&inst, 40, CoverOptMode::Grid).map_err(e2s)?;
        let ratio = trace.final_objective / opt;
        ensure(ratio <= COVER_ENVELOPE, || format!("trial {trial}: ratio {ratio}"))?;
        worst_ratio = worst_ratio.max(ratio);
    }
    Ok(format!("100 instances; max psi/(2 tau) {worst_psi:.4}, max cost/OPT {worst_ratio:.3}"))
}

fn random_pack(rng: &mut impl Rng, items: usize) -> PackingInstance {
    let n = rng.gen_range(1..=3);
    let p = if rng.gen_bool(0.5) { 2.0 } else { 3.0 };
    let values: Vec<f64> = (0..items).map(|_| rng.gen_range(0.2..2.0)).collect();
    let sizes: Vec<Vec<f64>> = (0..n).map(|_| (0..items).map(|_| if rng.gen_bool(0.25) { 0.0 } else { rng.gen_range(0.05..1.0) }).collect()).collect();
    let mut sizes = sizes;
    for t in 0..items {
        if sizes.iter().all(|r| r[t] == 0.0) {
            sizes[0][t] = rng.gen_range(0.05..1.0);
        }
    }
    PackingInstance::new(values, sizes, lp(n, p).with_supermod_p(Some(p))).unwrap()
}

fn c8_packing() -> Check {
    let mut rng = seeded_rng(8, 0);
    let mut worst_load: f64 = 0.0;
    for seed in 0..500u64 {
        let items = rng.gen_range(1..=8);
        let inst = random_pack(&mut rng, items);
        let trace = solve_pack(&inst, seed).map_err(e2s)?;
        let load = trace.diagnostics["load_norm"];
        ensure(load <= 1.0 && trace.all_feasible(), || format!("seed {seed}: load {load}"))?;
        worst_load = worst_load.max(load);
    }
    let mut ratios = Vec::new();
    let mut p_max: f64 = 1.0;
    for seed in 0..200u64 {
        let items = rng.gen_range(1..=3);
        let inst = random_pack(&mut rng, items);
        let opt = offline_opt_pack(&inst, 8, seed).map_err(e2s)?;
        let inst = inst.with_opt(opt, 1.0);
        p_max = p_max.max(inst.potential_exponent().map_err(e2s)?);
        let trace = solve_pack(&inst, seed).map_err(e2s)?;
        ensure(trace.all_feasible(), || format!("known-OPT seed {seed} infeasible"))?;
        ratios.push(opt / trace.final_objective);
    }
    let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
    ensure(mean <= PACK_ENVELOPE * p_max, || format!("mean ratio {mean} > {}", PACK_ENVELOPE * p_max))?;
    Ok(format!("500 runs feasible (max load {worst_load:.4}); known-OPT mean ratio {mean:.3}"))
}

fn random_probe(rng: &mut impl Rng, objective: NormDescriptor) -> ProbingInstance {
    let n = objective.dim();
    let items = (0..n)
        .map(|_| {
            let hi = rng.gen_range(0.5..10.0);
            let q = rng.gen_range(0.05..0.95);
            if rng.gen_bool(0.3) {
                vec![(rng.gen_range(0.0..2.0), 1.0)]
            } else {
                vec![(0.0, 1.0 - q), (hi, q)]
            }
        })
        .collect();
    let k = rng.gen_range(1..=n);
    ProbingInstance::new(items, Feasibility::Card(k), objective).unwrap()
}

fn c9_probing() -> Check {
    let mut rng = seeded_rng(9, 0);
    let mut worst = (0.0_f64, String::new());
    for trial in 0..200 {
        let n = rng.gen_range(2..=5);
        let (name, norm, p) = match trial % 3 {
            0 => ("l1", lp(n, 1.0), 1.0),
            1 => ("l2", lp(n, 2.0), 2.0),
            _ => {
                let q = (n as f64).ln().max(1.0).ceil() + 1.0;
                ("linf~", lp(n, q), q)
            }
        };
        let inst = random_probe(&mut rng, norm);
        let adapt = adaptive_opt(&inst).map_err(e2s)?;
        let nonadapt = nonadaptive_opt(&inst, 100_000, trial).map_err(e2s)?;
        let hall = hallucination_exact(&inst, &adapt).map_err(e2s)?;
        let tol = PROBE_ORDER_TOL * adapt.value.max(1.0);
        ensure(adapt.value + tol >= nonadapt.value && nonadapt.value + tol >= hall, || {
            format!("trial {trial}: adapt {} nonadapt {} hallucination {hall}", adapt.value, nonadapt.value)
        })?;
        let gap = if hall > 0.0 { adapt.value / hall } else { 1.0 };
        ensure(gap <= PROBE_ENVELOPE * p, || format!("trial {trial} ({name}): gap {gap} > {}", PROBE_ENVELOPE * p))?;
        if gap / p > worst.0 {
            worst = (gap / p, format!("{name} n={n}"));
        }
    }
    Ok(format!("200 instances exact; worst gap/p {:.3} ({})", worst.0, worst.1))
}

/// Gain sequences against the shifted-leader strategy: half pick the
/// coordinate the current play weights least, half alternate blocks.
fn adversarial_gains(norm: &NormDescriptor, p: f64, eps: f64, seed: u64) -> Vec<Vec<f64>> {
    let (d, t_len) = (4, 200);
    let mut rng = seeded_rng(seed, 10);
    let mut s = vec![0.0; d];
    let mut out = Vec::with_capacity(t_len);
    for t in 0..t_len {
        let g: Vec<f64> = if seed.is_multiple_of(2) {
            let point: Vec<f64> = s.iter().map(|v| v + p / eps).collect();
            let x = norm.gradient(&point, 1e-6).unwrap();
            let j = (0..d).fold(0, |b, i| if x[i] < x[b] { i } else { b });
            (0..d).map(|i| if i == j { 1.0 } else { rng.gen::<f64>() * 0.1 }).collect()
        } else {
            let block = (t / (1 + seed as usize % 7)) % d;
            (0..d).map(|i| if i == block { 1.0 } else { 0.0 }).collect()
        };
        for (si, gi) in s.iter_mut().zip(&g) {
            *si += gi;
        }
        out.push(g);
    }
    out
}

fn c10_olo() -> Check {
    let mut runs = 0;
    let mut min_slack = f64::INFINITY;
    for &q in &[2.0, 4.0] {
        let norm = lp(4, q);
        for &eps in &[0.2, 0.5] {
            for seed in 0..50u64 {
                let gains = adversarial_gains(&norm, q, eps, seed);
                let trace = olo_ftpl(&norm, &gains, q, eps).map_err(e2s)?;
                let (gain, bound) = (trace.diagnostics["total_gain"], trace.diagnostics["bound"]);
                ensure(gain >= bound - OLO_SLACK * bound.abs().max(1.0), || format!("l{q} eps={eps} seed {seed}: gain {gain} < bound {bound}"))?;
                min_slack = min_slack.min(gain - bound);
                runs += 1;
            }
        }
    }
    Ok(format!("{runs} runs, zero violations, min gain - bound {min_slack:.3}"))
}

fn c11_gradient_stability() -> Check {
    let n = 8;
    let pipeline = approximate_orlicz_norm(&OrliczFunction::power(2.0), n).map_err(e2s)?;
    let q = pipeline.supermod_p().ok_or("pipeline norm has no exponent")?;
    let mut lines = Vec::new();
    for (name, norm, p) in [("l2", lp(n, 2.0), 2.0), ("pipeline", pipeline, q)] {
        for &eps in &[0.1, 1.0] {
            let r = check_gradient_stability(&norm, p, eps, 10_000, 11).map_err(e2s)?;
            ensure(r.passed, || format!("{name} eps={eps}: {}", r.summary()))?;
            let mut rng = seeded_rng(11, 99);
            for _ in 0..1_000 {
                let x = sample_ratio_mix(&mut rng, n);
                let (v, s) = (norm.value(&x), stable_surrogate(&norm, p, eps, &x));
                ensure(v <= s + SANDWICH_SLACK * s && s <= v + (p - 1.0) / eps + SANDWICH_SLACK * s, || {
                    format!("{name} eps={eps}: sandwich broken, norm {v} surrogate {s}")
                })?;
            }
            lines.push(format!("{name}/eps={eps}: worst {:.1e}", r.worst_violation));
        }
    }
    Ok(lines.join("; "))
}

fn c12_counterexamples() -> Check {
    let m = 9;
    let candidate = NormDescriptor::sum_linf_blocks(m * m, m).map_err(e2s)?;
    let (report, ev) = counterexample_block_chain(m, &candidate, 2.0, 2.0).map_err(e2s)?;
    ensure(!report.passed && ev.arithmetic_gap > 0.0, || format!("not refuted: gap {}", ev.arithmetic_gap))?;
    let gauge = check_budget_gauge(4, 3.0, 200, 12).map_err(e2s)?;
    ensure(gauge.passed && gauge.worst_violation <= BUDGET_GAUGE_TOL, || gauge.summary())?;
    Ok(format!(
        "m=9 refuted: 8(2^(1/2)-1) = {:.3} > 2; budget gauge worst {:.1e}",
        ev.arithmetic_gap + 2.0,
        gauge.worst_violation
    ))
}

fn main() {
    let criteria: [(&str, u64, fn() -> Check); 12] = [
        ("lp self-certification", 30, c1_lp_self_certification),
        ("l1+l2 Hessian refutation", 5, c2_l1_plus_l2_refutation),
        ("top-k Orlicz sandwich", 10, c3_topk_sandwich),
        ("Orlicz pipeline stages", 60, c4_orlicz_pipeline),
        ("symmetric approximation", 60, c5_symmetric),
        ("greedy load balancing", 60, c6_load_balancing),
        ("online covering", 120, c7_covering),
        ("online packing", 120, c8_packing),
        ("probing adaptivity gap", 300, c9_probing),
        ("online linear optimization", 30, c10_olo),
        ("gradient stability", 30, c11_gradient_stability),
        ("counterexample demos", 10, c12_counterexamples),
    ];
    let mut failures = 0;
    for (i, (name, budget, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = f();
        let elapsed = start.elapsed();
        let over = elapsed > Duration::from_secs(*budget);
        let (status, detail) = match (&outcome, over) {
            (Ok(d), false) => ("PASS", d.clone()),
            (Ok(d), true) => ("FAIL", format!("over the {budget}s budget; {d}")),
            (Err(e), _) => ("FAIL", e.clone()),
        };
        if status == "FAIL" {
            failures += 1;
        }
        println!("{status} {:>2} {name} ({:.2}s): {detail}", i + 1, elapsed.as_secs_f64());
    }
    println!("{} of 12 criteria passed", 12 - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
