//! One function per subcommand. Each loads its input, runs the library and
//! returns a [`Report`] with a verdict.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde_json::{json, Value};

use supernorm::certify::{
    check_budget_gauge, check_four_point, check_gradient_monotone, check_gradient_stability, check_hessian,
    counterexample_block_chain, estimate_approx_ratio, CertReport, RatioEstimate,
};
use supernorm::online::trace::fmt_num;
use supernorm::online::{
    brute_opt_loadbalance, greedy_bound, greedy_loadbalance, offline_opt_cover, olo_experts, olo_ftpl, solve_cover,
    solve_pack, traces_to_csv, CoverOptMode, OnlineInstance, RunTrace, CSV_VERSION_LINE,
};
use supernorm::orlicz::{pipeline_stages, topk_orlicz};
use supernorm::probing::{adaptive_opt, hallucination_exact, hallucination_value, nonadaptive_opt, ProbingInstance};
use supernorm::symmetric::psupermodular_approx_symmetric;
use supernorm::{Error, NormDescriptor, NormKind};

use crate::config::{read, Settings};
use crate::{Fail, Report};

const DEFAULT_SAMPLES: usize = 2_000;
const HESSIAN_FD_STEP: f64 = 1e-4;
const RATIO_SLACK: f64 = 1e-9;
/// Probing instances up to this many items are evaluated exactly.
const EXACT_PROBE_ITEMS: usize = 12;
const ADAPTIVITY_ENVELOPE: f64 = 10.0;
const COVER_GRID_BUDGET: usize = 40;
const COVER_GRID_MAX_VARS: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum CertProperty {
    /// Four-point, gradient-monotone and Hessian checks.
    All,
    FourPoint,
    GradientMonotone,
    Hessian,
    /// Gradient stability of the smoothed surrogate at --eps.
    Stability,
}

fn load_norm(s: &Settings) -> Result<NormDescriptor, Fail> {
    let path = s.norm_path()?;
    NormDescriptor::from_json_str(&read(path)?).map_err(|e| Fail::Input(format!("{}: {e}", path.display())))
}

fn load_online(s: &Settings) -> Result<OnlineInstance, Fail> {
    let path = s.instance_path()?;
    OnlineInstance::from_json_str(&read(path)?).map_err(|e| Fail::Input(format!("{}: {e}", path.display())))
}

fn wrong_type(expected: &str) -> Fail {
    Fail::Input(format!("expected an instance of type \"{expected}\""))
}

/// CSV document with the standard two header lines.
fn csv_table(stamp: &Value, header: &str, rows: &[Vec<String>]) -> String {
    let mut out = format!("{CSV_VERSION_LINE}\n# config: {stamp}\n{header}\n");
    for r in rows {
        let _ = writeln!(out, "{}", r.join(","));
    }
    out
}

pub fn certify(s: &Settings, property: CertProperty, stamp: &Value) -> Result<Report, Fail> {
    let norm = load_norm(s)?;
    let p = s.p.or(norm.supermod_p()).ok_or_else(|| Fail::Input("--p is required for a norm without a declared exponent".into()))?;
    let samples = s.samples.unwrap_or(DEFAULT_SAMPLES);
    let seed = s.seed();
    let props = match property {
        CertProperty::All => vec![CertProperty::FourPoint, CertProperty::GradientMonotone, CertProperty::Hessian],
        one => vec![one],
    };
    let mut reports = Vec::new();
    for prop in props {
        let mut r = match prop {
            CertProperty::FourPoint => check_four_point(&norm, p, samples, seed)?,
            CertProperty::GradientMonotone => check_gradient_monotone(&norm, p, samples, seed)?,
            CertProperty::Hessian => check_hessian(&norm, p, samples, HESSIAN_FD_STEP, seed)?,
            CertProperty::Stability => check_gradient_stability(&norm, p, s.eps.unwrap_or(1.0), samples, seed)?,
            CertProperty::All => unreachable!(),
        };
        if let Some(tol) = s.tol {
            r.tolerance = tol;
            r.passed = r.worst_violation <= tol;
        }
        reports.push(r);
    }
    Ok(cert_report(reports, stamp))
}

fn cert_report(reports: Vec<CertReport>, stamp: &Value) -> Report {
    let rows = reports
        .iter()
        .map(|r| {
            vec![
                property_name(r),
                r.passed.to_string(),
                fmt_num(r.worst_violation),
                fmt_num(r.tolerance),
                r.samples.to_string(),
                r.skipped.to_string(),
                r.witness.as_ref().map_or(String::new(), |w| {
                    w.points.iter().map(|pt| pt.iter().map(|&v| fmt_num(v)).collect::<Vec<_>>().join(";")).collect::<Vec<_>>().join("|")
                }),
            ]
        })
        .collect::<Vec<_>>();
    Report {
        passed: reports.iter().all(|r| r.passed),
        lines: reports.iter().map(CertReport::summary).collect(),
        csv: csv_table(stamp, "property,passed,worst_violation,tolerance,samples,skipped,witness", &rows),
        results: json!(reports),
    }
}

fn property_name(r: &CertReport) -> String {
    serde_json::to_value(r.property).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default()
}

struct Stage {
    name: &'static str,
    ratio: RatioEstimate,
    envelope: Option<(f64, f64)>,
}

impl Stage {
    fn ok(&self) -> bool {
        self.envelope.is_none_or(|(lo, hi)| self.ratio.lo >= lo - RATIO_SLACK && self.ratio.hi <= hi + RATIO_SLACK)
    }
}

pub fn approx(s: &Settings, stamp: &Value) -> Result<Report, Fail> {
    let norm = load_norm(s)?;
    let n = norm.dim();
    let samples = s.samples.unwrap_or(DEFAULT_SAMPLES);
    let seed = s.seed();
    let mut stages = Vec::new();
    let mut exponent = None;
    let g = match norm.kind() {
        NormKind::Orlicz { g, .. } => Some(g.clone()),
        NormKind::TopK { k } => {
            let g = topk_orlicz(*k)?;
            let gn = NormDescriptor::orlicz(g.clone(), n)?;
            stages.push(Stage { name: "orlicz", ratio: estimate_approx_ratio(&norm, &gn, samples, seed)?, envelope: Some((0.5, 1.0)) });
            Some(g)
        }
        _ => None,
    };
    match g {
        Some(g) => {
            let st = pipeline_stages(&g, n)?;
            let base = NormDescriptor::orlicz(g, n)?;
            let pw = NormDescriptor::orlicz(st.piecewise.clone(), n)?;
            stages.push(Stage { name: "piecewise", ratio: estimate_approx_ratio(&base, &pw, samples, seed + 1)?, envelope: Some((1.0, 2.0)) });
            stages.push(Stage { name: "smoothing", ratio: estimate_approx_ratio(&pw, &st.norm, samples, seed + 2)?, envelope: Some((1.0, 12.0)) });
            exponent = st.norm.supermod_p();
        }
        None => {
            let approx = psupermodular_approx_symmetric(&norm, n)?;
            stages.push(Stage { name: "symmetric", ratio: estimate_approx_ratio(&norm, &approx, samples, seed)?, envelope: None });
            exponent = approx.supermod_p().or(exponent);
        }
    }
    let lines = stages
        .iter()
        .map(|st| {
            let env = st.envelope.map_or("none".to_string(), |(a, b)| format!("[{a}, {b}]"));
            format!("{} {} ratio [{:.6}, {:.6}] envelope {env}", if st.ok() { "PASS" } else { "FAIL" }, st.name, st.ratio.lo, st.ratio.hi)
        })
        .collect();
    let rows = stages
        .iter()
        .map(|st| {
            let (elo, ehi) = st.envelope.map_or((String::new(), String::new()), |(a, b)| (fmt_num(a), fmt_num(b)));
            vec![st.name.to_string(), fmt_num(st.ratio.lo), fmt_num(st.ratio.hi), elo, ehi, st.ok().to_string()]
        })
        .collect::<Vec<_>>();
    let results = json!({
        "exponent": exponent,
        "stages": stages.iter().map(|st| json!({
            "stage": st.name,
            "lo": st.ratio.lo,
            "hi": st.ratio.hi,
            "samples": st.ratio.samples,
            "envelope": st.envelope.map(|(a, b)| [a, b]),
            "passed": st.ok(),
        })).collect::<Vec<_>>(),
    });
    Ok(Report {
        passed: stages.iter().all(Stage::ok),
        lines,
        csv: csv_table(stamp, "stage,lo,hi,envelope_lo,envelope_hi,passed", &rows),
        results,
    })
}

fn trace_report(traces: Vec<RunTrace>, passed: bool, lines: Vec<String>, extra: Value, stamp: &Value) -> Report {
    Report { passed, lines, csv: traces_to_csv(&traces, stamp), results: json!({ "summary": extra, "traces": traces }) }
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

pub fn loadbalance(s: &Settings, stamp: &Value) -> Result<Report, Fail> {
    let OnlineInstance::LoadBalance(inst) = load_online(s)? else { return Err(wrong_type("loadbalance")) };
    let trace = greedy_loadbalance(&inst);
    let alg = trace.final_objective;
    let opt = match brute_opt_loadbalance(&inst) {
        Ok(v) => Some(v),
        Err(Error::BudgetExceeded(_)) => None,
        Err(e) => return Err(e.into()),
    };
    let bound = inst.objective.supermod_p().map(greedy_bound);
    let ratio = opt.map(|o| if o > 0.0 { alg / o } else { 1.0 });
    let ok = match (ratio, bound) {
        (Some(r), Some(b)) => r <= b * (1.0 + RATIO_SLACK),
        _ => true,
    };
    let line = format!(
        "{} greedy {alg:.6} opt {} ratio {} bound {}",
        verdict(ok),
        opt.map_or("n/a".into(), |v| format!("{v:.6}")),
        ratio.map_or("n/a".into(), |v| format!("{v:.6}")),
        bound.map_or("n/a".into(), |v| format!("{v:.6}")),
    );
    let extra = json!({ "greedy": alg, "opt": opt, "ratio": ratio, "bound": bound });
    Ok(trace_report(vec![trace], ok, vec![line], extra, stamp))
}

pub fn cover(s: &Settings, stamp: &Value) -> Result<Report, Fail> {
    let OnlineInstance::Cover(mut inst) = load_online(s)? else { return Err(wrong_type("cover")) };
    if let Some(step) = s.step {
        inst.step = step;
    }
    let trace = solve_cover(&inst)?;
    let d = &trace.diagnostics;
    let (psi, tau) = (d["psi_final"], d["tau_final"]);
    let monotone = d["monotone"] == 1.0;
    let feasible = trace.steps.last().is_none_or(|st| st.feasible);
    let psi_ok = psi <= 2.0 * tau * (1.0 + 5.0 * inst.step);
    let opt = if inst.n <= COVER_GRID_MAX_VARS {
        offline_opt_cover(&inst, COVER_GRID_BUDGET, CoverOptMode::Grid)?
    } else {
        offline_opt_cover(&inst, s.samples.unwrap_or(DEFAULT_SAMPLES), CoverOptMode::Subgradient)?
    };
    let ok = monotone && feasible && psi_ok;
    let ratio = trace.final_objective / opt;
    let line = format!(
        "{} cost {:.6} offline {opt:.6} ratio {ratio:.4} psi {psi:.6} 2tau {:.6} monotone {monotone} feasible {feasible}",
        verdict(ok),
        trace.final_objective,
        2.0 * tau
    );
    let extra = json!({ "cost": trace.final_objective, "offline_opt": opt, "ratio": ratio, "psi_final": psi, "tau_final": tau, "monotone": monotone, "feasible": feasible });
    Ok(trace_report(vec![trace], ok, vec![line], extra, stamp))
}

pub fn pack(s: &Settings, stamp: &Value) -> Result<Report, Fail> {
    let OnlineInstance::Pack(inst) = load_online(s)? else { return Err(wrong_type("pack")) };
    let first = s.seed();
    let runs = s.runs.unwrap_or(1).max(1);
    let mut traces = (first..first + runs).into_par_iter().map(|seed| solve_pack(&inst, seed)).collect::<Result<Vec<_>, _>>()?;
    traces.sort_by_key(|t| t.seed);
    let lines: Vec<String> = traces
        .iter()
        .map(|t| format!("{} seed {} value {:.6} load {:.6}", verdict(t.all_feasible()), t.seed, t.final_objective, t.diagnostics["load_norm"]))
        .collect();
    let ok = traces.iter().all(RunTrace::all_feasible);
    let mean = traces.iter().map(|t| t.final_objective).sum::<f64>() / traces.len() as f64;
    let extra = json!({ "runs": runs, "mean_value": mean, "all_feasible": ok });
    Ok(trace_report(traces, ok, lines, extra, stamp))
}

pub fn probe(s: &Settings, stamp: &Value) -> Result<Report, Fail> {
    let path = s.instance_path()?;
    let inst = ProbingInstance::from_json_str(&read(path)?).map_err(|e| Fail::Input(format!("{}: {e}", path.display())))?;
    let mc = s.samples.unwrap_or(10_000);
    let seed = s.seed();
    let policy = adaptive_opt(&inst)?;
    let na = nonadaptive_opt(&inst, mc, seed)?;
    let (hall, hall_err) = if inst.n() <= EXACT_PROBE_ITEMS {
        (hallucination_exact(&inst, &policy)?, 0.0)
    } else {
        hallucination_value(&inst, &policy, mc, seed)
    };
    let p = inst.objective.supermod_p().unwrap_or(1.0).max(1.0);
    let slack = 3.0 * (na.stderr + hall_err) + 1e-9 * policy.value.max(1.0);
    let gap = if hall > 0.0 { policy.value / hall } else { 1.0 };
    let ordered = policy.value >= na.value - slack && na.value >= hall - slack;
    let ok = ordered && gap <= ADAPTIVITY_ENVELOPE * p;
    let line = format!(
        "{} adaptive {:.6} nonadaptive {:.6} hallucination {hall:.6} gap {gap:.4} (envelope {})",
        verdict(ok),
        policy.value,
        na.value,
        ADAPTIVITY_ENVELOPE * p
    );
    let rows = [
        ("adaptive", policy.value, 0.0),
        ("nonadaptive", na.value, na.stderr),
        ("hallucination", hall, hall_err),
        ("gap", gap, 0.0),
    ]
    .iter()
    .map(|(k, v, e)| vec![k.to_string(), fmt_num(*v), fmt_num(*e)])
    .collect::<Vec<_>>();
    let results = json!({
        "adaptive": policy.value,
        "policy_states": policy.states(),
        "nonadaptive": { "value": na.value, "stderr": na.stderr, "set": na.set },
        "hallucination": { "value": hall, "stderr": hall_err },
        "gap": gap,
        "p": p,
        "envelope": ADAPTIVITY_ENVELOPE * p,
        "ordered": ordered,
    });
    Ok(Report { passed: ok, lines: vec![line], csv: csv_table(stamp, "quantity,value,stderr", &rows), results })
}

pub fn olo(s: &Settings, stamp: &Value) -> Result<Report, Fail> {
    let OnlineInstance::Olo(inst) = load_online(s)? else { return Err(wrong_type("olo")) };
    let eps = s.eps.unwrap_or(inst.eps);
    let experts = matches!(inst.dual_norm.kind(), NormKind::Linf);
    let trace = if experts {
        olo_experts(&inst.gains, eps)?
    } else {
        olo_ftpl(&inst.dual_norm, &inst.gains, s.p.unwrap_or(inst.p), eps)?
    };
    let d = &trace.diagnostics;
    let gain = d["total_gain"];
    let bound = if experts { d["experts_bound"] } else { d["bound"] };
    let ok = gain >= bound - RATIO_SLACK * bound.abs().max(1.0) && trace.all_feasible();
    let line = format!("{} {} gain {gain:.6} bound {bound:.6}", verdict(ok), trace.algorithm);
    let extra = json!({ "gain": gain, "bound": bound, "experts": experts });
    Ok(trace_report(vec![trace], ok, vec![line], extra, stamp))
}

pub fn demo_counterexamples(s: &Settings, stamp: &Value) -> Result<Report, Fail> {
    let m = 9;
    let sum_max = NormDescriptor::sum_linf_blocks(m * m, m)?;
    let (refute, evidence) = counterexample_block_chain(m, &sum_max, 2.0, 2.0)?;
    let l1 = NormDescriptor::lp(m * m, 1.0)?;
    let (control, control_ev) = counterexample_block_chain(m, &l1, 1.0, m as f64)?;
    let budget = check_budget_gauge(4, 3.0, s.samples.unwrap_or(200), s.seed())?;
    let refuted = !refute.passed && evidence.arithmetic_gap > 0.0;
    let ok = refuted && control.passed && budget.passed;
    let lines = vec![
        format!(
            "{} block chain m={m}, alpha=2, p=2: gap {:.4} ({})",
            verdict(refuted),
            evidence.arithmetic_gap,
            if refuted { "refuted" } else { "not refuted" }
        ),
        format!("{} block chain control l1, alpha={m}, p=1: gap {:.4}", verdict(control.passed), control_ev.arithmetic_gap),
        budget.summary(),
    ];
    let rows = vec![
        vec!["block_chain_sum_max".into(), refuted.to_string(), fmt_num(evidence.arithmetic_gap)],
        vec!["block_chain_l1_control".into(), control.passed.to_string(), fmt_num(control_ev.arithmetic_gap)],
        vec!["budget_gauge".into(), budget.passed.to_string(), fmt_num(budget.worst_violation)],
    ];
    let results = json!({
        "block_chain": { "report": refute, "evidence": evidence },
        "l1_control": { "report": control, "evidence": control_ev },
        "budget_gauge": budget,
    });
    Ok(Report { passed: ok, lines, csv: csv_table(stamp, "demo,passed,value", &rows), results })
}
