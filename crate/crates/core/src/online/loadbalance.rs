use serde::{Deserialize, Serialize};

use super::trace::RunTrace;
use crate::error::{Error, Result};
use crate::norm::NormDescriptor;
use crate::vector::check_coords;

/// Enumeration budget of [`brute_opt_loadbalance`].
pub const BRUTE_FORCE_LIMIT: u64 = 10_000_000;

/// Jobs × machines size matrix; `sizes[t][i]` is the load job t adds to machine i.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoadBalanceInstance {
    pub sizes: Vec<Vec<f64>>,
    pub objective: NormDescriptor,
}

impl LoadBalanceInstance {
    pub fn new(sizes: Vec<Vec<f64>>, objective: NormDescriptor) -> Result<Self> {
        let n = objective.dim();
        for row in &sizes {
            if row.len() != n {
                return Err(Error::DimensionMismatch { expected: n, got: row.len() });
            }
            check_coords(row)?;
        }
        Ok(Self { sizes, objective })
    }

    pub fn jobs(&self) -> usize {
        self.sizes.len()
    }

    pub fn machines(&self) -> usize {
        self.objective.dim()
    }

    /// Objective value of an assignment (machine index per job).
    pub fn cost(&self, assignment: &[usize]) -> f64 {
        let mut load = vec![0.0; self.machines()];
        for (row, &i) in self.sizes.iter().zip(assignment) {
            load[i] += row[i];
        }
        self.objective.value(&load)
    }
}

/// Assigns each job to the machine whose load increase raises the norm least;
/// ties go to the lowest index. Each step records the one-hot machine choice.
pub fn greedy_loadbalance(inst: &LoadBalanceInstance) -> RunTrace {
    let n = inst.machines();
    let mut load = vec![0.0; n];
    let mut trace = RunTrace::new("greedy_loadbalance", 0);
    for row in &inst.sizes {
        let mut best = (f64::INFINITY, 0);
        for i in 0..n {
            let before = load[i];
            load[i] += row[i];
            let v = inst.objective.value(&load);
            load[i] = before;
            if v < best.0 {
                best = (v, i);
            }
        }
        let i = best.1;
        load[i] += row[i];
        let mut decision = vec![0.0; n];
        decision[i] = 1.0;
        trace.push(decision, inst.objective.value(&load), true, trace.steps.len() as f64 + 1.0);
    }
    trace.final_objective = inst.objective.value(&load);
    trace
}

/// Machine chosen at each step of a greedy trace.
pub fn assignment_of(trace: &RunTrace) -> Vec<usize> {
    trace
        .steps
        .iter()
        .map(|s| s.decision.iter().position(|&d| d > 0.0).unwrap_or(0))
        .collect()
}

/// Exact hindsight optimum over all n^T assignments.
pub fn brute_opt_loadbalance(inst: &LoadBalanceInstance) -> Result<f64> {
    let (t_len, n) = (inst.jobs(), inst.machines());
    let total = (n as u64).checked_pow(t_len as u32).filter(|&c| c <= BRUTE_FORCE_LIMIT);
    if total.is_none() {
        return Err(Error::BudgetExceeded(format!("{n}^{t_len} assignments exceed {BRUTE_FORCE_LIMIT}")));
    }
    let mut digits = vec![0usize; t_len];
    let mut best = inst.cost(&digits);
    // Odometer over assignments.
    'outer: loop {
        let mut pos = 0;
        loop {
            if pos == t_len {
                break 'outer;
            }
            digits[pos] += 1;
            if digits[pos] < n {
                break;
            }
            digits[pos] = 0;
            pos += 1;
        }
        best = best.min(inst.cost(&digits));
    }
    Ok(best)
}

/// Competitive bound 1/(2^{1/p} − 1) for greedy under a p-supermodular objective.
pub fn greedy_bound(p: f64) -> f64 {
    1.0 / (2f64.powf(1.0 / p) - 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn l1_two_jobs() {
        let inst = LoadBalanceInstance::new(vec![vec![1.0, 2.0], vec![3.0, 1.0]], NormDescriptor::lp(2, 1.0).unwrap()).unwrap();
        let t = greedy_loadbalance(&inst);
        assert_eq!(assignment_of(&t), vec![0, 1]);
        assert_eq!(t.final_objective, 2.0);
        assert_eq!(brute_opt_loadbalance(&inst).unwrap(), 2.0);
    }

    #[test]
    fn unit_jobs_l2() {
        let inst = LoadBalanceInstance::new(vec![vec![1.0, 1.0]; 3], NormDescriptor::lp(2, 2.0).unwrap()).unwrap();
        let t = greedy_loadbalance(&inst);
        assert_eq!(assignment_of(&t), vec![0, 1, 0]);
        assert!((t.final_objective - 5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn budget_guard() {
        let inst = LoadBalanceInstance::new(vec![vec![1.0; 4]; 12], NormDescriptor::lp(4, 2.0).unwrap()).unwrap();
        assert!(matches!(brute_opt_loadbalance(&inst), Err(Error::BudgetExceeded(_))));
    }
}
