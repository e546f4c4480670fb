//! The distributed SELECT workload.
//!
//! SELECT over `L` index values is split into `M` sub-circuits of `L / M`
//! iterations that share the `N` Pauli target qubits, on which at most `P`
//! controlled Pauli operations run at once. Each iteration consumes one CCZ
//! state from one of the factories.
//!
//! The DAG is scheduled once assuming every distillation takes exactly `D`
//! cycles. Executions then replay the schedule with sampled distillation
//! times and propagate the resulting delays.

mod dag;
mod execute;
mod schedule;

pub use dag::{build_dag, Dag, OperationKind, OperationNode};
pub use execute::{execute, execute_injected, magic_prep_outcome, Execution, Injection};
pub use schedule::{assign_round, schedule, RoundAssignment, RoundBook, Schedule};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic;
use crate::distillation::{
    choose_pool_distance, pool_overhead_qubits, CompletionDistribution, FACTORY_QUBITS, MAGIC_STATE_BUDGET, MSD_ERROR,
};
use crate::error::invalid;
use crate::{seed, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistSelectParams {
    pub d: u64,
    /// Pool code distance; chosen from the error budget when absent.
    #[serde(default)]
    pub d_pool: Option<u64>,
    pub num_factories: u32,
    #[serde(rename = "M")]
    pub m: u32,
    #[serde(rename = "P")]
    pub p: u32,
    #[serde(rename = "N")]
    pub n: u64,
    #[serde(rename = "L")]
    pub l: u64,
    #[serde(rename = "D")]
    pub distillation_period: u64,
    pub p_phys: f64,
    pub pool_entries: u32,
    /// Cycles between consecutive rounds of one factory in the schedule.
    pub consumption_period: u64,
    /// Duration of the clifford block; `2d` when absent.
    #[serde(default)]
    pub clifford_cycles: Option<u64>,
    /// Duration of the measurement step; `d` when absent.
    #[serde(default)]
    pub measurement_cycles: Option<u64>,
}

impl DistSelectParams {
    /// A small instance with `d = 27` and `D = 60`; `cp = D`, no pool.
    pub fn desk(num_factories: u32) -> Self {
        DistSelectParams {
            d: 27,
            d_pool: None,
            num_factories,
            m: 16,
            p: 8,
            n: 1 << 8,
            l: 1 << 16,
            distillation_period: 60,
            p_phys: 1e-3,
            pool_entries: 0,
            consumption_period: 60,
            clifford_cycles: None,
            measurement_cycles: None,
        }
    }

    pub fn clifford_cycles(&self) -> u64 {
        self.clifford_cycles.unwrap_or(2 * self.d)
    }

    pub fn measurement_cycles(&self) -> u64 {
        self.measurement_cycles.unwrap_or(self.d)
    }

    pub fn validate(&self) -> Result<()> {
        if self.d == 0 {
            return Err(invalid("code distance must be at least 1"));
        }
        if !self.m.is_power_of_two() || !self.l.is_power_of_two() || u64::from(self.m) >= self.l {
            return Err(invalid(format!(
                "M and L must be powers of two with M < L, got M={} L={}",
                self.m, self.l
            )));
        }
        if self.p == 0 || self.num_factories == 0 || self.n == 0 {
            return Err(invalid("P, N and num_factories must be at least 1"));
        }
        if self.distillation_period == 0 {
            return Err(invalid("D must be at least 1"));
        }
        if self.consumption_period < self.distillation_period {
            return Err(invalid(format!(
                "consumption_period {} is shorter than D = {}",
                self.consumption_period, self.distillation_period
            )));
        }
        if self.pool_entries > 2 {
            return Err(invalid(format!(
                "pool_entries must be 0, 1 or 2, got {}",
                self.pool_entries
            )));
        }
        if self.clifford_cycles == Some(0) || self.measurement_cycles == Some(0) {
            return Err(invalid("operation durations must be at least 1"));
        }
        if !(self.p_phys > 0.0 && self.p_phys < 0.01) {
            return Err(invalid(format!("p_phys must be in (0, 0.01), got {}", self.p_phys)));
        }
        Ok(())
    }

    /// Pool distance: the configured one, or the smallest meeting the error
    /// budget for `L` states held up to `3 (E + d)` cycles, where `E` is the
    /// expected distillation time.
    pub fn resolve_d_pool(&self, expected_cycles: f64) -> Result<u64> {
        match self.d_pool {
            Some(d) => Ok(d),
            None => choose_pool_distance(
                self.l,
                expected_cycles,
                self.d,
                self.p_phys,
                MAGIC_STATE_BUDGET,
                MSD_ERROR,
            ),
        }
    }

    pub fn spatial_qubits(&self, d_pool: u64) -> u64 {
        u64::from(self.num_factories) * (FACTORY_QUBITS + pool_overhead_qubits(u64::from(self.pool_entries), d_pool))
    }
}

/// Logical qubits outside the factories: four per Pauli target qubit and
/// two for each of the `2 M log2(L / M)` index and ancilla qubits.
pub fn logical_qubit_estimate(n: u64, m: u64, l: u64) -> Result<u64> {
    if m == 0 || !m.is_power_of_two() || !l.is_power_of_two() || l <= m {
        return Err(invalid("M and L must be powers of two with M < L"));
    }
    Ok(4 * n + 4 * m * u64::from((l / m).trailing_zeros()))
}

#[derive(Clone, Debug, PartialEq)]
pub struct DistSelectRun {
    pub scheduled: u64,
    pub trials: u64,
    pub mean_total: f64,
    pub mean_delay: f64,
    pub rel_delay: f64,
    /// Distillation period of the failure-free schedule as slow as the mean total.
    pub effective_cost: f64,
    pub rel_cost_increase: f64,
    pub d_pool: u64,
    pub spatial_qubits: u64,
}

// The effective-cost search stops at this multiple of D.
const EFFECTIVE_COST_CAP: u64 = 100;

/// Scheduled cost with distillation period `period`; the cadence keeps
/// up with slower factories.
pub fn scheduled_cost_at(dag: &Dag, params: &DistSelectParams, period: u64) -> u64 {
    let p = DistSelectParams {
        distillation_period: period,
        consumption_period: params.consumption_period.max(period),
        ..params.clone()
    };
    schedule(dag, &p).scheduled_cost
}

/// Schedules once and executes `trials` times with independent factory
/// streams. Trials run in parallel and are reduced in index order.
pub fn run_dist_select(
    params: &DistSelectParams,
    dist: &CompletionDistribution,
    trials: u64,
    seed: u64,
) -> Result<DistSelectRun> {
    params.validate()?;
    if trials == 0 {
        return Err(invalid("trial count must be at least 1"));
    }
    let period = params.distillation_period;
    let d_pool = params.resolve_d_pool(period as f64 + dist.mean_extra)?;
    let params = DistSelectParams {
        d_pool: Some(d_pool),
        ..params.clone()
    };
    let dag = build_dag(&params);
    let sched = schedule(&dag, &params);
    sched.validate(&dag, &params)?;
    let order = sched.execution_order();

    let trial_seed = seed::mix(seed, seed::TRIAL_STREAM);
    let totals: Vec<u64> = (0..trials)
        .into_par_iter()
        .map(|t| execute::run(&dag, &sched, &order, &params, dist, seed::mix(trial_seed, t), None).total)
        .collect();
    let s = sched.scheduled_cost;
    let sum_total: u128 = totals.iter().map(|&t| u128::from(t)).sum();
    let sum_delay = sum_total - u128::from(s) * u128::from(trials);
    let n = trials as f64;
    let mean_delay = sum_delay as f64 / n;
    let rel_delay = analytic::relative_runtime_delay(sum_delay as f64, s as f64 * n)?;

    let target = s as f64 + mean_delay;
    let samples = analytic::bracket_within(target, (EFFECTIVE_COST_CAP - 1) * period, |step| {
        scheduled_cost_at(&dag, &params, period + step) as f64
    });
    let curve: Vec<(f64, f64)> = samples.iter().map(|&(step, c)| ((period + step) as f64, c)).collect();
    let effective_cost = analytic::effective_distillation_cost(&curve, period as f64, mean_delay)?;

    Ok(DistSelectRun {
        scheduled: s,
        trials,
        mean_total: sum_total as f64 / n,
        mean_delay,
        rel_delay,
        effective_cost,
        rel_cost_increase: analytic::relative_distillation_cost_increase(effective_cost, period as f64)?,
        d_pool,
        spatial_qubits: params.spatial_qubits(d_pool),
    })
}
