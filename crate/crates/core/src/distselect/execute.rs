use super::dag::{Dag, OperationKind};
use super::schedule::{RoundAssignment, Schedule};
use super::DistSelectParams;
use crate::distillation::{CompletionDistribution, Pool, PooledFactory, ScheduledFactory};
use crate::seed;
use crate::Result;

/// Outcome of one execution.
#[derive(Clone, Debug, PartialEq)]
pub struct Execution {
    pub total: u64,
    /// Run-time delay R = total - S.
    pub runtime_delay: u64,
    pub completion: Vec<u64>,
    /// Delay of each node against the schedule once it completes.
    pub delay: Vec<u64>,
    /// Per factory, the cycle each request got its state, in service order.
    pub service: Vec<Vec<u64>>,
}

/// A one-off delay added to the Pauli target qubits when `after` completes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Injection {
    pub after: usize,
    pub delta: u64,
}

enum Factories {
    Scheduled(Vec<ScheduledFactory>),
    Pooled(Vec<PooledFactory>),
}

impl Factories {
    fn new(params: &DistSelectParams, dist: &CompletionDistribution, seed: u64) -> Self {
        let period = params.distillation_period;
        let seeds = (0..u64::from(params.num_factories)).map(|f| seed::mix(seed, f));
        if params.pool_entries == 0 {
            Factories::Scheduled(
                seeds
                    .map(|s| ScheduledFactory::new(dist, period, params.consumption_period, s))
                    .collect(),
            )
        } else {
            let d_pool = params.d_pool.unwrap_or(params.d);
            Factories::Pooled(
                seeds
                    .map(|s| PooledFactory::new(Pool::new(params.pool_entries as usize, d_pool), dist, period, s))
                    .collect(),
            )
        }
    }

    /// Cycle at which the state for a consumer `delay` cycles late reaches
    /// it, for a magic_prep scheduled at `c` with round start `c_d`.
    fn serve(&mut self, a: RoundAssignment, c_d: u64, c: u64, delay: u64, d: u64) -> u64 {
        match self {
            Factories::Scheduled(fs) => fs[a.factory as usize].serve(c_d, delay),
            Factories::Pooled(fs) => fs[a.factory as usize].request(c + delay + d),
        }
    }
}

/// Completion of a magic_prep scheduled at `c`, `delay` cycles late, whose
/// state arrives at `e`, and the new delay of its qubit.
pub fn magic_prep_outcome(c: u64, delay: u64, d: u64, e: u64) -> (u64, u64) {
    let done = (c + delay + d).max(e);
    (done, done - c - d)
}

/// Runs the schedule once with distillation times drawn from `dist`.
///
/// Nodes run in scheduled-clock order, which puts every node after its
/// ancestors and every factory's requests in round order. Each sub-circuit
/// is one delay resource and all Pauli target qubits together are another.
/// A node starts late by the largest delay among its ancestors and the
/// resources it touches, and passes its own delay on to them.
pub fn execute(
    dag: &Dag,
    schedule: &Schedule,
    params: &DistSelectParams,
    dist: &CompletionDistribution,
    seed: u64,
) -> Result<Execution> {
    execute_injected(dag, schedule, params, dist, seed, None)
}

pub fn execute_injected(
    dag: &Dag,
    schedule: &Schedule,
    params: &DistSelectParams,
    dist: &CompletionDistribution,
    seed: u64,
    injection: Option<Injection>,
) -> Result<Execution> {
    params.validate()?;
    schedule.validate(dag, params)?;
    Ok(run(
        dag,
        schedule,
        &schedule.execution_order(),
        params,
        dist,
        seed,
        injection,
    ))
}

pub(super) fn run(
    dag: &Dag,
    schedule: &Schedule,
    order: &[usize],
    params: &DistSelectParams,
    dist: &CompletionDistribution,
    seed: u64,
    injection: Option<Injection>,
) -> Execution {
    let mut factories = Factories::new(params, dist, seed);
    let mut sub_delay = vec![0u64; params.m as usize];
    let mut pauli_delay = 0u64;
    let mut out = Execution {
        total: 0,
        runtime_delay: 0,
        completion: vec![0; dag.len()],
        delay: vec![0; dag.len()],
        service: vec![Vec::new(); params.num_factories as usize],
    };

    for &id in order {
        let node = &dag.nodes[id];
        let c = schedule.clock[id];
        let sub = node.sub_circuit as usize;
        let pauli = node.kind == OperationKind::PauliOnTarget;
        let mut delay = node
            .ancestors
            .iter()
            .map(|&a| out.delay[a])
            .fold(sub_delay[sub], u64::max);
        if pauli {
            delay = delay.max(pauli_delay);
        }
        let (done, new_delay) = match schedule.rounds[id] {
            Some(a) => {
                let e = factories.serve(a, schedule.round_start(a), c, delay, node.duration);
                out.service[a.factory as usize].push(e);
                magic_prep_outcome(c, delay, node.duration, e)
            }
            None => (c + delay + node.duration, delay),
        };
        out.completion[id] = done;
        out.delay[id] = new_delay;
        sub_delay[sub] = sub_delay[sub].max(new_delay);
        if pauli {
            pauli_delay = pauli_delay.max(new_delay);
        }
        if let Some(inj) = injection.filter(|inj| inj.after == id) {
            pauli_delay += inj.delta;
        }
        out.total = out.total.max(done);
    }
    out.runtime_delay = out.total.saturating_sub(schedule.scheduled_cost);
    out
}
