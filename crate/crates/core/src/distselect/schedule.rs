use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashSet};

use serde::Serialize;

use super::dag::{Dag, OperationKind};
use super::DistSelectParams;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct RoundAssignment {
    pub factory: u32,
    pub round: u64,
}

/// Distillation rounds handed out so far. Round `r` of every factory starts
/// at `r * cadence` and completes `period` cycles later.
///
/// Each factory's rounds are handed out in increasing order, so a factory
/// always serves its requests in the order they were scheduled.
#[derive(Clone, Debug)]
pub struct RoundBook {
    d: u64,
    period: u64,
    cadence: u64,
    next_free: Vec<u64>,
}

impl RoundBook {
    pub fn new(factories: u32, d: u64, period: u64, cadence: u64) -> Self {
        assert!(factories > 0 && period > 0 && cadence >= period);
        RoundBook {
            d,
            period,
            cadence,
            next_free: vec![0; factories as usize],
        }
    }

    pub fn round_start(&self, round: u64) -> u64 {
        round * self.cadence
    }

    /// Best round of `factory` for a consumer ready at `c`, as
    /// `(round, blockage, slack)`.
    ///
    /// The latest round completing by `c + d` blocks nothing. If the
    /// factory has none left, its next free round blocks the consumer until
    /// it completes. Rounds starting before `c + d - 2D` are never taken.
    fn candidate(&self, factory: usize, c: u64) -> (u64, u64, u64) {
        let need = c + self.d;
        let window = need.saturating_sub(2 * self.period).div_ceil(self.cadence);
        let lower = self.next_free[factory].max(window);
        match need.checked_sub(self.period).map(|t| t / self.cadence) {
            Some(latest) if latest >= lower => (latest, 0, need - self.period - self.round_start(latest)),
            _ => (lower, self.round_start(lower) + self.period - need, 0),
        }
    }

    /// Assigns the round with the least consumer blockage over all
    /// factories; ties go to the round completing closest to `c + d`, then to
    /// the lowest factory id. Returns the assignment and the blockage.
    pub fn assign(&mut self, c: u64) -> (RoundAssignment, u64) {
        let (blockage, _, factory, round) = (0..self.next_free.len())
            .map(|f| {
                let (round, blockage, slack) = self.candidate(f, c);
                (blockage, slack, f, round)
            })
            .min()
            .expect("at least one factory");
        self.next_free[factory] = round + 1;
        (
            RoundAssignment {
                factory: factory as u32,
                round,
            },
            blockage,
        )
    }
}

pub fn assign_round(book: &mut RoundBook, c: u64) -> RoundAssignment {
    book.assign(c).0
}

#[derive(Clone, Debug, PartialEq)]
pub struct Schedule {
    /// Scheduled start cycle of every node.
    pub clock: Vec<u64>,
    pub rounds: Vec<Option<RoundAssignment>>,
    pub slots: Vec<Option<u32>>,
    /// Position of each node in scheduling order; breaks clock ties.
    pub sequence: Vec<usize>,
    pub cadence: u64,
    /// Scheduled time cost S.
    pub scheduled_cost: u64,
}

impl Schedule {
    pub fn round_start(&self, a: RoundAssignment) -> u64 {
        a.round * self.cadence
    }

    /// Nodes by scheduled clock, ties in scheduling order.
    pub fn execution_order(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.clock.len()).collect();
        order.sort_unstable_by_key(|&i| (self.clock[i], self.sequence[i]));
        order
    }

    /// Checks ancestor ordering, Pauli-slot capacity, round uniqueness and
    /// the round window, plus the bookkeeping execution relies on.
    pub fn validate(&self, dag: &Dag, params: &DistSelectParams) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidSchedule(msg));
        let n = dag.len();
        if self.clock.len() != n || self.rounds.len() != n || self.slots.len() != n || self.sequence.len() != n {
            return bad(format!("schedule covers {} nodes, DAG has {n}", self.clock.len()));
        }
        let mut cost = 0;
        for node in &dag.nodes {
            let c = self.clock[node.id];
            cost = cost.max(c + node.duration);
            for &a in &node.ancestors {
                if c < self.clock[a] + dag.nodes[a].duration {
                    return bad(format!("node {} starts at {c} before ancestor {a} finishes", node.id));
                }
            }
        }
        if cost != self.scheduled_cost {
            return bad(format!(
                "scheduled cost {} but nodes end at {cost}",
                self.scheduled_cost
            ));
        }

        let (d, period) = (params.d, params.distillation_period);
        let mut taken = HashSet::new();
        let mut last_round: Vec<Option<u64>> = vec![None; params.num_factories as usize];
        for id in self.execution_order() {
            let node = &dag.nodes[id];
            match (node.kind, self.rounds[id]) {
                (OperationKind::MagicPrep, Some(a)) => {
                    if a.factory >= params.num_factories {
                        return bad(format!(
                            "node {id} uses factory {} of {}",
                            a.factory, params.num_factories
                        ));
                    }
                    if !taken.insert(a) {
                        return bad(format!("round {} of factory {} assigned twice", a.round, a.factory));
                    }
                    let (c, c_d) = (self.clock[id], self.round_start(a));
                    if c_d + 2 * period < c + d {
                        return bad(format!(
                            "node {id} at {c} takes a round starting at {c_d}, more than 2D - d earlier"
                        ));
                    }
                    if c_d + period > c + d {
                        return bad(format!(
                            "node {id} at {c} finishes before its round completes at {}",
                            c_d + period
                        ));
                    }
                    let last = &mut last_round[a.factory as usize];
                    if last.is_some_and(|r| r >= a.round) {
                        return bad(format!(
                            "factory {} rounds are not used in order at node {id}",
                            a.factory
                        ));
                    }
                    *last = Some(a.round);
                }
                (OperationKind::MagicPrep, None) => return bad(format!("magic_prep node {id} has no round")),
                (_, Some(_)) => return bad(format!("node {id} is not a magic_prep but has a round")),
                _ => {}
            }
            match (node.kind, self.slots[id]) {
                (OperationKind::PauliOnTarget, Some(s)) if s < params.p => {}
                (OperationKind::PauliOnTarget, _) => return bad(format!("pauli node {id} has no valid slot")),
                (_, Some(_)) => return bad(format!("node {id} is not a pauli_on_target but has a slot")),
                _ => {}
            }
        }

        // Sweep over Pauli intervals [start, end); ends sort before starts.
        let mut events: Vec<(u64, bool)> = Vec::new();
        let mut per_slot: Vec<Vec<(u64, u64)>> = vec![Vec::new(); params.p as usize];
        for node in dag.nodes.iter().filter(|n| n.kind == OperationKind::PauliOnTarget) {
            let (s, e) = (self.clock[node.id], self.clock[node.id] + node.duration);
            events.push((s, true));
            events.push((e, false));
            per_slot[self.slots[node.id].unwrap_or_default() as usize].push((s, e));
        }
        events.sort_unstable();
        let mut running = 0u32;
        for (t, start) in events {
            if start {
                running += 1;
                if running > params.p {
                    return bad(format!(
                        "{running} Pauli operations overlap at cycle {t}, P = {}",
                        params.p
                    ));
                }
            } else {
                running -= 1;
            }
        }
        for (slot, mut spans) in per_slot.into_iter().enumerate() {
            spans.sort_unstable();
            if spans.windows(2).any(|w| w[1].0 < w[0].1) {
                return bad(format!("Pauli slot {slot} runs two operations at once"));
            }
        }
        Ok(())
    }
}

/// List scheduling in order of readiness, the earliest cycle at which all
/// ancestors are done; equal readiness goes to the lower node id.
///
/// A pauli_on_target node takes the slot that frees up first. A magic_prep
/// node gets a distillation round and starts late enough to finish no
/// earlier than that round. Every other node starts when ready.
pub fn schedule(dag: &Dag, params: &DistSelectParams) -> Schedule {
    let n = dag.len();
    let mut book = RoundBook::new(
        params.num_factories,
        params.d,
        params.distillation_period,
        params.consumption_period,
    );
    let mut slot_free = vec![0u64; params.p as usize];
    let mut pending: Vec<usize> = dag.nodes.iter().map(|node| node.ancestors.len()).collect();
    let mut ready = vec![0u64; n];
    let mut out = Schedule {
        clock: vec![0; n],
        rounds: vec![None; n],
        slots: vec![None; n],
        sequence: vec![0; n],
        cadence: params.consumption_period,
        scheduled_cost: 0,
    };

    let mut heap: BinaryHeap<Reverse<(u64, usize)>> =
        (0..n).filter(|&i| pending[i] == 0).map(|i| Reverse((0, i))).collect();
    let mut seq = 0;
    while let Some(Reverse((at, id))) = heap.pop() {
        let node = &dag.nodes[id];
        let clock = match node.kind {
            OperationKind::PauliOnTarget => {
                let (start, slot) = (0..slot_free.len())
                    .map(|s| (at.max(slot_free[s]), s))
                    .min()
                    .expect("P >= 1");
                slot_free[slot] = start + node.duration;
                out.slots[id] = Some(slot as u32);
                start
            }
            OperationKind::MagicPrep => {
                let (assignment, blockage) = book.assign(at);
                out.rounds[id] = Some(assignment);
                at + blockage
            }
            _ => at,
        };
        out.clock[id] = clock;
        out.sequence[id] = seq;
        seq += 1;
        let end = clock + node.duration;
        out.scheduled_cost = out.scheduled_cost.max(end);
        for &child in dag.descendants(id) {
            ready[child] = ready[child].max(end);
            pending[child] -= 1;
            if pending[child] == 0 {
                heap.push(Reverse((ready[child], child)));
            }
        }
    }
    debug_assert_eq!(seq, n, "DAG has a cycle");
    out
}
