//! Layered random circuits on a `W x H` plane of logical qubits.
//!
//! Each layer applies a random single-qubit gate (S, H or T) to every qubit
//! and then a maximal set of two-qubit couplings: every qubit takes part in
//! at most one coupling and no coupling spans more than the coupling
//! distance in L1 norm. Couplings whose segments cross are routed through
//! the same region of the plane; they form a coupling group and finish
//! together.
//!
//! T gates wait for a magic state. Each distillation attempt takes `3d`
//! cycles and fails with probability `p_fail`; the teleportation takes `d`
//! more. The scheduled cost of a circuit is its failure-free run, in which
//! every T gate costs `4d`.

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{self, sample_failures};
use crate::error::invalid;
use crate::{seed, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomCircuitParams {
    /// Code distance; every operation cost is a multiple of it.
    pub d: u64,
    pub width: u32,
    pub height: u32,
    pub layers: u32,
    /// Largest L1 distance a coupling may span.
    pub coupling_distance: u32,
    pub p_fail: f64,
    pub seed: u64,
}

impl Default for RandomCircuitParams {
    fn default() -> Self {
        RandomCircuitParams {
            d: 1,
            width: 16,
            height: 16,
            layers: 20,
            coupling_distance: 2,
            p_fail: 0.01,
            seed: 0,
        }
    }
}

impl RandomCircuitParams {
    pub fn validate(&self) -> Result<()> {
        if self.d == 0 {
            return Err(invalid("code distance must be at least 1"));
        }
        if self.width == 0 || self.height == 0 || self.layers == 0 {
            return Err(invalid("plane width, height and layer count must be at least 1"));
        }
        if self.coupling_distance == 0 {
            return Err(invalid("coupling distance must be at least 1"));
        }
        if !(0.0..1.0).contains(&self.p_fail) {
            return Err(invalid(format!(
                "distillation failure probability must be in [0, 1), got {}",
                self.p_fail
            )));
        }
        Ok(())
    }

    fn qubit_count(&self) -> usize {
        self.width as usize * self.height as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Qubit {
    pub x: u32,
    pub y: u32,
}

impl Qubit {
    pub fn new(x: u32, y: u32) -> Self {
        Qubit { x, y }
    }

    pub fn l1_distance(self, other: Qubit) -> u32 {
        self.x.abs_diff(other.x) + self.y.abs_diff(other.y)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Gate {
    S,
    H,
    T,
}

const GATES: [Gate; 3] = [Gate::S, Gate::H, Gate::T];

/// An unordered pair of qubits; stored with the row-major smaller one first.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Coupling {
    pub a: Qubit,
    pub b: Qubit,
}

impl Coupling {
    pub fn new(a: Qubit, b: Qubit) -> Self {
        if (a.y, a.x) <= (b.y, b.x) {
            Coupling { a, b }
        } else {
            Coupling { a: b, b: a }
        }
    }

    fn bbox(&self) -> (u32, u32, u32, u32) {
        (
            self.a.x.min(self.b.x),
            self.a.x.max(self.b.x),
            self.a.y.min(self.b.y),
            self.a.y.max(self.b.y),
        )
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Layer {
    pub width: u32,
    /// One gate per qubit, row-major.
    pub single_gates: Vec<Gate>,
    pub couplings: Vec<Coupling>,
}

impl Layer {
    pub fn gate(&self, q: Qubit) -> Gate {
        self.single_gates[(q.y * self.width + q.x) as usize]
    }

    /// Checks the layer invariants and that the coupling set is maximal.
    pub fn check(&self, height: u32, coupling_distance: u32) -> std::result::Result<(), String> {
        let n = (self.width * height) as usize;
        if self.single_gates.len() != n {
            return Err(format!("{} gates for {} qubits", self.single_gates.len(), n));
        }
        let mut used = vec![false; n];
        for c in &self.couplings {
            if c.a == c.b {
                return Err(format!("coupling {c:?} has identical endpoints"));
            }
            if c.a.l1_distance(c.b) > coupling_distance {
                return Err(format!("coupling {c:?} exceeds the coupling distance"));
            }
            for q in [c.a, c.b] {
                if q.x >= self.width || q.y >= height {
                    return Err(format!("coupling {c:?} leaves the plane"));
                }
                let i = (q.y * self.width + q.x) as usize;
                if std::mem::replace(&mut used[i], true) {
                    return Err(format!("qubit {q:?} is in two couplings"));
                }
            }
        }
        for i in 0..n {
            for j in i + 1..n {
                let (qi, qj) = (index_qubit(i, self.width), index_qubit(j, self.width));
                if !used[i] && !used[j] && qi.l1_distance(qj) <= coupling_distance {
                    return Err(format!("couplings are not maximal: {qi:?}-{qj:?} is free"));
                }
            }
        }
        Ok(())
    }
}

fn index_qubit(i: usize, width: u32) -> Qubit {
    Qubit::new(i as u32 % width, i as u32 / width)
}

#[derive(Clone, Debug, PartialEq)]
pub struct CouplingGroup {
    pub members: Vec<Coupling>,
}

/// A generated circuit with its coupling groups precomputed.
#[derive(Clone, Debug)]
pub struct Circuit {
    pub width: u32,
    pub height: u32,
    pub layers: Vec<Layer>,
    pub groups: Vec<Vec<CouplingGroup>>,
}

impl Circuit {
    pub fn generate(params: &RandomCircuitParams) -> Result<Self> {
        let layers = generate_circuit(params)?;
        let groups = layers.iter().map(coupling_groups).collect();
        Ok(Circuit {
            width: params.width,
            height: params.height,
            layers,
            groups,
        })
    }

    pub fn t_count(&self) -> usize {
        self.layers
            .iter()
            .map(|l| l.single_gates.iter().filter(|&&g| g == Gate::T).count())
            .sum()
    }
}

/// Generates `params.layers` random layers.
///
/// Gates are drawn per qubit in row-major order. Couplings are then built
/// greedily: qubits are visited in a uniformly shuffled order, and each
/// still-unmatched qubit is paired with a uniformly chosen unmatched qubit
/// within the coupling distance, candidates taken in row-major order. A
/// qubit left unmatched when visited has no free partner, and matching
/// others never frees one, so the result is maximal.
pub fn generate_circuit(params: &RandomCircuitParams) -> Result<Vec<Layer>> {
    params.validate()?;
    let mut rng = seed::rng(seed::mix(params.seed, seed::STRUCTURE_STREAM));
    let mut matcher = Matcher::new(params.width, params.height, params.coupling_distance);
    Ok((0..params.layers)
        .map(|_| {
            let single_gates = (0..params.qubit_count()).map(|_| GATES[rng.gen_range(0..3)]).collect();
            let couplings = matcher.random_maximal(&mut rng);
            Layer {
                width: params.width,
                single_gates,
                couplings,
            }
        })
        .collect())
}

struct Matcher {
    width: u32,
    height: u32,
    distance: u32,
    // Unmatched qubits as an unordered set: `slot[q]` is q's index in `free`.
    free: Vec<usize>,
    slot: Vec<Option<usize>>,
    candidates: Vec<usize>,
}

impl Matcher {
    fn new(width: u32, height: u32, distance: u32) -> Self {
        Matcher {
            width,
            height,
            distance,
            free: Vec::new(),
            slot: Vec::new(),
            candidates: Vec::new(),
        }
    }

    fn take(&mut self, q: usize) {
        let s = self.slot[q].take().expect("qubit already matched");
        self.free.swap_remove(s);
        if let Some(&moved) = self.free.get(s) {
            self.slot[moved] = Some(s);
        }
    }

    fn random_maximal<R: Rng>(&mut self, rng: &mut R) -> Vec<Coupling> {
        let n = (self.width * self.height) as usize;
        self.free = (0..n).collect();
        self.slot = (0..n).map(Some).collect();
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(rng);

        let mut couplings = Vec::new();
        for q in order {
            if self.slot[q].is_none() {
                continue;
            }
            self.collect_candidates(q);
            if self.candidates.is_empty() {
                continue;
            }
            let partner = self.candidates[rng.gen_range(0..self.candidates.len())];
            self.take(q);
            self.take(partner);
            couplings.push(Coupling::new(
                index_qubit(q, self.width),
                index_qubit(partner, self.width),
            ));
        }
        couplings
    }

    /// Unmatched qubits within the coupling distance of `q`, ascending.
    fn collect_candidates(&mut self, q: usize) {
        self.candidates.clear();
        let origin = index_qubit(q, self.width);
        let dist = self.distance as i64;
        let (x0, y0) = (origin.x as i64, origin.y as i64);
        let y_lo = (y0 - dist).max(0);
        let y_hi = (y0 + dist).min(self.height as i64 - 1);
        let window: i64 = (y_lo..=y_hi)
            .map(|y| {
                let r = dist - (y - y0).abs();
                (x0 + r).min(self.width as i64 - 1) - (x0 - r).max(0) + 1
            })
            .sum();

        if window as usize > self.free.len() {
            let free = &self.free;
            self.candidates.extend(
                free.iter()
                    .copied()
                    .filter(|&c| c != q && index_qubit(c, self.width).l1_distance(origin) <= self.distance),
            );
            self.candidates.sort_unstable();
        } else {
            for y in y_lo..=y_hi {
                let r = dist - (y - y0).abs();
                for x in (x0 - r).max(0)..=(x0 + r).min(self.width as i64 - 1) {
                    let c = (y * self.width as i64 + x) as usize;
                    if c != q && self.slot[c].is_some() {
                        self.candidates.push(c);
                    }
                }
            }
        }
    }
}

fn orientation(p: Qubit, q: Qubit, r: Qubit) -> i64 {
    let (px, py) = (p.x as i64, p.y as i64);
    (q.x as i64 - px) * (r.y as i64 - py) - (q.y as i64 - py) * (r.x as i64 - px)
}

fn on_segment(p: Qubit, q: Qubit, r: Qubit) -> bool {
    // r is collinear with p-q; is it within the bounding box?
    r.x >= p.x.min(q.x) && r.x <= p.x.max(q.x) && r.y >= p.y.min(q.y) && r.y <= p.y.max(q.y)
}

/// Closed-segment intersection between two couplings drawn as straight lines
/// between qubit centres. Touching and collinear overlap both count.
pub fn segments_intersect(s: &Coupling, t: &Coupling) -> bool {
    let (p1, p2, p3, p4) = (s.a, s.b, t.a, t.b);
    let d1 = orientation(p3, p4, p1);
    let d2 = orientation(p3, p4, p2);
    let d3 = orientation(p1, p2, p3);
    let d4 = orientation(p1, p2, p4);
    if ((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0)) {
        return true;
    }
    (d1 == 0 && on_segment(p3, p4, p1))
        || (d2 == 0 && on_segment(p3, p4, p2))
        || (d3 == 0 && on_segment(p1, p2, p3))
        || (d4 == 0 && on_segment(p1, p2, p4))
}

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

/// Connected components of the intersection graph of a layer's couplings.
/// Groups are ordered by their first coupling; members keep layer order.
pub fn coupling_groups(layer: &Layer) -> Vec<CouplingGroup> {
    let cs = &layer.couplings;
    let mut parent: Vec<usize> = (0..cs.len()).collect();

    // Sweep over x: only couplings whose x-extents overlap can intersect.
    let boxes: Vec<_> = cs.iter().map(Coupling::bbox).collect();
    let mut by_x: Vec<usize> = (0..cs.len()).collect();
    by_x.sort_by_key(|&i| boxes[i].0);
    for (k, &i) in by_x.iter().enumerate() {
        for &j in &by_x[k + 1..] {
            if boxes[j].0 > boxes[i].1 {
                break;
            }
            let y_overlap = boxes[i].2 <= boxes[j].3 && boxes[j].2 <= boxes[i].3;
            if y_overlap && segments_intersect(&cs[i], &cs[j]) {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri.max(rj)] = ri.min(rj);
                }
            }
        }
    }

    let mut group_of_root = vec![usize::MAX; cs.len()];
    let mut groups: Vec<CouplingGroup> = Vec::new();
    for (i, c) in cs.iter().enumerate() {
        let r = find(&mut parent, i);
        if group_of_root[r] == usize::MAX {
            group_of_root[r] = groups.len();
            groups.push(CouplingGroup { members: Vec::new() });
        }
        groups[group_of_root[r]].members.push(*c);
    }
    groups
}

/// One T gate: `3d` per distillation attempt, failures drawn from a
/// geometric law with success probability `1 - p_fail`, plus `d` for the
/// teleportation.
pub fn sample_t_cost<R: Rng + ?Sized>(p_fail: f64, d: u64, rng: &mut R) -> u64 {
    3 * d * sample_failures(p_fail, rng) + 4 * d
}

#[derive(Clone, Copy, Debug)]
struct CostTable {
    h: u64,
    s: u64,
    coupling: u64,
}

/// Elapsed cycles per qubit.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ElapsedMap {
    width: u32,
    elapsed: Vec<u64>,
}

impl ElapsedMap {
    pub fn get(&self, q: Qubit) -> u64 {
        self.elapsed[(q.y * self.width + q.x) as usize]
    }

    pub fn total(&self) -> u64 {
        self.elapsed.iter().copied().max().unwrap_or(0)
    }

    pub fn values(&self) -> &[u64] {
        &self.elapsed
    }
}

fn run_elapsed(circuit: &Circuit, costs: CostTable, mut t_cost: impl FnMut() -> u64) -> ElapsedMap {
    let width = circuit.width;
    let mut elapsed = vec![0u64; (circuit.width * circuit.height) as usize];
    let at = |q: Qubit| (q.y * width + q.x) as usize;
    for (layer, groups) in circuit.layers.iter().zip(&circuit.groups) {
        for (e, gate) in elapsed.iter_mut().zip(&layer.single_gates) {
            *e += match gate {
                Gate::H => costs.h,
                Gate::S => costs.s,
                Gate::T => t_cost(),
            };
        }
        for group in groups {
            let m = group
                .members
                .iter()
                .map(|c| elapsed[at(c.a)].max(elapsed[at(c.b)]))
                .max()
                .unwrap_or(0);
            for c in &group.members {
                elapsed[at(c.a)] = m + costs.coupling;
                elapsed[at(c.b)] = m + costs.coupling;
            }
        }
    }
    ElapsedMap { width, elapsed }
}

fn cycle_costs(d: u64) -> CostTable {
    CostTable {
        h: 3 * d,
        s: 2 * d,
        coupling: 2 * d,
    }
}

/// Failure-free run: every T gate costs `4d`.
pub fn scheduled_run(circuit: &Circuit, d: u64) -> ElapsedMap {
    run_elapsed(circuit, cycle_costs(d), || 4 * d)
}

/// Run with T costs drawn from `rng` in layer order, row-major within a layer.
pub fn stochastic_run<R: Rng>(circuit: &Circuit, d: u64, p_fail: f64, rng: &mut R) -> ElapsedMap {
    run_elapsed(circuit, cycle_costs(d), || sample_t_cost(p_fail, d, rng))
}

fn trial_rng(seed: u64, trial: u64) -> rand_chacha::ChaCha8Rng {
    seed::rng(seed::mix(seed::mix(seed, seed::TRIAL_STREAM), trial))
}

#[derive(Clone, Debug)]
pub struct RandomCircuitRun {
    pub scheduled: u64,
    pub total: u64,
    pub elapsed: ElapsedMap,
}

/// Generates the circuit for `params.seed` and runs it once failure-free and
/// once with sampled T costs (trial 0 of the cost stream).
pub fn simulate_random_circuit(params: &RandomCircuitParams) -> Result<RandomCircuitRun> {
    let circuit = Circuit::generate(params)?;
    let scheduled = scheduled_run(&circuit, params.d).total();
    let elapsed = stochastic_run(&circuit, params.d, params.p_fail, &mut trial_rng(params.seed, 0));
    Ok(RandomCircuitRun {
        scheduled,
        total: elapsed.total(),
        elapsed,
    })
}

/// Resolution of the effective-cost search: candidates are spaced `D / 100`.
pub const EFFECTIVE_COST_STEPS: u64 = 100;
// Search cap: the effective cost is reported as at most 101 D.
const EFFECTIVE_COST_MAX_STEP: u64 = 100 * EFFECTIVE_COST_STEPS;

#[derive(Clone, Debug, PartialEq)]
pub struct RandomCircuitMetrics {
    pub coupling_distance: u32,
    pub p_fail: f64,
    pub trials: u64,
    pub seed: u64,
    pub scheduled: u64,
    pub mean_total: f64,
    pub mean_delay: f64,
    pub rel_delay: f64,
    /// Distillation cycles (`D = 3d`) of the failure-free protocol matching the mean total.
    pub effective_cost: f64,
    pub rel_cost_increase: f64,
}

/// Runs `trials` independent T-cost streams over the circuit of
/// `params.seed` and reports the delay metrics.
///
/// The effective distillation cost is found by re-running the circuit
/// failure-free with every distillation costing `E` instead of `3d`, for `E`
/// on a grid of `3d / EFFECTIVE_COST_STEPS`. The scheduled cost is
/// non-decreasing in `E`, so the largest grid point that does not exceed the
/// observed mean total is located by bisection. Probe runs work in units of
/// `d / EFFECTIVE_COST_STEPS`, which makes every relative metric exactly
/// independent of `d`.
pub fn random_circuit_metrics(params: &RandomCircuitParams, trials: u64) -> Result<RandomCircuitMetrics> {
    if trials == 0 {
        return Err(invalid("trial count must be at least 1"));
    }
    let circuit = Circuit::generate(params)?;
    let d = params.d;
    let scheduled = scheduled_run(&circuit, d).total();

    let totals: Vec<u64> = (0..trials)
        .into_par_iter()
        .map(|t| stochastic_run(&circuit, d, params.p_fail, &mut trial_rng(params.seed, t)).total())
        .collect();
    let sum_total: u128 = totals.iter().map(|&t| u128::from(t)).sum();
    let sum_delay = sum_total - u128::from(scheduled) * u128::from(trials);

    let n = trials as f64;
    let rel_delay = analytic::relative_runtime_delay(sum_delay as f64, scheduled as f64 * n)?;

    let g = EFFECTIVE_COST_STEPS;
    let probe = |step: u64| -> u64 {
        let ticks = CostTable {
            h: 3 * g,
            s: 2 * g,
            coupling: 2 * g,
        };
        // E = 3d (g + step) / g and the teleportation d, in ticks of d / g.
        run_elapsed(&circuit, ticks, || 3 * (g + step) + g).total()
    };
    // Scheduled cost and delay in ticks; both quotients are exact up to one
    // rounding of an integer ratio that does not depend on d.
    let base = probe(0) as f64;
    let delay_ticks = (u128::from(g) * sum_delay) as f64 / (n * d as f64);
    let target = base + delay_ticks;

    let samples = if circuit.t_count() == 0 {
        vec![(0u64, base)]
    } else {
        analytic::bracket_within(target, EFFECTIVE_COST_MAX_STEP, |s| probe(s) as f64)
    };
    let curve: Vec<(f64, f64)> = samples
        .iter()
        .map(|&(step, cost)| (3.0 * (g + step) as f64 / g as f64, cost))
        .collect();
    let e_units = analytic::effective_distillation_cost(&curve, 3.0, delay_ticks)?;
    let rel_cost_increase = analytic::relative_distillation_cost_increase(e_units, 3.0)?;

    Ok(RandomCircuitMetrics {
        coupling_distance: params.coupling_distance,
        p_fail: params.p_fail,
        trials,
        seed: params.seed,
        scheduled,
        mean_total: sum_total as f64 / n,
        mean_delay: sum_delay as f64 / n,
        rel_delay,
        effective_cost: e_units * d as f64,
        rel_cost_increase,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(w: u32, h: u32, dc: u32) -> RandomCircuitParams {
        RandomCircuitParams {
            d: 1,
            width: w,
            height: h,
            layers: 5,
            coupling_distance: dc,
            p_fail: 0.0,
            seed: 42,
        }
    }

    fn q(x: u32, y: u32) -> Qubit {
        Qubit::new(x, y)
    }

    fn circuit_from(width: u32, height: u32, layers: Vec<Layer>) -> Circuit {
        let groups = layers.iter().map(coupling_groups).collect();
        Circuit {
            width,
            height,
            layers,
            groups,
        }
    }

    #[test]
    fn test_single_qubit_plane_has_no_couplings() {
        let layers = generate_circuit(&params(1, 1, 3)).unwrap();
        assert_eq!(layers.len(), 5);
        for l in &layers {
            assert_eq!(l.single_gates.len(), 1);
            assert!(l.couplings.is_empty());
        }
    }

    #[test]
    fn test_two_qubit_line_is_always_coupled() {
        for l in generate_circuit(&params(2, 1, 1)).unwrap() {
            assert_eq!(l.couplings, vec![Coupling::new(q(0, 0), q(1, 0))]);
        }
    }

    #[test]
    fn test_generated_layers_are_valid_and_maximal() {
        for (w, h, dc) in [(4, 4, 2), (6, 5, 1), (6, 6, 12), (3, 6, 3)] {
            for l in generate_circuit(&params(w, h, dc)).unwrap() {
                l.check(h, dc).unwrap();
            }
        }
    }

    #[test]
    fn test_generation_is_deterministic() {
        let p = params(8, 8, 3);
        assert_eq!(generate_circuit(&p).unwrap(), generate_circuit(&p).unwrap());
        let other = RandomCircuitParams { seed: 43, ..p.clone() };
        assert_ne!(generate_circuit(&p).unwrap(), generate_circuit(&other).unwrap());
    }

    #[test]
    fn test_segments_intersect_basic() {
        let s = |a: Qubit, b: Qubit| Coupling::new(a, b);
        assert!(segments_intersect(&s(q(0, 0), q(1, 1)), &s(q(1, 0), q(0, 1))));
        assert!(!segments_intersect(&s(q(0, 0), q(1, 0)), &s(q(0, 1), q(1, 1))));
        assert!(segments_intersect(&s(q(0, 0), q(2, 0)), &s(q(1, 0), q(1, 2))));
        // Collinear overlap and collinear disjoint.
        assert!(segments_intersect(&s(q(0, 0), q(2, 0)), &s(q(1, 0), q(3, 0))));
        assert!(!segments_intersect(&s(q(0, 0), q(1, 0)), &s(q(2, 0), q(3, 0))));
    }

    #[test]
    fn test_coupling_groups_chain() {
        let a = Coupling::new(q(0, 0), q(2, 2));
        let b = Coupling::new(q(0, 2), q(2, 0));
        let c = Coupling::new(q(1, 0), q(3, 1));
        assert!(segments_intersect(&a, &b));
        assert!(segments_intersect(&b, &c));
        assert!(!segments_intersect(&a, &c));
        let layer = Layer {
            width: 4,
            single_gates: vec![Gate::S; 12],
            couplings: vec![a, c, b],
        };
        let groups = coupling_groups(&layer);
        assert_eq!(groups.len(), 1);
        assert_eq!(groups[0].members, vec![a, c, b]);
    }

    #[test]
    fn test_coupling_groups_disjoint_and_empty() {
        let layer = Layer {
            width: 4,
            single_gates: vec![Gate::S; 4],
            couplings: vec![Coupling::new(q(0, 0), q(1, 0)), Coupling::new(q(2, 0), q(3, 0))],
        };
        assert_eq!(coupling_groups(&layer).len(), 2);
        let empty = Layer {
            width: 4,
            single_gates: vec![Gate::S; 4],
            couplings: vec![],
        };
        assert!(coupling_groups(&empty).is_empty());
    }

    #[test]
    fn test_t_cost_without_failures() {
        let mut rng = seed::rng(1);
        assert_eq!(sample_t_cost(0.0, 9, &mut rng), 36);
    }

    #[test]
    fn test_t_cost_support_and_mean() {
        let mut rng = seed::rng(2);
        for _ in 0..10_000 {
            let c = sample_t_cost(0.5, 2, &mut rng);
            assert!(c >= 8 && (c - 8).is_multiple_of(6), "{c}");
        }
        let n = 1_000_000;
        let mean = (0..n).map(|_| sample_t_cost(0.05, 1, &mut rng)).sum::<u64>() as f64 / n as f64;
        assert!((mean - (4.0 + 3.0 * 0.05 / 0.95)).abs() < 0.01, "{mean}");
    }

    #[test]
    fn test_single_qubit_cost_table() {
        let layers = [Gate::H, Gate::S, Gate::T]
            .into_iter()
            .map(|g| Layer {
                width: 1,
                single_gates: vec![g],
                couplings: vec![],
            })
            .collect();
        let circuit = circuit_from(1, 1, layers);
        let run = stochastic_run(&circuit, 1, 0.0, &mut seed::rng(0));
        assert_eq!(run.total(), 9);
    }

    #[test]
    fn test_coupling_synchronizes_to_slowest() {
        let layer = Layer {
            width: 2,
            single_gates: vec![Gate::H, Gate::S],
            couplings: vec![Coupling::new(q(0, 0), q(1, 0))],
        };
        let circuit = circuit_from(2, 1, vec![layer]);
        let run = scheduled_run(&circuit, 1);
        assert_eq!(run.get(q(0, 0)), 5);
        assert_eq!(run.get(q(1, 0)), 5);
    }

    #[test]
    fn test_zero_failure_total_equals_scheduled() {
        for seed in 0..5 {
            let p = RandomCircuitParams {
                seed,
                ..params(6, 6, 2)
            };
            let run = simulate_random_circuit(&p).unwrap();
            assert_eq!(run.total, run.scheduled);
        }
    }

    #[test]
    fn test_all_t_single_qubit_delay_is_multiple_of_3d() {
        let layers = (0..50)
            .map(|_| Layer {
                width: 1,
                single_gates: vec![Gate::T],
                couplings: vec![],
            })
            .collect();
        let circuit = circuit_from(1, 1, layers);
        let d = 7;
        let scheduled = scheduled_run(&circuit, d).total();
        let total = stochastic_run(&circuit, d, 0.3, &mut seed::rng(5)).total();
        assert!(total >= scheduled);
        assert_eq!((total - scheduled) % (3 * d), 0);
    }

    #[test]
    fn test_metrics_zero_failure() {
        let m = random_circuit_metrics(&params(6, 6, 2), 10).unwrap();
        assert_eq!(m.mean_delay, 0.0);
        assert_eq!(m.rel_delay, 0.0);
        assert_eq!(m.rel_cost_increase, 0.0);
        assert_eq!(m.effective_cost, 3.0);
    }

    #[test]
    fn test_metrics_independent_of_d() {
        let base = RandomCircuitParams {
            p_fail: 0.05,
            ..params(8, 8, 2)
        };
        let m1 = random_circuit_metrics(&base, 8).unwrap();
        let m5 = random_circuit_metrics(&RandomCircuitParams { d: 5, ..base }, 8).unwrap();
        assert_eq!(m1.rel_delay, m5.rel_delay);
        assert_eq!(m1.rel_cost_increase, m5.rel_cost_increase);
        assert_eq!(m1.scheduled * 5, m5.scheduled);
    }
}
