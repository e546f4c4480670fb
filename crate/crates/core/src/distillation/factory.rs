//! Run-time behaviour of one factory, with or without a pool.

use std::collections::VecDeque;

use rand_chacha::ChaCha8Rng;

use super::completion::{CompletionDistribution, ExtraSampler};
use crate::seed;

/// FIFO of distilled states waiting next to a factory.
#[derive(Clone, Debug)]
pub struct Pool {
    capacity: usize,
    d_pool: u64,
    /// Cycle at which each held state entered the pool, oldest first.
    occupancy: VecDeque<u64>,
    full_events: u64,
}

impl Pool {
    pub fn new(capacity: usize, d_pool: u64) -> Self {
        Pool {
            capacity,
            d_pool,
            occupancy: VecDeque::with_capacity(capacity),
            full_events: 0,
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn d_pool(&self) -> u64 {
        self.d_pool
    }

    pub fn len(&self) -> usize {
        self.occupancy.len()
    }

    pub fn is_empty(&self) -> bool {
        self.occupancy.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.occupancy.len() >= self.capacity
    }

    /// Times the factory found the pool full and had to hold its output.
    pub fn full_events(&self) -> u64 {
        self.full_events
    }

    pub fn entries(&self) -> impl Iterator<Item = u64> + '_ {
        self.occupancy.iter().copied()
    }

    fn push(&mut self, ready: u64) {
        assert!(!self.is_full(), "pool over capacity");
        debug_assert!(self.occupancy.back().is_none_or(|&last| last <= ready));
        self.occupancy.push_back(ready);
    }

    fn pop(&mut self) -> Option<u64> {
        self.occupancy.pop_front()
    }
}

/// A factory without a pool. It starts round `j` at `max(phase + j * cadence,
/// end of round j - 1)`, so it follows the schedule's cadence when on time
/// and runs back to back while catching up. An output nobody takes is lost.
#[derive(Debug)]
pub struct ScheduledFactory {
    phase: u64,
    cadence: u64,
    period: u64,
    sampler: ExtraSampler,
    rng: ChaCha8Rng,
    starts: Vec<u64>,
    ends: Vec<u64>,
    last_used: Option<usize>,
}

impl ScheduledFactory {
    pub fn new(dist: &CompletionDistribution, period: u64, cadence: u64, seed: u64) -> Self {
        ScheduledFactory {
            phase: 0,
            cadence,
            period,
            sampler: dist.sampler(),
            rng: seed::rng(seed),
            starts: Vec::new(),
            ends: Vec::new(),
            last_used: None,
        }
    }

    /// Shifts every nominal round start by `phase` cycles.
    pub fn with_phase(mut self, phase: u64) -> Self {
        assert!(self.ends.is_empty(), "phase must be set before the first round");
        self.phase = phase;
        self
    }

    fn round(&mut self, j: usize) -> (u64, u64) {
        while self.ends.len() <= j {
            let k = self.ends.len();
            let start = (self.phase + k as u64 * self.cadence).max(self.ends.last().copied().unwrap_or(0));
            let end = start + self.period + self.sampler.sample(&mut self.rng);
            self.starts.push(start);
            self.ends.push(end);
        }
        (self.starts[j], self.ends[j])
    }

    /// Serves a request whose scheduled round starts at `round_start`, from a
    /// consumer running `delay` cycles late. Takes the first output whose
    /// distillation began after the previous request's output was handed
    /// over and that does not overtake the schedule, i.e. completes at or
    /// after `round_start + delay + period`. Returns the completion time.
    pub fn serve(&mut self, round_start: u64, delay: u64) -> u64 {
        let previous_end = self.last_used.map(|j| self.ends[j]);
        let not_before = round_start + delay + self.period;
        let mut j = self.last_used.map_or(0, |j| j + 1);
        loop {
            let (start, end) = self.round(j);
            if previous_end.is_none_or(|p| start >= p) && end >= not_before {
                self.last_used = Some(j);
                return end;
            }
            j += 1;
        }
    }
}

/// A factory feeding a FIFO pool.
///
/// The factory distils back to back. A finished state enters the pool if
/// there is room; otherwise the factory holds it and stops until a request
/// frees an entry. A request takes the oldest pooled state at once, or,
/// when the pool is empty, the factory's next output as soon as it is
/// done. Requests are served in arrival order: one arriving before its
/// predecessor was served waits for it.
#[derive(Debug)]
pub struct PooledFactory {
    pool: Pool,
    period: u64,
    sampler: ExtraSampler,
    rng: ChaCha8Rng,
    /// Completion of the distillation in progress, or of the held output.
    running_until: u64,
    held: bool,
    last_service: u64,
}

impl PooledFactory {
    pub fn new(pool: Pool, dist: &CompletionDistribution, period: u64, seed: u64) -> Self {
        assert!(pool.capacity() > 0, "a pooled factory needs at least one entry");
        let sampler = dist.sampler();
        let mut rng = seed::rng(seed);
        let running_until = period + sampler.sample(&mut rng);
        PooledFactory {
            pool,
            period,
            sampler,
            rng,
            running_until,
            held: false,
            last_service: 0,
        }
    }

    pub fn pool(&self) -> &Pool {
        &self.pool
    }

    fn restart(&mut self, at: u64) {
        self.running_until = at + self.period + self.sampler.sample(&mut self.rng);
        self.held = false;
    }

    /// Moves every output finished by `now` into the pool, holding the
    /// first one that finds it full.
    pub fn step(&mut self, now: u64) {
        while !self.held && self.running_until <= now {
            if self.pool.is_full() {
                self.pool.full_events += 1;
                self.held = true;
            } else {
                let done = self.running_until;
                self.pool.push(done);
                self.restart(done);
            }
        }
    }

    /// Serves a request arriving at `arrival`; returns the cycle at which
    /// the consumer gets its state.
    pub fn request(&mut self, arrival: u64) -> u64 {
        let at = arrival.max(self.last_service);
        self.step(at);
        let served = if self.pool.pop().is_some() {
            if self.held {
                // A slot opened: the held output moves in and the factory resumes.
                let done = self.running_until;
                self.pool.push(done);
                self.restart(at);
                self.step(at);
            }
            at
        } else {
            // Empty pool: hand the next output straight to the waiting consumer.
            let done = self.running_until;
            self.restart(done);
            done
        };
        self.last_service = served;
        served
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zero() -> CompletionDistribution {
        CompletionDistribution::point_mass(0)
    }

    #[test]
    fn test_scheduled_factory_follows_cadence() {
        let mut f = ScheduledFactory::new(&zero(), 10, 15, 1);
        assert_eq!(f.serve(0, 0), 10);
        assert_eq!(f.serve(15, 0), 25);
        // Round 3 starts at 45; round 2 (30..40) is skipped.
        assert_eq!(f.serve(45, 0), 55);
    }

    #[test]
    fn test_scheduled_factory_does_not_overtake_schedule() {
        let mut f = ScheduledFactory::new(&zero(), 10, 10, 1);
        // Completions 10, 20, 30, ...
        assert_eq!(f.serve(12, 0), 30);
        assert_eq!(f.serve(12, 5), 40);
    }

    #[test]
    fn test_scheduled_factory_phase() {
        let mut f = ScheduledFactory::new(&zero(), 10, 10, 1).with_phase(12);
        assert_eq!(f.serve(12, 0), 22);
        assert_eq!(f.serve(22, 5), 42);
    }

    #[test]
    fn test_scheduled_factory_in_order() {
        let mut f = ScheduledFactory::new(&CompletionDistribution::point_mass(3), 10, 10, 1);
        let a = f.serve(0, 0);
        let b = f.serve(0, 0);
        assert!(b > a);
    }

    #[test]
    fn test_pool_pass_through_when_empty() {
        // (a)/(e): nothing pooled yet, the consumer waits for the factory.
        let mut f = PooledFactory::new(Pool::new(1, 5), &zero(), 10, 1);
        assert_eq!(f.request(3), 10);
        assert!(f.pool().is_empty());
    }

    #[test]
    fn test_pool_stores_output_without_requests() {
        // (b): capacity 1, completion at 10, nobody asks.
        let mut f = PooledFactory::new(Pool::new(1, 5), &zero(), 10, 1);
        f.step(10);
        assert_eq!(f.pool().entries().collect::<Vec<_>>(), vec![10]);
        f.step(100);
        assert_eq!(f.pool().len(), 1);
        assert_eq!(f.pool().full_events(), 1);
    }

    #[test]
    fn test_pool_serves_immediately_and_refills() {
        // (c) -> (f): a held pooled state is used at once, and the held
        // output refills the entry.
        let mut f = PooledFactory::new(Pool::new(1, 5), &zero(), 10, 1);
        f.step(25);
        assert_eq!(f.request(25), 25);
        assert_eq!(f.pool().entries().collect::<Vec<_>>(), vec![20]);
        // The factory resumed at 25.
        assert_eq!(f.request(26), 26);
        assert!(f.pool().is_empty());
        assert_eq!(f.request(27), 35);
    }

    #[test]
    fn test_pool_fifo_and_capacity() {
        let mut f = PooledFactory::new(Pool::new(2, 5), &CompletionDistribution::point_mass(2), 10, 1);
        f.step(1000);
        let held: Vec<u64> = f.pool().entries().collect();
        assert_eq!(held, vec![12, 24]);
        assert_eq!(f.request(1000), 1000);
        assert_eq!(f.pool().entries().collect::<Vec<_>>(), vec![24, 36]);
    }

    #[test]
    fn test_requests_served_in_order() {
        let mut f = PooledFactory::new(Pool::new(1, 5), &zero(), 10, 1);
        let a = f.request(50);
        let b = f.request(40);
        assert!(b >= a);
    }
}
