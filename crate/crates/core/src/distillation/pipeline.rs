//! Two-level distillation factory with pipelined level-1 (L1) blocks.
//!
//! The L1 blocks are split into two pipelines that feed one level-2 (L2)
//! arena. The arena consumes one L1 state from each pipeline per slot, so an
//! output needing `2 * slots` L1 states takes `slots` consecutive slots. A
//! block hands its state over when the slot starts and immediately begins
//! the next attempt; if its state is late the slot waits, and because every
//! block is busy right up to its next turn the lost time is never made up.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::completion::CompletionDistribution;
use crate::analytic::sample_failures;
use crate::error::invalid;
use crate::{seed, Result};

/// What happens when an L1 block fails.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mitigation {
    /// Each slot waits for its own block in round-robin order.
    None,
    /// Each slot takes the earliest ready state in the pipeline.
    Racing,
    /// `n` additional blocks per pipeline, used like racing.
    ExcessiveL1(u32),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PipelineConfig {
    /// L1 blocks in the factory, split evenly over the two pipelines.
    pub n_l1: u32,
    pub l1_cycles: u64,
    pub l1_fail: f64,
    pub l2_slot_cycles: u64,
    pub l2_fail: f64,
    /// Nominal cycles per output; a whole number of L2 slots.
    pub period: u64,
    pub transfer_cycles: u64,
    pub mitigation: Mitigation,
}

impl Default for PipelineConfig {
    /// Four L1 blocks feeding an arena that needs eight L1 states per output
    /// and produces one every 60 cycles.
    fn default() -> Self {
        PipelineConfig {
            n_l1: 4,
            l1_cycles: 25,
            l1_fail: 0.05,
            l2_slot_cycles: 15,
            l2_fail: 0.01,
            period: 60,
            transfer_cycles: 5,
            mitigation: Mitigation::None,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_l1 < 2 || !self.n_l1.is_multiple_of(2) {
            return Err(invalid(format!("n_l1 must be even and at least 2, got {}", self.n_l1)));
        }
        if self.l1_cycles == 0 || self.l2_slot_cycles == 0 || self.period == 0 || self.transfer_cycles == 0 {
            return Err(invalid("pipeline cycle counts must be at least 1"));
        }
        for (name, p) in [("l1_fail", self.l1_fail), ("l2_fail", self.l2_fail)] {
            if !(0.0..1.0).contains(&p) {
                return Err(invalid(format!("{name} must be in [0, 1), got {p}")));
            }
        }
        if !self.period.is_multiple_of(self.l2_slot_cycles) {
            return Err(invalid(format!(
                "period {} is not a whole number of {}-cycle L2 slots",
                self.period, self.l2_slot_cycles
            )));
        }
        let turnaround = self.l1_cycles + self.transfer_cycles;
        if turnaround > u64::from(self.n_l1 / 2) * self.l2_slot_cycles {
            return Err(invalid(format!(
                "{} blocks per pipeline cannot deliver an L1 state every {} cycles \
                 when each takes {turnaround} cycles",
                self.n_l1 / 2,
                self.l2_slot_cycles
            )));
        }
        Ok(())
    }

    pub fn slots_per_output(&self) -> u64 {
        self.period / self.l2_slot_cycles
    }

    pub fn l1_states_per_output(&self) -> u64 {
        2 * self.slots_per_output()
    }

    pub fn blocks_per_pipeline(&self) -> usize {
        let extra = match self.mitigation {
            Mitigation::ExcessiveL1(n) => n,
            _ => 0,
        };
        (self.n_l1 / 2 + extra) as usize
    }
}

/// Per-output record of one pipeline simulation.
#[derive(Clone, Debug, PartialEq)]
pub struct PipelineRun {
    /// Completion time of every output, starting with the first.
    pub output_times: Vec<u64>,
    /// L1 states handed to the arena for each output, including those lost
    /// to failed L2 rounds.
    pub l1_consumed: Vec<u64>,
}

impl PipelineRun {
    pub fn extra_delays(&self, period: u64) -> Vec<u64> {
        self.output_times.windows(2).map(|w| w[1] - w[0] - period).collect()
    }
}

struct Block {
    ready: u64,
}

/// Runs the factory until `outputs + 1` outputs exist, so that `outputs`
/// inter-output intervals follow the pipeline fill.
pub fn run_pipeline(config: &PipelineConfig, outputs: u64, seed: u64) -> Result<PipelineRun> {
    config.validate()?;
    if outputs == 0 {
        return Err(invalid("output count must be at least 1"));
    }
    let mut rng = seed::rng(seed);
    let k = config.blocks_per_pipeline();
    let attempt = |rng: &mut rand_chacha::ChaCha8Rng, start: u64| {
        start + (1 + sample_failures(config.l1_fail, rng)) * config.l1_cycles + config.transfer_cycles
    };
    let mut pipelines: [Vec<Block>; 2] = [0, 1].map(|_| {
        (0..k)
            .map(|_| Block {
                ready: attempt(&mut rng, 0),
            })
            .collect()
    });

    let mut slot_free = 0u64;
    let mut slot_count = 0usize;
    let mut run = PipelineRun {
        output_times: Vec::with_capacity(outputs as usize + 1),
        l1_consumed: Vec::with_capacity(outputs as usize + 1),
    };
    while run.output_times.len() as u64 <= outputs {
        let mut consumed = 0;
        loop {
            for _ in 0..config.slots_per_output() {
                let chosen = pipelines.each_ref().map(|blocks| match config.mitigation {
                    Mitigation::None => slot_count % k,
                    Mitigation::Racing | Mitigation::ExcessiveL1(_) => (0..k)
                        .min_by_key(|&b| (blocks[b].ready, b))
                        .expect("pipelines are never empty"),
                });
                let start = chosen
                    .iter()
                    .zip(&pipelines)
                    .map(|(&b, blocks)| blocks[b].ready)
                    .fold(slot_free, u64::max);
                for (blocks, b) in pipelines.iter_mut().zip(chosen) {
                    blocks[b].ready = attempt(&mut rng, start);
                }
                slot_free = start + config.l2_slot_cycles;
                slot_count += 1;
                consumed += 2;
            }
            if rng.gen::<f64>() >= config.l2_fail {
                break;
            }
        }
        run.output_times.push(slot_free);
        run.l1_consumed.push(consumed);
    }
    Ok(run)
}

/// Empirical distribution of the extra delay per output, the inter-output
/// interval minus the nominal period.
///
/// Slots never start closer than one slot length apart, so intervals are
/// never shorter than the period and no clipping is needed; the interval
/// distribution and the per-output extra-delay distribution coincide.
pub fn simulate_pipeline(config: &PipelineConfig, outputs: u64, seed: u64) -> Result<CompletionDistribution> {
    let run = run_pipeline(config, outputs, seed)?;
    let mut counts: BTreeMap<u64, u64> = BTreeMap::new();
    for extra in run.extra_delays(config.period) {
        *counts.entry(extra).or_default() += 1;
    }
    CompletionDistribution::from_counts(&counts)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn failure_free() -> PipelineConfig {
        PipelineConfig {
            l1_fail: 0.0,
            l2_fail: 0.0,
            ..PipelineConfig::default()
        }
    }

    #[test]
    fn test_default_is_valid() {
        PipelineConfig::default().validate().unwrap();
        assert_eq!(PipelineConfig::default().l1_states_per_output(), 8);
    }

    #[test]
    fn test_validation() {
        let bad = [
            PipelineConfig {
                n_l1: 3,
                ..failure_free()
            },
            PipelineConfig {
                l1_fail: 1.0,
                ..failure_free()
            },
            PipelineConfig {
                period: 50,
                ..failure_free()
            },
            PipelineConfig {
                l1_cycles: 40,
                ..failure_free()
            },
            PipelineConfig {
                transfer_cycles: 0,
                ..failure_free()
            },
        ];
        for c in bad {
            assert!(c.validate().is_err(), "{c:?}");
        }
    }

    #[test]
    fn test_failure_free_hits_nominal_period() {
        for mitigation in [Mitigation::None, Mitigation::Racing, Mitigation::ExcessiveL1(2)] {
            let config = PipelineConfig {
                mitigation,
                ..failure_free()
            };
            let dist = simulate_pipeline(&config, 1000, 1).unwrap();
            assert_eq!(dist.mean_extra, 0.0);
            assert_eq!(dist.probability(0), 1.0);
            let run = run_pipeline(&config, 100, 1).unwrap();
            assert!(run.l1_consumed.iter().all(|&c| c == 8));
        }
    }

    #[test]
    fn test_l1_conservation_with_l2_failures() {
        let config = PipelineConfig {
            l2_fail: 0.3,
            ..PipelineConfig::default()
        };
        let run = run_pipeline(&config, 2000, 9).unwrap();
        assert!(run.l1_consumed.iter().all(|&c| c > 0 && c % 8 == 0));
        assert!(run.l1_consumed.iter().any(|&c| c > 8));
    }

    #[test]
    fn test_failures_add_delay() {
        let dist = simulate_pipeline(&PipelineConfig::default(), 20_000, 3).unwrap();
        assert!(dist.mean_extra > 0.0);
        assert!(dist.probability(0) < 1.0);
    }

    #[test]
    fn test_racing_helps_with_frequent_failures() {
        let base = PipelineConfig {
            n_l1: 2,
            l1_cycles: 3,
            transfer_cycles: 1,
            l2_slot_cycles: 4,
            period: 8,
            l1_fail: 0.5,
            l2_fail: 0.0,
            mitigation: Mitigation::None,
        };
        let none = simulate_pipeline(&base, 100_000, 5).unwrap();
        let racing = simulate_pipeline(
            &PipelineConfig {
                mitigation: Mitigation::Racing,
                ..base
            },
            100_000,
            5,
        )
        .unwrap();
        // With one block per pipeline there is nothing to race against.
        assert!(racing.mean_extra <= none.mean_extra);
    }
}
