use std::collections::BTreeMap;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::error::invalid;
use crate::{seed, Result};

/// Distribution of the extra cycles a factory output takes beyond the
/// nominal period.
#[derive(Clone, Debug, PartialEq)]
pub struct CompletionDistribution {
    /// Extra cycles to probability; probabilities sum to 1.
    pub histogram: BTreeMap<u64, f64>,
    pub mean_extra: f64,
}

impl CompletionDistribution {
    pub fn point_mass(extra: u64) -> Self {
        CompletionDistribution {
            histogram: BTreeMap::from([(extra, 1.0)]),
            mean_extra: extra as f64,
        }
    }

    pub fn from_counts(counts: &BTreeMap<u64, u64>) -> Result<Self> {
        let total: u64 = counts.values().sum();
        if total == 0 {
            return Err(invalid("cannot build a distribution from zero samples"));
        }
        let n = total as f64;
        let histogram = counts
            .iter()
            .filter(|(_, &c)| c > 0)
            .map(|(&k, &c)| (k, c as f64 / n))
            .collect();
        let mean_extra = counts.iter().map(|(&k, &c)| k as f64 * c as f64).sum::<f64>() / n;
        Ok(CompletionDistribution { histogram, mean_extra })
    }

    /// Builds a distribution from explicit probabilities, which must be
    /// non-negative and sum to 1 within 1e-9.
    pub fn from_probabilities(probabilities: BTreeMap<u64, f64>) -> Result<Self> {
        if probabilities.values().any(|&p| p.is_nan() || p < 0.0) {
            return Err(invalid("probabilities must be non-negative"));
        }
        let sum: f64 = probabilities.values().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(invalid(format!("probabilities sum to {sum}, not 1")));
        }
        let mean_extra = probabilities.iter().map(|(&k, &p)| k as f64 * p).sum();
        Ok(CompletionDistribution {
            histogram: probabilities,
            mean_extra,
        })
    }

    pub fn probability(&self, extra: u64) -> f64 {
        self.histogram.get(&extra).copied().unwrap_or(0.0)
    }

    pub fn sampler(&self) -> ExtraSampler {
        let mut acc = 0.0;
        let mut values = Vec::with_capacity(self.histogram.len());
        let mut cdf = Vec::with_capacity(self.histogram.len());
        for (&k, &p) in &self.histogram {
            acc += p;
            values.push(k);
            cdf.push(acc);
        }
        ExtraSampler { values, cdf }
    }
}

/// Inverse-CDF sampler over a [`CompletionDistribution`].
#[derive(Clone, Debug)]
pub struct ExtraSampler {
    values: Vec<u64>,
    cdf: Vec<f64>,
}

impl ExtraSampler {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u64 {
        let total = *self.cdf.last().expect("distribution is never empty");
        let u = rng.gen::<f64>() * total;
        let i = self.cdf.partition_point(|&c| c <= u).min(self.values.len() - 1);
        self.values[i]
    }
}

/// Absolute completion times of a factory running back to back: round `k`
/// completes at `(k + 1) * D` plus the sampled extra delays of rounds
/// `0..=k`, since a late round pushes every later one.
pub struct CompletionStream {
    sampler: ExtraSampler,
    rng: ChaCha8Rng,
    period: u64,
    last: u64,
}

impl Iterator for CompletionStream {
    type Item = u64;

    fn next(&mut self) -> Option<u64> {
        self.last += self.period + self.sampler.sample(&mut self.rng);
        Some(self.last)
    }
}

pub fn sample_completion_stream(dist: &CompletionDistribution, period: u64, seed: u64) -> Result<CompletionStream> {
    if period == 0 {
        return Err(invalid("distillation period must be at least 1"));
    }
    Ok(CompletionStream {
        sampler: dist.sampler(),
        rng: seed::rng(seed),
        period,
        last: 0,
    })
}
