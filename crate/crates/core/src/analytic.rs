//! Expected execution time of repeat-until-success (RUS) operations and the
//! run-time delay metrics.
//!
//! The unit of time in the RUS formulas is one attempt of the operation. The
//! metric functions work in cycles but are scale free.

use rand::Rng;
use rayon::prelude::*;

use crate::error::invalid;
use crate::{seed, Error, Result};

/// `n` RUS operations, each failing independently with probability `p`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RusParams {
    pub n: u32,
    pub p: f64,
}

impl RusParams {
    pub fn new(n: u32, p: f64) -> Result<Self> {
        let params = RusParams { n, p };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(invalid("RUS operation count must be at least 1"));
        }
        if !(0.0..1.0).contains(&self.p) {
            return Err(invalid(format!(
                "RUS failure probability must be in [0, 1), got {}",
                self.p
            )));
        }
        Ok(())
    }
}

/// Expected attempts to run `n` RUS operations one after another: `n / (1 - p)`.
pub fn sequential_expected_time(params: RusParams) -> Result<f64> {
    params.validate()?;
    Ok(f64::from(params.n) / (1.0 - params.p))
}

/// Expected rounds to run `n` RUS operations in parallel, where each round
/// retries only the operations that failed so far.
///
/// Solves `a_k = 1 + sum_{i=0..k} C(k,i) (1-p)^(k-i) p^i a_i` with `a_0 = 0`
/// for `k = 1..=n`. The `i = k` term holds `a_k` itself, so each step divides
/// by `1 - p^k`. Binomial weights are carried in log space, which keeps
/// large `n` from overflowing or underflowing.
pub fn parallel_expected_time(params: RusParams) -> Result<f64> {
    params.validate()?;
    let n = params.n as usize;
    let p = params.p;
    if p == 0.0 {
        return Ok(1.0);
    }
    let ln_p = p.ln();
    let ln_q = (1.0 - p).ln();
    let ln_odds = ln_p - ln_q;

    let mut a = vec![0.0f64; n + 1];
    for k in 1..=n {
        // ln of C(k,i) (1-p)^(k-i) p^i, advanced term by term.
        let mut ln_term = k as f64 * ln_q;
        let mut acc = 1.0;
        for (i, &a_i) in a.iter().enumerate().take(k) {
            if i > 0 {
                ln_term += ((k - i + 1) as f64 / i as f64).ln() + ln_odds;
            }
            acc += ln_term.exp() * a_i;
        }
        let p_all_fail = (k as f64 * ln_p).exp();
        a[k] = acc / (1.0 - p_all_fail);
    }
    Ok(a[n])
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RusMode {
    Sequential,
    Parallel,
}

/// Sample mean of a Monte-Carlo run together with its standard error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MonteCarloEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub trials: u64,
}

impl MonteCarloEstimate {
    /// Number of standard errors between the estimate and `expected`.
    pub fn z_score(&self, expected: f64) -> f64 {
        if self.std_error == 0.0 {
            if self.mean == expected {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            (self.mean - expected).abs() / self.std_error
        }
    }
}

/// Number of failures before the first success of a Bernoulli process that
/// fails with probability `p`, by inversion of one uniform draw.
///
/// Exactly one uniform is consumed whatever `p` is, and the count is
/// non-decreasing in `p` for a fixed draw. Streams sampled at different
/// failure probabilities therefore stay aligned and ordered.
pub fn sample_failures<R: Rng + ?Sized>(p: f64, rng: &mut R) -> u64 {
    let u: f64 = rng.gen();
    if p <= 0.0 {
        return 0;
    }
    // 1 - u lies in (0, 1]; P(k >= j) = P(1 - u <= p^j) = p^j.
    ((1.0 - u).ln() / p.ln()).floor() as u64
}

const MC_CHUNK: u64 = 4096;

/// Simulates the RUS execution `trials` times and reports the mean number of
/// attempts (sequential) or rounds (parallel). Deterministic for a seed,
/// whatever the size of the rayon pool.
pub fn monte_carlo_rus(params: RusParams, mode: RusMode, trials: u64, seed: u64) -> Result<MonteCarloEstimate> {
    params.validate()?;
    if trials == 0 {
        return Err(invalid("Monte-Carlo trial count must be at least 1"));
    }
    let chunks = trials.div_ceil(MC_CHUNK);
    let (sum, sum_sq) = (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut rng = seed::rng(seed::mix(seed, chunk));
            let len = MC_CHUNK.min(trials - chunk * MC_CHUNK);
            let mut sum = 0u128;
            let mut sum_sq = 0u128;
            for _ in 0..len {
                let x = u128::from(simulate_once(params, mode, &mut rng));
                sum += x;
                sum_sq += x * x;
            }
            (sum, sum_sq)
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold((0u128, 0u128), |acc, x| (acc.0 + x.0, acc.1 + x.1));

    let n = trials as f64;
    let mean = sum as f64 / n;
    let var = if trials > 1 {
        ((sum_sq as f64) - (sum as f64) * mean) / (n - 1.0)
    } else {
        0.0
    };
    Ok(MonteCarloEstimate {
        mean,
        std_error: (var.max(0.0) / n).sqrt(),
        trials,
    })
}

fn simulate_once<R: Rng>(params: RusParams, mode: RusMode, rng: &mut R) -> u64 {
    match mode {
        RusMode::Sequential => (0..params.n).map(|_| 1 + sample_failures(params.p, rng)).sum(),
        RusMode::Parallel => {
            let mut remaining = params.n;
            let mut rounds = 0;
            while remaining > 0 {
                rounds += 1;
                remaining = (0..remaining).filter(|_| rng.gen::<f64>() < params.p).count() as u32;
            }
            rounds
        }
    }
}

/// Run-time delay relative to the scheduled time cost, `R / S`.
pub fn relative_runtime_delay(runtime_delay: f64, scheduled_cost: f64) -> Result<f64> {
    if scheduled_cost <= 0.0 {
        return Err(invalid("scheduled time cost must be positive"));
    }
    if runtime_delay < 0.0 {
        return Err(invalid("run-time delay must be non-negative"));
    }
    Ok(runtime_delay / scheduled_cost)
}

/// Effective distillation time cost: the distillation cost a failure-free
/// protocol would need to produce the observed total time `S + R`.
///
/// `schedule_cost` samples the scheduled time cost as a function of the
/// distillation cost, as `(distillation cost, scheduled cost)` pairs sorted
/// by distillation cost. Among candidates whose scheduled cost equals the
/// target the largest is taken. Without an exact match, the largest
/// candidate whose scheduled cost stays at or below the target is taken.
pub fn effective_distillation_cost(
    schedule_cost: &[(f64, f64)],
    distillation_cost: f64,
    runtime_delay: f64,
) -> Result<f64> {
    if schedule_cost.windows(2).any(|w| w[0].0 >= w[1].0) {
        return Err(invalid(
            "schedule-cost samples must be strictly increasing in distillation cost",
        ));
    }
    let base = schedule_cost
        .iter()
        .find(|(e, _)| *e == distillation_cost)
        .map(|&(_, s)| s)
        .ok_or_else(|| {
            invalid(format!(
                "schedule-cost samples have no entry for distillation cost {distillation_cost}"
            ))
        })?;
    let target = base + runtime_delay;

    let exact = schedule_cost
        .iter()
        .rev()
        .find(|(_, s)| (s - target).abs() <= 1e-9 * target.abs().max(1.0));
    if let Some(&(e, _)) = exact {
        return Ok(e);
    }
    schedule_cost
        .iter()
        .rev()
        .find(|(_, s)| *s <= target)
        .map(|&(e, _)| e)
        .ok_or(Error::NoEffectiveCost { target })
}

/// `(E - D) / D`.
pub fn relative_distillation_cost_increase(effective_cost: f64, distillation_cost: f64) -> Result<f64> {
    if distillation_cost <= 0.0 {
        return Err(invalid("distillation time cost must be positive"));
    }
    Ok((effective_cost - distillation_cost) / distillation_cost)
}

/// Samples a non-decreasing cost curve at the steps needed to pin down the
/// largest step whose cost is at most `target`: step 0, the answer, and the
/// first step above it (unless `cap` is reached). Sorted by step.
pub(crate) fn bracket_within(target: f64, cap: u64, cost: impl Fn(u64) -> f64) -> Vec<(u64, f64)> {
    let mut samples = vec![(0, cost(0))];
    let mut lo = 0u64;
    let mut hi = None;
    let mut step = 1u64;
    while hi.is_none() && lo < cap {
        let s = (lo + step).min(cap);
        let c = cost(s);
        samples.push((s, c));
        if c <= target {
            lo = s;
            step *= 2;
        } else {
            hi = Some(s);
        }
    }
    if let Some(mut hi) = hi {
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            let c = cost(mid);
            samples.push((mid, c));
            if c <= target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
    }
    samples.sort_by_key(|&(s, _)| s);
    samples.dedup_by_key(|&mut (s, _)| s);
    samples
}
