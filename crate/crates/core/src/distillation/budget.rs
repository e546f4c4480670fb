//! Error-budget and space formulas for factories and pools.

use crate::error::invalid;
use crate::{Error, Result};

/// Physical qubits of one magic-state factory.
pub const FACTORY_QUBITS: u64 = 34_052;
/// Undetected error probability of one distilled magic state.
pub const MSD_ERROR: f64 = 1.8e-10;
/// Share of the total error budget given to magic states.
pub const MAGIC_STATE_BUDGET: f64 = 0.005;

/// Logical error probability per cycle of a distance-`d` patch:
/// `0.1 * (100 p)^((d + 1) / 2)`.
pub fn logical_error_rate(d: u64, p_phys: f64) -> Result<f64> {
    if d == 0 || d.is_multiple_of(2) {
        return Err(invalid(format!("code distance must be odd, got {d}")));
    }
    check_p_phys(p_phys)?;
    Ok(0.1 * (100.0 * p_phys).powi(d.div_ceil(2) as i32))
}

fn check_p_phys(p_phys: f64) -> Result<()> {
    if !(p_phys > 0.0 && p_phys < 0.01) {
        return Err(invalid(format!(
            "physical error probability must be in (0, 0.01), got {p_phys}"
        )));
    }
    Ok(())
}

/// Smallest odd pool distance `d_pool >= 3` keeping the error of
/// `magic_states` pooled states within `budget`:
/// `L (3 (E + d) p_L(d_pool) + msd_error) < budget`, where a state sits in
/// the pool for up to `3 (E + d)` cycles.
pub fn choose_pool_distance(
    magic_states: u64,
    expected_cycles: f64,
    d: u64,
    p_phys: f64,
    budget: f64,
    msd_error: f64,
) -> Result<u64> {
    if magic_states == 0 {
        return Err(invalid("magic-state count must be at least 1"));
    }
    if expected_cycles.is_nan() || expected_cycles < 1.0 {
        return Err(invalid("expected distillation cycles must be at least 1"));
    }
    check_p_phys(p_phys)?;
    let l = magic_states as f64;
    let floor = l * msd_error;
    if floor >= budget {
        return Err(Error::BudgetExhausted { budget, floor });
    }
    let dwell = 3.0 * (expected_cycles + d as f64);
    // p_L falls by a factor 100 p_phys per step, so this terminates.
    let mut d_pool = 3;
    while l * (dwell * logical_error_rate(d_pool, p_phys)? + msd_error) >= budget {
        d_pool += 2;
    }
    Ok(d_pool)
}

/// Physical qubits of a pool: three distance-`d_pool` patches of
/// `2 d_pool^2` qubits per entry.
pub fn pool_overhead_qubits(entries: u64, d_pool: u64) -> u64 {
    entries * 3 * 2 * d_pool * d_pool
}

/// Average number of states an `n * m`-entry pool retains when a state is
/// distilled and consumed every `n d` cycles: `(n - 1) m / n`.
pub fn retained_states(n: u64, m: u64) -> Result<f64> {
    if n == 0 || m == 0 {
        return Err(invalid("n and m must be at least 1"));
    }
    Ok((n - 1) as f64 * m as f64 / n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn test_logical_error_rate() {
        assert!((logical_error_rate(27, 1e-3).unwrap() / 1e-15 - 1.0).abs() < 1e-9);
        assert!((logical_error_rate(23, 1e-3).unwrap() / 1e-13 - 1.0).abs() < 1e-9);
        assert!((logical_error_rate(1, 1e-3).unwrap() - 0.01).abs() < 1e-15);
        assert!(logical_error_rate(4, 1e-3).is_err());
        assert!(logical_error_rate(3, 0.02).is_err());
    }

    // Independent scan of the inequality, written out without the helper.
    fn scan(l: f64, e: f64, d: f64, p: f64) -> u64 {
        (3..)
            .step_by(2)
            .find(|&dp: &u64| {
                let pl = 0.1 * (100.0 * p).powf((dp as f64 + 1.0) / 2.0);
                l * (3.0 * (e + d) * pl + 1.8e-10) < 0.005
            })
            .unwrap()
    }

    #[test]
    fn test_pool_distance_matches_scan() {
        let l = (1u64 << 24) as f64;
        for e in [1.0, 13.0, 60.0, 100.0, 366.0, 367.0, 2000.0] {
            let got = choose_pool_distance(1 << 24, e, 27, 1e-3, MAGIC_STATE_BUDGET, MSD_ERROR).unwrap();
            assert_eq!(got, scan(l, e, 27.0, 1e-3), "E={e}");
        }
        assert_eq!(
            choose_pool_distance(1 << 24, 100.0, 27, 1e-3, 0.005, 1.8e-10).unwrap(),
            23
        );
        assert_eq!(
            choose_pool_distance(1 << 24, 367.0, 27, 1e-3, 0.005, 1.8e-10).unwrap(),
            25
        );
    }

    #[test]
    fn test_pool_distance_small_instance() {
        // d_pool = 3 gives 3 * 2 * 1e-3 = 6e-3 >= 0.005; 5 gives 6e-4.
        assert_eq!(choose_pool_distance(1, 1.0, 1, 1e-3, 0.005, 1.8e-10).unwrap(), 5);
        assert_eq!(scan(1.0, 1.0, 1.0, 1e-3), 5);
    }

    #[test]
    fn test_pool_distance_budget_exhausted() {
        assert!(matches!(
            choose_pool_distance(1 << 40, 100.0, 27, 1e-3, 0.005, 1.8e-10),
            Err(Error::BudgetExhausted { .. })
        ));
    }

    #[test]
    fn test_pool_overhead() {
        assert_eq!(pool_overhead_qubits(1, 23), 3174);
        assert!((3174.0 / FACTORY_QUBITS as f64 - 0.0932).abs() < 1e-4);
        assert_eq!(pool_overhead_qubits(0, 23), 0);
        assert_eq!(pool_overhead_qubits(2, 23), 6348);
        assert_eq!(70 * (FACTORY_QUBITS + pool_overhead_qubits(2, 23)), 2_828_000);
    }

    /// Sliding occupancy of an `n * m` pool: m lanes of n cells, each lane
    /// carrying one state that advances a cell per `d`-cycle slice and is
    /// in flight (held by no cell) during the last slice of the period.
    fn simulate_occupancy(n: u64, m: u64) -> f64 {
        let mut held = 0u64;
        for slice in 0..n {
            for _lane in 0..m {
                if slice + 1 < n {
                    held += 1;
                }
            }
        }
        held as f64 / n as f64
    }

    #[test]
    fn test_retained_states() {
        for (n, m) in [(3, 2), (1, 4), (2, 1), (5, 3)] {
            assert!((retained_states(n, m).unwrap() - simulate_occupancy(n, m)).abs() < 1e-12);
        }
        assert_eq!(retained_states(1, 7).unwrap(), 0.0);
        assert_eq!(retained_states(2, 1).unwrap(), 0.5);
        assert!(retained_states(0, 1).is_err());
    }
}
