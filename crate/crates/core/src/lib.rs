//! Time-cost simulation of magic-state distillation failures in parallel
//! fault-tolerant quantum programs, and of the magic-state pool that hides
//! them.
//!
//! Everything here is measured in surface-code cycles. Nothing simulates
//! quantum states; only when operations start and finish, and how much
//! space the factories and pools take.
//!
//! - [`analytic`]: closed forms for repeat-until-success execution time and
//!   the delay metrics used everywhere else.
//! - [`randcircuit`]: layered random circuits on a qubit plane with
//!   stochastic T-gate costs.
//! - [`distillation`]: the two-level distillation pipeline, completion-time
//!   distributions, the FIFO pool and the pool sizing formulas.
//! - [`distselect`]: the multiplexed SELECT workload: DAG construction,
//!   scheduling and delay-propagating execution.
//! - [`experiments`]: parameter sweeps, CSV rows and the space-time frontier.

pub mod analytic;
pub mod config;
pub mod distillation;
pub mod distselect;
mod error;
pub mod experiments;
pub mod randcircuit;
pub mod seed;

pub use error::{Error, Result};
