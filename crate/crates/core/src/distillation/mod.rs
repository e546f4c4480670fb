//! Magic-state factories: how long outputs take, how pools absorb the
//! variation, and what pools cost.

mod budget;
mod completion;
mod factory;
mod pipeline;

pub use budget::{
    choose_pool_distance, logical_error_rate, pool_overhead_qubits, retained_states, FACTORY_QUBITS,
    MAGIC_STATE_BUDGET, MSD_ERROR,
};
pub use completion::{sample_completion_stream, CompletionDistribution, CompletionStream, ExtraSampler};
pub use factory::{Pool, PooledFactory, ScheduledFactory};
pub use pipeline::{run_pipeline, simulate_pipeline, Mitigation, PipelineConfig, PipelineRun};
