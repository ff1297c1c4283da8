//! Experiment harness for the pursuit-evasion simulator: batch rollouts,
//! SR/CT aggregation, trajectory logging, scene encoding, and baseline
//! gain tuning.

pub mod rollouts;
pub mod scene;
pub mod table;
pub mod trajectory;
pub mod tune;

pub use rollouts::{run_rollouts, MetricsTable, RolloutSpec};
