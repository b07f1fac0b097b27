//! Scenario driver for the similar-formation control library: parse a
//! TOML scenario, validate and certify the formation, simulate it, and
//! export trajectory, error, and summary files.

pub mod error;
pub mod export;
pub mod pipeline;
pub mod scenario;
pub mod summary;

pub use error::{RunError, RunResult};
pub use pipeline::{build_formation, certify, check, execute, leader_gate, Overrides, RunOutcome};
pub use scenario::{load_scenario, parse_scenario, Scenario, DEFAULT_SEED};
pub use summary::RunSummary;
