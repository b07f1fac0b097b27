//! The run summary written next to the trajectory files.

use serde::Serialize;

/// Headline facts of one completed run. Serialized as TOML so it stays
/// both machine- and human-readable.
#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub name: String,
    pub certified: bool,
    /// Final tracking error fell below the convergence tolerance.
    pub converged: bool,
    /// "static" or "maneuver".
    pub leader_mode: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub samples: usize,
    pub eigenvalue_min_real: f64,
    pub eigenvalue_max_real: f64,
    pub final_tracking_error: f64,
    /// Similarity pose fitted to the final configuration against the
    /// nominal shape.
    pub final_alpha: f64,
    pub final_theta: f64,
    pub final_b: [f64; 2],
    pub final_fit_residual: f64,
    pub wall_time_seconds: f64,
}

impl RunSummary {
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("summary serializes")
    }
}
