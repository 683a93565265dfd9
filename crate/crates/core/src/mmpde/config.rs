use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::meshfield::BoundarySpec;

/// Simulation parameters. Defaults follow the adaptive runs of the strip and
/// disc experiments; only `epsilon`, `spec` and `n_intervals` are required.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub epsilon: f64,
    pub spec: BoundarySpec,
    /// Number of mesh intervals (`N + 1` for `N` interior nodes).
    pub n_intervals: usize,
    /// Mesh relaxation time.
    pub gamma: f64,
    /// Stop once the smallest nodal `1 + u` falls to this value.
    pub touchdown_threshold: f64,
    /// Steady state once `max |u_t|` over the nodes falls below this.
    pub steady_tol: f64,
    pub rtol: f64,
    pub atol: f64,
    /// Computational-time horizon.
    pub tau_max: f64,
    pub max_steps: usize,
    /// Physical times at which to record snapshots.
    #[serde(default)]
    pub snapshot_times: Vec<f64>,
    /// Minimum-gap levels at which to record snapshots.
    #[serde(default)]
    pub snapshot_gaps: Vec<f64>,
}

impl SimConfig {
    pub fn new(epsilon: f64, spec: BoundarySpec, n_intervals: usize) -> Self {
        Self {
            epsilon,
            spec,
            n_intervals,
            gamma: 1e-4,
            touchdown_threshold: 1e-3,
            steady_tol: 1e-6,
            rtol: 1e-6,
            atol: 1e-10,
            tau_max: 1e4,
            max_steps: 200_000,
            snapshot_times: Vec::new(),
            snapshot_gaps: Vec::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidConfig(msg));
        if !(self.epsilon > 0.0) {
            return fail(format!("epsilon must be positive, got {}", self.epsilon));
        }
        if !(self.gamma > 0.0) {
            return fail(format!("gamma must be positive, got {}", self.gamma));
        }
        if !(self.touchdown_threshold > 0.0 && self.touchdown_threshold < 1.0) {
            return fail(format!(
                "threshold must lie in (0, 1), got {}",
                self.touchdown_threshold
            ));
        }
        if self.n_intervals < 2 {
            return fail(format!(
                "need at least 2 intervals, got {}",
                self.n_intervals
            ));
        }
        if !(self.rtol > 0.0 && self.atol > 0.0 && self.steady_tol > 0.0 && self.tau_max > 0.0) {
            return fail("tolerances and tau_max must be positive".into());
        }
        if self.snapshot_gaps.iter().any(|g| !(*g > 0.0 && *g < 1.0)) {
            return fail("snapshot gaps must lie in (0, 1)".into());
        }
        Ok(())
    }
}
