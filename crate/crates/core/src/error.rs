use thiserror::Error;

/// Every failure mode surfaced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is singular to working precision (pivot {pivot} at row {row})")]
    SingularMatrix { row: usize, pivot: f64 },

    #[error("iteration did not converge after {iterations} steps (last residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("bracket [{a}, {b}] does not enclose a sign change")]
    InvalidBracket { a: f64, b: f64 },

    #[error("argument {0} is outside the supported range")]
    OutOfRange(f64),

    #[error("adaptive quadrature failed to reach tolerance {tol:e} (estimate {estimate:e})")]
    QuadFailure { tol: f64, estimate: f64 },

    #[error("point {0} lies outside the domain")]
    OutOfDomain(f64),

    #[error("mesh tangled: interval {interval} has width {width:e}")]
    MeshTangled { interval: usize, width: f64 },

    #[error("gap 1+u = {gap:e} reached at node {node}")]
    TouchdownReached { node: usize, gap: f64 },

    #[error("step size underflow at tau = {tau:e} (h = {h:e}): {reason}")]
    StiffnessFailure { tau: f64, h: f64, reason: String },

    #[error("bound requires epsilon < {epsilon_bar}, got {epsilon}")]
    BoundInapplicable { epsilon: f64, epsilon_bar: f64 },

    #[error("layer truncation too short: |v'(L)| = {slope:e}")]
    TruncationTooSmall { slope: f64 },

    #[error("no interior critical point of the leading layer profile")]
    NoCriticalPoint,

    #[error("predicted touchdown location {0} lies outside the domain")]
    PredictionOutOfRange(f64),

    #[error("Newton iterate left the admissible set: {0}")]
    IterateInvalid(String),

    #[error("unsupported request: {0}")]
    Unsupported(String),

    #[error("time {t} is not before the touchdown time {t_c}")]
    InvalidTime { t: f64, t_c: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
