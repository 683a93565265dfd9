//! Adaptive moving-mesh simulation of `u_t = -eps^2 Laplacian^2 u - 1/(1+u)^2`
//! from `u = 0` to touchdown or a steady state.

mod config;
pub mod dae;
mod integrate;
mod monitor;
mod touchdown;

pub use config::SimConfig;
pub use dae::{Dae, Layout};
pub use integrate::{extrapolate_tc, integrate, Outcome, SimResult, Snapshot, StepStats};
pub use monitor::{monitor, MonitorSample};
pub use touchdown::{
    classify, extract_touchdown_points, find_epsilon_c, local_minima, local_minima_points,
    touchdown_regime, EpsilonCritical, EpsilonSearch, Regime,
};
