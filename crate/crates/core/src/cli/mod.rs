//! Command-line front end. Every subcommand writes its files into
//! `--out-dir` and finishes with a `manifest.json` listing them with hashes.
//!
//! Exit codes: 0 success, 1 numerical failure or failed comparison, 2 usage.

mod commands;
mod manifest;
mod reference;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::meshfield::{BoundarySpec, Condition, Geometry};
use crate::mmpde::SimConfig;

pub use commands::{
    ConstantsRow, PredictRow, ProfileSummary, SimulationSummary, SnapshotEntry, StabilityEntry,
    SweepRow, SWEEP_HEADER,
};
pub use manifest::{sha256_hex, OutputFile, Outputs, RunManifest, MANIFEST_NAME};
pub use reference::{reference, reproduce, Check, Reference, Report, Target, REFERENCE_JSON};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "memsquench",
    version,
    about = "Quenching of the fourth-order MEMS equation"
)]
pub struct Cli {
    /// Directory receiving every output file and the manifest.
    #[arg(long, global = true, default_value = "out")]
    pub out_dir: PathBuf,
    /// Worker threads for independent runs (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    pub jobs: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Principal eigenvalues and epsilon bounds for every geometry and condition.
    Constants,
    /// One adaptive simulation from u = 0.
    Simulate(SimulateArgs),
    /// Simulations over a list of epsilon values.
    Sweep(SweepArgs),
    /// Asymptotic touchdown locations, optionally against simulation.
    Predict(PredictArgs),
    /// Self-similar profile branches.
    Profiles(ProfilesArgs),
    /// Linear stability spectra of the similarity profiles.
    Stability(StabilityArgs),
    /// Compare a pipeline against the bundled reference values.
    Reproduce(ReproduceArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum GeometryArg {
    Strip,
    Disc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum BcArg {
    Clamped,
    Navier,
}

/// Problem and simulator knobs shared by the simulation commands.
#[derive(Debug, Clone, Args, Serialize)]
pub struct ModelArgs {
    #[arg(long, value_enum, default_value = "strip")]
    pub geometry: GeometryArg,
    #[arg(long, value_enum, default_value = "clamped")]
    pub bc: BcArg,
    /// Mesh intervals.
    #[arg(long, default_value_t = 24)]
    pub n: usize,
    #[arg(long, default_value_t = 1e-4)]
    pub gamma: f64,
    /// Minimum gap 1+u at which a run stops.
    #[arg(long, default_value_t = 1e-3)]
    pub threshold: f64,
}

impl ModelArgs {
    pub fn spec(&self) -> BoundarySpec {
        let g = match self.geometry {
            GeometryArg::Strip => Geometry::Strip,
            GeometryArg::Disc => Geometry::Disc,
        };
        let c = match self.bc {
            BcArg::Clamped => Condition::Clamped,
            BcArg::Navier => Condition::Navier,
        };
        BoundarySpec::new(g, c)
    }

    pub fn config(&self, epsilon: f64) -> SimConfig {
        let mut cfg = SimConfig::new(epsilon, self.spec(), self.n);
        cfg.gamma = self.gamma;
        cfg.touchdown_threshold = self.threshold;
        cfg
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long)]
    pub eps: f64,
    /// Physical times at which to write snapshots, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub snapshot_times: Vec<f64>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SweepArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Comma-separated epsilon values.
    #[arg(long, value_delimiter = ',', required = true)]
    pub eps: Vec<f64>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct PredictArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, value_delimiter = ',', required = true)]
    pub eps: Vec<f64>,
    /// Take `t_c` from a simulation and report the simulated locations too;
    /// otherwise `t_c = 1/3`.
    #[arg(long)]
    pub simulate: bool,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ProfilesArgs {
    /// Half-width of the similarity domain.
    #[arg(long, default_value_t = crate::selfsim::DEFAULT_LENGTH)]
    pub length: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct StabilityArgs {
    #[arg(long, default_value_t = crate::selfsim::DEFAULT_LENGTH)]
    pub length: f64,
    /// Leading eigenvalues per branch.
    #[arg(long, default_value_t = 8)]
    pub modes: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ReproduceArgs {
    #[arg(long, value_enum)]
    pub target: Target,
}

/// Parses `args` (program name first) and runs the command; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match commands::execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_FAILURE
        }
    }
}
