use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::manifest::Outputs;
use super::reference::{c0_sweep, reproduce};
use super::{
    Cli, Command, PredictArgs, ProfilesArgs, ReproduceArgs, SimulateArgs, StabilityArgs, SweepArgs,
};
use super::{EXIT_FAILURE, EXIT_OK};
use crate::error::{Error, Result};
use crate::meshfield::{write_snapshot, Condition, Geometry, SnapshotMeta};
use crate::mmpde::{classify, integrate, Outcome, Regime, SimConfig, SimResult, StepStats};
use crate::selfsim::{
    constant_state_spectrum, far_field_c1, find_branches, stability_spectrum, Branch,
    SimilarityCase, Spectrum,
};
use crate::smalltime::{
    predict_touchdown, solve_layer_hierarchy, touchdown_constants, DEFAULT_LAYER_GRID,
    DEFAULT_LAYER_LENGTH,
};
use crate::spectral::{epsilon_bar, principal_eigenpair};

pub(super) fn execute(cli: &Cli) -> Result<i32> {
    let mut out = Outputs::create(&cli.out_dir)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.jobs)
        .build()
        .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
    let (name, args, result) = pool.install(|| match &cli.command {
        Command::Constants => ("constants", Value::Null, constants(&mut out)),
        Command::Simulate(a) => ("simulate", echo(a), simulate(a, &mut out)),
        Command::Sweep(a) => ("sweep", echo(a), sweep(a, &mut out)),
        Command::Predict(a) => ("predict", echo(a), predict(a, &mut out)),
        Command::Profiles(a) => ("profiles", echo(a), profiles(a, &mut out)),
        Command::Stability(a) => ("stability", echo(a), stability(a, &mut out)),
        Command::Reproduce(a) => ("reproduce", echo(a), reproduce_cmd(a, &mut out)),
    });
    let config = json!({ "args": args, "jobs": cli.jobs, "out_dir": cli.out_dir });
    let error = result.as_ref().err().map(|e| e.to_string());
    out.finish(name, config, error)?;
    result
}

fn echo<T: Serialize>(a: &T) -> Value {
    serde_json::to_value(a).unwrap_or(Value::Null)
}

fn num(v: f64) -> String {
    format!("{v:.17e}")
}

fn opt(v: Option<f64>) -> String {
    v.map(num).unwrap_or_default()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstantsRow {
    pub geometry: Geometry,
    pub condition: Condition,
    pub mu0: f64,
    pub xi: f64,
    pub epsilon_bar: f64,
}

fn constants(out: &mut Outputs) -> Result<i32> {
    let mut rows = Vec::new();
    for spec in crate::meshfield::BoundarySpec::ALL {
        let p = principal_eigenpair(spec)?;
        rows.push(ConstantsRow {
            geometry: spec.geometry,
            condition: spec.condition,
            mu0: p.mu0,
            xi: p.xi,
            epsilon_bar: epsilon_bar(p.mu0),
        });
    }
    let mut csv = String::from("geometry,condition,mu0,xi,epsilon_bar\n");
    for r in &rows {
        let g = serde_json::to_value(r.geometry)?;
        let c = serde_json::to_value(r.condition)?;
        let _ = writeln!(
            csv,
            "{},{},{},{},{}",
            g.as_str().unwrap_or_default(),
            c.as_str().unwrap_or_default(),
            num(r.mu0),
            num(r.xi),
            num(r.epsilon_bar)
        );
        println!(
            "{:?}/{:?}: mu0 {:.4} epsilon_bar {:.4}",
            r.geometry, r.condition, r.mu0, r.epsilon_bar
        );
    }
    out.write_json("constants.json", &rows)?;
    out.write("constants.csv", &csv)?;
    Ok(EXIT_OK)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotEntry {
    pub file: String,
    pub t: f64,
    pub tau: f64,
    pub min_gap: f64,
}

/// `result.json` of `simulate`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationSummary {
    pub config: SimConfig,
    pub outcome: Outcome,
    pub t_c: Option<f64>,
    pub touchdown_points: Vec<f64>,
    pub regime: Option<Regime>,
    pub final_time: f64,
    pub final_tau: f64,
    pub final_min_gap: f64,
    pub stats: StepStats,
    pub snapshots: Vec<SnapshotEntry>,
}

fn simulate(a: &SimulateArgs, out: &mut Outputs) -> Result<i32> {
    let mut cfg = a.model.config(a.eps);
    cfg.snapshot_times = a.snapshot_times.clone();
    let r = integrate(&cfg)?;
    let mut entries = Vec::new();
    for (k, s) in r.snapshots.iter().enumerate() {
        let stem = format!("snapshot_{k:03}");
        let meta = SnapshotMeta {
            time: s.t,
            epsilon: cfg.epsilon,
            spec: cfg.spec,
        };
        write_snapshot(&out.dir().join(&stem), &s.field, &meta)?;
        out.record(&format!("{stem}.csv"));
        out.record(&format!("{stem}.json"));
        entries.push(SnapshotEntry {
            file: format!("{stem}.csv"),
            t: s.t,
            tau: s.tau,
            min_gap: s.min_gap,
        });
    }
    let mut hist = String::from("t,min_gap\n");
    for (t, g) in &r.min_gap_history {
        let _ = writeln!(hist, "{},{}", num(*t), num(*g));
    }
    out.write("history.csv", &hist)?;
    let summary = summarize(&r, entries);
    println!(
        "{:?}: t_c {:?} points {:?} ({} steps)",
        summary.outcome, summary.t_c, summary.touchdown_points, summary.stats.accepted
    );
    out.write_json("result.json", &summary)?;
    Ok(EXIT_OK)
}

fn summarize(r: &SimResult, snapshots: Vec<SnapshotEntry>) -> SimulationSummary {
    let last = r.final_snapshot();
    SimulationSummary {
        config: r.config.clone(),
        outcome: r.outcome,
        t_c: r.t_c,
        touchdown_points: r.touchdown_points.clone(),
        regime: (r.outcome == Outcome::Touchdown).then(|| classify(&r.touchdown_points)),
        final_time: last.t,
        final_tau: r.final_tau,
        final_min_gap: last.min_gap,
        stats: r.stats,
        snapshots,
    }
}

/// One row of `sweep.csv`; `error` is set when that run failed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub epsilon: f64,
    pub outcome: Option<Outcome>,
    pub t_c: Option<f64>,
    pub touchdown_points: Vec<f64>,
    pub error: Option<String>,
}

pub const SWEEP_HEADER: &str = "epsilon,outcome,t_c,n_points,x_c_1,x_c_2,error";

fn sweep(a: &SweepArgs, out: &mut Outputs) -> Result<i32> {
    let rows: Vec<SweepRow> = a
        .eps
        .par_iter()
        .map(|&eps| match integrate(&a.model.config(eps)) {
            Ok(r) => SweepRow {
                epsilon: eps,
                outcome: Some(r.outcome),
                t_c: r.t_c,
                touchdown_points: r.touchdown_points,
                error: None,
            },
            Err(e) => SweepRow {
                epsilon: eps,
                outcome: None,
                t_c: None,
                touchdown_points: Vec::new(),
                error: Some(e.to_string()),
            },
        })
        .collect();
    let mut csv = format!("{SWEEP_HEADER}\n");
    for r in &rows {
        let outcome = r.outcome.map(|o| format!("{o:?}")).unwrap_or_default();
        let error = r.error.as_deref().unwrap_or("").replace([',', '\n'], ";");
        let _ = writeln!(
            csv,
            "{},{outcome},{},{},{},{},{error}",
            num(r.epsilon),
            opt(r.t_c),
            r.touchdown_points.len(),
            opt(r.touchdown_points.first().copied()),
            opt(r.touchdown_points.get(1).copied()),
        );
        println!(
            "eps {}: {outcome} t_c {:?} points {:?}",
            r.epsilon, r.t_c, r.touchdown_points
        );
    }
    out.write("sweep.csv", &csv)?;
    out.write_json("sweep.json", &rows)?;
    let failed = rows.iter().filter(|r| r.error.is_some()).count();
    Ok(if failed == rows.len() {
        EXIT_FAILURE
    } else {
        EXIT_OK
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictRow {
    pub epsilon: f64,
    pub t_c: f64,
    /// Outermost predicted location.
    pub predicted: Option<f64>,
    /// Outermost simulated location, with `--simulate`.
    pub simulated: Option<f64>,
    /// `|predicted - simulated| / (1 - simulated)`.
    pub boundary_rel_error: Option<f64>,
    pub error: Option<String>,
}

fn predict(a: &PredictArgs, out: &mut Outputs) -> Result<i32> {
    let spec = a.model.spec();
    let layers = solve_layer_hierarchy(spec, DEFAULT_LAYER_LENGTH, DEFAULT_LAYER_GRID)?;
    let k = touchdown_constants(&layers)?;
    out.write_json("layer_constants.json", &k)?;
    let outer = |pts: &[f64]| {
        pts.iter()
            .map(|x| x.abs())
            .fold(None, |m: Option<f64>, x| Some(m.map_or(x, |m| m.max(x))))
    };
    let rows: Vec<PredictRow> = a
        .eps
        .par_iter()
        .map(|&eps| {
            let mut row = PredictRow {
                epsilon: eps,
                t_c: 1.0 / 3.0,
                predicted: None,
                simulated: None,
                boundary_rel_error: None,
                error: None,
            };
            if a.simulate {
                match integrate(&a.model.config(eps)) {
                    Ok(r) if r.outcome == Outcome::Touchdown => {
                        row.t_c = r.t_c.unwrap_or(r.final_time());
                        row.simulated = outer(&r.touchdown_points);
                    }
                    Ok(r) => {
                        row.error = Some(format!("no touchdown: {:?}", r.outcome));
                        return row;
                    }
                    Err(e) => {
                        row.error = Some(e.to_string());
                        return row;
                    }
                }
            }
            match predict_touchdown(&k, eps, row.t_c) {
                Ok(p) => row.predicted = outer(&p),
                Err(e) => row.error = Some(e.to_string()),
            }
            if let (Some(p), Some(s)) = (row.predicted, row.simulated) {
                row.boundary_rel_error = Some((p - s).abs() / (1.0 - s));
            }
            row
        })
        .collect();
    let mut csv = String::from("epsilon,t_c,predicted,simulated,boundary_rel_error,error\n");
    for r in &rows {
        let error = r.error.as_deref().unwrap_or("").replace([',', '\n'], ";");
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{error}",
            num(r.epsilon),
            num(r.t_c),
            opt(r.predicted),
            opt(r.simulated),
            opt(r.boundary_rel_error)
        );
        println!(
            "eps {}: predicted {:?} simulated {:?} rel {:?}",
            r.epsilon, r.predicted, r.simulated, r.boundary_rel_error
        );
    }
    out.write("predict.csv", &csv)?;
    out.write_json("predict.json", &rows)?;
    let failed = rows.iter().filter(|r| r.error.is_some()).count();
    Ok(if failed == rows.len() {
        EXIT_FAILURE
    } else {
        EXIT_OK
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileSummary {
    pub case: SimilarityCase,
    pub branch: Branch,
    pub c0: f64,
    pub c0_fit: f64,
    pub c1: f64,
    pub residual_norm: f64,
    pub critical_points: usize,
    pub file: String,
}

fn case_name(case: SimilarityCase) -> &'static str {
    match case {
        SimilarityCase::Line => "line",
        SimilarityCase::RadialOrigin => "radial",
    }
}

fn profiles(a: &ProfilesArgs, out: &mut Outputs) -> Result<i32> {
    let mut summary = Vec::new();
    for case in [SimilarityCase::Line, SimilarityCase::RadialOrigin] {
        let found = find_branches(
            case,
            &c0_sweep(),
            a.length,
            case.default_intervals(a.length),
            1e-3,
        );
        if found.is_empty() {
            return Err(Error::NoConvergence {
                iterations: 0,
                residual: f64::NAN,
            });
        }
        for (k, p) in found.iter().enumerate() {
            let file = format!("profile_{}_{k}.csv", case_name(case));
            let mut csv = String::from("eta,v\n");
            for (e, v) in p.eta.iter().zip(&p.vbar) {
                let _ = writeln!(csv, "{},{}", num(*e), num(*v));
            }
            out.write(&file, &csv)?;
            println!("{case:?} {:?}: c0 {:.4}", p.branch, p.c0);
            summary.push(ProfileSummary {
                case,
                branch: p.branch,
                c0: p.c0,
                c0_fit: p.c0_fit,
                c1: far_field_c1(p.c0),
                residual_norm: p.residual_norm,
                critical_points: p.critical_points(),
                file,
            });
        }
    }
    out.write_json("profiles.json", &summary)?;
    Ok(EXIT_OK)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilityEntry {
    pub case: SimilarityCase,
    /// `None` for the constant state `v = 3^{1/3}`.
    pub branch: Option<Branch>,
    pub c0: Option<f64>,
    pub spectrum: Spectrum,
}

fn stability(a: &StabilityArgs, out: &mut Outputs) -> Result<i32> {
    let mut entries = Vec::new();
    for case in [SimilarityCase::Line, SimilarityCase::RadialOrigin] {
        let n = case.default_intervals(a.length);
        for p in find_branches(case, &c0_sweep(), a.length, n, 1e-3) {
            let spectrum = stability_spectrum(&p, a.modes)?;
            println!("{case:?} c0 {:.4}: {:?}", p.c0, spectrum.eigenvalues());
            entries.push(StabilityEntry {
                case,
                branch: Some(p.branch),
                c0: Some(p.c0),
                spectrum,
            });
        }
        entries.push(StabilityEntry {
            case,
            branch: None,
            c0: None,
            spectrum: constant_state_spectrum(case, a.length, n, a.modes)?,
        });
    }
    let mut csv = String::from("case,c0,index,real,imag\n");
    for e in &entries {
        for (k, m) in e.spectrum.modes.iter().enumerate() {
            let _ = writeln!(
                csv,
                "{},{},{k},{},{}",
                case_name(e.case),
                opt(e.c0),
                num(m.value),
                num(m.imag)
            );
        }
    }
    out.write("stability.csv", &csv)?;
    out.write_json("stability.json", &entries)?;
    Ok(EXIT_OK)
}

fn reproduce_cmd(a: &ReproduceArgs, out: &mut Outputs) -> Result<i32> {
    let report = reproduce(a.target)?;
    let mut csv = String::from("name,expected,got,tol,relative,pass,origin\n");
    for c in &report.checks {
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{}",
            c.name,
            num(c.expected),
            opt(c.got),
            num(c.tol),
            c.relative,
            c.pass,
            c.origin
        );
        println!(
            "{} {}: expected {} got {:?}",
            if c.pass { "PASS" } else { "FAIL" },
            c.name,
            c.expected,
            c.got
        );
    }
    println!("{}/{} within tolerance", report.passed, report.total);
    out.write("report.csv", &csv)?;
    out.write_json("report.json", &report)?;
    Ok(if report.all_pass() {
        EXIT_OK
    } else {
        EXIT_FAILURE
    })
}
