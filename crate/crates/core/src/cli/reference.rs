//! Published reference values and the comparisons behind `reproduce`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::meshfield::{BoundarySpec, Condition, Geometry};
use crate::mmpde::{integrate, Outcome, SimConfig};
use crate::selfsim::{find_branches, solve_similarity, stability_spectrum, SimilarityCase};
use crate::smalltime::{
    solve_layer_hierarchy, touchdown_constants, Corrections, DEFAULT_LAYER_GRID,
    DEFAULT_LAYER_LENGTH,
};
use crate::spectral::{epsilon_bar, principal_eigenpair};

pub const REFERENCE_JSON: &str = include_str!("../../data/reference.json");

#[derive(Debug, Clone, Deserialize)]
pub struct Reference {
    pub version: u32,
    pub table1: Table1,
    pub table2: Table2,
    pub constants_eta: ConstantsEta,
    pub c0: C0,
    pub fig_touchdown: FigTouchdown,
}

#[derive(Debug, Clone, Deserialize)]
pub struct Table1 {
    pub origin: String,
    pub rel_tol: f64,
    pub rows: Vec<Table1Row>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct Table1Row {
    pub geometry: Geometry,
    pub condition: Condition,
    pub mu0: f64,
    pub epsilon_bar: f64,
}

#[derive(Debug, Clone, Deserialize)]
pub struct Table2 {
    pub origin: String,
    pub abs_tol: f64,
    pub length: f64,
    pub intervals: usize,
    pub branches: Vec<Table2Branch>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct Table2Branch {
    pub c0_init: f64,
    pub c0: f64,
    pub eigenvalues: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct ConstantsEta {
    pub origin: String,
    pub abs_tol: f64,
    pub rows: Vec<EtaRow>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct EtaRow {
    pub geometry: Geometry,
    pub condition: Condition,
    pub eta0: f64,
    pub first: f64,
    pub second: f64,
}

#[derive(Debug, Clone, Deserialize)]
pub struct C0 {
    pub origin: String,
    pub abs_tol: f64,
    pub line: Vec<f64>,
    pub radial: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct FigTouchdown {
    pub origin: String,
    pub runs: Vec<TouchdownRun>,
}

#[derive(Debug, Clone, Deserialize)]
pub struct TouchdownRun {
    pub epsilon: f64,
    pub n: usize,
    pub outcome: Outcome,
    pub t_c: Option<f64>,
    pub t_c_tol: Option<f64>,
    pub points: Option<Vec<f64>>,
    pub x_tol: Option<f64>,
    pub n_points: Option<usize>,
}

pub fn reference() -> Result<Reference> {
    Ok(serde_json::from_str(REFERENCE_JSON)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum Target {
    Table1,
    Table2,
    ConstantsEta,
    C0,
    FigTouchdown,
}

/// One compared quantity; `got` is `None` when the computation failed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub expected: f64,
    pub got: Option<f64>,
    pub tol: f64,
    pub relative: bool,
    pub origin: String,
    pub pass: bool,
    pub note: Option<String>,
}

impl Check {
    fn new(
        name: String,
        expected: f64,
        got: Option<f64>,
        tol: f64,
        relative: bool,
        origin: &str,
    ) -> Self {
        let pass = got.is_some_and(|g| {
            let scale = if relative { expected.abs() } else { 1.0 };
            (g - expected).abs() <= tol * scale
        });
        Self {
            name,
            expected,
            got,
            tol,
            relative,
            origin: origin.to_string(),
            pass,
            note: None,
        }
    }

    fn failed(name: String, expected: f64, tol: f64, origin: &str, err: &Error) -> Self {
        let mut c = Self::new(name, expected, None, tol, false, origin);
        c.note = Some(err.to_string());
        c
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub target: Target,
    pub passed: usize,
    pub total: usize,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn all_pass(&self) -> bool {
        self.passed == self.total
    }
}

pub fn reproduce(target: Target) -> Result<Report> {
    let r = reference()?;
    let checks = match target {
        Target::Table1 => table1(&r.table1),
        Target::Table2 => table2(&r.table2),
        Target::ConstantsEta => constants_eta(&r.constants_eta),
        Target::C0 => c0(&r.c0),
        Target::FigTouchdown => fig_touchdown(&r.fig_touchdown),
    };
    Ok(Report {
        target,
        passed: checks.iter().filter(|c| c.pass).count(),
        total: checks.len(),
        checks,
    })
}

fn label(spec: BoundarySpec) -> String {
    format!("{:?}/{:?}", spec.geometry, spec.condition).to_lowercase()
}

fn table1(t: &Table1) -> Vec<Check> {
    let mut out = Vec::new();
    for row in &t.rows {
        let spec = BoundarySpec::new(row.geometry, row.condition);
        match principal_eigenpair(spec) {
            Ok(p) => {
                out.push(Check::new(
                    format!("mu0 {}", label(spec)),
                    row.mu0,
                    Some(p.mu0),
                    t.rel_tol,
                    true,
                    &t.origin,
                ));
                out.push(Check::new(
                    format!("epsilon_bar {}", label(spec)),
                    row.epsilon_bar,
                    Some(epsilon_bar(p.mu0)),
                    t.rel_tol,
                    true,
                    &t.origin,
                ));
            }
            Err(e) => out.push(Check::failed(
                format!("mu0 {}", label(spec)),
                row.mu0,
                t.rel_tol,
                &t.origin,
                &e,
            )),
        }
    }
    out
}

fn table2(t: &Table2) -> Vec<Check> {
    let per_branch: Vec<Vec<Check>> = t
        .branches
        .par_iter()
        .map(|b| {
            let name = |k: usize| format!("c0 {:.4} mode {k}", b.c0);
            let spectrum = solve_similarity(SimilarityCase::Line, b.c0_init, t.length, t.intervals)
                .and_then(|p| stability_spectrum(&p, b.eigenvalues.len()));
            match spectrum {
                Ok(s) => {
                    let got = s.eigenvalues();
                    b.eigenvalues
                        .iter()
                        .enumerate()
                        .map(|(k, &e)| {
                            Check::new(name(k), e, got.get(k).copied(), t.abs_tol, false, &t.origin)
                        })
                        .collect()
                }
                Err(e) => b
                    .eigenvalues
                    .iter()
                    .enumerate()
                    .map(|(k, &v)| Check::failed(name(k), v, t.abs_tol, &t.origin, &e))
                    .collect(),
            }
        })
        .collect();
    per_branch.into_iter().flatten().collect()
}

fn constants_eta(t: &ConstantsEta) -> Vec<Check> {
    let mut out = Vec::new();
    for row in &t.rows {
        let spec = BoundarySpec::new(row.geometry, row.condition);
        let names = ["eta0", "first correction", "second correction"]
            .map(|n| format!("{n} {}", label(spec)));
        let expected = [row.eta0, row.first, row.second];
        let got = solve_layer_hierarchy(spec, DEFAULT_LAYER_LENGTH, DEFAULT_LAYER_GRID)
            .and_then(|p| touchdown_constants(&p));
        match got {
            Ok(k) => {
                let (a, b) = match k.corrections {
                    Corrections::Strip { eta1, eta2 } => (eta1, eta2),
                    Corrections::Disc {
                        eta_quarter,
                        eta_half,
                    } => (eta_quarter, eta_half),
                };
                for ((name, e), g) in names.into_iter().zip(expected).zip([k.eta0, a, b]) {
                    out.push(Check::new(name, e, Some(g), t.abs_tol, false, &t.origin));
                }
            }
            Err(err) => {
                for (name, e) in names.into_iter().zip(expected) {
                    out.push(Check::failed(name, e, t.abs_tol, &t.origin, &err));
                }
            }
        }
    }
    out
}

/// Initial amplitudes for the branch search.
pub fn c0_sweep() -> Vec<f64> {
    (1..=40).map(|k| 0.05 * k as f64).collect()
}

fn c0(t: &C0) -> Vec<Check> {
    let mut out = Vec::new();
    for (case, expected) in [
        (SimilarityCase::Line, &t.line),
        (SimilarityCase::RadialOrigin, &t.radial),
    ] {
        let length = crate::selfsim::DEFAULT_LENGTH;
        let found = find_branches(
            case,
            &c0_sweep(),
            length,
            case.default_intervals(length),
            1e-3,
        );
        let mut count = Check::new(
            format!("{case:?} branch count"),
            expected.len() as f64,
            Some(found.len() as f64),
            0.0,
            false,
            &t.origin,
        );
        count.note = Some(format!(
            "{:?}",
            found.iter().map(|p| p.c0).collect::<Vec<_>>()
        ));
        out.push(count);
        for &e in expected {
            let nearest = found
                .iter()
                .map(|p| p.c0)
                .min_by(|a, b| (a - e).abs().total_cmp(&(b - e).abs()));
            out.push(Check::new(
                format!("{case:?} c0"),
                e,
                nearest,
                t.abs_tol,
                false,
                &t.origin,
            ));
        }
    }
    out
}

fn fig_touchdown(t: &FigTouchdown) -> Vec<Check> {
    let spec = BoundarySpec::new(Geometry::Strip, Condition::Clamped);
    let runs: Vec<Vec<Check>> = t
        .runs
        .par_iter()
        .map(|run| {
            let tag = |what: &str| format!("eps {} {what}", run.epsilon);
            let res = match integrate(&SimConfig::new(run.epsilon, spec, run.n)) {
                Ok(r) => r,
                Err(e) => return vec![Check::failed(tag("outcome"), 1.0, 0.0, &t.origin, &e)],
            };
            let mut out = Vec::new();
            let mut oc = Check::new(
                tag("outcome"),
                1.0,
                Some((res.outcome == run.outcome) as u8 as f64),
                0.0,
                false,
                &t.origin,
            );
            oc.note = Some(format!("expected {:?}, got {:?}", run.outcome, res.outcome));
            out.push(oc);
            if let (Some(tc), Some(tol)) = (run.t_c, run.t_c_tol) {
                out.push(Check::new(tag("t_c"), tc, res.t_c, tol, false, &t.origin));
            }
            if let (Some(points), Some(tol)) = (&run.points, run.x_tol) {
                for (k, &p) in points.iter().enumerate() {
                    out.push(Check::new(
                        tag(&format!("x_c[{k}]")),
                        p,
                        res.touchdown_points.get(k).copied(),
                        tol,
                        false,
                        &t.origin,
                    ));
                }
            }
            if let Some(n) = run.n_points {
                let mut c = Check::new(
                    tag("touchdown point count"),
                    n as f64,
                    Some(res.touchdown_points.len() as f64),
                    0.0,
                    false,
                    &t.origin,
                );
                c.note = Some(format!("{:?}", res.touchdown_points));
                out.push(c);
            }
            out
        })
        .collect();
    runs.into_iter().flatten().collect()
}
