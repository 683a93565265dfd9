//! Self-similar quenching profiles `u = -1 + (t_c - t)^{1/3} v(eta)`,
//! `eta = (x - x_c) / (eps^{1/2} (t_c - t)^{1/4})`, their far-field series and
//! linear stability.

mod rescale;
mod stability;
mod system;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numkit::{newton_solve, NewtonSettings};
use system::System;

pub use rescale::{profile_distance, rescale_snapshot};
pub use stability::{
    constant_state_spectrum, eigenvector, stability_spectrum, Mode, Parity, Spectrum,
};

pub const DEFAULT_LENGTH: f64 = 50.0;
/// Grid step shared by both cases. Residual rows scale like `v / h^4` with
/// `v ~ c0 L^{4/3}`, so a finer step lifts the round-off floor above `1e-8`.
pub const DEFAULT_STEP: f64 = 0.1;
/// Largest acceptable residual once Newton has stalled on round-off.
const ACCEPT_RESIDUAL: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SimilarityCase {
    /// Even profile on `[-L, L]`.
    Line,
    /// Radially symmetric profile on `[0, L]` centred at the origin.
    RadialOrigin,
}

impl SimilarityCase {
    /// Interval count giving `DEFAULT_STEP` on a domain of half-width `length`.
    pub fn default_intervals(self, length: f64) -> usize {
        let span = match self {
            SimilarityCase::Line => 2.0 * length,
            SimilarityCase::RadialOrigin => length,
        };
        let n = (span / DEFAULT_STEP).round() as usize;
        n + n % 2
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Branch {
    Monotone,
    Dimpled,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimilarityProfile {
    pub case: SimilarityCase,
    pub length: f64,
    pub n: usize,
    pub eta: Vec<f64>,
    pub vbar: Vec<f64>,
    /// `v(L) / L^{4/3}`
    pub c0: f64,
    /// Least-squares `c0` over the outer tenth of the grid.
    pub c0_fit: f64,
    pub branch: Branch,
    pub residual_norm: f64,
    /// Full unknown vector including ghost values.
    pub(crate) state: Vec<f64>,
}

impl SimilarityProfile {
    pub fn step(&self) -> f64 {
        self.eta[1] - self.eta[0]
    }

    /// Profile value at `eta` (`|eta|` in the radial case) by local cubic
    /// interpolation; `None` outside the grid.
    pub fn eval(&self, eta: f64) -> Option<f64> {
        let e = match self.case {
            SimilarityCase::Line => eta,
            SimilarityCase::RadialOrigin => eta.abs(),
        };
        let (a, h) = (self.eta[0], self.step());
        let pos = (e - a) / h;
        if !(pos >= 0.0 && pos <= self.n as f64) {
            return None;
        }
        let base = ((pos.floor() as isize) - 1).clamp(0, self.n as isize - 3) as usize;
        let mut acc = 0.0;
        for i in 0..4 {
            let mut w = 1.0;
            for k in 0..4 {
                if i != k {
                    w *= (pos - (base + k) as f64) / (i as f64 - k as f64);
                }
            }
            acc += w * self.vbar[base + i];
        }
        Some(acc)
    }

    /// Centered first derivative at the nodes.
    pub fn derivative(&self) -> Vec<f64> {
        let sys = System {
            case: self.case,
            n: self.n,
            h: self.step(),
            eta: self.eta.clone(),
        };
        (0..=self.n as isize)
            .map(|j| (self.state[sys.col(j + 1)] - self.state[sys.col(j - 1)]) / (2.0 * sys.h))
            .collect()
    }

    /// Interior-equation residuals at every node.
    pub fn interior_residual(&self) -> Result<Vec<f64>> {
        let sys = System::new(self.case, self.length, self.n)?;
        Ok(sys
            .rows(&self.state)?
            .into_iter()
            .filter(|r| r.node.is_some())
            .map(|r| r.value)
            .collect())
    }

    /// Number of critical points, counting the symmetry point of the radial case.
    pub fn critical_points(&self) -> usize {
        count_critical_points(self.case, &self.vbar)
    }
}

fn count_critical_points(case: SimilarityCase, v: &[f64]) -> usize {
    let diffs: Vec<f64> = v
        .windows(2)
        .map(|w| w[1] - w[0])
        .filter(|d| *d != 0.0)
        .collect();
    let changes = diffs
        .windows(2)
        .filter(|w| w[0].signum() != w[1].signum())
        .count();
    match case {
        SimilarityCase::Line => changes,
        SimilarityCase::RadialOrigin => changes + 1,
    }
}

/// `(c0^3 eta^4 + 3)^{1/3}`
pub fn initial_guess(c0: f64, eta: &[f64]) -> Vec<f64> {
    eta.iter()
        .map(|e| (c0.powi(3) * e.powi(4) + 3.0).cbrt())
        .collect()
}

/// `c1 = 40 c0 / 81 + c0^-2`
pub fn far_field_c1(c0: f64) -> f64 {
    40.0 * c0 / 81.0 + 1.0 / (c0 * c0)
}

/// `c0 |eta|^{4/3} (+ c1 |eta|^{-8/3})` for `n_terms` in 1..=2.
pub fn far_field_series(c0: f64, eta: f64, n_terms: usize) -> Result<f64> {
    let a = eta.abs();
    match n_terms {
        1 => Ok(c0 * a.powf(4.0 / 3.0)),
        2 => Ok(c0 * a.powf(4.0 / 3.0) + far_field_c1(c0) * a.powf(-8.0 / 3.0)),
        _ => Err(Error::Unsupported(format!(
            "far-field series has only two known coefficients, {n_terms} requested"
        ))),
    }
}

pub fn solve_similarity(
    case: SimilarityCase,
    c0_init: f64,
    length: f64,
    n: usize,
) -> Result<SimilarityProfile> {
    if !(c0_init > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "c0_init must be positive, got {c0_init}"
        )));
    }
    let sys = System::new(case, length, n)?;
    let x0 = sys.pack(&initial_guess(c0_init, &sys.eta));
    solve_from(&sys, x0, length)
}

fn solve_from(sys: &System, x0: Vec<f64>, length: f64) -> Result<SimilarityProfile> {
    let settings = NewtonSettings {
        max_iter: 100,
        // residual rows carry h^-4 and v reaches ~c0 L^{4/3}
        step_tol: 1e-8,
        ..NewtonSettings::default()
    };
    let out = newton_solve(|x| sys.residual(x), |x| sys.jacobian(x), x0, &settings)?;
    if out.residual_norm > ACCEPT_RESIDUAL {
        return Err(Error::NoConvergence {
            iterations: out.iterations,
            residual: out.residual_norm,
        });
    }
    let vbar = sys.nodes(&out.x).to_vec();
    let n = sys.n;
    let c0 = vbar[n] / length.powf(4.0 / 3.0);
    let (num, den) = sys
        .eta
        .iter()
        .zip(&vbar)
        .filter(|(e, _)| e.abs() >= 0.9 * length)
        .fold((0.0, 0.0), |(a, b), (e, v)| {
            let p = e.abs().powf(4.0 / 3.0);
            (a + v * p, b + p * p)
        });
    let branch = if count_critical_points(sys.case, &vbar) == 1 {
        Branch::Monotone
    } else {
        Branch::Dimpled
    };
    Ok(SimilarityProfile {
        case: sys.case,
        length,
        n,
        eta: sys.eta.clone(),
        vbar,
        c0,
        c0_fit: num / den,
        branch,
        residual_norm: out.residual_norm,
        state: out.x,
    })
}

/// Solves from every initial amplitude in parallel and clusters the
/// converged `c0` values (within `cluster_tol`). Failed starts are skipped.
pub fn find_branches(
    case: SimilarityCase,
    c0_inits: &[f64],
    length: f64,
    n: usize,
    cluster_tol: f64,
) -> Vec<SimilarityProfile> {
    let solved: Vec<SimilarityProfile> = c0_inits
        .par_iter()
        .filter_map(|&c| solve_similarity(case, c, length, n).ok())
        .collect();
    let mut distinct: Vec<SimilarityProfile> = Vec::new();
    for p in solved {
        if !distinct.iter().any(|d| (d.c0 - p.c0).abs() <= cluster_tol) {
            distinct.push(p);
        }
    }
    distinct.sort_by(|a, b| b.c0.total_cmp(&a.c0));
    distinct
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn initial_guess_properties() {
        assert!((initial_guess(0.9, &[0.0])[0] - 3f64.cbrt()).abs() < 1e-15);
        let big = initial_guess(0.9, &[1e4])[0];
        assert!((big / (0.9 * 1e4f64.powf(4.0 / 3.0)) - 1.0).abs() < 1e-10);
        // (eta/4) v' - v/3 + v^-2 = 0 holds exactly
        for e in [-7.0, -0.3, 0.0, 1.1, 12.0] {
            let c = 0.7f64;
            let v = initial_guess(c, &[e])[0];
            let dv = c.powi(3) * 4.0 * e.powi(3) / (3.0 * v * v);
            let r = 0.25 * e * dv - v / 3.0 + 1.0 / (v * v);
            assert!(r.abs() < 1e-10, "{e}: {r}");
        }
    }

    #[test]
    fn series_coefficients() {
        assert!((far_field_c1(0.9060) - 1.6657).abs() < 1e-4);
        assert_eq!(
            far_field_series(0.9, 3.0, 2).unwrap(),
            far_field_series(0.9, -3.0, 2).unwrap()
        );
        assert!(matches!(
            far_field_series(0.9, 3.0, 3),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn critical_point_count() {
        assert_eq!(
            count_critical_points(SimilarityCase::Line, &[3.0, 2.0, 1.0, 2.0, 3.0]),
            1
        );
        assert_eq!(
            count_critical_points(SimilarityCase::Line, &[3.0, 1.0, 2.0, 1.0, 3.0]),
            3
        );
        assert_eq!(
            count_critical_points(SimilarityCase::RadialOrigin, &[1.0, 2.0, 3.0]),
            1
        );
        assert_eq!(
            count_critical_points(SimilarityCase::RadialOrigin, &[2.0, 1.0, 3.0]),
            2
        );
    }

    #[test]
    fn monotone_line_profile() {
        let p = solve_similarity(SimilarityCase::Line, 1.0, 50.0, 1000).unwrap();
        assert_eq!(p.branch, Branch::Monotone);
        assert!((p.c0 - 0.9060).abs() < 1e-3, "{}", p.c0);
        assert!((p.c0 - p.c0_fit).abs() < 1e-3);
        let n = p.n;
        for j in 0..=n {
            assert!((p.vbar[j] - p.vbar[n - j]).abs() < 1e-8);
        }
    }

    #[test]
    fn constant_start_leaves_constant() {
        let sys = System::new(SimilarityCase::Line, 30.0, 300).unwrap();
        let x0 = vec![3f64.cbrt(); sys.dim()];
        let p = solve_from(&sys, x0, 30.0);
        if let Ok(p) = p {
            assert!(p.vbar.iter().any(|v| (v - 3f64.cbrt()).abs() > 0.1));
        }
    }
}
