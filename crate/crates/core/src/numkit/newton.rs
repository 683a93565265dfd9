//! Damped Newton iteration for systems with banded Jacobians.

use super::banded::BandedMatrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonSettings {
    pub max_iter: usize,
    /// Converged once `max |residual| <= abs_tol`.
    pub abs_tol: f64,
    /// Backtracking shrink factor applied to the step length.
    pub damping: f64,
    /// Smallest step length tried before giving up on a line search.
    pub min_step: f64,
    /// A full step smaller than `step_tol * (1 + |x|)` counts as converged;
    /// this is the round-off floor for residuals scaled by `h^-4`.
    pub step_tol: f64,
}

impl Default for NewtonSettings {
    fn default() -> Self {
        Self {
            max_iter: 50,
            abs_tol: 1e-10,
            damping: 0.5,
            min_step: 1.0 / 65536.0,
            step_tol: 1e-11,
        }
    }
}

impl NewtonSettings {
    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0) {
            return Err(Error::InvalidConfig("abs_tol must be positive".into()));
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return Err(Error::InvalidConfig("damping must lie in (0, 1]".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct NewtonOutcome {
    pub x: Vec<f64>,
    pub residual_norm: f64,
    pub iterations: usize,
}

pub(crate) fn max_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0_f64, |m, x| m.max(x.abs()))
}

/// Solve `residual(x) = 0` from `x0`.
///
/// A residual closure returning `Err` marks the trial point as inadmissible;
/// the line search treats that like a failure to decrease and shrinks the
/// step.
pub fn newton_solve<R, J>(
    residual: R,
    jacobian: J,
    x0: Vec<f64>,
    s: &NewtonSettings,
) -> Result<NewtonOutcome>
where
    R: Fn(&[f64]) -> Result<Vec<f64>>,
    J: Fn(&[f64]) -> Result<BandedMatrix>,
{
    s.validate()?;
    let mut x = x0;
    let mut r = residual(&x)?;
    let mut norm = max_norm(&r);

    for it in 0..s.max_iter {
        if norm <= s.abs_tol {
            return Ok(NewtonOutcome {
                x,
                residual_norm: norm,
                iterations: it,
            });
        }
        let jac = jacobian(&x)?;
        let rhs: Vec<f64> = r.iter().map(|v| -v).collect();
        let dx = jac.solve(&rhs)?;
        let step_norm = max_norm(&dx);
        let x_norm = max_norm(&x);

        let mut lambda = 1.0;
        let mut accepted = None;
        while lambda >= s.min_step {
            let trial: Vec<f64> = x.iter().zip(&dx).map(|(a, d)| a + lambda * d).collect();
            if let Ok(rt) = residual(&trial) {
                let nt = max_norm(&rt);
                if nt.is_finite() && nt < norm {
                    accepted = Some((trial, rt, nt));
                    break;
                }
            }
            lambda *= s.damping;
        }

        match accepted {
            Some((xt, rt, nt)) => {
                x = xt;
                r = rt;
                norm = nt;
                if lambda == 1.0 && step_norm <= s.step_tol * (1.0 + x_norm) {
                    return Ok(NewtonOutcome {
                        x,
                        residual_norm: norm,
                        iterations: it + 1,
                    });
                }
            }
            None => {
                // No decrease possible: either we sit on the round-off floor
                // or the iteration has stalled.
                if step_norm <= s.step_tol * (1.0 + x_norm) {
                    return Ok(NewtonOutcome {
                        x,
                        residual_norm: norm,
                        iterations: it + 1,
                    });
                }
                return Err(Error::NoConvergence {
                    iterations: it + 1,
                    residual: norm,
                });
            }
        }
    }
    if norm <= s.abs_tol {
        return Ok(NewtonOutcome {
            x,
            residual_norm: norm,
            iterations: s.max_iter,
        });
    }
    Err(Error::NoConvergence {
        iterations: s.max_iter,
        residual: norm,
    })
}
