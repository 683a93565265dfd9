//! Numerical kernel shared by every other module: banded and dense linear
//! solves, damped Newton, bracketed roots, adaptive quadrature, Bessel
//! functions.

mod banded;
mod bessel;
pub(crate) mod dual;
mod newton;
mod quad;
mod roots;

pub use banded::{BandedLu, BandedMatrix};
pub use bessel::{bessel, BesselKind};
pub use newton::{newton_solve, NewtonOutcome, NewtonSettings};
pub use quad::quad_adaptive;
pub use roots::{find_root_bracketed, find_root_traced};

/// Solve `b = A x` for `x` with a banded matrix.
pub fn solve_banded(a: &BandedMatrix, b: &[f64]) -> crate::Result<Vec<f64>> {
    a.solve(b)
}

/// Central-difference Jacobian of `f` at `x`, dense column by column.
///
/// Test-support oracle for the analytic Jacobians assembled elsewhere.
pub fn fd_jacobian<F>(f: F, x: &[f64], rel_step: f64) -> crate::Result<nalgebra::DMatrix<f64>>
where
    F: Fn(&[f64]) -> crate::Result<Vec<f64>>,
{
    let m = f(x)?.len();
    let mut jac = nalgebra::DMatrix::zeros(m, x.len());
    let mut xp = x.to_vec();
    for j in 0..x.len() {
        let h = rel_step * (1.0 + x[j].abs());
        xp[j] = x[j] + h;
        let fp = f(&xp)?;
        xp[j] = x[j] - h;
        let fm = f(&xp)?;
        xp[j] = x[j];
        for i in 0..m {
            jac[(i, j)] = (fp[i] - fm[i]) / (2.0 * h);
        }
    }
    Ok(jac)
}
