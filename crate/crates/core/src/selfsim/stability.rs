//! Linear stability of similarity profiles: `mu phi = -phi'''' - (eta/4) phi'
//! + phi/3 + 2 phi / v^3` with far-field rows `mu phi = phi/3 - (eta/4) phi'`.
//!
//! The far-field rows do not involve `mu` once subtracted from the interior
//! equation at the same node, so they eliminate the ghost values and leave a
//! standard eigenproblem on the nodes.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::system::System;
use super::{SimilarityCase, SimilarityProfile};
use crate::error::{Error, Result};
use crate::numkit::BandedMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Parity {
    Even,
    Odd,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mode {
    pub value: f64,
    pub imag: f64,
    /// Set in the line case, where the operator splits by reflection.
    pub parity: Option<Parity>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    /// Sorted by descending real part.
    pub modes: Vec<Mode>,
    pub length: f64,
    pub n: usize,
    pub eigenvectors: Option<Vec<Vec<f64>>>,
}

impl Spectrum {
    pub fn eigenvalues(&self) -> Vec<f64> {
        self.modes.iter().map(|m| m.value).collect()
    }

    /// Modes whose imaginary part exceeds `rel_tol` times the spectral radius
    /// of the returned set.
    pub fn complex_modes(&self, rel_tol: f64) -> Vec<Mode> {
        let radius = self
            .modes
            .iter()
            .map(|m| m.value.hypot(m.imag))
            .fold(0.0, f64::max);
        self.modes
            .iter()
            .copied()
            .filter(|m| m.imag.abs() > rel_tol * radius)
            .collect()
    }

    pub fn with_parity(&self, parity: Parity) -> Vec<f64> {
        self.modes
            .iter()
            .filter(|m| m.parity == Some(parity))
            .map(|m| m.value)
            .collect()
    }
}

/// Reduced nodal operator, banded with bandwidth at most 4.
fn reduced_operator(sys: &System, state: &[f64]) -> Result<BandedMatrix> {
    let rows = sys.rows(state)?;
    let n = sys.n;
    let dim = sys.dim();
    let ghosts = sys.ghost_cols();
    let node_off = sys.node_cols().start;

    let dense_row = |entries: &[(usize, f64)], sign: f64| {
        let mut r = vec![0.0; dim];
        for &(k, w) in entries {
            r[k] += sign * w;
        }
        r
    };
    let mut interior: Vec<Vec<f64>> = vec![Vec::new(); n + 1];
    let mut robin = Vec::new();
    for r in &rows {
        match (r.node, r.robin_node) {
            (Some(j), _) => interior[j] = dense_row(&r.entries, -1.0),
            (None, Some(j)) => robin.push((j, dense_row(&r.entries, 1.0))),
            _ => unreachable!(),
        }
    }
    let k = ghosts.len();
    let mut cg = DMatrix::zeros(k, k);
    let mut cn = DMatrix::zeros(k, n + 1);
    for (q, (j, rrow)) in robin.iter().enumerate() {
        let c: Vec<f64> = interior[*j].iter().zip(rrow).map(|(a, b)| a - b).collect();
        for (p, &g) in ghosts.iter().enumerate() {
            cg[(q, p)] = c[g];
        }
        for m in 0..=n {
            cn[(q, m)] = -c[node_off + m];
        }
    }
    let g = cg
        .lu()
        .solve(&cn)
        .ok_or(Error::SingularMatrix { row: 0, pivot: 0.0 })?;

    let mut ar = BandedMatrix::zeros(n + 1, 4, 4);
    for (j, row) in interior.iter().enumerate() {
        for m in 0..=n {
            let mut v = row[node_off + m];
            for (p, &gc) in ghosts.iter().enumerate() {
                v += row[gc] * g[(p, m)];
            }
            if v != 0.0 {
                ar.add(j, m, v);
            }
        }
    }
    Ok(ar)
}

fn sorted_modes(mat: &DMatrix<f64>, parity: Option<Parity>) -> Vec<Mode> {
    mat.complex_eigenvalues()
        .iter()
        .map(|z| Mode {
            value: z.re,
            imag: z.im,
            parity,
        })
        .collect()
}

fn spectrum_of(sys: &System, ar: &BandedMatrix, n_eigs: usize, length: f64) -> Spectrum {
    let n = sys.n;
    let full = ar.to_dense();
    let mut modes = match sys.case {
        SimilarityCase::Line => {
            let m = n / 2;
            let even = DMatrix::from_fn(m + 1, m + 1, |i, j| {
                if j < m {
                    full[(i, j)] + full[(i, n - j)]
                } else {
                    full[(i, j)]
                }
            });
            let odd = DMatrix::from_fn(m, m, |i, j| full[(i, j)] - full[(i, n - j)]);
            let mut all = sorted_modes(&even, Some(Parity::Even));
            all.extend(sorted_modes(&odd, Some(Parity::Odd)));
            all
        }
        SimilarityCase::RadialOrigin => sorted_modes(&full, None),
    };
    modes.sort_by(|a, b| b.value.total_cmp(&a.value));
    modes.truncate(n_eigs);
    Spectrum {
        modes,
        length,
        n,
        eigenvectors: None,
    }
}

/// Leading `n_eigs` eigenvalues of the linearisation about `profile`.
pub fn stability_spectrum(profile: &SimilarityProfile, n_eigs: usize) -> Result<Spectrum> {
    let sys = System::new(profile.case, profile.length, profile.n)?;
    let ar = reduced_operator(&sys, &profile.state)?;
    Ok(spectrum_of(&sys, &ar, n_eigs, profile.length))
}

/// Same operator linearised about the constant solution `v = 3^{1/3}`.
pub fn constant_state_spectrum(
    case: SimilarityCase,
    length: f64,
    n: usize,
    n_eigs: usize,
) -> Result<Spectrum> {
    let sys = System::new(case, length, n)?;
    let state = vec![3f64.cbrt(); sys.dim()];
    let ar = reduced_operator(&sys, &state)?;
    Ok(spectrum_of(&sys, &ar, n_eigs, length))
}

/// Nodal eigenvector for an eigenvalue estimate `mu` by shifted inverse
/// iteration; returns the Rayleigh-quotient refined value and the vector
/// scaled to unit max-norm.
pub fn eigenvector(profile: &SimilarityProfile, mu: f64) -> Result<(f64, Vec<f64>)> {
    let sys = System::new(profile.case, profile.length, profile.n)?;
    let ar = reduced_operator(&sys, &profile.state)?;
    let n = ar.dim();
    let sigma = mu + 1e-9 * (1.0 + mu.abs());
    let mut shifted = ar.clone();
    for i in 0..n {
        shifted.add(i, i, -sigma);
    }
    let lu = shifted.lu()?;
    let mut x: Vec<f64> = (0..n).map(|i| 1.0 + 0.01 * (i % 7) as f64).collect();
    for _ in 0..6 {
        x = lu.solve(&x)?;
        let scale = x
            .iter()
            .fold(0.0_f64, |m, v| if v.abs() > m.abs() { *v } else { m });
        x.iter_mut().for_each(|v| *v /= scale);
    }
    let ax = ar.mul_vec(&x);
    let num: f64 = ax.iter().zip(&x).map(|(a, b)| a * b).sum();
    let den: f64 = x.iter().map(|v| v * v).sum();
    Ok((num / den, x))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_state_even_modes() {
        let s = constant_state_spectrum(SimilarityCase::Line, 30.0, 400, 12).unwrap();
        let even = s.with_parity(Parity::Even);
        for (k, v) in even.iter().take(4).enumerate() {
            assert!((v - (1.0 - 0.5 * k as f64)).abs() < 1e-2, "k={k}: {v}");
        }
    }

    #[test]
    fn reduced_operator_is_banded() {
        let sys = System::new(SimilarityCase::Line, 10.0, 40).unwrap();
        let state = vec![1.5; sys.dim()];
        let ar = reduced_operator(&sys, &state).unwrap();
        assert_eq!(ar.dim(), 41);
    }
}
