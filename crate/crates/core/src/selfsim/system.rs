//! Centered-difference discretization of the similarity equation
//! `v'''' + (eta/4) v' - v/3 + 1/v^2 = 0` (line) and its radial analogue,
//! closed by Robin rows `v/3 - (eta/4) v' = 0` on the last two nodes.

use super::SimilarityCase;
use crate::error::{Error, Result};
use crate::numkit::BandedMatrix;

/// One residual row: value plus Jacobian entries in unknown-vector columns.
#[derive(Debug, Clone)]
pub(crate) struct Row {
    pub value: f64,
    pub entries: Vec<(usize, f64)>,
    /// `Some(j)` for the interior equation at node `j`, `None` for Robin rows.
    pub node: Option<usize>,
    /// Node a Robin row is attached to.
    pub robin_node: Option<usize>,
}

#[derive(Debug, Clone)]
pub(crate) struct System {
    pub case: SimilarityCase,
    pub n: usize,
    pub h: f64,
    pub eta: Vec<f64>,
}

const D4: [f64; 5] = [1.0, -4.0, 6.0, -4.0, 1.0];
const D3: [f64; 5] = [-1.0, 2.0, 0.0, -2.0, 1.0];
const D2: [f64; 3] = [1.0, -2.0, 1.0];

impl System {
    pub fn new(case: SimilarityCase, length: f64, n: usize) -> Result<Self> {
        if n < 16 || !(length > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "similarity grid needs n >= 16 and L > 0 (got n = {n}, L = {length})"
            )));
        }
        if case == SimilarityCase::Line && !n.is_multiple_of(2) {
            return Err(Error::InvalidConfig(
                "line grid needs an even interval count".into(),
            ));
        }
        let (a, span) = match case {
            SimilarityCase::Line => (-length, 2.0 * length),
            SimilarityCase::RadialOrigin => (0.0, length),
        };
        let h = span / n as f64;
        let eta = (0..=n).map(|j| a + j as f64 * h).collect();
        Ok(Self { case, n, h, eta })
    }

    /// Length of the unknown vector (nodes plus free ghosts).
    pub fn dim(&self) -> usize {
        match self.case {
            SimilarityCase::Line => self.n + 5,
            SimilarityCase::RadialOrigin => self.n + 3,
        }
    }

    /// Column of node `j` (ghosts included; the radial origin folds evenly).
    pub fn col(&self, j: isize) -> usize {
        match self.case {
            SimilarityCase::Line => (j + 2) as usize,
            SimilarityCase::RadialOrigin => j.unsigned_abs(),
        }
    }

    pub fn ghost_cols(&self) -> Vec<usize> {
        let n = self.n;
        match self.case {
            SimilarityCase::Line => vec![0, 1, n + 3, n + 4],
            SimilarityCase::RadialOrigin => vec![n + 1, n + 2],
        }
    }

    pub fn node_cols(&self) -> std::ops::Range<usize> {
        let off = self.col(0);
        off..off + self.n + 1
    }

    pub fn nodes<'a>(&self, x: &'a [f64]) -> &'a [f64] {
        &x[self.node_cols()]
    }

    /// Unknown vector holding `v` at the nodes and extrapolated ghosts.
    pub fn pack(&self, v: &[f64]) -> Vec<f64> {
        let mut x = vec![0.0; self.dim()];
        for (j, &vj) in v.iter().enumerate() {
            x[self.col(j as isize)] = vj;
        }
        let n = self.n as isize;
        for g in [n + 1, n + 2] {
            let k = (g - n) as usize;
            x[self.col(g)] = v[self.n] + k as f64 * (v[self.n] - v[self.n - 1]);
        }
        if self.case == SimilarityCase::Line {
            for g in [-1isize, -2] {
                let k = (-g) as usize;
                x[self.col(g)] = v[0] + k as f64 * (v[0] - v[1]);
            }
        }
        x
    }

    fn push_stencil(&self, entries: &mut Vec<(usize, f64)>, j: usize, weights: &[f64], scale: f64) {
        let half = (weights.len() / 2) as isize;
        for (o, &w) in weights.iter().enumerate() {
            if w != 0.0 {
                entries.push((self.col(j as isize + o as isize - half), w * scale));
            }
        }
    }

    fn robin_row(&self, x: &[f64], j: usize) -> Row {
        let mut entries = vec![(self.col(j as isize), 1.0 / 3.0)];
        let c = -0.25 * self.eta[j] / (2.0 * self.h);
        entries.push((self.col(j as isize - 1), -c));
        entries.push((self.col(j as isize + 1), c));
        let value = entries.iter().map(|&(k, w)| w * x[k]).sum();
        Row {
            value,
            entries,
            node: None,
            robin_node: Some(j),
        }
    }

    /// Linear part of the interior operator at node `j`, without `-v/3`.
    fn linear_entries(&self, j: usize) -> Vec<(usize, f64)> {
        let h = self.h;
        let mut e = Vec::with_capacity(16);
        let eta = self.eta[j];
        match self.case {
            SimilarityCase::RadialOrigin if j == 0 => {
                // even-profile limit of the radial biharmonic: (8/3) v''''
                self.push_stencil(&mut e, 0, &D4, 8.0 / (3.0 * h.powi(4)));
            }
            _ => {
                self.push_stencil(&mut e, j, &D4, 1.0 / h.powi(4));
                let adv = 0.25 * eta / (2.0 * h);
                let mut d1 = 0.0;
                if self.case == SimilarityCase::RadialOrigin {
                    self.push_stencil(&mut e, j, &D3, 2.0 / eta / (2.0 * h.powi(3)));
                    self.push_stencil(&mut e, j, &D2, -1.0 / (eta * eta * h * h));
                    d1 = 1.0 / (eta.powi(3) * 2.0 * h);
                }
                self.push_stencil(&mut e, j, &[-1.0, 0.0, 1.0], adv + d1);
            }
        }
        e
    }

    /// All residual rows at `x`; errors if any nodal value is nonpositive.
    pub fn rows(&self, x: &[f64]) -> Result<Vec<Row>> {
        let n = self.n;
        let mut out = Vec::with_capacity(self.dim());
        if let Some((j, v)) = self.nodes(x).iter().enumerate().find(|(_, v)| !(**v > 0.0)) {
            return Err(Error::IterateInvalid(format!("v = {v} at node {j}")));
        }
        if self.case == SimilarityCase::Line {
            out.push(self.robin_row(x, 0));
            out.push(self.robin_row(x, 1));
        }
        for j in 0..=n {
            let mut entries = self.linear_entries(j);
            let cj = self.col(j as isize);
            let v = x[cj];
            entries.push((cj, -1.0 / 3.0));
            let value = entries.iter().map(|&(k, w)| w * x[k]).sum::<f64>() + 1.0 / (v * v);
            entries.push((cj, -2.0 / (v * v * v)));
            out.push(Row {
                value,
                entries,
                node: Some(j),
                robin_node: None,
            });
        }
        out.push(self.robin_row(x, n - 1));
        out.push(self.robin_row(x, n));
        Ok(out)
    }

    pub fn residual(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(self.rows(x)?.into_iter().map(|r| r.value).collect())
    }

    pub fn jacobian(&self, x: &[f64]) -> Result<BandedMatrix> {
        let rows = self.rows(x)?;
        let mut jac = BandedMatrix::zeros(rows.len(), 3, 3);
        for (i, r) in rows.iter().enumerate() {
            for &(k, w) in &r.entries {
                jac.add(i, k, w);
            }
        }
        Ok(jac)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numkit::fd_jacobian;

    #[test]
    fn jacobian_matches_finite_differences() {
        for case in [SimilarityCase::Line, SimilarityCase::RadialOrigin] {
            let sys = System::new(case, 10.0, 40).unwrap();
            let v: Vec<f64> = sys
                .eta
                .iter()
                .map(|e| (0.8f64.powi(3) * e.powi(4) + 3.0).cbrt() + 0.05 * (0.7 * e).sin())
                .collect();
            let x = sys.pack(&v);
            let fd = fd_jacobian(|y| sys.residual(y), &x, 1e-6).unwrap();
            let an = sys.jacobian(&x).unwrap().to_dense();
            let scale = an.amax();
            let err = (fd - an).amax();
            assert!(err <= 1e-6 * scale, "{case:?}: {err} vs {scale}");
        }
    }

    #[test]
    fn constant_state_solves_interior_rows() {
        let sys = System::new(SimilarityCase::Line, 20.0, 100).unwrap();
        let c = 3f64.cbrt();
        let x = vec![c; sys.dim()];
        for r in sys.rows(&x).unwrap() {
            match r.node {
                Some(_) => assert!(r.value.abs() < 1e-14),
                // eta v'/4 vanishes for a constant, leaving v/3
                None => assert!((r.value - c / 3.0).abs() < 1e-14),
            }
        }
    }
}
