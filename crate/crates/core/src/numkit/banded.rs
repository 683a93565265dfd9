//! Band-packed storage and LU factorisation with partial pivoting.

use crate::error::{Error, Result};

/// Square matrix with `lower` sub-diagonals and `upper` super-diagonals.
///
/// Each row keeps a window of `2 * lower + upper + 1` columns starting at
/// column `i - lower`, which leaves room for the fill-in produced by row
/// interchanges during factorisation.
#[derive(Debug, Clone, PartialEq)]
pub struct BandedMatrix {
    n: usize,
    lower: usize,
    upper: usize,
    width: usize,
    data: Vec<f64>,
}

impl BandedMatrix {
    pub fn zeros(n: usize, lower: usize, upper: usize) -> Self {
        assert!(n >= 1, "banded matrix needs n >= 1");
        assert!(
            n == 1 || (lower < n && upper < n),
            "bandwidths must be smaller than the dimension"
        );
        let width = 2 * lower + upper + 1;
        Self {
            n,
            lower,
            upper,
            width,
            data: vec![0.0; n * width],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, 0, 0);
        for i in 0..n {
            m.set(i, i, 1.0);
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn lower(&self) -> usize {
        self.lower
    }

    pub fn upper(&self) -> usize {
        self.upper
    }

    #[inline]
    fn in_band(&self, i: usize, j: usize) -> bool {
        j + self.lower >= i && j <= i + self.upper
    }

    #[inline]
    fn slot(&self, i: usize, j: usize) -> usize {
        i * self.width + (j + self.lower - i)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i < self.n && j < self.n && self.in_band(i, j) {
            self.data[self.slot(i, j)]
        } else {
            0.0
        }
    }

    /// Panics when `(i, j)` falls outside the declared band.
    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        assert!(
            i < self.n && j < self.n && self.in_band(i, j),
            "entry ({i}, {j}) outside band (lower {}, upper {})",
            self.lower,
            self.upper
        );
        let k = self.slot(i, j);
        self.data[k] = value;
    }

    pub fn add(&mut self, i: usize, j: usize, value: f64) {
        assert!(
            i < self.n && j < self.n && self.in_band(i, j),
            "entry ({i}, {j}) outside band (lower {}, upper {})",
            self.lower,
            self.upper
        );
        let k = self.slot(i, j);
        self.data[k] += value;
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n);
        (0..self.n)
            .map(|i| {
                let lo = i.saturating_sub(self.lower);
                let hi = (i + self.upper).min(self.n - 1);
                (lo..=hi).map(|j| self.get(i, j) * x[j]).sum()
            })
            .collect()
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Copy into a dense row-major matrix.
    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        nalgebra::DMatrix::from_fn(self.n, self.n, |i, j| self.get(i, j))
    }

    pub fn lu(&self) -> Result<BandedLu> {
        BandedLu::factor(self.clone())
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        self.lu()?.solve(b)
    }
}

/// LU factors of a [`BandedMatrix`]; `U` occupies the widened band.
#[derive(Debug, Clone)]
pub struct BandedLu {
    m: BandedMatrix,
    pivots: Vec<usize>,
}

impl BandedLu {
    fn factor(mut m: BandedMatrix) -> Result<Self> {
        let n = m.n;
        let kl = m.lower;
        let reach = kl + m.upper; // furthest column touched by U
        let scale = m.max_abs().max(f64::MIN_POSITIVE);
        let tiny = (n as f64) * f64::EPSILON * scale;
        let mut pivots = vec![0; n];

        for k in 0..n {
            let last_row = (k + kl).min(n - 1);
            let last_col = (k + reach).min(n - 1);

            let mut p = k;
            let mut best = m.data[m.slot(k, k)].abs();
            for r in k + 1..=last_row {
                let v = m.data[m.slot(r, k)].abs();
                if v > best {
                    best = v;
                    p = r;
                }
            }
            pivots[k] = p;
            if best <= tiny {
                return Err(Error::SingularMatrix {
                    row: k,
                    pivot: best,
                });
            }
            if p != k {
                for c in k..=last_col {
                    let a = m.slot(k, c);
                    let b = m.slot(p, c);
                    m.data.swap(a, b);
                }
            }
            let pivot = m.data[m.slot(k, k)];
            for r in k + 1..=last_row {
                let s = m.slot(r, k);
                let factor = m.data[s] / pivot;
                m.data[s] = factor;
                if factor != 0.0 {
                    for c in k + 1..=last_col {
                        let src = m.data[m.slot(k, c)];
                        let dst = m.slot(r, c);
                        m.data[dst] -= factor * src;
                    }
                }
            }
        }
        Ok(Self { m, pivots })
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let n = self.m.n;
        assert_eq!(b.len(), n, "right-hand side length mismatch");
        let kl = self.m.lower;
        let reach = kl + self.m.upper;
        let mut x = b.to_vec();

        for k in 0..n {
            let p = self.pivots[k];
            if p != k {
                x.swap(k, p);
            }
            let xk = x[k];
            if xk != 0.0 {
                for r in k + 1..=(k + kl).min(n - 1) {
                    x[r] -= self.m.data[self.m.slot(r, k)] * xk;
                }
            }
        }
        for k in (0..n).rev() {
            let mut s = x[k];
            for c in k + 1..=(k + reach).min(n - 1) {
                s -= self.m.data[self.m.slot(k, c)] * x[c];
            }
            x[k] = s / self.m.data[self.m.slot(k, k)];
        }
        Ok(x)
    }
}
