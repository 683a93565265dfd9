use std::sync::atomic::{AtomicUsize, Ordering};

use super::shape::shape_table;
use crate::error::{Error, Result};

/// Node positions and velocities; endpoints are fixed.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    nodes: Vec<f64>,
    velocities: Vec<f64>,
}

impl Mesh {
    pub fn new(nodes: Vec<f64>) -> Result<Self> {
        let velocities = vec![0.0; nodes.len()];
        Self::with_velocities(nodes, velocities)
    }

    pub fn with_velocities(nodes: Vec<f64>, velocities: Vec<f64>) -> Result<Self> {
        if nodes.len() < 2 || velocities.len() != nodes.len() {
            return Err(Error::InvalidConfig(format!(
                "mesh needs at least 2 nodes and one velocity per node (got {} / {})",
                nodes.len(),
                velocities.len()
            )));
        }
        for (i, w) in nodes.windows(2).enumerate() {
            let h = w[1] - w[0];
            if !(h > 0.0) {
                return Err(Error::MeshTangled {
                    interval: i,
                    width: h,
                });
            }
        }
        Ok(Self { nodes, velocities })
    }

    /// `n_intervals` equal intervals on `[a, b]`.
    pub fn uniform(a: f64, b: f64, n_intervals: usize) -> Result<Self> {
        let n = n_intervals.max(1);
        let h = (b - a) / n as f64;
        let mut nodes: Vec<f64> = (0..=n).map(|i| a + h * i as f64).collect();
        nodes[n] = b;
        Self::new(nodes)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn velocities(&self) -> &[f64] {
        &self.velocities
    }

    pub fn n_intervals(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn width(&self, i: usize) -> f64 {
        self.nodes[i + 1] - self.nodes[i]
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.nodes[0], self.nodes[self.nodes.len() - 1])
    }
}

/// Nodal Hermite data `[u, u', u'', u''']` on a mesh.
#[derive(Debug)]
pub struct MeshField {
    mesh: Mesh,
    nodal: Vec<[f64; 4]>,
    hint: AtomicUsize,
}

impl Clone for MeshField {
    fn clone(&self) -> Self {
        Self {
            mesh: self.mesh.clone(),
            nodal: self.nodal.clone(),
            hint: AtomicUsize::new(self.hint.load(Ordering::Relaxed)),
        }
    }
}

impl PartialEq for MeshField {
    fn eq(&self, other: &Self) -> bool {
        self.mesh == other.mesh && self.nodal == other.nodal
    }
}

impl MeshField {
    pub fn new(mesh: Mesh, nodal: Vec<[f64; 4]>) -> Result<Self> {
        if nodal.len() != mesh.nodes.len() {
            return Err(Error::InvalidConfig(format!(
                "{} nodal vectors for {} nodes",
                nodal.len(),
                mesh.nodes.len()
            )));
        }
        Ok(Self {
            mesh,
            nodal,
            hint: AtomicUsize::new(0),
        })
    }

    /// Samples `f(x) -> [u, u', u'', u''']` at every node.
    pub fn from_fn<F: Fn(f64) -> [f64; 4]>(mesh: Mesh, f: F) -> Self {
        let nodal = mesh.nodes.iter().map(|&x| f(x)).collect();
        Self {
            mesh,
            nodal,
            hint: AtomicUsize::new(0),
        }
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn nodal(&self) -> &[[f64; 4]] {
        &self.nodal
    }

    /// Smallest nodal value of `1 + u`.
    pub fn min_gap(&self) -> f64 {
        self.nodal
            .iter()
            .map(|d| 1.0 + d[0])
            .fold(f64::INFINITY, f64::min)
    }

    /// Interval index containing `x` (right-closed on the last interval).
    pub fn locate(&self, x: f64) -> Result<usize> {
        let nodes = &self.mesh.nodes;
        let (a, b) = self.mesh.domain();
        if !(a..=b).contains(&x) {
            return Err(Error::OutOfDomain(x));
        }
        let last = nodes.len() - 2;
        let h = self.hint.load(Ordering::Relaxed).min(last);
        if nodes[h] <= x && (x < nodes[h + 1] || h == last) {
            return Ok(h);
        }
        let i = nodes
            .partition_point(|&v| v <= x)
            .saturating_sub(1)
            .min(last);
        self.hint.store(i, Ordering::Relaxed);
        Ok(i)
    }

    /// `d^order u / dx^order` at `x`, `order` in 0..=4.
    pub fn interpolate(&self, x: f64, order: usize) -> Result<f64> {
        assert!(order <= 4, "derivative order must be 0..=4");
        let i = self.locate(x)?;
        let h = self.mesh.width(i);
        let s = ((x - self.mesh.nodes[i]) / h).clamp(0.0, 1.0);
        Ok(self.eval_in_interval(i, s, order))
    }

    /// Derivative in interval `i` at local coordinate `s`.
    pub fn eval_in_interval(&self, i: usize, s: f64, order: usize) -> f64 {
        let h = self.mesh.width(i);
        let t = shape_table(s);
        let (l, r) = (&self.nodal[i], &self.nodal[i + 1]);
        let mut acc = 0.0;
        for k in 0..4 {
            let hk = h.powi(k as i32 - order as i32);
            acc += (l[k] * t[order][0][k] + r[k] * t[order][1][k]) * hk;
        }
        acc
    }
}
