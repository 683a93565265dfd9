use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::meshfield::MeshField;

/// `M(X_i) = (1+u_i)^-3 + I` with `I` the trapezoid value of `int (1+u)^-3`
/// on the current nodes. On the disc `I` is the radial line integral.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonitorSample {
    pub values: Vec<f64>,
    pub integral_term: f64,
}

impl MonitorSample {
    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    /// `dt/dtau = 1 / max_i M(X_i)`
    pub fn time_scale(&self) -> f64 {
        1.0 / self.max()
    }
}

pub fn monitor(field: &MeshField) -> Result<MonitorSample> {
    let gaps: Vec<f64> = field.nodal().iter().map(|d| 1.0 + d[0]).collect();
    monitor_from(&gaps, field.mesh().nodes())
}

pub(crate) fn monitor_from(gaps: &[f64], nodes: &[f64]) -> Result<MonitorSample> {
    let f = pointwise(gaps)?;
    let integral_term = trapezoid(&f, nodes);
    Ok(MonitorSample {
        values: f.iter().map(|v| v + integral_term).collect(),
        integral_term,
    })
}

/// `(1+u)^-3` at the nodes.
pub(crate) fn pointwise(gaps: &[f64]) -> Result<Vec<f64>> {
    gaps.iter()
        .enumerate()
        .map(|(i, &g)| {
            if g > 0.0 {
                Ok(g.powi(-3))
            } else {
                Err(Error::TouchdownReached { node: i, gap: g })
            }
        })
        .collect()
}

pub(crate) fn trapezoid(f: &[f64], nodes: &[f64]) -> f64 {
    nodes
        .windows(2)
        .zip(f.windows(2))
        .map(|(x, v)| 0.5 * (x[1] - x[0]) * (v[0] + v[1]))
        .sum()
}

/// Gradients of the trapezoid integral with respect to the nodal gaps and
/// the node positions.
pub(crate) fn trapezoid_gradients(gaps: &[f64], f: &[f64], nodes: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = nodes.len();
    let mut d_gap = vec![0.0; n];
    let mut d_x = vec![0.0; n];
    for i in 0..n - 1 {
        let h = nodes[i + 1] - nodes[i];
        let mean = 0.5 * (f[i] + f[i + 1]);
        d_x[i + 1] += mean;
        d_x[i] -= mean;
        d_gap[i] += 0.5 * h * (-3.0 * f[i] / gaps[i]);
        d_gap[i + 1] += 0.5 * h * (-3.0 * f[i + 1] / gaps[i + 1]);
    }
    (d_gap, d_x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::meshfield::Mesh;

    #[test]
    fn flat_strip() {
        let field = MeshField::from_fn(Mesh::uniform(-1.0, 1.0, 8).unwrap(), |_| [0.0; 4]);
        let m = monitor(&field).unwrap();
        assert!(m.values.iter().all(|v| (v - 3.0).abs() < 1e-14));
        assert!((m.integral_term - 2.0).abs() < 1e-14);
    }

    #[test]
    fn half_gap_strip() {
        let field = MeshField::from_fn(Mesh::uniform(-1.0, 1.0, 8).unwrap(), |_| {
            [-0.5, 0.0, 0.0, 0.0]
        });
        let m = monitor(&field).unwrap();
        assert!((m.integral_term - 16.0).abs() < 1e-12);
        assert!(m.values.iter().all(|v| (v - 24.0).abs() < 1e-12));
    }

    #[test]
    fn disc_uses_radial_line_integral() {
        let field = MeshField::from_fn(Mesh::uniform(0.0, 1.0, 6).unwrap(), |_| [0.0; 4]);
        let m = monitor(&field).unwrap();
        assert!((m.integral_term - 1.0).abs() < 1e-14);
        assert!((m.time_scale() - 0.5).abs() < 1e-14);
    }

    #[test]
    fn nonpositive_gap() {
        let field = MeshField::from_fn(Mesh::uniform(-1.0, 1.0, 4).unwrap(), |x| {
            [if x == 0.0 { -1.0 } else { -0.5 }, 0.0, 0.0, 0.0]
        });
        assert!(matches!(
            monitor(&field),
            Err(Error::TouchdownReached { node: 2, .. })
        ));
    }

    #[test]
    fn scaling_of_the_two_terms() {
        // t -> a t, 1+u -> a^{1/3}(1+u), x -> a^{1/4} x
        let a: f64 = 16.0;
        let nodes: Vec<f64> = (0..=8).map(|i| -1.0 + 0.25 * i as f64).collect();
        let gaps: Vec<f64> = nodes.iter().map(|x| 0.4 + 0.3 * x * x).collect();
        let m = monitor_from(&gaps, &nodes).unwrap();
        let sn: Vec<f64> = nodes.iter().map(|x| a.powf(0.25) * x).collect();
        let sg: Vec<f64> = gaps.iter().map(|g| a.cbrt() * g).collect();
        let ms = monitor_from(&sg, &sn).unwrap();
        for i in 0..nodes.len() {
            let p = m.values[i] - m.integral_term;
            let ps = ms.values[i] - ms.integral_term;
            assert!((ps - p / a).abs() < 1e-12 * p);
        }
        // the integral carries the extra x-scaling
        assert!((ms.integral_term - m.integral_term * a.powf(-0.75)).abs() < 1e-12);
    }

    #[test]
    fn trapezoid_gradient_matches_differences() {
        let nodes = [0.0, 0.2, 0.5, 0.9, 1.0];
        let gaps = [0.9, 0.7, 0.5, 0.8, 1.0];
        let f = pointwise(&gaps).unwrap();
        let (dg, dx) = trapezoid_gradients(&gaps, &f, &nodes);
        let h = 1e-6;
        for j in 0..nodes.len() {
            let mut g2 = gaps;
            g2[j] += h;
            let mut g1 = gaps;
            g1[j] -= h;
            let fd = (trapezoid(&pointwise(&g2).unwrap(), &nodes)
                - trapezoid(&pointwise(&g1).unwrap(), &nodes))
                / (2.0 * h);
            assert!((fd - dg[j]).abs() < 1e-6);
            let mut x2 = nodes;
            x2[j] += h;
            let mut x1 = nodes;
            x1[j] -= h;
            let fd = (trapezoid(&f, &x2) - trapezoid(&f, &x1)) / (2.0 * h);
            assert!((fd - dx[j]).abs() < 1e-6);
        }
    }
}
