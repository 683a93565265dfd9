//! Residual form `F(y, y') = 0` of the moving-collocation system in the
//! computational time `tau`, with `y = (t, u-block, X)`.
//!
//! Row order: the time row, `4` collocation rows per interval, the four
//! boundary rows, one mesh row per interior node and the two fixed-end rows.
//! Boundary and end rows are imposed on `y'`; the initial state satisfies
//! them, so they hold along the trajectory and the mass matrix stays
//! nonsingular. Every row is linear in `y'`.

use nalgebra::{DMatrix, DVector};

use super::config::SimConfig;
use super::monitor::{pointwise, trapezoid, trapezoid_gradients};
use crate::error::{Error, Result};
use crate::meshfield::shape::{gauss_points, shape_table};
use crate::meshfield::{boundary_rows, BoundaryNode, Geometry, Mesh, MeshField, NodalConstraint};
use crate::numkit::dual::Dual;

/// Local unknowns of one interval: 8 nodal coefficients, 2 node positions, `t`.
const SLOTS: usize = 11;
type D = Dual<SLOTS>;

type ShapeTable = [[[f64; 4]; 2]; 5];

/// Index map of the unknown vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Layout {
    pub n_nodes: usize,
}

impl Layout {
    pub fn t(&self) -> usize {
        0
    }

    pub fn u(&self, node: usize, k: usize) -> usize {
        1 + 4 * node + k
    }

    pub fn x(&self, node: usize) -> usize {
        1 + 4 * self.n_nodes + node
    }

    pub fn dim(&self) -> usize {
        1 + 5 * self.n_nodes
    }
}

#[derive(Debug, Clone)]
pub struct Dae {
    pub layout: Layout,
    epsilon: f64,
    gamma: f64,
    geometry: Geometry,
    bc: [NodalConstraint; 4],
    gauss: [f64; 4],
    tables: [ShapeTable; 4],
    domain: (f64, f64),
}

/// Monitor data shared by the time row and the mesh rows.
struct MonitorParts {
    gaps: Vec<f64>,
    f: Vec<f64>,
    integral: f64,
    argmax: usize,
}

impl MonitorParts {
    fn max(&self) -> f64 {
        self.f[self.argmax] + self.integral
    }
}

impl Dae {
    pub fn new(cfg: &SimConfig) -> Result<Self> {
        cfg.validate()?;
        let gauss = gauss_points();
        Ok(Self {
            layout: Layout {
                n_nodes: cfg.n_intervals + 1,
            },
            epsilon: cfg.epsilon,
            gamma: cfg.gamma,
            geometry: cfg.spec.geometry,
            bc: boundary_rows(cfg.spec),
            gauss,
            tables: gauss.map(shape_table),
            domain: cfg.spec.domain(),
        })
    }

    pub fn dim(&self) -> usize {
        self.layout.dim()
    }

    /// `t = 0`, `u = 0`, uniform mesh.
    pub fn initial_state(&self) -> Vec<f64> {
        let l = self.layout;
        let mut y = vec![0.0; l.dim()];
        let (a, b) = self.domain;
        let n = l.n_nodes - 1;
        for i in 0..=n {
            y[l.x(i)] = a + (b - a) * i as f64 / n as f64;
        }
        y[l.x(n)] = b;
        y
    }

    pub fn nodes<'a>(&self, y: &'a [f64]) -> &'a [f64] {
        &y[self.layout.x(0)..self.layout.x(0) + self.layout.n_nodes]
    }

    pub fn gaps(&self, y: &[f64]) -> Vec<f64> {
        (0..self.layout.n_nodes)
            .map(|i| 1.0 + y[self.layout.u(i, 0)])
            .collect()
    }

    pub fn min_gap(&self, y: &[f64]) -> f64 {
        self.gaps(y).into_iter().fold(f64::INFINITY, f64::min)
    }

    pub fn field(&self, y: &[f64]) -> Result<MeshField> {
        let mesh = Mesh::new(self.nodes(y).to_vec())?;
        let nodal = (0..self.layout.n_nodes)
            .map(|i| std::array::from_fn(|k| y[self.layout.u(i, k)]))
            .collect();
        MeshField::new(mesh, nodal)
    }

    /// Largest nodal `|u_t|` in physical time, removing the mesh motion.
    pub fn max_ut(&self, y: &[f64], yd: &[f64]) -> f64 {
        let l = self.layout;
        let tdot = yd[l.t()];
        (0..l.n_nodes)
            .map(|i| ((yd[l.u(i, 0)] - y[l.u(i, 1)] * yd[l.x(i)]) / tdot).abs())
            .fold(0.0, f64::max)
    }

    fn check_mesh(&self, y: &[f64]) -> Result<()> {
        for (i, w) in self.nodes(y).windows(2).enumerate() {
            if !(w[1] > w[0]) {
                return Err(Error::MeshTangled {
                    interval: i,
                    width: w[1] - w[0],
                });
            }
        }
        Ok(())
    }

    fn monitor_parts(&self, y: &[f64]) -> Result<MonitorParts> {
        let gaps = self.gaps(y);
        let f = pointwise(&gaps)?;
        let integral = trapezoid(&f, self.nodes(y));
        let argmax = f
            .iter()
            .enumerate()
            .fold(0, |best, (i, v)| if *v > f[best] { i } else { best });
        Ok(MonitorParts {
            gaps,
            f,
            integral,
            argmax,
        })
    }

    /// Time scale `dt/dtau = 1 / max M`.
    pub fn time_scale(&self, y: &[f64]) -> Result<f64> {
        Ok(1.0 / self.monitor_parts(y)?.max())
    }

    /// Collocation residuals of interval `i` with derivatives seeded as
    /// `beta` on `y` and `alpha` on `y'`.
    fn interval_rows(&self, y: &[f64], yd: &[f64], i: usize, alpha: f64, beta: f64) -> [D; 4] {
        let l = self.layout;
        let seed = |v: f64, slot: usize, w: f64| {
            let mut d = D::cst(v);
            d.d[slot] = w;
            d
        };
        let u: [D; 8] = std::array::from_fn(|q| seed(y[l.u(i + q / 4, q % 4)], q, beta));
        let ud: [D; 8] = std::array::from_fn(|q| seed(yd[l.u(i + q / 4, q % 4)], q, alpha));
        let x0 = seed(y[l.x(i)], 8, beta);
        let x1 = seed(y[l.x(i + 1)], 9, beta);
        let xd0 = seed(yd[l.x(i)], 8, alpha);
        let xd1 = seed(yd[l.x(i + 1)], 9, alpha);
        let tdot = seed(yd[l.t()], 10, alpha);

        let h = x1 - x0;
        let hd = xd1 - xd0;
        let hp: [D; 8] = std::array::from_fn(|p| h.powi(p as i32 - 4));
        let eps2 = self.epsilon * self.epsilon;

        std::array::from_fn(|q| {
            let s = self.gauss[q];
            let t = &self.tables[q];
            let deriv = |order: usize| {
                let mut acc = D::cst(0.0);
                for k in 0..4 {
                    let c = u[k] * t[order][0][k] + u[4 + k] * t[order][1][k];
                    acc += c * hp[4 + k - order];
                }
                acc
            };
            let mut follow = D::cst(0.0);
            for k in 0..4 {
                let c = ud[k] * t[0][0][k] + ud[4 + k] * t[0][1][k];
                follow += c * hp[4 + k];
                if k > 0 {
                    let c = u[k] * t[0][0][k] + u[4 + k] * t[0][1][k];
                    follow += hd * c * hp[3 + k] * k as f64;
                }
            }
            let ux = deriv(1);
            let conv = ux * (xd0 * (1.0 - s) + xd1 * s);
            let bih = match self.geometry {
                Geometry::Strip => deriv(4),
                Geometry::Disc => {
                    let r = x0 + h * s;
                    let ri = r.recip();
                    deriv(4) + deriv(3) * ri * 2.0 - deriv(2) * ri * ri + ux * ri * ri * ri
                }
            };
            let gap = deriv(0) + 1.0;
            -(bih * eps2 + gap.powi(-2)) * tdot - (follow - conv)
        })
    }

    fn bc_index(&self, c: &NodalConstraint, k: usize) -> usize {
        let node = match c.node {
            BoundaryNode::First => 0,
            BoundaryNode::Last => self.layout.n_nodes - 1,
        };
        self.layout.u(node, k)
    }

    pub fn residual(&self, y: &[f64], yd: &[f64]) -> Result<Vec<f64>> {
        self.check_mesh(y)?;
        let l = self.layout;
        let mon = self.monitor_parts(y)?;
        let n = l.n_nodes - 1;
        let mut r = Vec::with_capacity(l.dim());
        r.push(yd[l.t()] - 1.0 / mon.max());
        for i in 0..n {
            r.extend(self.interval_rows(y, yd, i, 0.0, 0.0).iter().map(|d| d.v));
        }
        for c in &self.bc {
            r.push(
                c.terms
                    .iter()
                    .map(|&(k, w)| w * yd[self.bc_index(c, k)])
                    .sum(),
            );
        }
        let xs = self.nodes(y);
        let tdot = yd[l.t()];
        for i in 1..n {
            let mp = 0.5 * (mon.f[i] + mon.f[i + 1]) + mon.integral;
            let mm = 0.5 * (mon.f[i - 1] + mon.f[i]) + mon.integral;
            let s = mp * (xs[i + 1] - xs[i]) - mm * (xs[i] - xs[i - 1]);
            let lap = yd[l.x(i - 1)] - 2.0 * yd[l.x(i)] + yd[l.x(i + 1)];
            r.push(-self.gamma * lap - tdot * s);
        }
        r.push(yd[l.x(0)]);
        r.push(yd[l.x(n)]);
        Ok(r)
    }

    /// `beta dF/dy + alpha dF/dy'`.
    pub fn jacobian(&self, y: &[f64], yd: &[f64], alpha: f64, beta: f64) -> Result<DMatrix<f64>> {
        self.check_mesh(y)?;
        let l = self.layout;
        let dim = l.dim();
        let n = l.n_nodes - 1;
        let mut jac = DMatrix::zeros(dim, dim);
        let mon = self.monitor_parts(y)?;
        let xs = self.nodes(y);
        let (di_gap, di_x) = trapezoid_gradients(&mon.gaps, &mon.f, xs);
        let fprime: Vec<f64> = mon
            .f
            .iter()
            .zip(&mon.gaps)
            .map(|(f, g)| -3.0 * f / g)
            .collect();

        // time row
        jac[(0, l.t())] = alpha;
        let g2 = mon.max().powi(-2);
        for j in 0..=n {
            let own = if j == mon.argmax { fprime[j] } else { 0.0 };
            jac[(0, l.u(j, 0))] = beta * g2 * (own + di_gap[j]);
            jac[(0, l.x(j))] = beta * g2 * di_x[j];
        }

        let mut row = 1;
        for i in 0..n {
            let rows = self.interval_rows(y, yd, i, alpha, beta);
            let mut cols = [0usize; SLOTS];
            for (q, c) in cols.iter_mut().take(8).enumerate() {
                *c = l.u(i + q / 4, q % 4);
            }
            cols[8] = l.x(i);
            cols[9] = l.x(i + 1);
            cols[10] = l.t();
            for d in rows {
                for (slot, &c) in cols.iter().enumerate() {
                    jac[(row, c)] += d.d[slot];
                }
                row += 1;
            }
        }
        for c in &self.bc {
            for &(k, w) in &c.terms {
                jac[(row, self.bc_index(c, k))] += alpha * w;
            }
            row += 1;
        }
        let tdot = yd[l.t()];
        for i in 1..n {
            let mp = 0.5 * (mon.f[i] + mon.f[i + 1]) + mon.integral;
            let mm = 0.5 * (mon.f[i - 1] + mon.f[i]) + mon.integral;
            let (hp, hm) = (xs[i + 1] - xs[i], xs[i] - xs[i - 1]);
            let s = mp * hp - mm * hm;
            let d2 = hp - hm;
            jac[(row, l.t())] += -alpha * s;
            jac[(row, l.x(i - 1))] += -alpha * self.gamma;
            jac[(row, l.x(i))] += 2.0 * alpha * self.gamma;
            jac[(row, l.x(i + 1))] += -alpha * self.gamma;
            let k = -beta * tdot;
            jac[(row, l.x(i + 1))] += k * mp;
            jac[(row, l.x(i))] += -k * (mp + mm);
            jac[(row, l.x(i - 1))] += k * mm;
            jac[(row, l.u(i + 1, 0))] += k * 0.5 * fprime[i + 1] * hp;
            jac[(row, l.u(i, 0))] += k * 0.5 * fprime[i] * d2;
            jac[(row, l.u(i - 1, 0))] += -k * 0.5 * fprime[i - 1] * hm;
            for j in 0..=n {
                jac[(row, l.u(j, 0))] += k * d2 * di_gap[j];
                jac[(row, l.x(j))] += k * d2 * di_x[j];
            }
            row += 1;
        }
        jac[(row, l.x(0))] = alpha;
        jac[(row + 1, l.x(n))] = alpha;
        Ok(jac)
    }

    /// `dF/dy' v`, exact because every row is linear in `y'`.
    pub fn mass_action(&self, y: &[f64], v: &[f64]) -> Result<Vec<f64>> {
        let zero = vec![0.0; v.len()];
        let a = self.residual(y, v)?;
        let b = self.residual(y, &zero)?;
        Ok(a.iter().zip(&b).map(|(p, q)| p - q).collect())
    }

    /// The unique `y'` with `F(y, y') = 0`.
    pub fn consistent_derivative(&self, y: &[f64]) -> Result<Vec<f64>> {
        let zero = vec![0.0; y.len()];
        let mass = self.jacobian(y, &zero, 1.0, 0.0)?;
        let r0 = self.residual(y, &zero)?;
        let rhs = -DVector::from_vec(r0);
        let sol = mass
            .lu()
            .solve(&rhs)
            .ok_or(Error::SingularMatrix { row: 0, pivot: 0.0 })?;
        Ok(sol.as_slice().to_vec())
    }
}
