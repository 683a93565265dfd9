//! Principal biharmonic eigenpairs on the strip and unit disc, the
//! non-existence threshold `eps_bar` and the touchdown-time upper bound.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::meshfield::{BoundarySpec, Condition, Geometry};
use crate::numkit::{bessel, find_root_bracketed, quad_adaptive, BesselKind};

const ROOT_TOL: f64 = 1e-15;
const NORM_TOL: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq)]
enum Shape {
    /// `sin(pi/2 (x-1))`
    StripNavier,
    /// `sin y - sinh y + ratio (cos y - cosh y)`, `y = xi (x-1)`
    StripClamped { ratio: f64 },
    /// `J0(xi r)`
    DiscNavier,
    /// `I0(xi r) - ratio J0(xi r)`
    DiscClamped { ratio: f64 },
}

/// `(mu0, phi0)` with `phi0 > 0` inside and `int_Omega phi0 = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    pub spec: BoundarySpec,
    pub mu0: f64,
    pub xi: f64,
    /// Multiplier applied to the unnormalised closed form.
    pub norm: f64,
    shape: Shape,
}

impl EigenPair {
    pub fn eigfun(&self, x: f64) -> f64 {
        self.derivative(x, 0)
    }

    /// `d^order phi0 / dx^order` (radial derivative on the disc), `order <= 4`.
    pub fn derivative(&self, x: f64, order: usize) -> f64 {
        assert!(order <= 4, "derivative order must be 0..=4");
        let xi = self.xi;
        let scale = self.norm * xi.powi(order as i32);
        let raw = match self.shape {
            Shape::StripNavier => trig_derivative(0.5 * PI * (x - 1.0), order, TrigKind::Sin),
            Shape::StripClamped { ratio } => {
                let y = xi * (x - 1.0);
                trig_derivative(y, order, TrigKind::Sin) - trig_derivative(y, order, TrigKind::Sinh)
                    + ratio
                        * (trig_derivative(y, order, TrigKind::Cos)
                            - trig_derivative(y, order, TrigKind::Cosh))
            }
            Shape::DiscNavier => bessel_derivative(xi * x, order, false),
            Shape::DiscClamped { ratio } => {
                let z = xi * x;
                bessel_derivative(z, order, true) - ratio * bessel_derivative(z, order, false)
            }
        };
        scale * raw
    }

    /// Boundary values that the given condition forces to zero, at `x = 1`.
    pub fn boundary_residuals(&self) -> [f64; 2] {
        let first = self.derivative(1.0, 0);
        let second = match (self.spec.geometry, self.spec.condition) {
            (_, Condition::Clamped) => self.derivative(1.0, 1),
            (Geometry::Strip, Condition::Navier) => self.derivative(1.0, 2),
            (Geometry::Disc, Condition::Navier) => {
                self.derivative(1.0, 2) + self.derivative(1.0, 1)
            }
        };
        [first, second]
    }
}

#[derive(Clone, Copy)]
enum TrigKind {
    Sin,
    Cos,
    Sinh,
    Cosh,
}

fn trig_derivative(y: f64, order: usize, kind: TrigKind) -> f64 {
    match kind {
        TrigKind::Sin => (y + 0.5 * PI * order as f64).sin(),
        TrigKind::Cos => (y + 0.5 * PI * order as f64).cos(),
        TrigKind::Sinh if order.is_multiple_of(2) => y.sinh(),
        TrigKind::Sinh => y.cosh(),
        TrigKind::Cosh if order.is_multiple_of(2) => y.cosh(),
        TrigKind::Cosh => y.sinh(),
    }
}

/// `d^k/dz^k J0(z)` or `I0(z)` via the order-one recurrences.
fn bessel_derivative(z: f64, order: usize, modified: bool) -> f64 {
    // sgn flips the J-recurrence signs into the I ones
    let sgn = if modified { -1.0 } else { 1.0 };
    if z < 1e-6 {
        return match order {
            0 => 1.0,
            2 => -0.5 * sgn,
            4 => 0.375,
            _ => 0.0,
        };
    }
    let (f0, f1) = if modified {
        (
            bessel(BesselKind::I0, z).unwrap_or(f64::INFINITY),
            bessel(BesselKind::I0Prime, z).unwrap_or(f64::INFINITY),
        )
    } else {
        (
            bessel(BesselKind::J0, z).unwrap_or(f64::NAN),
            -bessel(BesselKind::J0Prime, z).unwrap_or(f64::NAN),
        )
    };
    match order {
        0 => f0,
        1 => -sgn * f1,
        2 => sgn * (f1 / z - f0),
        3 => f1 + sgn * (f0 / z - 2.0 * f1 / (z * z)),
        _ => f0 - 2.0 * f1 / z + sgn * (6.0 * f1 / z.powi(3) - 3.0 * f0 / (z * z)),
    }
}

fn integral_over_domain(spec: BoundarySpec, f: impl Fn(f64) -> f64) -> Result<f64> {
    match spec.geometry {
        Geometry::Strip => quad_adaptive(f, -1.0, 1.0, NORM_TOL),
        Geometry::Disc => Ok(2.0 * PI * quad_adaptive(|r| r * f(r), 0.0, 1.0, NORM_TOL)?),
    }
}

/// Principal eigenpair of `Laplacian^2 phi = mu phi` for the given domain and condition.
pub fn principal_eigenpair(spec: BoundarySpec) -> Result<EigenPair> {
    let (xi, shape) = match (spec.geometry, spec.condition) {
        (Geometry::Strip, Condition::Navier) => (0.5 * PI, Shape::StripNavier),
        (Geometry::Disc, Condition::Navier) => {
            let z0 = find_root_bracketed(
                |x| bessel(BesselKind::J0, x).unwrap_or(f64::NAN),
                2.0,
                3.0,
                ROOT_TOL,
            )?;
            (z0, Shape::DiscNavier)
        }
        (Geometry::Strip, Condition::Clamped) => {
            let xi = find_root_bracketed(
                |x| (2.0 * x).cos() * (2.0 * x).cosh() - 1.0,
                2.0,
                3.0,
                ROOT_TOL,
            )?;
            let ratio =
                ((2.0 * xi).sin() - (2.0 * xi).sinh()) / ((2.0 * xi).cos() - (2.0 * xi).cosh());
            (xi, Shape::StripClamped { ratio })
        }
        (Geometry::Disc, Condition::Clamped) => {
            let cond = |x: f64| -> f64 {
                let j = bessel(BesselKind::J0, x).unwrap_or(f64::NAN);
                let jp = bessel(BesselKind::J0Prime, x).unwrap_or(f64::NAN);
                let i = bessel(BesselKind::I0, x).unwrap_or(f64::NAN);
                let ip = bessel(BesselKind::I0Prime, x).unwrap_or(f64::NAN);
                j * ip - jp * i
            };
            let xi = find_root_bracketed(cond, 3.0, 3.5, ROOT_TOL)?;
            let j = bessel(BesselKind::J0, xi)?;
            let jp = bessel(BesselKind::J0Prime, xi)?;
            // I0/J0 = I0'/J0' at a root; divide by whichever is better conditioned
            let ratio = if j.abs() >= jp.abs() {
                bessel(BesselKind::I0, xi)? / j
            } else {
                bessel(BesselKind::I0Prime, xi)? / jp
            };
            (xi, Shape::DiscClamped { ratio })
        }
    };
    let mut pair = EigenPair {
        spec,
        mu0: xi.powi(4),
        xi,
        norm: 1.0,
        shape,
    };
    let mass = integral_over_domain(spec, |x| pair.eigfun(x))?;
    if !mass.is_finite() || mass == 0.0 {
        return Err(Error::NoConvergence {
            iterations: 0,
            residual: mass,
        });
    }
    pair.norm = 1.0 / mass;
    Ok(pair)
}

/// `sqrt(27 / (4 mu0))`
pub fn epsilon_bar(mu0: f64) -> f64 {
    (27.0 / (4.0 * mu0)).sqrt()
}

/// `int_{-1}^0 ds / (eps^2 mu0 s + (1+s)^-2)`, finite only for `eps < eps_bar`.
pub fn touchdown_time_bound(epsilon: f64, mu0: f64) -> Result<f64> {
    let epsilon_bar = epsilon_bar(mu0);
    if epsilon.abs() >= epsilon_bar {
        return Err(Error::BoundInapplicable {
            epsilon,
            epsilon_bar,
        });
    }
    let k = epsilon * epsilon * mu0;
    // integrand rewritten as (1+s)^2 / (1 + k s (1+s)^2) to avoid 1/0 at s = -1
    quad_adaptive(
        |s| {
            let q = (1.0 + s) * (1.0 + s);
            q / (1.0 + k * s * q)
        },
        -1.0,
        0.0,
        1e-13,
    )
}
