//! Small-time boundary-layer asymptotics: the layer ODE hierarchy in
//! `eta = (1-x)/(eps^{1/2} f^{1/4})`, composite solutions and the predicted
//! touchdown locations.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::meshfield::{BoundarySpec, Condition, Geometry};
use crate::numkit::{find_root_bracketed, BandedMatrix};

pub const DEFAULT_LAYER_LENGTH: f64 = 30.0;
pub const DEFAULT_LAYER_GRID: usize = 3000;
const FLATNESS_TOL: f64 = 1e-4;

/// `f(t) = 1 - (1-3t)^{1/3}` on `[0, 1/3]`.
pub fn f_of_t(t: f64) -> Result<f64> {
    if !(0.0..=1.0 / 3.0).contains(&t) {
        return Err(Error::OutOfDomain(t));
    }
    Ok(1.0 - (1.0 - 3.0 * t).max(0.0).cbrt())
}

/// Inverse of [`f_of_t`] on `[0, 1]`.
pub fn f_inverse(f: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&f) {
        return Err(Error::OutOfDomain(f));
    }
    Ok((1.0 - (1.0 - f).powi(3)) / 3.0)
}

/// `f'(t) = (1-3t)^{-2/3}`, finite for `t < 1/3` only.
pub fn f_prime(t: f64) -> Result<f64> {
    if !(0.0..1.0 / 3.0).contains(&t) {
        return Err(Error::OutOfDomain(t));
    }
    Ok((1.0 - 3.0 * t).powf(-2.0 / 3.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum LayerTerm {
    V0,
    V1,
    V2,
    VQuarter,
    VHalf,
}

impl LayerTerm {
    pub fn label(self) -> &'static str {
        match self {
            Self::V0 => "v0",
            Self::V1 => "v1",
            Self::V2 => "v2",
            Self::VQuarter => "v1/4",
            Self::VHalf => "v1/2",
        }
    }
}

/// The three retained layer terms for a geometry, in expansion order.
pub fn hierarchy_terms(geometry: Geometry) -> [LayerTerm; 3] {
    match geometry {
        Geometry::Strip => [LayerTerm::V0, LayerTerm::V1, LayerTerm::V2],
        Geometry::Disc => [LayerTerm::V0, LayerTerm::VQuarter, LayerTerm::VHalf],
    }
}

/// Layer solutions on the uniform grid `eta_j = j L / n`, each node holding
/// `[v, v', v'', v''']`.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerProfiles {
    pub spec: BoundarySpec,
    pub length: f64,
    pub n_grid: usize,
    profiles: Vec<(LayerTerm, Vec<[f64; 4]>)>,
}

impl LayerProfiles {
    /// Wraps externally produced samples; every profile needs `n_grid + 1` nodes.
    pub fn from_samples(
        spec: BoundarySpec,
        length: f64,
        profiles: Vec<(LayerTerm, Vec<[f64; 4]>)>,
    ) -> Result<Self> {
        let n_plus_one = profiles.first().map(|p| p.1.len()).unwrap_or(0);
        if n_plus_one < 5 || profiles.iter().any(|p| p.1.len() != n_plus_one) || !(length > 0.0) {
            return Err(Error::InvalidConfig(
                "layer profiles need equal grids of at least 5 nodes".into(),
            ));
        }
        Ok(Self {
            spec,
            length,
            n_grid: n_plus_one - 1,
            profiles,
        })
    }

    pub fn step(&self) -> f64 {
        self.length / self.n_grid as f64
    }

    pub fn eta(&self) -> Vec<f64> {
        let h = self.step();
        (0..=self.n_grid).map(|j| j as f64 * h).collect()
    }

    pub fn terms(&self) -> impl Iterator<Item = LayerTerm> + '_ {
        self.profiles.iter().map(|p| p.0)
    }

    pub fn profile(&self, term: LayerTerm) -> Option<&[[f64; 4]]> {
        self.profiles
            .iter()
            .find(|p| p.0 == term)
            .map(|p| p.1.as_slice())
    }

    /// Cubic Hermite interpolation of `v` from nodal `(v, v')`; flat beyond `L`.
    pub fn eval(&self, term: LayerTerm, eta: f64) -> Option<f64> {
        let data = self.profile(term)?;
        let h = self.step();
        if eta >= self.length {
            return Some(data[self.n_grid][0]);
        }
        let eta = eta.max(0.0);
        let i = ((eta / h) as usize).min(self.n_grid - 1);
        let s = eta / h - i as f64;
        let (a, b) = (&data[i], &data[i + 1]);
        let h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
        let h10 = s * (1.0 - s) * (1.0 - s);
        let h01 = s * s * (3.0 - 2.0 * s);
        let h11 = s * s * (s - 1.0);
        Some(h00 * a[0] + h10 * h * a[1] + h01 * b[0] + h11 * h * b[1])
    }
}

/// Rows imposed at `eta = 0`: value, then either slope or curvature.
#[derive(Debug, Clone, Copy)]
enum OriginRow {
    Slope(f64),
    Curvature(f64),
}

/// Solves `v'''' - (eta/4) v' + coef v = rhs` with `v(0) = 0`, one origin
/// row and `v'(L) = v'''(L) = 0`. Returns `v_{-1} .. v_{n+2}`.
fn solve_layer_ode(
    length: f64,
    n: usize,
    coef: f64,
    rhs: &[f64],
    origin: OriginRow,
) -> Result<Vec<f64>> {
    let h = length / n as f64;
    let (h2, h4) = (h * h, h * h * h * h);
    let m = n + 4;
    let mut a = BandedMatrix::zeros(m, 4, 2);
    let mut b = vec![0.0; m];
    // unknown index of v_j is j + 1; every row is scaled to O(1) stencil weights
    a.set(0, 1, 1.0);
    match origin {
        OriginRow::Slope(g) => {
            a.set(1, 0, -0.5);
            a.set(1, 2, 0.5);
            b[1] = g * h;
        }
        OriginRow::Curvature(g) => {
            a.set(1, 0, 1.0);
            a.set(1, 1, -2.0);
            a.set(1, 2, 1.0);
            b[1] = g * h2;
        }
    }
    for j in 1..=n {
        let row = j + 1;
        let c = j + 1;
        for (o, w) in [1.0, -4.0, 6.0, -4.0, 1.0].iter().enumerate() {
            a.add(row, c + o - 2, *w);
        }
        let adv = 0.125 * j as f64 * h4;
        a.add(row, c - 1, adv);
        a.add(row, c + 1, -adv);
        a.add(row, c, coef * h4);
        b[row] = rhs[j] * h4;
    }
    let c = n + 1;
    a.set(n + 2, c - 1, -0.5);
    a.set(n + 2, c + 1, 0.5);
    for (o, w) in [-1.0, 2.0, 0.0, -2.0, 1.0].iter().enumerate() {
        if *w != 0.0 {
            a.set(n + 3, c + o - 2, 0.5 * w);
        }
    }
    a.solve(&b)
}

/// Nodal `[v, v', v'', v''']` from the extended unknown vector.
fn nodal_derivatives(x: &[f64], n: usize, h: f64) -> Vec<[f64; 4]> {
    (0..=n)
        .map(|j| {
            let c = j + 1;
            let d1 = (x[c + 1] - x[c - 1]) / (2.0 * h);
            let d2 = (x[c + 1] - 2.0 * x[c] + x[c - 1]) / (h * h);
            let d3 = if c >= 2 {
                (x[c + 2] - 2.0 * x[c + 1] + 2.0 * x[c - 1] - x[c - 2]) / (2.0 * h * h * h)
            } else {
                (-3.0 * x[c - 1] + 10.0 * x[c] - 12.0 * x[c + 1] + 6.0 * x[c + 2] - x[c + 3])
                    / (2.0 * h * h * h)
            };
            [x[c], d1, d2, d3]
        })
        .collect()
}

/// Solves the three retained layer problems in order.
pub fn solve_layer_hierarchy(
    spec: BoundarySpec,
    length: f64,
    n_grid: usize,
) -> Result<LayerProfiles> {
    if n_grid < 16 || !(length > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "layer grid needs n >= 16 and L > 0 (got n = {n_grid}, L = {length})"
        )));
    }
    let n = n_grid;
    let h = length / n as f64;
    let eta: Vec<f64> = (0..=n).map(|j| j as f64 * h).collect();
    let homogeneous = match spec.condition {
        Condition::Clamped => OriginRow::Slope(0.0),
        Condition::Navier => OriginRow::Curvature(0.0),
    };
    let solve = |coef: f64, rhs: Vec<f64>, origin| -> Result<Vec<[f64; 4]>> {
        Ok(nodal_derivatives(
            &solve_layer_ode(length, n, coef, &rhs, origin)?,
            n,
            h,
        ))
    };

    let v0 = solve(1.0, vec![-1.0; n + 1], homogeneous)?;
    let tail = n - n / 10;
    let slope = v0[tail..].iter().map(|d| d[1].abs()).fold(0.0, f64::max);
    if slope > FLATNESS_TOL {
        return Err(Error::TruncationTooSmall { slope });
    }

    let profiles = match spec.geometry {
        Geometry::Strip => {
            let rhs1 = (0..=n).map(|j| 0.5 * eta[j] * v0[j][1]).collect();
            let v1 = solve(2.0, rhs1, homogeneous)?;
            let rhs2 = (0..=n)
                .map(|j| {
                    let (w, w1) = (v0[j][0], v0[j][1]);
                    -3.0 * (w - 0.25 * eta[j] * w1 + w * w) + 0.5 * eta[j] * v1[j][1]
                        - 2.0 * v1[j][0]
                })
                .collect();
            let v2 = solve(3.0, rhs2, homogeneous)?;
            vec![
                (LayerTerm::V0, v0),
                (LayerTerm::V1, v1),
                (LayerTerm::V2, v2),
            ]
        }
        Geometry::Disc => {
            let lower_row = |prev: &[[f64; 4]]| match spec.condition {
                Condition::Clamped => OriginRow::Slope(0.0),
                Condition::Navier => OriginRow::Curvature(prev[0][1]),
            };
            let rhs_q = v0.iter().map(|d| 2.0 * d[3]).collect();
            let vq = solve(1.25, rhs_q, lower_row(&v0))?;
            let rhs_h = (0..=n)
                .map(|j| 2.0 * vq[j][3] + 2.0 * eta[j] * v0[j][3] + v0[j][2])
                .collect();
            let vh = solve(1.5, rhs_h, lower_row(&vq))?;
            vec![
                (LayerTerm::V0, v0),
                (LayerTerm::VQuarter, vq),
                (LayerTerm::VHalf, vh),
            ]
        }
    };
    LayerProfiles::from_samples(spec, length, profiles)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Corrections {
    Strip { eta1: f64, eta2: f64 },
    Disc { eta_quarter: f64, eta_half: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TouchdownConstants {
    pub spec: BoundarySpec,
    pub eta0: f64,
    pub corrections: Corrections,
}

impl TouchdownConstants {
    /// Critical point of the layer expansion, `s = eps^{1/2} f^{1/4}`.
    pub fn eta_c(&self, f: f64, s: f64) -> f64 {
        match self.corrections {
            Corrections::Strip { eta1, eta2 } => self.eta0 + f * eta1 + f * f * eta2,
            Corrections::Disc {
                eta_quarter,
                eta_half,
            } => self.eta0 + s * eta_quarter + s * s * eta_half,
        }
    }
}

/// Four-point Lagrange interpolation of a node-sampled quantity.
struct LocalCubic {
    xs: [f64; 4],
}

impl LocalCubic {
    fn eval(&self, ys: [f64; 4], x: f64) -> f64 {
        let mut acc = 0.0;
        for i in 0..4 {
            let mut w = 1.0;
            for j in 0..4 {
                if i != j {
                    w *= (x - self.xs[j]) / (self.xs[i] - self.xs[j]);
                }
            }
            acc += w * ys[i];
        }
        acc
    }
}

/// Index `i` with `d[i]` and `d[i+1]` of opposite sign (first such, `i >= 1`).
fn first_sign_change(d: &[f64]) -> Option<usize> {
    (1..d.len() - 1).find(|&i| (d[i] < 0.0 && d[i + 1] >= 0.0) || (d[i] > 0.0 && d[i + 1] <= 0.0))
}

pub fn touchdown_constants(profiles: &LayerProfiles) -> Result<TouchdownConstants> {
    let [t0, ta, tb] = hierarchy_terms(profiles.spec.geometry);
    let missing =
        |t: LayerTerm| Error::InvalidConfig(format!("layer profile {} missing", t.label()));
    let v0 = profiles.profile(t0).ok_or_else(|| missing(t0))?;
    let va = profiles.profile(ta).ok_or_else(|| missing(ta))?;
    let vb = profiles.profile(tb).ok_or_else(|| missing(tb))?;
    let h = profiles.step();
    let n = profiles.n_grid;

    let d1: Vec<f64> = v0.iter().map(|d| d[1]).collect();
    let i = first_sign_change(&d1).ok_or(Error::NoCriticalPoint)?;
    let base = i.saturating_sub(1).min(n - 3);
    let cubic = LocalCubic {
        xs: [0, 1, 2, 3].map(|k| (base + k) as f64 * h),
    };
    let sample = |v: &[[f64; 4]], k: usize| [0, 1, 2, 3].map(|o| v[base + o][k]);
    let eta0 = find_root_bracketed(
        |e| cubic.eval(sample(v0, 1), e),
        i as f64 * h,
        (i + 1) as f64 * h,
        1e-14,
    )?;
    let at = |v: &[[f64; 4]], k: usize| cubic.eval(sample(v, k), eta0);
    let v0pp = at(v0, 2);
    if v0pp.abs() < 1e-12 {
        return Err(Error::NoCriticalPoint);
    }
    let first = -at(va, 1) / v0pp;
    let second = -(at(vb, 1) + first * at(va, 2) + 0.5 * first * first * at(v0, 3)) / v0pp;
    let corrections = match profiles.spec.geometry {
        Geometry::Strip => Corrections::Strip {
            eta1: first,
            eta2: second,
        },
        Geometry::Disc => Corrections::Disc {
            eta_quarter: first,
            eta_half: second,
        },
    };
    Ok(TouchdownConstants {
        spec: profiles.spec,
        eta0,
        corrections,
    })
}

/// Composite small-time solution keeping the first `n_terms` (1..=3) layer terms.
pub fn composite_partial(
    profiles: &LayerProfiles,
    x: f64,
    t: f64,
    epsilon: f64,
    n_terms: usize,
) -> Result<f64> {
    let f = f_of_t(t)?;
    if f == 0.0 {
        return Ok(0.0);
    }
    let s = epsilon.sqrt() * f.powf(0.25);
    let terms = hierarchy_terms(profiles.spec.geometry);
    let eval = |term: LayerTerm, eta: f64| -> Result<f64> {
        profiles
            .eval(term, eta)
            .ok_or_else(|| Error::InvalidConfig(format!("layer profile {} missing", term.label())))
    };
    let n_terms = n_terms.clamp(1, 3);
    match profiles.spec.geometry {
        Geometry::Strip => {
            let (el, er) = ((x + 1.0) / s, (1.0 - x) / s);
            let mut acc = 0.0;
            for (k, &term) in terms.iter().take(n_terms).enumerate() {
                acc += f.powi(k as i32) * (eval(term, el)? + eval(term, er)?);
            }
            // matching term: each far field carries -f, the core is -f
            Ok(f * acc + f)
        }
        Geometry::Disc => {
            let eta = (1.0 - x) / s;
            let mut acc = 0.0;
            for (k, &term) in terms.iter().take(n_terms).enumerate() {
                acc += s.powi(k as i32) * eval(term, eta)?;
            }
            Ok(f * acc)
        }
    }
}

pub fn composite_solution(profiles: &LayerProfiles, x: f64, t: f64, epsilon: f64) -> Result<f64> {
    composite_partial(profiles, x, t, epsilon, 3)
}

/// Touchdown locations at time `t_c`: `[-x_c, x_c]` on the strip, `[r_c]` on the disc.
pub fn predict_touchdown(
    constants: &TouchdownConstants,
    epsilon: f64,
    t_c: f64,
) -> Result<Vec<f64>> {
    if !(t_c > 0.0 && t_c <= 1.0 / 3.0) {
        return Err(Error::OutOfDomain(t_c));
    }
    let f = f_of_t(t_c)?;
    let s = epsilon.sqrt() * f.powf(0.25);
    let loc = 1.0 - s * constants.eta_c(f, s);
    if !(loc > 0.0 && loc <= 1.0) {
        return Err(Error::PredictionOutOfRange(loc));
    }
    Ok(match constants.spec.geometry {
        Geometry::Strip => vec![-loc, loc],
        Geometry::Disc => vec![loc],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn clamped_strip() -> BoundarySpec {
        BoundarySpec::new(Geometry::Strip, Condition::Clamped)
    }

    #[test]
    fn f_basics() {
        assert_eq!(f_of_t(0.0).unwrap(), 0.0);
        assert!((f_of_t(1.0 / 3.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((f_prime(0.0).unwrap() - 1.0).abs() < 1e-15);
        assert!(f_of_t(0.4).is_err());
        assert!(f_prime(1.0 / 3.0).is_err());
        for t in [0.01, 0.1, 0.3] {
            let f = f_of_t(t).unwrap();
            assert!((f_inverse(f).unwrap() - t).abs() < 1e-14);
            let h = 1e-6;
            let fd = (f_of_t(t + h).unwrap() - f_of_t(t - h).unwrap()) / (2.0 * h);
            assert!((fd - f_prime(t).unwrap()).abs() < 1e-6);
        }
    }

    #[test]
    fn leading_profile_far_field() {
        let p = solve_layer_hierarchy(clamped_strip(), 20.0, 2000).unwrap();
        let v0 = p.profile(LayerTerm::V0).unwrap();
        assert!(v0[0][0].abs() < 1e-12);
        assert!((v0[2000][0] + 1.0).abs() < 1e-6);
    }

    #[test]
    fn discrete_equations_satisfied() {
        let p = solve_layer_hierarchy(clamped_strip(), 30.0, 600).unwrap();
        let h = p.step();
        let v0 = p.profile(LayerTerm::V0).unwrap();
        for j in 2..598 {
            let d4 = (v0[j - 2][0] - 4.0 * v0[j - 1][0] + 6.0 * v0[j][0] - 4.0 * v0[j + 1][0]
                + v0[j + 2][0])
                / h.powi(4);
            let res = d4 - 0.25 * j as f64 * h * v0[j][1] + v0[j][0] + 1.0;
            assert!(res.abs() < 1e-6, "node {j}: {res}");
        }
    }

    #[test]
    fn short_truncation_rejected() {
        assert!(matches!(
            solve_layer_hierarchy(clamped_strip(), 4.0, 400),
            Err(Error::TruncationTooSmall { .. })
        ));
    }

    #[test]
    fn flat_profile_has_no_critical_point() {
        let flat = vec![[-1.0, 0.0, 0.0, 0.0]; 101];
        let p = LayerProfiles::from_samples(
            clamped_strip(),
            30.0,
            vec![
                (LayerTerm::V0, flat.clone()),
                (LayerTerm::V1, flat.clone()),
                (LayerTerm::V2, flat),
            ],
        )
        .unwrap();
        assert!(matches!(
            touchdown_constants(&p),
            Err(Error::NoCriticalPoint)
        ));
    }

    #[test]
    fn composite_at_time_zero_and_core() {
        let p = solve_layer_hierarchy(clamped_strip(), 30.0, 1500).unwrap();
        assert_eq!(composite_solution(&p, 0.3, 0.0, 0.02).unwrap(), 0.0);
        // s = 1e-4^{1/2} f^{1/4} is tiny; the core sees only the outer solution
        let t = 0.05;
        let f = f_of_t(t).unwrap();
        let u = composite_solution(&p, 0.0, t, 1e-4).unwrap();
        assert!((u + f).abs() < 1e-9, "{u} vs {}", -f);
    }

    #[test]
    fn prediction_limits() {
        let c = TouchdownConstants {
            spec: clamped_strip(),
            eta0: 3.7384,
            corrections: Corrections::Strip {
                eta1: -0.6641,
                eta2: 0.1085,
            },
        };
        let x = predict_touchdown(&c, 1e-10, 1.0 / 3.0).unwrap();
        assert!((x[1] - 1.0).abs() < 1e-4 && (x[0] + 1.0).abs() < 1e-4);
        assert!(matches!(
            predict_touchdown(&c, 0.5, 1.0 / 3.0),
            Err(Error::PredictionOutOfRange(_))
        ));
        assert!(predict_touchdown(&c, 0.02, 0.5).is_err());
    }

    #[test]
    fn published_constants() {
        let strip =
            touchdown_constants(&solve_layer_hierarchy(clamped_strip(), 30.0, 3000).unwrap())
                .unwrap();
        let Corrections::Strip { eta1, eta2 } = strip.corrections else {
            panic!()
        };
        assert!((strip.eta0 - 3.7384).abs() < 1e-3, "{strip:?}");
        assert!(
            (eta1 + 0.6641).abs() < 1e-3 && (eta2 - 0.1085).abs() < 1e-3,
            "{strip:?}"
        );

        let spec = BoundarySpec::new(Geometry::Disc, Condition::Navier);
        let disc = touchdown_constants(&solve_layer_hierarchy(spec, 30.0, 3000).unwrap()).unwrap();
        let Corrections::Disc {
            eta_quarter,
            eta_half,
        } = disc.corrections
        else {
            panic!()
        };
        assert!((disc.eta0 - 2.8832).abs() < 1e-3, "{disc:?}");
        assert!(
            (eta_quarter - 0.3533).abs() < 1e-3 && (eta_half - 0.9457).abs() < 1e-3,
            "{disc:?}"
        );
    }
}
