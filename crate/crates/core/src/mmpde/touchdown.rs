use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::SimConfig;
use super::integrate::{integrate, Outcome, SimResult};
use crate::error::{Error, Result};
use crate::meshfield::{BoundarySpec, Geometry, MeshField};
use crate::numkit::find_root_bracketed;

/// Samples of `u'` per interval when scanning for minima.
const SCAN: usize = 32;
/// Minima within this factor of the smallest gap count as touchdown points.
const GAP_FACTOR: f64 = 10.0;
/// Points closer to the centre than this are treated as central.
const CENTRE_TOL: f64 = 1e-3;

/// Local minima of `1 + u` as `(x, gap)`, including the disc origin.
pub fn local_minima(field: &MeshField, geometry: Geometry) -> Vec<(f64, f64)> {
    let nodes = field.mesh().nodes();
    let mut out: Vec<(f64, f64)> = Vec::new();
    if geometry == Geometry::Disc && field.nodal()[0][2] > 0.0 {
        out.push((nodes[0], 1.0 + field.nodal()[0][0]));
    }
    for i in 0..nodes.len() - 1 {
        let h = nodes[i + 1] - nodes[i];
        let du = |s: f64| field.eval_in_interval(i, s, 1);
        let mut prev = du(0.0);
        for j in 1..=SCAN {
            let s1 = j as f64 / SCAN as f64;
            let cur = du(s1);
            if prev < 0.0 && cur >= 0.0 {
                let s0 = (j - 1) as f64 / SCAN as f64;
                let s = find_root_bracketed(du, s0, s1, 1e-14).unwrap_or(s1);
                let x = nodes[i] + s * h;
                if out.last().is_none_or(|&(p, _)| (x - p).abs() > 1e-9) {
                    out.push((x, 1.0 + field.eval_in_interval(i, s, 0)));
                }
            }
            prev = cur;
        }
    }
    out
}

/// Touchdown locations in a near-touchdown field: minima whose gap is within
/// a factor of 10 of the smallest, with strip pairs symmetrised to `+-x_c`.
pub fn local_minima_points(field: &MeshField, geometry: Geometry) -> Vec<f64> {
    let minima = local_minima(field, geometry);
    let gmin = minima.iter().map(|m| m.1).fold(f64::INFINITY, f64::min);
    let mut pts: Vec<f64> = minima
        .into_iter()
        .filter(|m| m.1 <= GAP_FACTOR * gmin)
        .map(|m| m.0)
        .collect();
    if geometry == Geometry::Strip {
        let mut sym = Vec::with_capacity(pts.len());
        let mut used = vec![false; pts.len()];
        for a in 0..pts.len() {
            if used[a] {
                continue;
            }
            used[a] = true;
            let partner = (0..pts.len()).find(|&b| {
                !used[b]
                    && (pts[a] + pts[b]).abs() <= 1e-6 + 1e-3 * pts[a].abs()
                    && pts[a].abs() > CENTRE_TOL
            });
            match partner {
                Some(b) => {
                    used[b] = true;
                    let m = 0.5 * (pts[a].abs() + pts[b].abs());
                    sym.extend([-m, m]);
                }
                None => sym.push(pts[a]),
            }
        }
        pts = sym;
    }
    for p in pts.iter_mut() {
        if p.abs() < 1e-9 {
            *p = 0.0;
        }
    }
    pts.sort_by(f64::total_cmp);
    pts
}

/// Touchdown locations of a finished run; empty unless it touched down.
pub fn extract_touchdown_points(result: &SimResult) -> Vec<f64> {
    if result.outcome != Outcome::Touchdown {
        return Vec::new();
    }
    local_minima_points(&result.final_snapshot().field, result.config.spec.geometry)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Regime {
    /// Touchdown at the centre only.
    Central,
    /// Two symmetric points on the strip, a ring on the disc.
    OffCentre,
}

pub fn classify(points: &[f64]) -> Regime {
    if points.iter().any(|x| x.abs() > CENTRE_TOL) {
        Regime::OffCentre
    } else {
        Regime::Central
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpsilonSearch {
    pub n_intervals: usize,
    /// Gap at which the touchdown set is read off.
    pub threshold: f64,
    /// Interior probes per round.
    pub probes: usize,
    pub tol: f64,
}

impl Default for EpsilonSearch {
    fn default() -> Self {
        Self {
            n_intervals: 24,
            threshold: 1e-2,
            probes: 7,
            tol: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpsilonCritical {
    pub epsilon_c: f64,
    /// Final bracket: off-centre at the low end, central at the high end.
    pub bracket: (f64, f64),
    /// Every probe as `(epsilon, regime)`, sorted by epsilon.
    pub probes: Vec<(f64, Regime)>,
}

pub fn touchdown_regime(
    spec: BoundarySpec,
    epsilon: f64,
    search: &EpsilonSearch,
) -> Result<Regime> {
    let mut cfg = SimConfig::new(epsilon, spec, search.n_intervals);
    cfg.touchdown_threshold = search.threshold;
    let res = integrate(&cfg)?;
    if res.outcome != Outcome::Touchdown {
        return Err(Error::NoCriticalPoint);
    }
    Ok(classify(&res.touchdown_points))
}

/// Parallel k-section on `epsilon` for the boundary between off-centre
/// (small `epsilon`) and central touchdown.
pub fn find_epsilon_c(
    spec: BoundarySpec,
    bracket: (f64, f64),
    search: &EpsilonSearch,
) -> Result<EpsilonCritical> {
    let (mut lo, mut hi) = bracket;
    if !(lo > 0.0 && hi > lo) {
        return Err(Error::InvalidBracket { a: lo, b: hi });
    }
    let ends: Vec<Regime> = [lo, hi]
        .par_iter()
        .map(|&e| touchdown_regime(spec, e, search))
        .collect::<Result<_>>()?;
    if ends[0] == ends[1] {
        return Err(Error::InvalidBracket { a: lo, b: hi });
    }
    let low_regime = ends[0];
    let mut probes = vec![(lo, ends[0]), (hi, ends[1])];
    let k = search.probes.max(1);
    while hi - lo > search.tol {
        let eps: Vec<f64> = (1..=k)
            .map(|j| lo + (hi - lo) * j as f64 / (k + 1) as f64)
            .collect();
        let regimes: Vec<Regime> = eps
            .par_iter()
            .map(|&e| touchdown_regime(spec, e, search))
            .collect::<Result<_>>()?;
        let mut new_lo = lo;
        let mut new_hi = hi;
        for (e, r) in eps.iter().zip(&regimes) {
            probes.push((*e, *r));
            if *r == low_regime {
                new_lo = *e;
            }
        }
        for (e, r) in eps.iter().zip(&regimes) {
            if *r != low_regime && *e > new_lo {
                new_hi = *e;
                break;
            }
        }
        lo = new_lo;
        hi = new_hi;
    }
    probes.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(EpsilonCritical {
        epsilon_c: 0.5 * (lo + hi),
        bracket: (lo, hi),
        probes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::meshfield::Mesh;

    fn field(f: impl Fn(f64) -> [f64; 4], a: f64, n: usize) -> MeshField {
        MeshField::from_fn(Mesh::uniform(a, 1.0, n).unwrap(), f)
    }

    #[test]
    fn single_central_minimum() {
        let f = field(|x| [-0.9 + x * x, 2.0 * x, 2.0, 0.0], -1.0, 8);
        assert_eq!(local_minima_points(&f, Geometry::Strip), vec![0.0]);
        assert_eq!(classify(&[0.0]), Regime::Central);
    }

    #[test]
    fn symmetric_pair() {
        // 1+u = 0.05 + (x^2 - 0.36)^2
        let f = field(
            |x| {
                let q = x * x - 0.36;
                [-0.95 + q * q, 4.0 * x * q, 12.0 * x * x - 1.44, 24.0 * x]
            },
            -1.0,
            10,
        );
        let p = local_minima_points(&f, Geometry::Strip);
        assert_eq!(p.len(), 2);
        assert!((p[1] - 0.6).abs() < 1e-9 && p[0] == -p[1]);
        assert_eq!(classify(&p), Regime::OffCentre);
    }

    #[test]
    fn shallow_minimum_is_dropped() {
        // deep well at 0.5, shallow one at -0.5
        let f = field(
            |x| {
                let a = 0.001 + 40.0 * (x - 0.5).powi(2);
                let b = 0.2 + 40.0 * (x + 0.5).powi(2);
                let u = a.min(b) - 1.0;
                let du = if a < b {
                    80.0 * (x - 0.5)
                } else {
                    80.0 * (x + 0.5)
                };
                [u, du, 80.0, 0.0]
            },
            -1.0,
            40,
        );
        let p = local_minima_points(&f, Geometry::Strip);
        assert_eq!(p.len(), 1);
        assert!((p[0] - 0.5).abs() < 1e-6);
    }

    #[test]
    fn disc_origin_and_ring() {
        let origin = field(|r| [-0.9 + r * r, 2.0 * r, 2.0, 0.0], 0.0, 6);
        assert_eq!(local_minima_points(&origin, Geometry::Disc), vec![0.0]);
        let ring = field(
            |r| {
                let q = r * r - 0.64;
                [-0.95 + q * q, 4.0 * r * q, 12.0 * r * r - 2.56, 24.0 * r]
            },
            0.0,
            10,
        );
        let p = local_minima_points(&ring, Geometry::Disc);
        assert_eq!(p.len(), 1);
        assert!((p[0] - 0.8).abs() < 1e-9);
        assert_eq!(classify(&p), Regime::OffCentre);
    }
}
