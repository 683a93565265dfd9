//! TR-BDF2 in the computational time `tau` with a filtered embedded error
//! estimate and PI step control.
//!
//! One step of size `h` is a trapezoidal stage to `tau + c h` followed by a
//! BDF2 stage to `tau + h`, both with the same iteration matrix
//! `dF/dy + dF/dy' / (d h)`, `c = 2 - sqrt 2`, `d = c / 2`.

use nalgebra::Dyn;
use nalgebra::{DMatrix, DVector, LU};
use serde::{Deserialize, Serialize};

use super::config::SimConfig;
use super::dae::Dae;
use super::touchdown::local_minima_points;
use crate::error::{Error, Result};
use crate::meshfield::MeshField;

const C: f64 = 2.0 - std::f64::consts::SQRT_2;
const D: f64 = C / 2.0;
/// `(1 - d) / 2`
const W: f64 = (1.0 - D) / 2.0;
const MAX_NEWTON: usize = 8;
const SAFETY: f64 = 0.9;
const MIN_STEP: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Outcome {
    Touchdown,
    SteadyState,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub tau: f64,
    pub min_gap: f64,
    pub field: MeshField,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
    pub newton_failures: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimResult {
    pub config: SimConfig,
    pub outcome: Outcome,
    /// Extrapolated touchdown time; `None` unless `outcome` is `Touchdown`.
    pub t_c: Option<f64>,
    pub touchdown_points: Vec<f64>,
    /// Requested snapshots in time order, then the final state.
    pub snapshots: Vec<Snapshot>,
    /// `(t, min 1+u)` after every accepted step.
    pub min_gap_history: Vec<(f64, f64)>,
    pub final_tau: f64,
    pub stats: StepStats,
}

impl SimResult {
    pub fn final_snapshot(&self) -> &Snapshot {
        self.snapshots
            .last()
            .expect("a result always holds the final state")
    }

    pub fn final_time(&self) -> f64 {
        self.final_snapshot().t
    }
}

struct StepOutcome {
    y: Vec<f64>,
    yd: Vec<f64>,
    err: f64,
}

struct Stepper<'a> {
    dae: &'a Dae,
    cfg: &'a SimConfig,
}

impl<'a> Stepper<'a> {
    /// Per-component error scale. Nodal data are measured against the local
    /// gap and mesh spacing so the norm is invariant under the quenching
    /// rescaling. The time slot holds the offset from the step start and is
    /// measured against the step increment `dt`.
    fn weights(&self, a: &[f64], b: &[f64], dt: f64) -> Vec<f64> {
        let l = self.dae.layout;
        let (rtol, atol) = (self.cfg.rtol, self.cfg.atol);
        let mut w = vec![0.0; a.len()];
        w[l.t()] = rtol * dt.abs() + f64::MIN_POSITIVE;
        let n = l.n_nodes;
        for y in [a, b] {
            let xs = self.dae.nodes(y);
            for i in 0..n {
                let left = if i > 0 {
                    xs[i] - xs[i - 1]
                } else {
                    f64::INFINITY
                };
                let right = if i + 1 < n {
                    xs[i + 1] - xs[i]
                } else {
                    f64::INFINITY
                };
                let ell = left.min(right);
                let gap = (1.0 + y[l.u(i, 0)]).abs();
                let mut scale = [gap; 4];
                for k in 1..4 {
                    scale[k] = y[l.u(i, k)].abs().max(gap * ell.powi(-(k as i32)));
                }
                for k in 0..4 {
                    let j = l.u(i, k);
                    w[j] = w[j].max(atol + rtol * scale[k]);
                }
                let j = l.x(i);
                w[j] = w[j].max(atol + rtol * ell);
            }
        }
        w
    }

    fn norm(v: &[f64], w: &[f64]) -> f64 {
        v.iter()
            .zip(w)
            .fold(0.0_f64, |m, (x, s)| m.max((x / s).abs()))
    }

    /// Solve `F(z, alpha z + shift) = 0` by simplified Newton.
    fn solve_stage(
        &self,
        lu: &LU<f64, Dyn, Dyn>,
        mut z: Vec<f64>,
        alpha: f64,
        shift: &[f64],
        w: &[f64],
    ) -> Result<(Vec<f64>, Vec<f64>)> {
        let mut prev: Option<f64> = None;
        for _ in 0..MAX_NEWTON {
            let zd: Vec<f64> = z.iter().zip(shift).map(|(a, b)| alpha * a + b).collect();
            let r = self.dae.residual(&z, &zd)?;
            let delta = lu
                .solve(&DVector::from_vec(r))
                .ok_or(Error::SingularMatrix { row: 0, pivot: 0.0 })?;
            for (a, b) in z.iter_mut().zip(delta.iter()) {
                *a -= b;
            }
            let dn = Self::norm(delta.as_slice(), w);
            if !dn.is_finite() {
                break;
            }
            let done = match prev {
                None => dn <= 1e-3,
                Some(p) => {
                    let rho = dn / p;
                    if rho >= 0.9 {
                        break;
                    }
                    dn * rho / (1.0 - rho) <= 0.02 || dn <= 1e-3
                }
            };
            if done {
                let zd: Vec<f64> = z.iter().zip(shift).map(|(a, b)| alpha * a + b).collect();
                return Ok((z, zd));
            }
            prev = Some(dn);
        }
        Err(Error::NoConvergence {
            iterations: MAX_NEWTON,
            residual: f64::NAN,
        })
    }

    fn step(&self, y: &[f64], yd: &[f64], h: f64) -> Result<StepOutcome> {
        let alpha = 1.0 / (D * h);
        let jac: DMatrix<f64> = self.dae.jacobian(y, yd, alpha, 1.0)?;
        let lu = jac.lu();
        let t = self.dae.layout.t();
        let w0 = self.weights(y, y, h * yd[t]);

        // trapezoidal stage: y'_c = alpha (z - y) - y'_n
        let shift: Vec<f64> = y.iter().zip(yd).map(|(a, b)| -alpha * a - b).collect();
        let guess: Vec<f64> = y.iter().zip(yd).map(|(a, b)| a + C * h * b).collect();
        let (yc, ydc) = self.solve_stage(&lu, guess, alpha, &shift, &w0)?;

        // BDF2 stage: y'_1 = alpha (z - y) - (w/d)(y'_n + y'_c)
        let shift: Vec<f64> = (0..y.len())
            .map(|j| -alpha * y[j] - (W / D) * (yd[j] + ydc[j]))
            .collect();
        let guess: Vec<f64> = (0..y.len()).map(|j| y[j] + (yc[j] - y[j]) / C).collect();
        let (y1, yd1) = self.solve_stage(&lu, guess, alpha, &shift, &w0)?;

        let est: Vec<f64> = (0..y.len())
            .map(|j| h * ((4.0 * W - 1.0) / 3.0 * yd[j] - ydc[j] / 3.0 + 2.0 * D / 3.0 * yd1[j]))
            .collect();
        let mut me = self.dae.mass_action(y, &est)?;
        me.iter_mut().for_each(|v| *v *= alpha);
        let filtered = lu
            .solve(&DVector::from_vec(me))
            .ok_or(Error::SingularMatrix { row: 0, pivot: 0.0 })?;
        let err = Self::norm(
            filtered.as_slice(),
            &self.weights(y, &y1, (y1[t] - y[t]).abs().max(h * yd[t].abs())),
        );
        Ok(StepOutcome {
            y: y1,
            yd: yd1,
            err,
        })
    }
}

/// Physical time as an unevaluated sum `hi + lo`. Near touchdown a step
/// advances `t` by less than its ulp, so the state keeps only the offset from
/// the step start and the total is accumulated here.
#[derive(Debug, Clone, Copy, Default)]
struct Clock {
    hi: f64,
    lo: f64,
}

impl Clock {
    fn advance(&mut self, dt: f64) {
        let s = self.hi + dt;
        let bb = s - self.hi;
        let err = (self.hi - (s - bb)) + (dt - bb);
        let lo = self.lo + err;
        self.hi = s + lo;
        self.lo = lo - (self.hi - s);
    }

    fn at(self, offset: f64) -> f64 {
        self.hi + (self.lo + offset)
    }

    /// `self - other` without cancellation in the high parts.
    fn since(self, other: Clock) -> f64 {
        (self.hi - other.hi) + (self.lo - other.lo)
    }
}

/// Cubic Hermite interpolant of the state on one step, `theta` in `[0, 1]`.
fn hermite(y0: &[f64], d0: &[f64], y1: &[f64], d1: &[f64], h: f64, theta: f64) -> Vec<f64> {
    let t = theta;
    let h10 = t * (1.0 - t).powi(2);
    let h01 = t * t * (3.0 - 2.0 * t);
    let h11 = t * t * (t - 1.0);
    // written about y0 so constant components (the mesh ends) stay exact
    (0..y0.len())
        .map(|j| y0[j] + h01 * (y1[j] - y0[j]) + h * (h10 * d0[j] + h11 * d1[j]))
        .collect()
}

/// `theta` in `[0, 1]` where `f` drops to zero, by bisection; `f(0) > 0 >= f(1)`.
fn crossing<F: Fn(f64) -> f64>(f: F) -> f64 {
    let (mut a, mut b) = (0.0, 1.0);
    for _ in 0..60 {
        let m = 0.5 * (a + b);
        if f(m) > 0.0 {
            a = m;
        } else {
            b = m;
        }
    }
    b
}

/// `t_c` from a least-squares line through `(t, gap^3)` over the last decade
/// of the gap history.
pub fn extrapolate_tc(history: &[(f64, f64)]) -> Option<f64> {
    let &(_, last) = history.last()?;
    let mut pts: Vec<(f64, f64)> = history
        .iter()
        .rev()
        .take_while(|(_, g)| *g <= 10.0 * last)
        .map(|&(t, g)| (t, g.powi(3)))
        .collect();
    if pts.len() < 3 {
        pts = history
            .iter()
            .rev()
            .take(3)
            .map(|&(t, g)| (t, g.powi(3)))
            .collect();
    }
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let tm = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let gm = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let (sxy, sxx) = pts.iter().fold((0.0, 0.0), |(a, b), &(t, g)| {
        (a + (t - tm) * (g - gm), b + (t - tm) * (t - tm))
    });
    if !(sxx > 0.0) {
        return None;
    }
    let slope = sxy / sxx;
    if !(slope < 0.0) {
        return None;
    }
    Some(tm - gm / slope)
}

pub fn integrate(cfg: &SimConfig) -> Result<SimResult> {
    let dae = Dae::new(cfg)?;
    let stepper = Stepper { dae: &dae, cfg };
    let l = dae.layout;

    let mut y = dae.initial_state();
    let mut yd = dae.consistent_derivative(&y)?;
    let mut tau = 0.0;
    let mut h: f64 = 1e-4;
    let mut err_prev: f64 = 1.0;
    let mut stats = StepStats::default();
    let mut clock = Clock::default();
    let mut history = vec![(Clock::default(), 1.0)];
    let mut snapshots = Vec::new();

    let mut times: Vec<f64> = cfg
        .snapshot_times
        .iter()
        .copied()
        .filter(|t| *t > 0.0)
        .collect();
    times.sort_by(|a, b| b.total_cmp(a));
    let mut gaps: Vec<f64> = cfg.snapshot_gaps.clone();
    gaps.sort_by(|a, b| a.total_cmp(b));

    let outcome = loop {
        if stats.accepted >= cfg.max_steps || tau >= cfg.tau_max {
            break Outcome::Inconclusive;
        }
        let h_try = h.min(cfg.tau_max - tau);
        let trial = stepper.step(&y, &yd, h_try);
        let out = match trial {
            Ok(o) if o.err.is_finite() && o.err <= 1.0 => o,
            Ok(o) => {
                stats.rejected += 1;
                let factor = if o.err.is_finite() {
                    (SAFETY * o.err.powf(-1.0 / 3.0)).clamp(0.1, 0.9)
                } else {
                    0.25
                };
                h = h_try * factor;
                if h < MIN_STEP {
                    return Err(Error::StiffnessFailure {
                        tau,
                        h,
                        reason: format!("error estimate {:.3e} at minimum step", o.err),
                    });
                }
                continue;
            }
            Err(e) => {
                stats.newton_failures += 1;
                h = h_try * 0.25;
                if h < MIN_STEP {
                    return Err(Error::StiffnessFailure {
                        tau,
                        h,
                        reason: format!("stage solve failed: {e}"),
                    });
                }
                continue;
            }
        };

        let (y0, d0) = (std::mem::take(&mut y), std::mem::take(&mut yd));
        y = out.y;
        yd = out.yd;
        tau += h_try;
        stats.accepted += 1;

        let gap1 = dae.min_gap(&y);
        while let Some(&ts) = times.last() {
            if ts > clock.at(y[l.t()]) {
                break;
            }
            let th = crossing(|s| ts - clock.at(hermite(&y0, &d0, &y, &yd, h_try, s)[l.t()]));
            let ys = hermite(&y0, &d0, &y, &yd, h_try, th);
            snapshots.push(snapshot(&dae, &ys, clock, tau - h_try + th * h_try)?);
            times.pop();
        }
        while let Some(&gs) = gaps.last() {
            if gs < gap1 {
                break;
            }
            let th = crossing(|s| dae.min_gap(&hermite(&y0, &d0, &y, &yd, h_try, s)) - gs);
            let ys = hermite(&y0, &d0, &y, &yd, h_try, th);
            snapshots.push(snapshot(&dae, &ys, clock, tau - h_try + th * h_try)?);
            gaps.pop();
        }
        clock.advance(y[l.t()]);
        y[l.t()] = 0.0;
        history.push((clock, gap1));

        if gap1 <= cfg.touchdown_threshold {
            break Outcome::Touchdown;
        }
        if dae.max_ut(&y, &yd) <= cfg.steady_tol {
            break Outcome::SteadyState;
        }

        // PI controller on the per-step error
        let e = out.err.max(1e-10);
        let factor = SAFETY * e.powf(-0.7 / 3.0) * err_prev.powf(0.4 / 3.0);
        err_prev = e;
        h = h_try * factor.clamp(0.2, 5.0);
    };

    snapshots.sort_by(|a, b| a.t.total_cmp(&b.t));
    let last = snapshot(&dae, &y, clock, tau)?;
    // a requested event on the final step would repeat its time
    if snapshots.last().is_some_and(|s| s.t >= last.t) {
        snapshots.pop();
    }
    snapshots.push(last);
    let mut result = SimResult {
        config: cfg.clone(),
        outcome,
        t_c: None,
        touchdown_points: Vec::new(),
        snapshots,
        min_gap_history: history.iter().map(|(c, g)| (c.at(0.0), *g)).collect(),
        final_tau: tau,
        stats,
    };
    if outcome == Outcome::Touchdown {
        // fit on offsets from the last time so the remaining interval keeps its digits
        let rel: Vec<(f64, f64)> = history.iter().map(|(c, g)| (c.since(clock), *g)).collect();
        result.t_c = extrapolate_tc(&rel).map(|dt| clock.at(dt));
        result.touchdown_points =
            local_minima_points(&result.final_snapshot().field, cfg.spec.geometry);
    }
    Ok(result)
}

fn snapshot(dae: &Dae, y: &[f64], clock: Clock, tau: f64) -> Result<Snapshot> {
    Ok(Snapshot {
        t: clock.at(y[dae.layout.t()]),
        tau,
        min_gap: dae.min_gap(y),
        field: dae.field(y)?,
    })
}
