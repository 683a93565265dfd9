//! Order-zero Bessel functions and their derivatives.

use std::f64::consts::PI;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BesselKind {
    J0,
    /// `J0'(x) = -J1(x)`
    J0Prime,
    I0,
    /// `I0'(x) = I1(x)`
    I0Prime,
}

const SERIES_LIMIT: f64 = 12.0;
const MAX_ARG: f64 = 700.0;

pub fn bessel(kind: BesselKind, x: f64) -> Result<f64> {
    if !(0.0..=MAX_ARG).contains(&x) {
        return Err(Error::OutOfRange(x));
    }
    Ok(match kind {
        BesselKind::J0 => j_order(0, x),
        BesselKind::J0Prime => -j_order(1, x),
        BesselKind::I0 => i_series(0, x),
        BesselKind::I0Prime => i_series(1, x),
    })
}

fn j_order(nu: u32, x: f64) -> f64 {
    if x <= SERIES_LIMIT {
        j_series(nu, x)
    } else {
        j_asymptotic(nu, x)
    }
}

/// `sum_k (-1)^k (x/2)^(2k+nu) / (k! (k+nu)!)`
fn j_series(nu: u32, x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = (0.5 * x).powi(nu as i32) / (1..=nu).map(f64::from).product::<f64>();
    let mut sum = term;
    for k in 1..200 {
        term *= -q / (k as f64 * (k as f64 + nu as f64));
        sum += term;
        if term.abs() < 1e-17 * sum.abs().max(1e-300) && k > 2 {
            break;
        }
    }
    sum
}

fn i_series(nu: u32, x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = (0.5 * x).powi(nu as i32) / (1..=nu).map(f64::from).product::<f64>();
    let mut sum = term;
    for k in 1..2000 {
        term *= q / (k as f64 * (k as f64 + nu as f64));
        sum += term;
        if term < 1e-17 * sum {
            break;
        }
    }
    sum
}

/// Hankel expansion, truncated at the smallest term.
fn j_asymptotic(nu: u32, x: f64) -> f64 {
    let mu = 4.0 * (nu as f64).powi(2);
    let mut a = 1.0_f64;
    let mut p = 1.0;
    let mut q = 0.0;
    let mut last = f64::INFINITY;
    for k in 1..60 {
        let kf = k as f64;
        a *= (mu - (2.0 * kf - 1.0).powi(2)) / (kf * 8.0 * x);
        if a.abs() > last {
            break;
        }
        last = a.abs();
        // signs: P gets (-1)^(k/2) on even k, Q gets (-1)^((k-1)/2) on odd k
        match k % 4 {
            0 => p += a,
            1 => q += a,
            2 => p -= a,
            _ => q -= a,
        }
        if a.abs() < 1e-17 {
            break;
        }
    }
    let chi = x - (0.5 * nu as f64 + 0.25) * PI;
    (2.0 / (PI * x)).sqrt() * (p * chi.cos() - q * chi.sin())
}
