//! Bracketed scalar root finding (Brent's method).

use crate::error::{Error, Result};

/// Find a root of `f` in `[a, b]` given a sign change.
pub fn find_root_bracketed<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<f64> {
    brent(f, a, b, tol, |_, _| {})
}

/// Same as [`find_root_bracketed`] but also returns every bracket visited.
pub fn find_root_traced<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    tol: f64,
) -> Result<(f64, Vec<(f64, f64)>)> {
    let mut trace = Vec::new();
    let root = brent(f, a, b, tol, |lo, hi| trace.push((lo, hi)))?;
    Ok((root, trace))
}

fn brent<F, O>(f: F, a: f64, b: f64, tol: f64, mut observe: O) -> Result<f64>
where
    F: Fn(f64) -> f64,
    O: FnMut(f64, f64),
{
    let (mut a, mut b) = (a, b);
    let mut fa = f(a);
    let mut fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if !(fa.is_finite() && fb.is_finite()) || fa.signum() == fb.signum() {
        return Err(Error::InvalidBracket { a, b });
    }

    let mut c = a;
    let mut fc = fa;
    let mut d = b - a;
    let mut e = d;

    for _ in 0..200 {
        if fb.signum() == fc.signum() {
            c = a;
            fc = fa;
            d = b - a;
            e = d;
        }
        if fc.abs() < fb.abs() {
            a = b;
            b = c;
            c = a;
            fa = fb;
            fb = fc;
            fc = fa;
        }
        observe(b.min(c), b.max(c));

        let xtol = 2.0 * f64::EPSILON * b.abs() + 0.5 * f64::MIN_POSITIVE;
        let half = 0.5 * (c - b);
        if fb.abs() <= tol || half.abs() <= xtol {
            return Ok(b);
        }

        if e.abs() >= xtol && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * half * s;
                q = 1.0 - s;
            } else {
                let qa = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * half * qa * (qa - r) - (b - a) * (r - 1.0));
                q = (qa - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            } else {
                p = -p;
            }
            if 2.0 * p < (3.0 * half * q - (xtol * q).abs()).min((e * q).abs()) {
                e = d;
                d = p / q;
            } else {
                d = half;
                e = d;
            }
        } else {
            d = half;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > xtol {
            d
        } else {
            xtol.copysign(half)
        };
        fb = f(b);
    }
    Err(Error::NoConvergence {
        iterations: 200,
        residual: fb.abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic() {
        let r = find_root_bracketed(|x| x * x - 4.0, 0.0, 3.0, 1e-14).unwrap();
        assert!((r - 2.0).abs() < 1e-12);
    }

    #[test]
    fn clamped_strip_condition() {
        let r = find_root_bracketed(
            |x| (2.0 * x).cos() * (2.0 * x).cosh() - 1.0,
            2.0,
            3.0,
            1e-12,
        )
        .unwrap();
        assert!((r - 2.36502).abs() < 1e-5);
        assert!((r.powi(4) - 31.2852).abs() < 1e-4);
    }

    #[test]
    fn no_sign_change() {
        let e = find_root_bracketed(|x| x * x + 1.0, -1.0, 1.0, 1e-12).unwrap_err();
        assert!(matches!(e, Error::InvalidBracket { .. }));
    }

    #[test]
    fn brackets_nest_around_root() {
        let (root, trace) = find_root_traced(|x| x.cos() - x, 0.0, 1.0, 1e-15).unwrap();
        assert!(!trace.is_empty());
        for (lo, hi) in trace {
            assert!(lo <= root && root <= hi, "{root} outside [{lo}, {hi}]");
        }
    }
}
