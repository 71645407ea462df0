//! Bracketed scalar root finding.

use crate::{Error, Result};

/// Brent's method on a bracket `[a, b]` whose endpoint values differ in sign.
///
/// `tol` maps the current iterate to the admissible half-width of the bracket.
pub fn brent<F, T>(f: F, a: f64, b: f64, tol: T) -> Result<f64>
where
    F: Fn(f64) -> f64,
    T: Fn(f64) -> f64,
{
    let fa = f(a);
    let fb = f(b);
    brent_with_values(f, a, b, fa, fb, tol)
}

pub fn brent_with_values<F, T>(f: F, a: f64, b: f64, fa: f64, fb: f64, tol: T) -> Result<f64>
where
    F: Fn(f64) -> f64,
    T: Fn(f64) -> f64,
{
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if (fa > 0.0) == (fb > 0.0) || fa.is_nan() || fb.is_nan() {
        return Err(Error::NoSignChange(format!(
            "f({a}) = {fa} and f({b}) = {fb}"
        )));
    }
    let (mut a, mut b, mut fa, mut fb) = (a, b, fa, fb);
    let (mut c, mut fc) = (b, fb);
    let mut d = b - a;
    let mut e = d;
    for _ in 0..500 {
        if (fb > 0.0) == (fc > 0.0) {
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
        let tol1 = 2.0 * f64::EPSILON * b.abs() + 0.5 * tol(b);
        let xm = 0.5 * (c - b);
        if xm.abs() <= tol1 || fb == 0.0 {
            return Ok(b);
        }
        if e.abs() >= tol1 && fa.abs() > fb.abs() {
            let s = fb / fa;
            let (mut p, mut q);
            if a == c {
                p = 2.0 * xm * s;
                q = 1.0 - s;
            } else {
                let qq = fa / fc;
                let r = fb / fc;
                p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
                q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
            }
            if p > 0.0 {
                q = -q;
            }
            p = p.abs();
            let min1 = 3.0 * xm * q - (tol1 * q).abs();
            let min2 = (e * q).abs();
            if 2.0 * p < min1.min(min2) {
                e = d;
                d = p / q;
            } else {
                d = xm;
                e = d;
            }
        } else {
            d = xm;
            e = d;
        }
        a = b;
        fa = fb;
        b += if d.abs() > tol1 { d } else { tol1.copysign(xm) };
        fb = f(b);
        if fb.is_nan() {
            return Err(Error::NoSignChange(format!("function undefined at {b}")));
        }
    }
    Err(Error::NoSignChange(
        "Brent iteration did not converge".into(),
    ))
}
