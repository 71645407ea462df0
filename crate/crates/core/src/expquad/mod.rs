//! Exponential-polynomial calculus.
//!
//! Every integral here reduces to `J_j(c, L) = ∫_0^L s^j e^{cs} ds` with
//! `L ≥ 0`. For moderate `|c|L` it is summed as a series whose terms are all
//! positive (the incomplete-gamma series when `c < 0`), otherwise by the
//! closed form, which is well conditioned once `|c|L` dominates `j`.

mod poly;
mod profile;

pub use poly::Poly;
pub use profile::{profile_from_kernel, ExpPolyProfile};

use crate::roots::brent_with_values;
use crate::{Error, Result};

/// Largest supported polynomial degree and moment index.
pub const MAX_DEGREE: usize = 6;

/// `|c|·L` at which `J_j` switches from the series to the closed form.
pub const SERIES_SWITCH: f64 = 40.0;

/// Bracket expansion gives up past this rate.
pub const RATE_CAP: f64 = 1e6;

fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

/// `∫_0^L s^j e^{cs} ds` for `L ≥ 0`.
pub(crate) fn j_moment(j: usize, c: f64, l: f64) -> f64 {
    if l == 0.0 {
        return 0.0;
    }
    if (c * l).abs() <= SERIES_SWITCH {
        j_series(j, c, l)
    } else {
        j_closed(j, c, l)
    }
}

#[doc(hidden)]
pub fn j_series(j: usize, c: f64, l: f64) -> f64 {
    let z = c * l;
    let lj = l.powi(j as i32 + 1);
    let jf = j as f64;
    let mut sum;
    if z <= 0.0 {
        // L^{j+1} e^{-x} Σ x^n / ((j+1)(j+2)…(j+1+n)),  x = -cL
        let x = -z;
        let mut term = 1.0 / (jf + 1.0);
        sum = term;
        for n in 1..2000 {
            term *= x / (jf + 1.0 + n as f64);
            sum += term;
            if term <= sum * 1e-17 {
                break;
            }
        }
        lj * (-x).exp() * sum
    } else {
        // L^{j+1} Σ z^n / (n! (n+j+1))
        let mut pw = 1.0;
        sum = 1.0 / (jf + 1.0);
        for n in 1..2000 {
            let nf = n as f64;
            pw *= z / nf;
            let t = pw / (nf + jf + 1.0);
            sum += t;
            if nf > z && t <= sum * 1e-17 {
                break;
            }
        }
        lj * sum
    }
}

#[doc(hidden)]
pub fn j_closed(j: usize, c: f64, l: f64) -> f64 {
    let fj = factorial(j);
    if c < 0.0 {
        let lam = -c;
        let x = lam * l;
        let mut t = 1.0;
        let mut s = 1.0;
        for i in 1..=j {
            t *= x / i as f64;
            s += t;
        }
        fj / lam.powi(j as i32 + 1) * (1.0 - (-x).exp() * s)
    } else {
        let mut s = 0.0;
        let mut falling = 1.0;
        for i in 0..=j {
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            s += sign * falling * l.powi((j - i) as i32) / c.powi(i as i32 + 1);
            falling *= (j - i) as f64;
        }
        let sign = if j.is_multiple_of(2) { -1.0 } else { 1.0 };
        (c * l).exp() * s + sign * fj / c.powi(j as i32 + 1)
    }
}

fn check_interval(x0: f64, x1: f64) -> Result<()> {
    if x0.is_finite() && x1.is_finite() && x0 <= x1 {
        Ok(())
    } else {
        Err(Error::Interval(x0, x1))
    }
}

/// `∫_p^q s^k e^{cs} ds` for `0 ≤ p ≤ q`; every term of the sum is nonnegative.
fn positive_piece(k: usize, c: f64, p: f64, q: f64) -> f64 {
    let l = q - p;
    let mut s = 0.0;
    let mut binom = 1.0;
    for j in 0..=k {
        s += binom * p.powi((k - j) as i32) * j_moment(j, c, l);
        binom = binom * (k - j) as f64 / (j + 1) as f64;
    }
    (c * p).exp() * s
}

/// `∫_{x0}^{x1} t^k e^{-2at} dt`.
pub fn moment_integral(k: usize, a: f64, x0: f64, x1: f64) -> Result<f64> {
    if k > MAX_DEGREE {
        return Err(Error::MomentIndex(k));
    }
    check_interval(x0, x1)?;
    let c = -2.0 * a;
    let mut total = 0.0;
    if x1 > 0.0 {
        total += positive_piece(k, c, x0.max(0.0), x1);
    }
    if x0 < 0.0 {
        // t = -s on the negative part
        let v = positive_piece(k, -c, -x1.min(0.0), -x0);
        total += if k % 2 == 1 { -v } else { v };
    }
    Ok(total)
}

/// `∫ f(t) e^{-2at} dt` over `[x0, x1]` written as `e^{-2a·anchor} · S`.
///
/// The anchor is the endpoint where the weight is largest, so the inner
/// weight never exceeds one and `S` cannot overflow.
pub(crate) fn scaled_rate_integral(f: &Poly, a: f64, x0: f64, x1: f64) -> (f64, f64) {
    anchored_rate_integral(f, a, x0, x1, a >= 0.0)
}

fn anchored_rate_integral(f: &Poly, a: f64, x0: f64, x1: f64, left: bool) -> (f64, f64) {
    let l = x1 - x0;
    if left {
        let g = f.taylor_shift(x0);
        let s = g
            .iter()
            .enumerate()
            .map(|(j, gj)| gj * j_moment(j, -2.0 * a, l))
            .sum();
        (x0, s)
    } else {
        let g = f.taylor_shift(x1);
        let s = g
            .iter()
            .enumerate()
            .map(|(j, gj)| {
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                sign * gj * j_moment(j, 2.0 * a, l)
            })
            .sum();
        (x1, s)
    }
}

fn check_degree(f: &Poly) -> Result<()> {
    if f.degree() > MAX_DEGREE {
        Err(Error::DegreeTooHigh(f.degree()))
    } else {
        Ok(())
    }
}

/// `∫_{x0}^{x1} e^{-2at} f(t) dt`.
pub fn integrate_poly_exp(f: &Poly, a: f64, x0: f64, x1: f64) -> Result<f64> {
    check_degree(f)?;
    check_interval(x0, x1)?;
    let (anchor, s) = scaled_rate_integral(f, a, x0, x1);
    Ok((-2.0 * a * anchor).exp() * s)
}

/// `d/da ∫_{x0}^{x1} e^{-2at} f(t) dt = -2 ∫ t f(t) e^{-2at} dt`.
pub fn integrate_poly_exp_da(f: &Poly, a: f64, x0: f64, x1: f64) -> Result<f64> {
    check_degree(f)?;
    check_interval(x0, x1)?;
    let g = f.mul(&Poly::new(vec![0.0, -2.0]));
    let (anchor, s) = scaled_rate_integral(&g, a, x0, x1);
    Ok((-2.0 * a * anchor).exp() * s)
}

/// The unique `a` with `∫_{x0}^{x1} e^{-2at} f(t) dt = 0`.
///
/// Requires `f` to change sign exactly once inside `(x0, x1)`. A root of `f`
/// sitting on an endpoint is allowed; the sign there is read off the first
/// non-vanishing derivative.
pub fn unique_rate_root(f: &Poly, x0: f64, x1: f64) -> Result<f64> {
    check_degree(f)?;
    check_interval(x0, x1)?;
    if x0 == x1 || f.is_zero() {
        return Err(Error::NoUniqueRoot("empty interval or zero kernel".into()));
    }
    let left = f.sign_right_of(x0);
    let right = f.sign_left_of(x1);
    if left == 0 || right == 0 || left == right {
        return Err(Error::NoUniqueRoot(format!(
            "kernel has no sign change on [{x0}, {x1}] (signs {left}, {right})"
        )));
    }
    let roots = f.count_roots_open(x0, x1);
    if roots != 1 {
        return Err(Error::NoUniqueRoot(format!(
            "kernel has {roots} roots in ({x0}, {x1})"
        )));
    }
    let sign = |v: f64| {
        if v > 0.0 {
            1
        } else if v < 0.0 {
            -1
        } else {
            0
        }
    };
    let h0 = anchored_rate_integral(f, 0.0, x0, x1, true).1;
    // at a = 0 the two anchors may disagree in sign when h is pure rounding
    let m = x0.abs().max(x1.abs()).max(1.0);
    let size: f64 = f
        .coeffs()
        .iter()
        .enumerate()
        .map(|(i, c)| c.abs() * m.powi(i as i32))
        .sum::<f64>()
        * (x1 - x0);
    if h0.abs() <= 64.0 * f64::EPSILON * size {
        return Ok(0.0);
    }
    // h → left·∞ as a → +∞ and right·∞ as a → −∞
    let dir = if sign(h0) == left { -1.0 } else { 1.0 };
    // one anchor for the whole half-line keeps h a single smooth function
    let h = |a: f64| anchored_rate_integral(f, a, x0, x1, dir > 0.0).1;
    let h0 = h(0.0);
    let target = if dir > 0.0 { left } else { right };
    let (mut inner, mut h_inner) = (0.0, h0);
    let mut r = 1.0;
    loop {
        let hr = h(dir * r);
        if sign(hr) == target || hr == 0.0 {
            let (lo, hi, hlo, hhi) = if dir > 0.0 {
                (inner, r, h_inner, hr)
            } else {
                (-r, inner, hr, h_inner)
            };
            return brent_with_values(h, lo, hi, hlo, hhi, |a| 1e-13 * (1.0 + a.abs()))
                .map_err(|e| Error::NoUniqueRoot(e.to_string()));
        }
        inner = dir * r;
        h_inner = hr;
        r *= 2.0;
        if r > RATE_CAP {
            return Err(Error::NoUniqueRoot(format!(
                "no bracket found with |a| ≤ {RATE_CAP}"
            )));
        }
    }
}
