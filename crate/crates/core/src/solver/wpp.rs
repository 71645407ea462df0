use serde::{Deserialize, Serialize};

use super::{solve_calabi, solve_orthotoric, SolitonSolution};
use crate::expquad::{integrate_poly_exp, unique_rate_root, Poly};
use crate::polytope::CanonicalParameters;
use crate::roots::brent;
use crate::{Error, Result};

/// Points of the sign-change scan over `β ∈ (−1, 1)`.
const BETA_SCAN: usize = 64;
/// Required `|a_A − a_B|` at the returned `β`.
const RATE_MATCH: f64 = 1e-10;

/// Calabi triangle of `ℂP²_{(l,k,k)}`: `α₂ = 1`, `β = (0,1)`, `C_{β₂} = −C_{β₁} = c`
/// and `−l C_{α₂} = k C_{β₂}`.
pub fn wpp_calabi_parameters(l: f64, k: f64, c: f64) -> Result<CanonicalParameters> {
    if !(l > 0.0 && k > 0.0 && c > 0.0) {
        return Err(Error::InvalidParameters(
            "weights and scale must be positive".into(),
        ));
    }
    CanonicalParameters::calabi_triangle(1.0, [0.0, 1.0], -k * c / l, [-c, c])
}

pub fn solve_wpp_calabi(l: f64, k: f64, c: f64) -> Result<SolitonSolution> {
    solve_calabi(&wpp_calabi_parameters(l, k, c)?)
}

/// `f_β(z) = −(s+t+st)z² + (s(1+β) + t(β−1))z + st + β(t−s)`.
pub fn wpp_kernel(t: f64, s: f64, beta: f64) -> Poly {
    Poly::new(vec![
        s * t + beta * (t - s),
        s * (1.0 + beta) + t * (beta - 1.0),
        -(s + t + s * t),
    ])
}

/// `(g_A, g_B)`: `∫_β^1 f_β e^{−2ax}` and `∫_{−1}^β f_β e^{−2ay}`.
pub fn wpp_g(t: f64, s: f64, beta: f64, a: f64) -> Result<(f64, f64)> {
    let f = wpp_kernel(t, s, beta);
    Ok((
        integrate_poly_exp(&f, a, beta, 1.0)?,
        integrate_poly_exp(&f, a, -1.0, beta)?,
    ))
}

/// `(a_A(β), a_B(β))`.
pub fn wpp_rates(t: f64, s: f64, beta: f64) -> Result<(f64, f64)> {
    let f = wpp_kernel(t, s, beta);
    Ok((
        unique_rate_root(&f, beta, 1.0)?,
        unique_rate_root(&f, -1.0, beta)?,
    ))
}

/// Simplex labels with `C_{−1} = t(β−1)/2·C_β`, `C₁ = −s(β+1)/2·C_β`.
///
/// `c_beta = None` picks `C_β = 2/((1−β)t)`, so that `C_{−1} = −1`.
pub fn wpp_simplex_parameters(
    t: f64,
    s: f64,
    beta: f64,
    c_beta: Option<f64>,
) -> Result<CanonicalParameters> {
    let cb = c_beta.unwrap_or(2.0 / ((1.0 - beta) * t));
    CanonicalParameters::ortho_simplex(
        beta,
        cb,
        t * (beta - 1.0) / 2.0 * cb,
        -s * (beta + 1.0) / 2.0 * cb,
    )
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WppOrthoSolution {
    pub beta: f64,
    pub a1: f64,
    pub a_a: f64,
    pub a_b: f64,
    pub solution: SolitonSolution,
}

/// Finds `β ∈ (−1,1)` with `a_A(β) = a_B(β)` for `t = k₂/k₁`, `s = k₂/k₃`.
///
/// `t = s = 1` is accepted as the equal-weight diagnostic and gives `β = 0`.
pub fn solve_wpp_orthotoric(t: f64, s: f64, c_beta: Option<f64>) -> Result<WppOrthoSolution> {
    if !(t >= 1.0 && s > 0.0 && s <= 1.0 && t.is_finite()) {
        return Err(Error::InvalidParameters(format!(
            "need t = k2/k1 >= 1 and s = k2/k3 in (0, 1], got t = {t}, s = {s}"
        )));
    }
    let h = |b: f64| wpp_rates(t, s, b).map(|(a, c)| a - c);
    let beta = scan_and_solve(h, -1.0, 1.0)?;
    let (a_a, a_b) = wpp_rates(t, s, beta)?;
    let params = wpp_simplex_parameters(t, s, beta, c_beta)?;
    let solution = solve_orthotoric(&params)?;
    Ok(WppOrthoSolution {
        beta,
        a1: (a_a + a_b) / 2.0,
        a_a,
        a_b,
        solution,
    })
}

/// Scans `BETA_SCAN` interior points for a sign change of `h`, then refines.
///
/// The centre is tried first. With equal weights every `β` solves and the
/// centre is the symmetric representative.
fn scan_and_solve<H: Fn(f64) -> Result<f64>>(h: H, lo: f64, hi: f64) -> Result<f64> {
    let mid = 0.5 * (lo + hi);
    if matches!(h(mid), Ok(v) if v.abs() <= RATE_MATCH) {
        return Ok(mid);
    }
    let mut prev: Option<(f64, f64)> = None;
    for i in 0..BETA_SCAN {
        let b = lo + (hi - lo) * (i as f64 + 1.0) / (BETA_SCAN as f64 + 1.0);
        let Ok(v) = h(b) else {
            prev = None;
            continue;
        };
        if v == 0.0 {
            return Ok(b);
        }
        if let Some((pb, pv)) = prev {
            if pv.signum() != v.signum() {
                return refine(&h, pb, b);
            }
        }
        prev = Some((b, v));
    }
    Err(Error::NoSignChange(format!(
        "a_A - a_B keeps its sign on a {BETA_SCAN}-point scan of ({lo}, {hi})"
    )))
}

fn refine<H: Fn(f64) -> Result<f64>>(h: &H, lo: f64, hi: f64) -> Result<f64> {
    let failed = std::cell::Cell::new(None);
    let g = |b: f64| match h(b) {
        Ok(v) => v,
        Err(e) => {
            failed.set(Some(e));
            f64::NAN
        }
    };
    let beta = brent(g, lo, hi, |_| 1e-15)?;
    if let Some(e) = failed.take() {
        return Err(e);
    }
    let r = h(beta)?;
    if r.abs() > RATE_MATCH {
        return Err(Error::NoSignChange(format!(
            "bisection stalled with a_A - a_B = {r:e} at beta = {beta}"
        )));
    }
    Ok(beta)
}

/// Orthotoric parameters `(1, α, 0, β, βl, −(β/α)k, (β−1)p, 1)` with
/// `α = rβ/(β(r−1)+1)`.
pub fn family_parameters(r: f64, k: f64, l: f64, p: f64, beta: f64) -> Result<CanonicalParameters> {
    let alpha = r * beta / (beta * (r - 1.0) + 1.0);
    CanonicalParameters::from_tuple(
        crate::polytope::QuadClass::GenericQuadrilateral,
        [
            1.0,
            alpha,
            0.0,
            beta,
            beta * l,
            -(beta / alpha) * k,
            (beta - 1.0) * p,
            1.0,
        ],
    )
}

pub fn family_rates(r: f64, k: f64, l: f64, p: f64, beta: f64) -> Result<(f64, f64)> {
    super::orthotoric_rates(&family_parameters(r, k, l, p, beta)?)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilySolution {
    pub beta: f64,
    pub a1: f64,
    pub a_a: f64,
    pub a_b: f64,
    pub params: CanonicalParameters,
}

/// Solves `a_A(β) = a_B(β)` on `bracket` for a one-parameter family of
/// orthotoric parameters. The endpoints must give opposite signs.
pub fn find_beta<F>(family: F, bracket: (f64, f64)) -> Result<FamilySolution>
where
    F: Fn(f64) -> Result<CanonicalParameters>,
{
    let (lo, hi) = bracket;
    if !(lo < hi) {
        return Err(Error::Interval(lo, hi));
    }
    let h = |b: f64| {
        let (a, c) = super::orthotoric_rates(&family(b)?)?;
        Ok(a - c)
    };
    let (hl, hh) = (h(lo)?, h(hi)?);
    let beta = if hl == 0.0 {
        lo
    } else if hh == 0.0 {
        hi
    } else if hl.signum() == hh.signum() {
        return Err(Error::NoSignChange(format!(
            "a_A - a_B is {hl:e} at {lo} and {hh:e} at {hi}"
        )));
    } else {
        refine(&h, lo, hi)?
    };
    let params = family(beta)?;
    let (a_a, a_b) = super::orthotoric_rates(&params)?;
    Ok(FamilySolution {
        beta,
        a1: (a_a + a_b) / 2.0,
        a_a,
        a_b,
        params,
    })
}

pub fn find_beta_for_family(
    r: f64,
    k: f64,
    l: f64,
    p: f64,
    bracket: (f64, f64),
) -> Result<FamilySolution> {
    find_beta(|b| family_parameters(r, k, l, p, b), bracket)
}
