//! Soliton equations reduced to one-variable profiles.
//!
//! Every case writes the metric through two functions `A(x)`, `B(y)` solving
//! first-order equations `A′ − 2a₁A = f_A`, `B′ − 2a B = f_B` with polynomial
//! kernels. The rate is fixed by requiring the profile to vanish at the far
//! endpoint, which is a single root of `∫ f e^{-2at} = 0`.

use serde::{Deserialize, Serialize};

use crate::expquad::{profile_from_kernel, unique_rate_root, ExpPolyProfile, Poly};
use crate::polytope::{monotone_check, CanonicalParameters, QuadClass};
use crate::{Error, Result};

mod cone;
mod residual;
mod wpp;

pub use cone::{fafb_bivariate, normal_cone, BiPoly, FaFb, NormalCone};
pub use residual::soliton_vector_residual;
pub use wpp::{
    family_parameters, family_rates, find_beta, find_beta_for_family, solve_wpp_calabi,
    solve_wpp_orthotoric, wpp_calabi_parameters, wpp_g, wpp_kernel, wpp_rates,
    wpp_simplex_parameters, FamilySolution, WppOrthoSolution,
};

/// Relative agreement `|a_A − a_B| ≤ RATE_AGREEMENT·(1 + |a_A|)` for a solution.
pub const RATE_AGREEMENT: f64 = 1e-9;
/// Relative tolerance of the Calabi condition `C_{β₂} = −C_{β₁}`.
pub const CALABI_LABEL_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Status {
    Soliton,
    GeneralizedSoliton,
    NoOrthotoricSoliton { a_a: f64, a_b: f64 },
}

impl Status {
    pub fn is_solution(&self) -> bool {
        !matches!(self, Status::NoOrthotoricSoliton { .. })
    }
}

/// Solved metric data.
///
/// When the orthotoric rates disagree, `profile_a` uses `a_A` and
/// `profile_b` uses `a_B` and `a` carries `a_A`; no metric is defined then.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolitonSolution {
    pub case: QuadClass,
    pub params: CanonicalParameters,
    pub a: [f64; 2],
    pub scal: f64,
    pub m: f64,
    /// Constant of the Calabi kernel `f(x) = C − Scal̄x²/2 − mx`.
    pub c: Option<f64>,
    pub profile_a: ExpPolyProfile,
    pub profile_b: ExpPolyProfile,
    pub status: Status,
}

/// Boundary and positivity defects of a solution.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InvariantReport {
    /// Largest relative defect among `A(αᵢ) = 0`, `A′(αᵢ) = 2/C_{αᵢ}` and the `B` analogues.
    pub boundary: f64,
    pub a_positive: bool,
    pub b_positive: bool,
    /// Largest `|A′ − 2aA − f|` and `|B′ − 2aB − f|` on the grid.
    pub ode: f64,
}

impl SolitonSolution {
    /// `λ = Scal̄/4`.
    pub fn lambda(&self) -> f64 {
        self.scal / 4.0
    }

    /// Checks the defining boundary conditions and positivity on `n`-point grids.
    ///
    /// Triangles skip the conditions at the collapsed facet `α₁`.
    pub fn invariants(&self, n: usize) -> InvariantReport {
        let p = &self.params;
        let mut worst = 0.0_f64;
        let mut check = |value: f64, want: f64| {
            worst = worst.max((value - want).abs() / want.abs().max(1.0));
        };
        let [ia1, ia2] = p.inv_c_alpha();
        let [ib1, ib2] = p.inv_c_beta();
        let a = &self.profile_a;
        let b = &self.profile_b;
        let alphas: &[(f64, f64)] = if p.case.is_triangle() {
            &[(p.alpha[1], ia2)][..]
        } else {
            &[(p.alpha[0], ia1), (p.alpha[1], ia2)][..]
        };
        for &(x, inv) in alphas {
            check(a.value(x), 0.0);
            check(a.derivative(1, x), 2.0 * inv);
        }
        for (y, inv) in [(p.beta[0], ib1), (p.beta[1], ib2)] {
            check(b.value(y), 0.0);
            check(b.derivative(1, y), -2.0 * inv);
        }
        let grid = |lo: f64, hi: f64| (1..n).map(move |i| lo + (hi - lo) * i as f64 / n as f64);
        let a_positive = grid(p.alpha[0], p.alpha[1]).all(|x| a.value(x) > 0.0);
        let b_positive = grid(p.beta[0], p.beta[1]).all(|y| b.value(y) > 0.0);
        let ode = grid(p.alpha[0], p.alpha[1])
            .map(|x| a.ode_defect(x).abs())
            .chain(grid(p.beta[0], p.beta[1]).map(|y| b.ode_defect(y).abs()))
            .fold(0.0, f64::max);
        InvariantReport {
            boundary: worst,
            a_positive,
            b_positive,
            ode,
        }
    }
}

/// `(Scal̄, m)` for the parameters' case.
pub fn average_scalar(params: &CanonicalParameters) -> (f64, f64) {
    let [a1, a2] = params.alpha;
    let [b1, b2] = params.beta;
    let [ia1, ia2] = params.inv_c_alpha();
    let [ib1, ib2] = params.inv_c_beta();
    let (da, db) = (a2 - a1, b2 - b1);
    match params.case {
        QuadClass::Parallelogram => {
            let m = -(2.0 * ib1 - 2.0 * ib2) / db;
            let scal = (2.0 * ia1 - 2.0 * ia2) / da + m;
            (scal, m)
        }
        QuadClass::Trapezoid | QuadClass::CalabiTriangle => {
            let scal = 4.0 / (a2 + a1) * ((ia1 - ia2) / da - (ib1 - ib2) / db);
            let m = (2.0 * ib1 - 2.0 * ib2) / db;
            (scal, m)
        }
        QuadClass::GenericQuadrilateral | QuadClass::OrthoSimplex => {
            let s = a1 + a2 - b1 - b2;
            let scal = 4.0 / s * ((ia1 - ia2) / da - (ib1 - ib2) / db);
            let m = 2.0 * ((a2 * a2 - a1 * a1) * (ib2 - ib1) - (b2 * b2 - b1 * b1) * (ia2 - ia1))
                / (da * db * s);
            (scal, m)
        }
    }
}

/// Kernels `(f_A, f_B)` of the two first-order equations.
///
/// For Calabi parameters `f_A` is `C − Scal̄x²/2 − mx` and `f_B = B′`, the
/// rate-free kernel of `B = (m/2)(y−β₁)(y−β₂)`.
pub fn kernels(params: &CanonicalParameters) -> (Poly, Poly) {
    let (scal, m) = average_scalar(params);
    let [a1, _] = params.alpha;
    let [b1, b2] = params.beta;
    let [ia1, _] = params.inv_c_alpha();
    let [ib1, _] = params.inv_c_beta();
    match params.case {
        QuadClass::Parallelogram => (
            Poly::new(vec![2.0 * ia1 - (m - scal) * a1, m - scal]),
            Poly::new(vec![m * b1 - 2.0 * ib1, -m]),
        ),
        QuadClass::Trapezoid | QuadClass::CalabiTriangle => (
            Poly::new(vec![calabi_constant(params, scal, m), -m, -scal / 2.0]),
            Poly::new(vec![-m * (b1 + b2) / 2.0, m]),
        ),
        QuadClass::GenericQuadrilateral | QuadClass::OrthoSimplex => (
            Poly::new(vec![
                scal / 2.0 * a1 * a1 - m * a1 + 2.0 * ia1,
                m,
                -scal / 2.0,
            ]),
            Poly::new(vec![
                -scal / 2.0 * b1 * b1 + m * b1 - 2.0 * ib1,
                -m,
                scal / 2.0,
            ]),
        ),
    }
}

fn calabi_constant(params: &CanonicalParameters, scal: f64, m: f64) -> f64 {
    let a1 = params.alpha[0];
    let ia1 = params.inv_c_alpha()[0];
    if params.case == QuadClass::CalabiTriangle {
        0.0
    } else {
        2.0 * ia1 + scal * a1 * a1 / 2.0 + m * a1
    }
}

fn monotone_status(params: &CanonicalParameters) -> Status {
    if monotone_check(params).is_some() {
        Status::Soliton
    } else {
        Status::GeneralizedSoliton
    }
}

/// Dispatches on `params.case`.
pub fn solve(params: &CanonicalParameters) -> Result<SolitonSolution> {
    match params.case {
        QuadClass::Parallelogram => solve_product(params),
        QuadClass::Trapezoid | QuadClass::CalabiTriangle => solve_calabi(params),
        QuadClass::GenericQuadrilateral | QuadClass::OrthoSimplex => solve_orthotoric(params),
    }
}

fn require(params: &CanonicalParameters, cases: &[QuadClass]) -> Result<()> {
    params.validate()?;
    if cases.contains(&params.case) {
        Ok(())
    } else {
        Err(Error::ClassMismatch(format!(
            "solver does not handle a {}",
            params.case.name()
        )))
    }
}

/// Profile vanishing at both ends of `[x0, x1]`, anchored at `pin` or else
/// where `e^{2at}` is largest so that rate error is damped across the interval.
fn profile(f: &Poly, a: f64, [x0, x1]: [f64; 2], pin: Option<f64>) -> ExpPolyProfile {
    let anchor = pin.unwrap_or(if a > 0.0 { x1 } else { x0 });
    profile_from_kernel(f, a, anchor)
}

pub fn solve_product(params: &CanonicalParameters) -> Result<SolitonSolution> {
    require(params, &[QuadClass::Parallelogram])?;
    let (scal, m) = average_scalar(params);
    let (fa, fb) = kernels(params);
    let a1 = unique_rate_root(&fa, params.alpha[0], params.alpha[1])?;
    let a2 = unique_rate_root(&fb, params.beta[0], params.beta[1])?;
    Ok(SolitonSolution {
        case: params.case,
        params: *params,
        a: [a1, a2],
        scal,
        m,
        c: None,
        profile_a: profile(&fa, a1, params.alpha, None),
        profile_b: profile(&fb, a2, params.beta, None),
        status: monotone_status(params),
    })
}

pub fn solve_calabi(params: &CanonicalParameters) -> Result<SolitonSolution> {
    require(params, &[QuadClass::Trapezoid, QuadClass::CalabiTriangle])?;
    let [cb1, cb2] = params.c_beta;
    if (cb1 + cb2).abs() > CALABI_LABEL_TOL * cb1.abs().max(cb2.abs()) {
        return Err(Error::NoSolutionForAnsatz(format!(
            "C_b2 = {cb2} must equal -C_b1 = {}; otherwise the extremal affine function is not equipoised",
            -cb1
        )));
    }
    let (scal, m) = average_scalar(params);
    let (fa, fb) = kernels(params);
    let c = fa.coeff(0);
    let a2 = params.alpha[1];
    let c2 = 2.0 * params.inv_c_alpha()[1] + scal * a2 * a2 / 2.0 + m * a2;
    if (c - c2).abs() > 1e-9 * (1.0 + c.abs().max(c2.abs()) + scal.abs() * a2 * a2) {
        return Err(Error::InvalidParameters(format!(
            "Calabi constant disagrees between endpoints: {c} vs {c2}"
        )));
    }
    let a1 = unique_rate_root(&fa, params.alpha[0], a2)?;
    let apex = params.case == QuadClass::CalabiTriangle;
    Ok(SolitonSolution {
        case: params.case,
        params: *params,
        a: [a1, 0.0],
        scal,
        m,
        c: Some(c),
        profile_a: profile(&fa, a1, params.alpha, apex.then_some(params.alpha[0])),
        profile_b: profile(&fb, 0.0, params.beta, None),
        status: monotone_status(params),
    })
}

/// `(a_A, a_B)`, the rates solving the `A` and `B` equations separately.
pub fn orthotoric_rates(params: &CanonicalParameters) -> Result<(f64, f64)> {
    let (fa, fb) = kernels(params);
    Ok((
        unique_rate_root(&fa, params.alpha[0], params.alpha[1])?,
        unique_rate_root(&fb, params.beta[0], params.beta[1])?,
    ))
}

pub fn solve_orthotoric(params: &CanonicalParameters) -> Result<SolitonSolution> {
    require(
        params,
        &[QuadClass::GenericQuadrilateral, QuadClass::OrthoSimplex],
    )?;
    let (scal, m) = average_scalar(params);
    let (fa, fb) = kernels(params);
    let a_a = unique_rate_root(&fa, params.alpha[0], params.alpha[1])?;
    let a_b = unique_rate_root(&fb, params.beta[0], params.beta[1])?;
    let apex = params.case == QuadClass::OrthoSimplex;
    let agree = (a_a - a_b).abs() <= RATE_AGREEMENT * (1.0 + a_a.abs());
    let (ra, rb, status) = if agree {
        let a1 = (a_a + a_b) / 2.0;
        (a1, a1, monotone_status(params))
    } else {
        (a_a, a_b, Status::NoOrthotoricSoliton { a_a, a_b })
    };
    Ok(SolitonSolution {
        case: params.case,
        params: *params,
        a: [ra, 0.0],
        scal,
        m,
        c: None,
        profile_a: profile(&fa, ra, params.alpha, apex.then_some(params.alpha[0])),
        profile_b: profile(&fb, rb, params.beta, apex.then_some(params.beta[1])),
        status,
    })
}
