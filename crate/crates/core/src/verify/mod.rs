//! Finite-difference checks of solved metrics.
//!
//! Nothing here uses the kernels or rates of the solver beyond the profiles
//! `A`, `B` and the claimed vector `a`: curvature is recomputed from the
//! metric matrix by the Abreu formula and the Laplacian as a divergence.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::expquad::ExpPolyProfile;
use crate::polytope::{CanonicalParameters, LabelledPolytope, QuadClass};
use crate::solver::SolitonSolution;
use crate::{Error, Result};

mod apex;
mod boundary;

pub use apex::{apex_smoothness, ApexReport};
pub use boundary::{boundary_conditions, BoundaryReport, FacetBoundary};

/// Symmetric `2×2` matrix `[[h11, h12], [h12, h22]]`.
pub type Sym2 = [[f64; 2]; 2];

/// The metric of a solution as a field over the polytope.
#[derive(Clone, Debug)]
pub struct MetricField {
    pub case: QuadClass,
    pub params: CanonicalParameters,
    pub a: ExpPolyProfile,
    pub b: ExpPolyProfile,
    polytope: LabelledPolytope,
    scale: f64,
}

impl MetricField {
    pub fn new(params: CanonicalParameters, a: ExpPolyProfile, b: ExpPolyProfile) -> Result<Self> {
        let polytope = params.model_polytope()?;
        let scale = polytope.scale();
        Ok(MetricField {
            case: params.case,
            params,
            a,
            b,
            polytope,
            scale,
        })
    }

    pub fn from_solution(s: &SolitonSolution) -> Result<Self> {
        Self::new(s.params, s.profile_a.clone(), s.profile_b.clone())
    }

    pub fn polytope(&self) -> &LabelledPolytope {
        &self.polytope
    }

    /// Largest absolute vertex coordinate, at least 1.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn to_moment(&self, x: f64, y: f64) -> [f64; 2] {
        self.case.sigma(x, y)
    }

    /// Inverse of `σ` on the branch `x > y` (orthotoric) or `x > 0` (Calabi).
    pub fn from_moment(&self, mu: [f64; 2]) -> Result<(f64, f64)> {
        let (x, y) = match self.case {
            QuadClass::Parallelogram => (mu[0], mu[1]),
            QuadClass::Trapezoid | QuadClass::CalabiTriangle => {
                if mu[0] <= 0.0 {
                    return Err(Error::OutOfDomain(mu));
                }
                (mu[0], mu[1] / mu[0])
            }
            QuadClass::GenericQuadrilateral | QuadClass::OrthoSimplex => {
                let disc = mu[0] * mu[0] - 4.0 * mu[1];
                if disc <= 0.0 {
                    return Err(Error::OutOfDomain(mu));
                }
                let s = disc.sqrt();
                // avoid cancelling the smaller root
                if mu[0] >= 0.0 {
                    let x = 0.5 * (mu[0] + s);
                    (x, mu[1] / x)
                } else {
                    let y = 0.5 * (mu[0] - s);
                    (mu[1] / y, y)
                }
            }
        };
        let tol = 1e-12 * (1.0 + self.scale);
        let [a1, a2] = self.params.alpha;
        let [b1, b2] = self.params.beta;
        if x < a1 - tol || x > a2 + tol || y < b1 - tol || y > b2 + tol {
            return Err(Error::OutOfDomain(mu));
        }
        Ok((x, y))
    }

    /// Distance from `mu` to the boundary, negative outside.
    pub fn boundary_distance(&self, mu: [f64; 2]) -> f64 {
        self.polytope
            .facets()
            .iter()
            .map(|f| f.eval(mu) / f.normal[0].hypot(f.normal[1]))
            .fold(f64::INFINITY, f64::min)
    }

    /// `H` at the moment point `mu`.
    pub fn h_at(&self, mu: [f64; 2]) -> Result<Sym2> {
        let (x, y) = self.from_moment(mu)?;
        metric_matrix(self, (x, y))
    }

    /// Default finite-difference step at `mu`.
    pub fn default_step(&self, mu: [f64; 2]) -> f64 {
        (1e-4 * self.scale)
            .min(self.boundary_distance(mu) / 8.0)
            .max(1e-7)
    }
}

/// Closed-form `H` at the canonical point `(x, y)`, in moment coordinates.
pub fn metric_matrix(field: &MetricField, point: (f64, f64)) -> Result<Sym2> {
    let (x, y) = point;
    let (a, b) = (field.a.value(x), field.b.value(y));
    match field.case {
        QuadClass::Parallelogram => Ok([[a, 0.0], [0.0, b]]),
        QuadClass::Trapezoid | QuadClass::CalabiTriangle => {
            if x <= 0.0 {
                return Err(Error::OutOfDomain(field.to_moment(x, y)));
            }
            Ok([[a / x, y * a / x], [y * a / x, x * b + y * y * a / x]])
        }
        QuadClass::GenericQuadrilateral | QuadClass::OrthoSimplex => {
            let d = x - y;
            if d <= 0.0 {
                return Err(Error::OutOfDomain(field.to_moment(x, y)));
            }
            let off = (y * a + x * b) / d;
            Ok([[(a + b) / d, off], [off, (y * y * a + x * x * b) / d]])
        }
    }
}

fn check_stencil(field: &MetricField, mu: [f64; 2], h: f64) -> Result<()> {
    if !(h > 0.0) || field.boundary_distance(mu) < 4.0 * h {
        return Err(Error::OutOfDomain(mu));
    }
    Ok(())
}

/// `−Σ ∂²H_ij/∂μ_i∂μ_j` by central differences.
pub fn scalar_curvature_fd(field: &MetricField, mu: [f64; 2], h: f64) -> Result<f64> {
    check_stencil(field, mu, h)?;
    let at = |d0: f64, d1: f64| field.h_at([mu[0] + d0 * h, mu[1] + d1 * h]);
    let c = at(0.0, 0.0)?;
    let (e, w) = (at(1.0, 0.0)?, at(-1.0, 0.0)?);
    let (n, s) = (at(0.0, 1.0)?, at(0.0, -1.0)?);
    let (ne, nw, se, sw) = (
        at(1.0, 1.0)?,
        at(-1.0, 1.0)?,
        at(1.0, -1.0)?,
        at(-1.0, -1.0)?,
    );
    let d11 = e[0][0] - 2.0 * c[0][0] + w[0][0];
    let d22 = n[1][1] - 2.0 * c[1][1] + s[1][1];
    let d12 = (ne[0][1] - se[0][1] - nw[0][1] + sw[0][1]) / 4.0;
    Ok(-(d11 + d22 + 2.0 * d12) / (h * h))
}

/// `Δ⟨μ,a⟩ = −div H(a,·)` by central differences.
pub fn laplacian_affine_fd(field: &MetricField, a: [f64; 2], mu: [f64; 2], h: f64) -> Result<f64> {
    check_stencil(field, mu, h)?;
    let ha = |m: [f64; 2], i: usize| -> Result<f64> {
        let hm = field.h_at(m)?;
        Ok(hm[i][0] * a[0] + hm[i][1] * a[1])
    };
    let d1 = ha([mu[0] + h, mu[1]], 0)? - ha([mu[0] - h, mu[1]], 0)?;
    let d2 = ha([mu[0], mu[1] + h], 1)? - ha([mu[0], mu[1] - h], 1)?;
    Ok(-(d1 + d2) / (2.0 * h))
}

/// `adj(∂μ/∂(x,y))` and its determinant.
fn chart_adjugate(case: QuadClass, x: f64, y: f64) -> (Sym2, f64) {
    match case {
        QuadClass::Parallelogram => ([[1.0, 0.0], [0.0, 1.0]], 1.0),
        QuadClass::Trapezoid | QuadClass::CalabiTriangle => ([[x, 0.0], [-y, 1.0]], x),
        QuadClass::GenericQuadrilateral | QuadClass::OrthoSimplex => {
            ([[x, -1.0], [-y, 1.0]], x - y)
        }
    }
}

/// `div_μ w` at `(x, y)` by central differences in the canonical chart,
/// through `div_μ w = D⁻¹ Σ_a ∂_a (adj J · w)_a`.
fn chart_divergence<W>(case: QuadClass, w: W, (x, y): (f64, f64), h: f64) -> Result<f64>
where
    W: Fn(f64, f64) -> Result<[f64; 2]>,
{
    let flux = |x: f64, y: f64, row: usize| -> Result<f64> {
        let (p, _) = chart_adjugate(case, x, y);
        let v = w(x, y)?;
        Ok(p[row][0] * v[0] + p[row][1] * v[1])
    };
    let dx = flux(x + h, y, 0)? - flux(x - h, y, 0)?;
    let dy = flux(x, y + h, 1)? - flux(x, y - h, 1)?;
    Ok((dx + dy) / (2.0 * h * chart_adjugate(case, x, y).1))
}

/// Abreu's formula differenced in the canonical chart instead of in `μ`.
///
/// Same quantity as [`scalar_curvature_fd`], but the step is taken in
/// `(x, y)` where `H` stays tame; the orthotoric `μ` chart has a branch
/// point on `x = y` which can sit very close to the polytope.
pub fn scalar_curvature_chart(field: &MetricField, point: (f64, f64), h: f64) -> Result<f64> {
    let case = field.case;
    let column = |j: usize| {
        move |x: f64, y: f64| -> Result<[f64; 2]> {
            let m = metric_matrix(field, (x, y))?;
            Ok([m[0][j], m[1][j]])
        }
    };
    let v = |x: f64, y: f64| -> Result<[f64; 2]> {
        Ok([
            chart_divergence(case, column(0), (x, y), h)?,
            chart_divergence(case, column(1), (x, y), h)?,
        ])
    };
    Ok(-chart_divergence(case, v, point, h)?)
}

/// `Δ⟨μ,a⟩` differenced in the canonical chart.
pub fn laplacian_affine_chart(
    field: &MetricField,
    a: [f64; 2],
    point: (f64, f64),
    h: f64,
) -> Result<f64> {
    let ha = |x: f64, y: f64| -> Result<[f64; 2]> {
        let m = metric_matrix(field, (x, y))?;
        Ok([
            m[0][0] * a[0] + m[0][1] * a[1],
            m[1][0] * a[0] + m[1][1] * a[1],
        ])
    };
    Ok(-chart_divergence(field.case, ha, point, h)?)
}

/// Scalar curvature from the profiles' second derivatives.
pub fn scalar_curvature_closed(field: &MetricField, point: (f64, f64)) -> f64 {
    let (x, y) = point;
    let s = -(field.a.derivative(2, x) + field.b.derivative(2, y));
    match field.case {
        QuadClass::Parallelogram => s,
        QuadClass::Trapezoid | QuadClass::CalabiTriangle => s / x,
        QuadClass::GenericQuadrilateral | QuadClass::OrthoSimplex => s / (x - y),
    }
}

/// `Δ⟨μ,a⟩` from the profiles' first derivatives.
pub fn laplacian_closed(field: &MetricField, a: [f64; 2], point: (f64, f64)) -> f64 {
    let (x, y) = point;
    let (da, db) = (field.a.derivative(1, x), field.b.derivative(1, y));
    match field.case {
        QuadClass::Parallelogram => -(a[0] * da + a[1] * db),
        QuadClass::Trapezoid | QuadClass::CalabiTriangle => {
            -(a[0] * da + a[1] * (y * da + x * db)) / x
        }
        QuadClass::GenericQuadrilateral | QuadClass::OrthoSimplex => {
            -(a[0] * (da + db) + a[1] * (y * da + x * db)) / (x - y)
        }
    }
}

/// Grid and tolerances for [`soliton_residual`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    /// Points per side of the canonical rectangle.
    pub n: usize,
    /// Step in the canonical chart; `None` is `4e-3·min(shorter side, 2/|a|)`.
    pub step: Option<f64>,
    pub tol: f64,
    pub boundary_samples: usize,
    /// Bound on the one-sided `dH(u,u) = 2u` defect.
    pub boundary_tol: f64,
    /// Bound on the closed-form `H(u,·) = 0` defect.
    pub closed_tol: f64,
    /// Bound on the profile equation defects.
    pub ode_tol: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            n: 50,
            step: None,
            tol: 1e-6,
            boundary_samples: 20,
            boundary_tol: 1e-5,
            closed_tol: 1e-12,
            ode_tol: 1e-9,
        }
    }
}

impl GridSpec {
    /// Halves every tolerance.
    pub fn strict(mut self) -> Self {
        self.tol /= 2.0;
        self.boundary_tol /= 2.0;
        self.closed_tol /= 2.0;
        self.ode_tol /= 2.0;
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualRow {
    pub mu1: f64,
    pub mu2: f64,
    pub scal_fd: f64,
    pub laplacian: f64,
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub points: usize,
    /// Grid points whose stencil left the polytope.
    pub skipped: usize,
    pub max: f64,
    pub mean: f64,
    pub tol: f64,
    pub positive_definite: bool,
    pub ode: f64,
    pub boundary: BoundaryReport,
    pub apex: Option<ApexReport>,
    pub pass: bool,
}

/// `Scal − Scal̄ − 2Δ⟨μ,a⟩` on the grid, with the boundary and apex checks.
///
/// Grid points are cell midpoints of the canonical rectangle. Both terms are
/// differenced in the canonical chart and Richardson-combined over `h, h/2`.
pub fn soliton_residual(s: &SolitonSolution, grid: &GridSpec) -> Result<ResidualReport> {
    soliton_residual_with_rows(s, grid).map(|(r, _)| r)
}

pub fn soliton_residual_with_rows(
    s: &SolitonSolution,
    grid: &GridSpec,
) -> Result<(ResidualReport, Vec<ResidualRow>)> {
    let field = MetricField::from_solution(s)?;
    let [a1, a2] = s.params.alpha;
    let [b1, b2] = s.params.beta;
    let n = grid.n.max(1);
    // profiles vary on the scale of 1/2a as well
    let rate = s.a[0].abs().max(s.a[1].abs());
    let step = 4e-3 * (a2 - a1).min(b2 - b1).min(2.0 / rate);
    let pts: Vec<(f64, f64)> = (0..n)
        .flat_map(|i| {
            (0..n).map(move |j| {
                (
                    a1 + (a2 - a1) * (i as f64 + 0.5) / n as f64,
                    b1 + (b2 - b1) * (j as f64 + 0.5) / n as f64,
                )
            })
        })
        .collect();
    let evals: Vec<Option<(ResidualRow, bool)>> = pts
        .par_iter()
        .map(|&(x, y)| {
            let mu = field.to_moment(x, y);
            // the nested stencil reaches 2h
            let edge = (x - a1).min(a2 - x).min(y - b1).min(b2 - y);
            let h = grid.step.unwrap_or(step).min(edge / 2.0);
            let rich = |f: &dyn Fn(f64) -> Result<f64>| -> Option<f64> {
                Some((4.0 * f(h / 2.0).ok()? - f(h).ok()?) / 3.0)
            };
            let scal_fd = rich(&|h| scalar_curvature_chart(&field, (x, y), h))?;
            let laplacian = rich(&|h| laplacian_affine_chart(&field, s.a, (x, y), h))?;
            let m = metric_matrix(&field, (x, y)).ok()?;
            let pd = m[0][0] > 0.0 && m[0][0] * m[1][1] - m[0][1] * m[0][1] > 0.0;
            Some((
                ResidualRow {
                    mu1: mu[0],
                    mu2: mu[1],
                    scal_fd,
                    laplacian,
                    residual: scal_fd - s.scal - 2.0 * laplacian,
                },
                pd,
            ))
        })
        .collect();
    let rows: Vec<ResidualRow> = evals.iter().flatten().map(|(r, _)| *r).collect();
    let skipped = pts.len() - rows.len();
    let positive_definite = evals.iter().flatten().all(|(_, pd)| *pd);
    let abs: Vec<f64> = rows.iter().map(|r| r.residual.abs()).collect();
    let max = abs.iter().copied().fold(0.0, f64::max);
    let mean = if abs.is_empty() {
        f64::NAN
    } else {
        abs.iter().sum::<f64>() / abs.len() as f64
    };
    let inv = s.invariants(1000);
    let boundary = boundary_conditions(s, grid.boundary_samples)?;
    let apex = if s.case.is_triangle() {
        Some(apex_smoothness(s)?)
    } else {
        None
    };
    let pass = s.status.is_solution()
        && !rows.is_empty()
        && skipped == 0
        && max <= grid.tol
        && positive_definite
        && inv.a_positive
        && inv.b_positive
        && inv.ode <= grid.ode_tol
        && inv.boundary <= grid.ode_tol
        && boundary.closed_form <= grid.closed_tol
        && boundary.derivative <= grid.boundary_tol
        && boundary.tangential_positive
        && apex.as_ref().is_none_or(|a| a.smooth);
    Ok((
        ResidualReport {
            points: rows.len(),
            skipped,
            max,
            mean,
            tol: grid.tol,
            positive_definite,
            ode: inv.ode,
            boundary,
            apex,
            pass,
        },
        rows,
    ))
}

/// `|Scal_fd − Scal_closed|` at steps `h` and `h/2`, and their ratio.
pub fn curvature_convergence(field: &MetricField, point: (f64, f64), h: f64) -> Result<[f64; 3]> {
    let mu = field.to_moment(point.0, point.1);
    let exact = scalar_curvature_closed(field, point);
    let e1 = (scalar_curvature_fd(field, mu, h)? - exact).abs();
    let e2 = (scalar_curvature_fd(field, mu, h / 2.0)? - exact).abs();
    Ok([e1, e2, e1 / e2])
}
