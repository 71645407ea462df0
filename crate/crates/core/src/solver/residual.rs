use std::num::NonZeroUsize;

use gauss_quad::GaussLegendre;

use crate::expquad::moment_integral;
use crate::polytope::{monotone_check, CanonicalParameters, QuadClass};
use crate::{Error, Result};

/// Nodes of the outer rule when `e^{−2⟨μ,a⟩}` does not separate.
const OUTER_NODES: usize = 64;

/// `∫_Δ e^{−2⟨μ,a⟩}(μᵢ − pᵢ) dμ` for `i = 1, 2`, with `p` the preferred point.
///
/// The integral is pulled back to the rectangle of `(x, y)` through the case's
/// map `σ`, with Jacobian `1`, `x` or `x − y`. When the weight factors in `x`
/// and `y` each term is a product of two exact moments; otherwise the inner
/// `y` integral stays exact and the outer one uses Gauss–Legendre.
pub fn soliton_vector_residual(params: &CanonicalParameters, a: [f64; 2]) -> Result<[f64; 2]> {
    let p = monotone_check(params).ok_or(Error::NotMonotone)?;
    let mut c1 = [[0.0; 4]; 4];
    let mut c2 = [[0.0; 4]; 4];
    match params.case {
        QuadClass::Parallelogram => {
            c1[1][0] = 1.0;
            c1[0][0] = -p[0];
            c2[0][1] = 1.0;
            c2[0][0] = -p[1];
        }
        QuadClass::Trapezoid | QuadClass::CalabiTriangle => {
            c1[2][0] = 1.0;
            c1[1][0] = -p[0];
            c2[2][1] = 1.0;
            c2[1][0] = -p[1];
        }
        QuadClass::GenericQuadrilateral | QuadClass::OrthoSimplex => {
            c1[2][0] = 1.0;
            c1[0][2] = -1.0;
            c1[1][0] = -p[0];
            c1[0][1] = p[0];
            c2[2][1] = 1.0;
            c2[1][2] = -1.0;
            c2[1][0] = -p[1];
            c2[0][1] = p[1];
        }
    }
    Ok([
        rect_integral(params, a, &c1)?,
        rect_integral(params, a, &c2)?,
    ])
}

/// `∫∫ e^{−2⟨σ(x,y),a⟩} Σ c[i][j] xⁱ yʲ dx dy` over `[α₁,α₂]×[β₁,β₂]`.
fn rect_integral(params: &CanonicalParameters, a: [f64; 2], c: &[[f64; 4]; 4]) -> Result<f64> {
    let [x0, x1] = params.alpha;
    let [y0, y1] = params.beta;
    // e^{−2(rx·x + (ry + sxy·x)·y)}
    let (rx, ry, sxy) = match params.case {
        QuadClass::Parallelogram => (a[0], a[1], 0.0),
        QuadClass::Trapezoid | QuadClass::CalabiTriangle => (a[0], 0.0, a[1]),
        QuadClass::GenericQuadrilateral | QuadClass::OrthoSimplex => (a[0], a[0], a[1]),
    };
    if sxy == 0.0 {
        let mut total = 0.0;
        for (i, row) in c.iter().enumerate() {
            for (j, &cij) in row.iter().enumerate() {
                if cij != 0.0 {
                    total +=
                        cij * moment_integral(i, rx, x0, x1)? * moment_integral(j, ry, y0, y1)?;
                }
            }
        }
        return Ok(total);
    }
    let rule = GaussLegendre::new(NonZeroUsize::new(OUTER_NODES).expect("nonzero"));
    let failed = std::cell::Cell::new(None);
    let value = rule.integrate(x0, x1, |x| {
        let rate = ry + sxy * x;
        let mut inner = 0.0;
        for j in 0..4 {
            let cj: f64 = (0..4).map(|i| c[i][j] * x.powi(i as i32)).sum();
            if cj != 0.0 {
                match moment_integral(j, rate, y0, y1) {
                    Ok(m) => inner += cj * m,
                    Err(e) => failed.set(Some(e)),
                }
            }
        }
        (-2.0 * rx * x).exp() * inner
    });
    match failed.take() {
        Some(e) => Err(e),
        None => Ok(value),
    }
}
