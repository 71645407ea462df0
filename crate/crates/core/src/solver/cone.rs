use nalgebra::Matrix4;
use serde::{Deserialize, Serialize};

use super::{average_scalar, kernels};
use crate::expquad::{integrate_poly_exp, Poly};
use crate::polytope::{CanonicalParameters, QuadClass};
use crate::{Error, Result};

/// Sign pattern of `(1/C_{α₁}, 1/C_{α₂}, 1/C_{β₁}, 1/C_{β₂})`.
const SIGNS: [f64; 4] = [1.0, -1.0, -1.0, 1.0];

/// Labels `z = 1/C` of an orthotoric shape solving both rate equations at a fixed `a₁`.
///
/// Points of the kernel are written `z = w₀·basis[0] + w₁·basis[1]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormalCone {
    pub shape: [f64; 4],
    pub a1: f64,
    pub basis: [[f64; 4]; 2],
    /// Extreme rays in `w` of the sub-cone with the sign pattern, if it has interior.
    pub rays: Option<[[f64; 2]; 2]>,
    /// Direction in `w` of the monotone members inside the sign cone.
    pub monotone_ray: Option<[f64; 2]>,
}

impl NormalCone {
    pub fn labels(&self, w: [f64; 2]) -> [f64; 4] {
        std::array::from_fn(|j| w[0] * self.basis[0][j] + w[1] * self.basis[1][j])
    }

    pub fn parameters(&self, w: [f64; 2]) -> Result<CanonicalParameters> {
        let z = self.labels(w);
        let [a1, a2, b1, b2] = self.shape;
        CanonicalParameters::from_tuple(
            QuadClass::GenericQuadrilateral,
            [
                a1,
                a2,
                b1,
                b2,
                1.0 / z[0],
                1.0 / z[1],
                1.0 / z[2],
                1.0 / z[3],
            ],
        )
    }

    /// Member `(1−t)·r₀ + t·r₁` of the sign cone, `t ∈ (0,1)`.
    pub fn sample(&self, t: f64) -> Option<CanonicalParameters> {
        let [r0, r1] = self.rays?;
        let w = [(1.0 - t) * r0[0] + t * r1[0], (1.0 - t) * r0[1] + t * r1[1]];
        self.parameters(w).ok()
    }

    pub fn monotone_member(&self) -> Option<CanonicalParameters> {
        self.parameters(self.monotone_ray?).ok()
    }
}

/// Coefficients of `Scal̄` and `m` as linear forms in `z = 1/C`.
fn linear_forms(shape: [f64; 4]) -> ([f64; 4], [f64; 4]) {
    let [a1, a2, b1, b2] = shape;
    let (da, db, s) = (a2 - a1, b2 - b1, a1 + a2 - b1 - b2);
    let scal = [
        4.0 / (s * da),
        -4.0 / (s * da),
        -4.0 / (s * db),
        4.0 / (s * db),
    ];
    let w = 2.0 / (da * db * s);
    let (pa, pb) = (a2 * a2 - a1 * a1, b2 * b2 - b1 * b1);
    let m = [w * pb, -w * pb, -w * pa, w * pa];
    (scal, m)
}

fn perp(g: [f64; 2]) -> [f64; 2] {
    [-g[1], g[0]]
}

fn dot2(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

fn unit2(a: [f64; 2]) -> [f64; 2] {
    let n = a[0].hypot(a[1]);
    [a[0] / n, a[1] / n]
}

/// The rate equations at fixed `a₁` as a `2×4` linear system in `1/C`.
pub fn normal_cone(shape: [f64; 4], a1: f64) -> Result<NormalCone> {
    let [al1, al2, be1, be2] = shape;
    if !(be1 < be2 && be2 < al1 && al1 < al2) || shape.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidParameters(
            "shape must satisfy beta1 < beta2 < alpha1 < alpha2".into(),
        ));
    }
    let (sc, mc) = linear_forms(shape);
    let mut m = Matrix4::<f64>::zeros();
    for j in 0..4 {
        let (s, mm) = (sc[j], mc[j]);
        let d_a = if j == 0 { 2.0 } else { 0.0 };
        let d_b = if j == 2 { 2.0 } else { 0.0 };
        let fa = Poly::new(vec![s / 2.0 * al1 * al1 - mm * al1 + d_a, mm, -s / 2.0]);
        let fb = Poly::new(vec![-s / 2.0 * be1 * be1 + mm * be1 - d_b, -mm, s / 2.0]);
        m[(0, j)] = integrate_poly_exp(&fa, a1, al1, al2)?;
        m[(1, j)] = integrate_poly_exp(&fb, a1, be1, be2)?;
    }
    for r in 0..2 {
        let n = m.row(r).norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::RankDeficient(format!("equation {r} vanishes")));
        }
        m.set_row(r, &(m.row(r) / n));
    }
    let svd = m.svd(false, true);
    let vt = svd
        .v_t
        .ok_or_else(|| Error::RankDeficient("decomposition failed".into()))?;
    let mut order: Vec<usize> = (0..4).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    let sv = |k: usize| svd.singular_values[order[k]];
    if sv(1) <= 1e-12 * sv(0) {
        return Err(Error::RankDeficient(format!(
            "singular values {} and {}",
            sv(0),
            sv(1)
        )));
    }
    let basis: [[f64; 4]; 2] =
        std::array::from_fn(|k| std::array::from_fn(|j| vt[(order[2 + k], j)]));
    let g: Vec<[f64; 2]> = (0..4)
        .map(|j| [SIGNS[j] * basis[0][j], SIGNS[j] * basis[1][j]])
        .collect();
    let rays = sign_cone(&g);
    let monotone_ray = rays.and_then(|r| {
        let ell = monotone_form(shape);
        let q = [
            (0..4).map(|j| ell[j] * basis[0][j]).sum::<f64>(),
            (0..4).map(|j| ell[j] * basis[1][j]).sum::<f64>(),
        ];
        let d = unit2(perp(q));
        [d, [-d[0], -d[1]]]
            .into_iter()
            .find(|w| strictly_inside(&g, *w) || inside_arc(r, *w))
    });
    Ok(NormalCone {
        shape,
        a1,
        basis,
        rays,
        monotone_ray,
    })
}

fn strictly_inside(g: &[[f64; 2]], w: [f64; 2]) -> bool {
    g.iter().all(|gi| dot2(*gi, w) > 0.0)
}

fn inside_arc(r: [[f64; 2]; 2], w: [f64; 2]) -> bool {
    let c = |a: [f64; 2], b: [f64; 2]| a[0] * b[1] - a[1] * b[0];
    c(r[0], w) > 0.0 && c(w, r[1]) > 0.0
}

/// Intersection of the half-planes `gᵢ·w > 0` as a pair of rays, counterclockwise.
fn sign_cone(g: &[[f64; 2]]) -> Option<[[f64; 2]; 2]> {
    let tol = 1e-12;
    let feasible = |w: [f64; 2]| g.iter().all(|gi| dot2(*gi, w) >= -tol * gi[0].hypot(gi[1]));
    let mut cands: Vec<[f64; 2]> = Vec::new();
    for gi in g {
        if gi[0].hypot(gi[1]) == 0.0 {
            return None;
        }
        let p = unit2(perp(*gi));
        for w in [p, [-p[0], -p[1]]] {
            if feasible(w) {
                cands.push(w);
            }
        }
    }
    // the arc's endpoints are the pair at largest angle below π
    let mut best: Option<([[f64; 2]; 2], f64)> = None;
    for a in &cands {
        for b in &cands {
            let cr = a[0] * b[1] - a[1] * b[0];
            if cr > 1e-14 {
                let ang = cr.atan2(dot2(*a, *b));
                if best.is_none_or(|(_, x)| ang > x) {
                    best = Some(([*a, *b], ang));
                }
            }
        }
    }
    let (r, _) = best?;
    let mid = unit2([r[0][0] + r[1][0], r[0][1] + r[1][1]]);
    strictly_inside(g, mid).then_some(r)
}

/// `ℓ` with `ℓ·z = LHS − RHS` of the orthotoric monotone condition.
fn monotone_form(shape: [f64; 4]) -> [f64; 4] {
    let [a1, a2, b1, b2] = shape;
    let (da, db) = (a2 - a1, b2 - b1);
    [
        -(a2 - b1) * (a2 - b2) / da,
        (a1 - b1) * (a1 - b2) / da,
        -(a1 - b2) * (a2 - b2) / db,
        (a1 - b1) * (a2 - b1) / db,
    ]
}

/// Polynomial `Σ c[i][j] xⁱ aʲ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BiPoly {
    pub coeffs: Vec<Vec<f64>>,
}

impl BiPoly {
    pub fn eval(&self, x: f64, a: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, row| {
            acc * x + row.iter().rev().fold(0.0, |s, c| s * a + c)
        })
    }

    pub fn coeff(&self, i: usize, j: usize) -> f64 {
        self.coeffs
            .get(i)
            .and_then(|r| r.get(j))
            .copied()
            .unwrap_or(0.0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FaFb {
    pub f_a: BiPoly,
    pub f_b: BiPoly,
    /// Largest `|coefficient|` of `F_A − F_B` in positive powers of `x`.
    pub x_dependence: f64,
}

/// `F_A = Scal̄/8 + (a/4)(Scal̄x − m) − (a²/2) f_A(x)` and `F_B` with `+ (a²/2) f_B(x)`.
pub fn fafb_bivariate(params: &CanonicalParameters) -> Result<FaFb> {
    if !matches!(
        params.case,
        QuadClass::GenericQuadrilateral | QuadClass::OrthoSimplex
    ) {
        return Err(Error::ClassMismatch(
            "F_A and F_B are defined for orthotoric parameters".into(),
        ));
    }
    let (scal, m) = average_scalar(params);
    let (fa, fb) = kernels(params);
    let build = |f: &Poly, sign: f64| {
        let mut c = vec![vec![0.0; 3]; 3];
        c[0][0] = scal / 8.0;
        c[0][1] = -m / 4.0;
        c[1][1] = scal / 4.0;
        for i in 0..3 {
            c[i][2] += sign * f.coeff(i) / 2.0;
        }
        BiPoly { coeffs: c }
    };
    let f_a = build(&fa, -1.0);
    let f_b = build(&fb, 1.0);
    let mut x_dependence = 0.0_f64;
    for i in 1..3 {
        for j in 0..3 {
            x_dependence = x_dependence.max((f_a.coeff(i, j) - f_b.coeff(i, j)).abs());
        }
    }
    Ok(FaFb {
        f_a,
        f_b,
        x_dependence,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_forms_match_closed_forms() {
        let q = CanonicalParameters::from_tuple(
            QuadClass::GenericQuadrilateral,
            [1.0, 3.0, 0.0, 0.6, 1.2, -0.2, -1.2, 1.0],
        )
        .unwrap();
        let (sc, mc) = linear_forms([1.0, 3.0, 0.0, 0.6]);
        let z = [1.0 / 1.2, -5.0, 1.0 / -1.2, 1.0];
        let (s, m) = average_scalar(&q);
        let dot = |c: [f64; 4]| (0..4).map(|j| c[j] * z[j]).sum::<f64>();
        assert!((dot(sc) - s).abs() < 1e-12 && (dot(mc) - m).abs() < 1e-12);
    }

    #[test]
    fn monotone_form_matches_sides() {
        let q = CanonicalParameters::from_tuple(
            QuadClass::GenericQuadrilateral,
            [2.0, 3.0, 0.0, 1.0, 1.0, -1.0, -1.0, 1.0],
        )
        .unwrap();
        let (l, r) = crate::polytope::monotone_sides(&q).unwrap();
        let ell = monotone_form([2.0, 3.0, 0.0, 1.0]);
        let z = [1.0, -1.0, -1.0, 1.0];
        let v: f64 = (0..4).map(|j| ell[j] * z[j]).sum();
        assert!((v - (l - r)).abs() < 1e-12);
    }

    #[test]
    fn bipoly_evaluation() {
        let p = BiPoly {
            coeffs: vec![vec![1.0, 2.0], vec![0.0, 3.0]],
        };
        // 1 + 2a + 3xa
        assert_eq!(p.eval(2.0, 0.5), 1.0 + 1.0 + 3.0);
    }
}
