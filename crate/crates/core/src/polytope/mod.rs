//! Labelled planar polytopes and their canonical models.
//!
//! A labelled polytope carries one affine defining function
//! `L_k(p) = ⟨p, u_k⟩ + c_k` per facet. The canonical models are the images of
//! a rectangle `[α₁,α₂]×[β₁,β₂]` under the identity (parallelogram),
//! `(x,y) ↦ (x, xy)` (trapezoid) or `(x,y) ↦ (x+y, xy)` (generic
//! quadrilateral), plus the two triangle degenerations.

mod affine;
mod normalize;
mod rational;

use serde::{Deserialize, Serialize};

pub use affine::AffineMap2;
pub use normalize::{normalize, normalize_ortho_simplex};
pub use rational::{
    delzant_check, delzant_exact, nearest_rational, parse_rational, rationality_parameters,
    rationality_tuple, DelzantReport, RationalApprox, RationalityReport,
};

use crate::{Error, Result};
use affine::{cross, dot, norm, sub};

/// Tolerance on `|cross|` of unit edge directions below which two edges count as parallel.
pub const PARALLEL_TOL: f64 = 1e-9;
/// Edges closer to parallel than this, but not within [`PARALLEL_TOL`], raise a flag.
pub const NEAR_PARALLEL_TOL: f64 = 1e-6;
/// Relative tolerance on the monotone conditions and the preferred-point cross-check.
pub const MONOTONE_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QuadClass {
    #[serde(alias = "product")]
    Parallelogram,
    #[serde(alias = "calabi")]
    Trapezoid,
    #[serde(alias = "orthotoric")]
    GenericQuadrilateral,
    CalabiTriangle,
    OrthoSimplex,
}

impl QuadClass {
    pub fn is_triangle(self) -> bool {
        matches!(self, QuadClass::CalabiTriangle | QuadClass::OrthoSimplex)
    }

    /// Moment coordinates of the canonical point `(x, y)`.
    pub fn sigma(self, x: f64, y: f64) -> [f64; 2] {
        match self {
            QuadClass::Parallelogram => [x, y],
            QuadClass::Trapezoid | QuadClass::CalabiTriangle => [x, x * y],
            QuadClass::GenericQuadrilateral | QuadClass::OrthoSimplex => [x + y, x * y],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            QuadClass::Parallelogram => "parallelogram",
            QuadClass::Trapezoid => "trapezoid",
            QuadClass::GenericQuadrilateral => "generic-quadrilateral",
            QuadClass::CalabiTriangle => "calabi-triangle",
            QuadClass::OrthoSimplex => "ortho-simplex",
        }
    }
}

/// How to split triangles, which all look alike to an affine classifier.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TriangleHint {
    /// Decide from the label weights.
    #[default]
    Auto,
    CalabiTriangle,
    OrthoSimplex,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Facet {
    pub normal: [f64; 2],
    pub offset: f64,
}

impl Facet {
    pub fn eval(&self, p: [f64; 2]) -> f64 {
        dot(p, self.normal) + self.offset
    }
}

/// A convex triangle or quadrilateral with counter-clockwise vertices.
///
/// Facet `k` is the edge from vertex `k` to vertex `k + 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabelledPolytope {
    vertices: Vec<[f64; 2]>,
    facets: Vec<Facet>,
}

impl LabelledPolytope {
    /// Builds a polytope from vertices in cyclic order and facet labels.
    ///
    /// Facets are matched to edges by incidence, so their order is free.
    /// Clockwise input is reversed.
    pub fn new(vertices: Vec<[f64; 2]>, facets: Vec<Facet>) -> Result<Self> {
        let vertices = oriented(vertices)?;
        let n = vertices.len();
        if facets.len() != n {
            return Err(Error::InvalidLabels(format!(
                "{} labels for {n} edges",
                facets.len()
            )));
        }
        let scale = coord_scale(&vertices);
        let mut used = vec![false; n];
        let mut ordered = Vec::with_capacity(n);
        for k in 0..n {
            let (a, b) = (vertices[k], vertices[(k + 1) % n]);
            let hit = facets.iter().enumerate().position(|(j, f)| {
                let tol = 1e-9 * norm(f.normal) * scale;
                !used[j] && f.eval(a).abs() <= tol && f.eval(b).abs() <= tol
            });
            match hit {
                Some(j) => {
                    used[j] = true;
                    ordered.push(facets[j]);
                }
                None => {
                    return Err(Error::InvalidLabels(format!(
                        "no label vanishes on the edge {a:?} -> {b:?}"
                    )))
                }
            }
        }
        let poly = LabelledPolytope {
            vertices,
            facets: ordered,
        };
        let c = poly.centroid();
        if let Some(k) = poly.facets.iter().position(|f| f.eval(c) <= 0.0) {
            return Err(Error::InvalidLabels(format!(
                "label {k} does not point inward"
            )));
        }
        Ok(poly)
    }

    /// Builds a polytope from vertices and one inward normal per edge.
    ///
    /// Each normal is attached to the edge it is orthogonal to and points
    /// inward from; offsets follow from the vertices.
    pub fn from_vertices_normals(vertices: Vec<[f64; 2]>, normals: &[[f64; 2]]) -> Result<Self> {
        let vertices = oriented(vertices)?;
        let n = vertices.len();
        if normals.len() != n {
            return Err(Error::InvalidLabels(format!(
                "{} normals for {n} edges",
                normals.len()
            )));
        }
        let c = centroid_of(&vertices);
        let mut used = vec![false; n];
        let mut facets = Vec::with_capacity(n);
        for k in 0..n {
            let a = vertices[k];
            let e = sub(vertices[(k + 1) % n], a);
            let hit = normals.iter().enumerate().position(|(j, u)| {
                !used[j]
                    && norm(*u) > 0.0
                    && dot(e, *u).abs() <= PARALLEL_TOL * norm(e) * norm(*u)
                    && dot(sub(c, a), *u) > 0.0
            });
            let Some(j) = hit else {
                return Err(Error::InvalidLabels(format!(
                    "no inward normal orthogonal to edge {k}"
                )));
            };
            used[j] = true;
            facets.push(Facet {
                normal: normals[j],
                offset: -dot(a, normals[j]),
            });
        }
        LabelledPolytope::new(vertices, facets)
    }

    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    pub fn facets(&self) -> &[Facet] {
        &self.facets
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn centroid(&self) -> [f64; 2] {
        centroid_of(&self.vertices)
    }

    pub fn scale(&self) -> f64 {
        coord_scale(&self.vertices)
    }

    pub fn defining_values(&self, p: [f64; 2]) -> Vec<f64> {
        self.facets.iter().map(|f| f.eval(p)).collect()
    }

    pub fn edge_direction(&self, k: usize) -> [f64; 2] {
        sub(self.vertices[(k + 1) % self.len()], self.vertices[k])
    }

    /// Image under `map`, labels transported as `L ∘ map⁻¹`.
    pub fn transformed(&self, map: &AffineMap2) -> Result<Self> {
        let vertices = self.vertices.iter().map(|&p| map.apply(p)).collect();
        let facets = self
            .facets
            .iter()
            .map(|f| {
                let (normal, offset) = map.push_label(f.normal, f.offset);
                Facet { normal, offset }
            })
            .collect();
        LabelledPolytope::new(vertices, facets)
    }

    /// The point where all defining functions agree, if there is one.
    ///
    /// Solves `L₁ = L₂ = L₃` and checks the remaining label.
    pub fn preferred_point(&self) -> Option<[f64; 2]> {
        let f = &self.facets;
        let d1 = sub(f[1].normal, f[0].normal);
        let d2 = sub(f[2].normal, f[0].normal);
        let det = cross(d1, d2);
        let scale = norm(f[0].normal)
            .max(norm(f[1].normal))
            .max(norm(f[2].normal));
        if det.abs() <= 1e-14 * scale * scale {
            return None;
        }
        let r1 = f[0].offset - f[1].offset;
        let r2 = f[0].offset - f[2].offset;
        let p = [
            (r1 * d2[1] - r2 * d1[1]) / det,
            (d1[0] * r2 - d2[0] * r1) / det,
        ];
        agreeing(&self.defining_values(p)).then_some(p)
    }

    /// Signed number of parallel edge pairs and the tightest non-parallel pair.
    fn parallel_pairs(&self) -> (usize, f64) {
        let n = self.len();
        let dirs: Vec<[f64; 2]> = (0..n)
            .map(|k| {
                let e = self.edge_direction(k);
                let l = norm(e);
                [e[0] / l, e[1] / l]
            })
            .collect();
        let mut pairs = 0;
        let mut closest = f64::INFINITY;
        for i in 0..n {
            for j in i + 1..n {
                let c = cross(dirs[i], dirs[j]).abs();
                if c <= PARALLEL_TOL {
                    pairs += 1;
                } else {
                    closest = closest.min(c);
                }
            }
        }
        (pairs, closest)
    }

    /// Label weights `kᵢ` with `Σ kᵢuᵢ = 0`, scaled so the smallest is 1.
    pub fn triangle_weights(&self) -> Result<[f64; 3]> {
        if self.len() != 3 {
            return Err(Error::NotQuadrilateral(self.len()));
        }
        let u: Vec<[f64; 2]> = self.facets.iter().map(|f| f.normal).collect();
        let k = [cross(u[1], u[2]), cross(u[2], u[0]), cross(u[0], u[1])];
        let min = k.iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
        Ok([k[0] / min, k[1] / min, k[2] / min].map(f64::abs))
    }
}

fn agreeing(values: &[f64]) -> bool {
    let l1 = values[0];
    l1 > 0.0
        && values
            .iter()
            .all(|v| (v - l1).abs() <= MONOTONE_TOL * l1.abs())
}

fn centroid_of(v: &[[f64; 2]]) -> [f64; 2] {
    let n = v.len() as f64;
    let s = v.iter().fold([0.0, 0.0], |s, p| [s[0] + p[0], s[1] + p[1]]);
    [s[0] / n, s[1] / n]
}

fn coord_scale(v: &[[f64; 2]]) -> f64 {
    v.iter()
        .fold(0.0_f64, |m, p| m.max(p[0].abs()).max(p[1].abs()))
        .max(1.0)
}

fn signed_area(v: &[[f64; 2]]) -> f64 {
    let n = v.len();
    (0..n).map(|k| cross(v[k], v[(k + 1) % n])).sum::<f64>() / 2.0
}

/// Checks size, convexity and orientation; returns counter-clockwise order.
fn oriented(mut v: Vec<[f64; 2]>) -> Result<Vec<[f64; 2]>> {
    let n = v.len();
    if !(3..=4).contains(&n) {
        return Err(Error::Degenerate(format!("{n} vertices, expected 3 or 4")));
    }
    if v.iter().flatten().any(|c| !c.is_finite()) {
        return Err(Error::Degenerate("non-finite vertex".into()));
    }
    let scale = coord_scale(&v);
    if signed_area(&v).abs() <= 1e-12 * scale * scale {
        return Err(Error::Degenerate("zero area".into()));
    }
    if signed_area(&v) < 0.0 {
        v.reverse();
    }
    for k in 0..n {
        let e1 = sub(v[(k + 1) % n], v[k]);
        let e2 = sub(v[(k + 2) % n], v[(k + 1) % n]);
        if cross(e1, e2) <= 1e-12 * norm(e1) * norm(e2) {
            return Err(Error::Degenerate(format!(
                "not strictly convex at vertex {}",
                (k + 1) % n
            )));
        }
    }
    Ok(v)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    pub class: QuadClass,
    /// Set when two edges are nearly, but not numerically, parallel.
    pub near_degenerate: bool,
    /// Smallest `|cross|` over edge pairs not counted as parallel.
    pub min_cross: f64,
}

pub fn classify(poly: &LabelledPolytope) -> Result<QuadClass> {
    classify_with_hint(poly, TriangleHint::Auto).map(|c| c.class)
}

pub fn classify_with_hint(poly: &LabelledPolytope, hint: TriangleHint) -> Result<Classification> {
    let (pairs, min_cross) = poly.parallel_pairs();
    let near_degenerate = min_cross <= NEAR_PARALLEL_TOL;
    let class = if poly.len() == 3 {
        match hint {
            TriangleHint::CalabiTriangle => QuadClass::CalabiTriangle,
            TriangleHint::OrthoSimplex => QuadClass::OrthoSimplex,
            TriangleHint::Auto => {
                let k = poly.triangle_weights()?;
                let equal = |a: f64, b: f64| (a - b).abs() <= 1e-9 * a.max(b);
                if equal(k[0], k[1]) || equal(k[1], k[2]) || equal(k[0], k[2]) {
                    QuadClass::CalabiTriangle
                } else {
                    QuadClass::OrthoSimplex
                }
            }
        }
    } else {
        match pairs {
            0 => QuadClass::GenericQuadrilateral,
            1 => QuadClass::Trapezoid,
            _ => QuadClass::Parallelogram,
        }
    };
    Ok(Classification {
        class,
        near_degenerate,
        min_cross,
    })
}

/// The eight numbers `(α₁,α₂,β₁,β₂,C_{α₁},C_{α₂},C_{β₁},C_{β₂})` with a case tag.
///
/// The Calabi triangle has `α₁ = 0` and stores `C_{α₁} = ∞`, so that
/// `1/C_{α₁} = 0` in every formula. The orthotoric simplex has
/// `α₁ = β₂` and `C_{α₁} = C_{β₂}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CanonicalParameters {
    pub case: QuadClass,
    pub alpha: [f64; 2],
    pub beta: [f64; 2],
    pub c_alpha: [f64; 2],
    pub c_beta: [f64; 2],
}

impl CanonicalParameters {
    /// From `(α₁,α₂,β₁,β₂,C_{α₁},C_{α₂},C_{β₁},C_{β₂})`, validated.
    pub fn from_tuple(case: QuadClass, t: [f64; 8]) -> Result<Self> {
        let p = CanonicalParameters {
            case,
            alpha: [t[0], t[1]],
            beta: [t[2], t[3]],
            c_alpha: [t[4], t[5]],
            c_beta: [t[6], t[7]],
        };
        p.validate()?;
        Ok(p)
    }

    pub fn calabi_triangle(
        alpha2: f64,
        beta: [f64; 2],
        c_alpha2: f64,
        c_beta: [f64; 2],
    ) -> Result<Self> {
        Self::from_tuple(
            QuadClass::CalabiTriangle,
            [
                0.0,
                alpha2,
                beta[0],
                beta[1],
                f64::INFINITY,
                c_alpha2,
                c_beta[0],
                c_beta[1],
            ],
        )
    }

    /// Simplex with `β₁ = -1`, `β₂ = α₁ = β`, `α₂ = 1`.
    pub fn ortho_simplex(beta: f64, c_beta: f64, c_minus: f64, c_plus: f64) -> Result<Self> {
        Self::from_tuple(
            QuadClass::OrthoSimplex,
            [beta, 1.0, -1.0, beta, c_beta, c_plus, c_minus, c_beta],
        )
    }

    pub fn as_tuple(&self) -> [f64; 8] {
        [
            self.alpha[0],
            self.alpha[1],
            self.beta[0],
            self.beta[1],
            self.c_alpha[0],
            self.c_alpha[1],
            self.c_beta[0],
            self.c_beta[1],
        ]
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameters(m.to_string()));
        let [a1, a2] = self.alpha;
        let [b1, b2] = self.beta;
        let [ca1, ca2] = self.c_alpha;
        let [cb1, cb2] = self.c_beta;
        let triangle = self.case == QuadClass::CalabiTriangle;
        if [a1, a2, b1, b2, ca2, cb1, cb2]
            .iter()
            .any(|v| !v.is_finite())
            || ca1.is_nan()
            || (!triangle && ca1.is_infinite())
        {
            return bad("non-finite entry");
        }
        if !(ca1 > 0.0 && cb2 > 0.0 && ca2 < 0.0 && cb1 < 0.0) {
            return bad("labels must satisfy C_a1 > 0, C_a2 < 0, C_b1 < 0, C_b2 > 0");
        }
        if !(a1 < a2 && b1 < b2) {
            return bad("need alpha1 < alpha2 and beta1 < beta2");
        }
        match self.case {
            QuadClass::Parallelogram => Ok(()),
            QuadClass::Trapezoid if a1 > 0.0 && b1 >= 0.0 => Ok(()),
            QuadClass::Trapezoid => bad("Calabi parameters need alpha1 > 0 and beta1 >= 0"),
            QuadClass::CalabiTriangle if a1 == 0.0 && ca1 == f64::INFINITY && b1 >= 0.0 => Ok(()),
            QuadClass::CalabiTriangle => {
                bad("a Calabi triangle has alpha1 = 0, 1/C_a1 = 0 and beta1 >= 0")
            }
            QuadClass::GenericQuadrilateral if b2 < a1 => Ok(()),
            QuadClass::GenericQuadrilateral => bad("orthotoric parameters need beta2 < alpha1"),
            QuadClass::OrthoSimplex if a1 == b2 && ca1 == cb2 => Ok(()),
            QuadClass::OrthoSimplex => bad("a simplex has alpha1 = beta2 and C_a1 = C_b2"),
        }
    }

    pub fn inv_c_alpha(&self) -> [f64; 2] {
        [1.0 / self.c_alpha[0], 1.0 / self.c_alpha[1]]
    }

    pub fn inv_c_beta(&self) -> [f64; 2] {
        [1.0 / self.c_beta[0], 1.0 / self.c_beta[1]]
    }

    /// Label of the facet `x = γ` or `y = γ` in moment coordinates, as
    /// `(normal, offset)`.
    fn label(&self, gamma: f64, c: f64, is_alpha: bool) -> Facet {
        let (normal, offset) = match (self.case, is_alpha) {
            (QuadClass::Parallelogram, true) => ([c, 0.0], -c * gamma),
            (QuadClass::Parallelogram, false) => ([0.0, -c], c * gamma),
            (QuadClass::Trapezoid | QuadClass::CalabiTriangle, true) => {
                ([c * gamma, 0.0], -c * gamma * gamma)
            }
            (QuadClass::Trapezoid | QuadClass::CalabiTriangle, false) => ([c * gamma, -c], 0.0),
            (QuadClass::GenericQuadrilateral | QuadClass::OrthoSimplex, _) => {
                ([c * gamma, -c], -c * gamma * gamma)
            }
        };
        Facet { normal, offset }
    }

    /// Facet labels in the order `β₁, α₂, β₂, α₁`; triangles drop the collapsed facet.
    pub fn model_facets(&self) -> Vec<Facet> {
        let mut f = vec![
            self.label(self.beta[0], self.c_beta[0], false),
            self.label(self.alpha[1], self.c_alpha[1], true),
            self.label(self.beta[1], self.c_beta[1], false),
        ];
        if !self.case.is_triangle() {
            f.push(self.label(self.alpha[0], self.c_alpha[0], true));
        }
        f
    }

    /// Vertices `σ(α₁,β₁), σ(α₂,β₁), σ(α₂,β₂)[, σ(α₁,β₂)]`.
    pub fn model_vertices(&self) -> Vec<[f64; 2]> {
        let s = |x, y| self.case.sigma(x, y);
        let [a1, a2] = self.alpha;
        let [b1, b2] = self.beta;
        let mut v = vec![s(a1, b1), s(a2, b1), s(a2, b2)];
        if !self.case.is_triangle() {
            v.push(s(a1, b2));
        }
        v
    }

    pub fn model_polytope(&self) -> Result<LabelledPolytope> {
        LabelledPolytope::new(self.model_vertices(), self.model_facets())
    }
}

/// Both sides of the case's monotone condition; `None` for triangles.
pub fn monotone_sides(params: &CanonicalParameters) -> Option<(f64, f64)> {
    let [a1, a2] = params.alpha;
    let [b1, b2] = params.beta;
    let [ia1, ia2] = params.inv_c_alpha();
    let [ib1, ib2] = params.inv_c_beta();
    match params.case {
        QuadClass::Parallelogram => Some(((ia1 - ia2) / (a2 - a1), (ib2 - ib1) / (b2 - b1))),
        QuadClass::Trapezoid => Some((
            (a2 * ia1 / a1 - a1 * ia2 / a2) / (a2 - a1),
            (ib2 - ib1) / (b2 - b1),
        )),
        QuadClass::GenericQuadrilateral => Some((
            ((a1 - b1) * (a2 - b1) * ib2 - (a1 - b2) * (a2 - b2) * ib1) / (b2 - b1),
            ((a2 - b1) * (a2 - b2) * ia1 - (a1 - b1) * (a1 - b2) * ia2) / (a2 - a1),
        )),
        QuadClass::CalabiTriangle | QuadClass::OrthoSimplex => None,
    }
}

/// The preferred point in moment coordinates when the parameters are monotone.
///
/// Quadrilaterals use the closed-form condition and point of their case;
/// triangles are always monotone. The returned point is checked against all
/// defining functions of the model.
pub fn monotone_check(params: &CanonicalParameters) -> Option<[f64; 2]> {
    let [a1, a2] = params.alpha;
    let [b1, b2] = params.beta;
    let [ca1, ca2] = params.c_alpha;
    let [cb1, cb2] = params.c_beta;
    let model = params.model_polytope().ok()?;
    if let Some((lhs, rhs)) = monotone_sides(params) {
        if (lhs - rhs).abs() > MONOTONE_TOL * lhs.abs().max(rhs.abs()) {
            return None;
        }
    }
    let p = match params.case {
        QuadClass::Parallelogram => [
            (a1 * ca1 - a2 * ca2) / (ca1 - ca2),
            (b1 * cb1 - b2 * cb2) / (cb1 - cb2),
        ],
        QuadClass::Trapezoid => {
            let x = (a1 * a1 * ca1 - a2 * a2 * ca2) / (a1 * ca1 - a2 * ca2);
            let y = (b1 * cb1 - b2 * cb2) / (cb1 - cb2);
            [x, x * y]
        }
        QuadClass::GenericQuadrilateral => {
            let w = [ca1 * cb1, -ca2 * cb1, -ca1 * cb2, ca2 * cb2];
            let pairs = [(a1, b1), (a2, b1), (a1, b2), (a2, b2)];
            let mut den = 0.0;
            let mut sum = 0.0;
            let mut prod = 0.0;
            for (wi, (a, b)) in w.iter().zip(pairs) {
                den += wi * (a - b);
                sum += wi * (a * a - b * b);
                prod += wi * a * b * (a - b);
            }
            [sum / den, prod / den]
        }
        QuadClass::CalabiTriangle | QuadClass::OrthoSimplex => return model.preferred_point(),
    };
    agreeing(&model.defining_values(p)).then_some(p)
}

/// `Σᵢ (-1)ⁱ f(sᵢ)` over the vertices `s₁..s₄`, for `f = f₀ + f₁μ₁ + f₂μ₂`.
pub fn equipoised_residual(f: [f64; 3], poly: &LabelledPolytope) -> Result<f64> {
    if poly.len() != 4 {
        return Err(Error::NotQuadrilateral(poly.len()));
    }
    Ok(poly
        .vertices()
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let sign = if i % 2 == 0 { -1.0 } else { 1.0 };
            sign * (f[0] + f[1] * p[0] + f[2] * p[1])
        })
        .sum())
}

/// Equipoise test `|residual| ≤ tol·(max|f(sᵢ)| + 1)`.
pub fn is_equipoised(f: [f64; 3], poly: &LabelledPolytope, tol: f64) -> Result<bool> {
    let r = equipoised_residual(f, poly)?;
    let m = poly.vertices().iter().fold(0.0_f64, |m, p| {
        m.max((f[0] + f[1] * p[0] + f[2] * p[1]).abs())
    });
    Ok(r.abs() <= tol * (m + 1.0))
}
