use nalgebra::{Matrix2, Matrix3, SMatrix, SymmetricEigen};

use super::affine::{cross, dot, norm, sub};
use super::{classify, AffineMap2, CanonicalParameters, LabelledPolytope, QuadClass};
use crate::{Error, Result};

/// Affine normalization onto the canonical model of `class`.
///
/// Returns the parameters and the map `Φ` with `Φ(poly)` equal to the model
/// polytope, labels included. Representatives of the model's automorphism
/// group are fixed as follows:
///
/// * parallelogram: linear map whose rows are the unit normals of the two
///   edge pairs;
/// * trapezoid: rigid motion putting the apex of the legs at the origin and
///   the parallel edges vertical, followed by a shear when needed to make
///   `β₁ = 0`;
/// * generic quadrilateral: orientation-preserving similarity sending the
///   inscribed parabola to `μ₂ = μ₁²/4`;
/// * Calabi triangle: apex to `(0,0)`, the other two vertices to `(1,0)`, `(1,1)`;
/// * orthotoric simplex: the simplex at `β = 0`, see [`normalize_ortho_simplex`].
pub fn normalize(
    poly: &LabelledPolytope,
    class: QuadClass,
) -> Result<(CanonicalParameters, AffineMap2)> {
    if poly.len() == 4 {
        let found = classify(poly)?;
        if found != class {
            return Err(Error::ClassMismatch(format!(
                "requested {} but the polytope is a {}",
                class.name(),
                found.name()
            )));
        }
    } else if !class.is_triangle() {
        return Err(Error::ClassMismatch(format!(
            "a triangle cannot be normalized as a {}",
            class.name()
        )));
    }
    let (params, map) = match class {
        QuadClass::Parallelogram => parallelogram(poly)?,
        QuadClass::Trapezoid => trapezoid(poly)?,
        QuadClass::GenericQuadrilateral => generic(poly)?,
        QuadClass::CalabiTriangle => calabi_triangle(poly)?,
        QuadClass::OrthoSimplex => return normalize_ortho_simplex(poly, 0.0),
    };
    check_model(poly, &params, &map)?;
    Ok((params, map))
}

/// Normalizes a triangle onto the orthotoric simplex with `β₁ = -1`,
/// `β₂ = α₁ = β`, `α₂ = 1`.
///
/// Facets are assigned by increasing label weight to `γ = -1, β, 1`.
pub fn normalize_ortho_simplex(
    poly: &LabelledPolytope,
    beta: f64,
) -> Result<(CanonicalParameters, AffineMap2)> {
    if poly.len() != 3 {
        return Err(Error::ClassMismatch(
            "the orthotoric simplex is a triangle".into(),
        ));
    }
    if !(beta > -1.0 && beta < 1.0) {
        return Err(Error::InvalidParameters(format!(
            "simplex beta {beta} outside (-1, 1)"
        )));
    }
    let k = poly.triangle_weights()?;
    let mut order = [0usize, 1, 2];
    order.sort_by(|&i, &j| k[i].total_cmp(&k[j]));
    let [lo, mid, hi] = order;
    let sigma = |x: f64, y: f64| [x + y, x * y];
    let v = |i, j| shared_vertex(poly, i, j);
    let map = AffineMap2::from_points(
        [v(lo, mid), v(lo, hi), v(hi, mid)],
        [sigma(beta, -1.0), sigma(1.0, -1.0), sigma(1.0, beta)],
    )?;
    let c = |i: usize| {
        -map.push_label(poly.facets()[i].normal, poly.facets()[i].offset)
            .0[1]
    };
    let params = CanonicalParameters::ortho_simplex(beta, c(mid), c(lo), c(hi))
        .map_err(|e| Error::ClassMismatch(e.to_string()))?;
    check_model(poly, &params, &map)?;
    Ok((params, map))
}

fn shared_vertex(poly: &LabelledPolytope, i: usize, j: usize) -> [f64; 2] {
    let n = poly.len();
    if j == (i + 1) % n {
        poly.vertices()[j]
    } else {
        poly.vertices()[i]
    }
}

fn unit(u: [f64; 2]) -> [f64; 2] {
    let l = norm(u);
    [u[0] / l, u[1] / l]
}

fn parallelogram(poly: &LabelledPolytope) -> Result<(CanonicalParameters, AffineMap2)> {
    let f = poly.facets();
    let mut na = unit(f[0].normal);
    let mut nb = unit(f[1].normal);
    if nb[0].abs() > na[0].abs() {
        std::mem::swap(&mut na, &mut nb);
    }
    if na[0] < 0.0 {
        na = [-na[0], -na[1]];
    }
    if cross(na, nb) < 0.0 {
        nb = [-nb[0], -nb[1]];
    }
    let map = AffineMap2::new([na, nb], [0.0, 0.0])?;
    let mut alpha = Vec::new();
    let mut beta = Vec::new();
    for facet in f {
        let (u, c) = map.push_label(facet.normal, facet.offset);
        if u[0].abs() > u[1].abs() {
            alpha.push((-c / u[0], u[0]));
        } else {
            beta.push((-c / u[1], -u[1]));
        }
    }
    let params = from_pairs(QuadClass::Parallelogram, alpha, beta)?;
    Ok((params, map))
}

/// Builds parameters from `(position, C)` pairs sorted by position.
fn from_pairs(
    case: QuadClass,
    mut alpha: Vec<(f64, f64)>,
    mut beta: Vec<(f64, f64)>,
) -> Result<CanonicalParameters> {
    if alpha.len() != 2 || beta.len() != 2 {
        return Err(Error::ClassMismatch(
            "facets do not split into two pairs".into(),
        ));
    }
    alpha.sort_by(|a, b| a.0.total_cmp(&b.0));
    beta.sort_by(|a, b| a.0.total_cmp(&b.0));
    CanonicalParameters::from_tuple(
        case,
        [
            alpha[0].0, alpha[1].0, beta[0].0, beta[1].0, alpha[0].1, alpha[1].1, beta[0].1,
            beta[1].1,
        ],
    )
    .map_err(|e| Error::ClassMismatch(e.to_string()))
}

fn trapezoid(poly: &LabelledPolytope) -> Result<(CanonicalParameters, AffineMap2)> {
    let f = poly.facets();
    let par = if cross(unit(poly.edge_direction(0)), unit(poly.edge_direction(2))).abs()
        <= super::PARALLEL_TOL
    {
        0
    } else {
        1
    };
    let (l1, l2) = (f[par + 1], f[(par + 3) % 4]);
    let det = cross(l1.normal, l2.normal);
    let apex = [
        (-l1.offset * l2.normal[1] + l2.offset * l1.normal[1]) / det,
        (-l2.offset * l1.normal[0] + l1.offset * l2.normal[0]) / det,
    ];
    let mut n = unit(f[par].normal);
    if dot(sub(poly.centroid(), apex), n) < 0.0 {
        n = [-n[0], -n[1]];
    }
    let rot = [n, [-n[1], n[0]]];
    let shift = AffineMap2::new([[1.0, 0.0], [0.0, 1.0]], [-apex[0], -apex[1]])?;
    let mut map = AffineMap2::new(rot, [0.0, 0.0])?.compose(&shift);
    let slope = |map: &AffineMap2, facet: &super::Facet| {
        let (u, _) = map.push_label(facet.normal, facet.offset);
        -u[0] / u[1]
    };
    let b1 = slope(&map, &l1).min(slope(&map, &l2));
    if b1 < 0.0 {
        map = AffineMap2::new([[1.0, 0.0], [-b1, 1.0]], [0.0, 0.0])?.compose(&map);
    }
    let mut alpha = Vec::new();
    let mut beta = Vec::new();
    for (k, facet) in f.iter().enumerate() {
        let (u, c) = map.push_label(facet.normal, facet.offset);
        if k == par || k == par + 2 {
            let a = -c / u[0];
            alpha.push((a, u[0] / a));
        } else {
            let cb = -u[1];
            // the shear can leave β₁ a rounding error below zero
            let b = (u[0] / cb).max(0.0);
            beta.push((b, cb));
        }
    }
    let params = from_pairs(QuadClass::Trapezoid, alpha, beta)?;
    Ok((params, map))
}

fn calabi_triangle(poly: &LabelledPolytope) -> Result<(CanonicalParameters, AffineMap2)> {
    let k = poly.triangle_weights()?;
    let spread = |i: usize| (k[(i + 1) % 3] - k[(i + 2) % 3]).abs();
    let odd = (0..3)
        .min_by(|&i, &j| spread(i).total_cmp(&spread(j)))
        .unwrap_or(0);
    let v = poly.vertices();
    let map = AffineMap2::from_points(
        [v[(odd + 2) % 3], v[odd], v[(odd + 1) % 3]],
        [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0]],
    )?;
    let push = |i: usize| {
        map.push_label(poly.facets()[i].normal, poly.facets()[i].offset)
            .0
    };
    let c_alpha2 = push(odd)[0];
    let c_beta1 = -push((odd + 2) % 3)[1];
    let c_beta2 = -push((odd + 1) % 3)[1];
    let params =
        CanonicalParameters::calabi_triangle(1.0, [0.0, 1.0], c_alpha2, [c_beta1, c_beta2])
            .map_err(|e| Error::ClassMismatch(e.to_string()))?;
    Ok((params, map))
}

/// Orthotoric normalization through the parabola tangent to all four edge lines.
fn generic(poly: &LabelledPolytope) -> Result<(CanonicalParameters, AffineMap2)> {
    // dual conic lᵀ C* l = 0 through the four edge lines and the line at infinity
    let mut sys = SMatrix::<f64, 5, 5>::zeros();
    for (r, f) in poly.facets().iter().enumerate() {
        let l = [f.normal[0], f.normal[1], f.offset];
        let s = (l[0] * l[0] + l[1] * l[1] + l[2] * l[2]).sqrt();
        let [u, v, c] = l.map(|x| x / s);
        let row = [u * u, 2.0 * u * v, v * v, 2.0 * u * c, 2.0 * v * c];
        for (j, x) in row.iter().enumerate() {
            sys[(r, j)] = *x;
        }
    }
    let svd = sys.svd(false, true);
    let vt = svd
        .v_t
        .ok_or_else(|| Error::ClassMismatch("dual conic decomposition failed".into()))?;
    let (imin, _) =
        svd.singular_values
            .iter()
            .enumerate()
            .fold(
                (0, f64::INFINITY),
                |acc, (i, &s)| if s < acc.1 { (i, s) } else { acc },
            );
    let w = vt.row(imin);
    let dual = Matrix3::new(w[0], w[1], w[3], w[1], w[2], w[4], w[3], w[4], 0.0);
    let primal = adjugate(&dual);
    let q2 = Matrix2::new(
        primal[(0, 0)],
        primal[(0, 1)],
        primal[(1, 0)],
        primal[(1, 1)],
    );
    let eig = SymmetricEigen::new(q2);
    let small = if eig.eigenvalues[0].abs() < eig.eigenvalues[1].abs() {
        0
    } else {
        1
    };
    let mut axis = [eig.eigenvectors[(0, small)], eig.eigenvectors[(1, small)]];
    let b = [primal[(0, 2)], primal[(1, 2)]];
    let frame = |axis: [f64; 2]| {
        let n = [axis[1], -axis[0]];
        let lam = n[0] * (q2[(0, 0)] * n[0] + q2[(0, 1)] * n[1])
            + n[1] * (q2[(1, 0)] * n[0] + q2[(1, 1)] * n[1]);
        let (bn, bv) = (dot(b, n), dot(b, axis));
        (n, lam, bn, bv, -lam / (2.0 * bv))
    };
    let (mut n, mut lam, mut bn, mut bv, mut q) = frame(axis);
    if q < 0.0 {
        axis = [-axis[0], -axis[1]];
        (n, lam, bn, bv, q) = frame(axis);
    }
    if !(q.is_finite() && q > 0.0 && lam != 0.0) {
        return Err(Error::ClassMismatch(
            "edge lines are not tangent to a parabola".into(),
        ));
    }
    let s0 = -bn / lam;
    let w0 = -(lam * s0 * s0 + 2.0 * bn * s0 + primal[(2, 2)]) / (2.0 * bv);
    let kappa = 4.0 * q;
    let map = AffineMap2::new(
        [
            [kappa * n[0], kappa * n[1]],
            [kappa * axis[0], kappa * axis[1]],
        ],
        [-kappa * s0, -kappa * w0],
    )?;
    let mut gammas: Vec<(f64, f64)> = poly
        .facets()
        .iter()
        .map(|f| {
            let (u, _) = map.push_label(f.normal, f.offset);
            let c = -u[1];
            (u[0] / c, c)
        })
        .collect();
    gammas.sort_by(|a, b| a.0.total_cmp(&b.0));
    let params = from_pairs(
        QuadClass::GenericQuadrilateral,
        vec![gammas[2], gammas[3]],
        vec![gammas[0], gammas[1]],
    )?;
    Ok((params, map))
}

/// Confirms that `map` carries `poly` onto the model of `params`.
/// Cofactor transpose; `adjoint` in nalgebra is the conjugate transpose.
fn adjugate(m: &Matrix3<f64>) -> Matrix3<f64> {
    Matrix3::from_fn(|i, j| {
        let (r0, r1) = ((j + 1) % 3, (j + 2) % 3);
        let (c0, c1) = ((i + 1) % 3, (i + 2) % 3);
        m[(r0, c0)] * m[(r1, c1)] - m[(r0, c1)] * m[(r1, c0)]
    })
}

fn check_model(
    poly: &LabelledPolytope,
    params: &CanonicalParameters,
    map: &AffineMap2,
) -> Result<()> {
    let image = poly.transformed(map)?;
    let model = params.model_polytope()?;
    let scale = model.scale();
    for v in model.vertices() {
        let close = image
            .vertices()
            .iter()
            .any(|w| norm(sub(*v, *w)) <= 1e-8 * scale);
        if !close {
            return Err(Error::ClassMismatch(format!(
                "model vertex {v:?} has no counterpart"
            )));
        }
    }
    for f in model.facets() {
        let size = norm(f.normal) + f.offset.abs();
        let close = image
            .facets()
            .iter()
            .any(|g| norm(sub(f.normal, g.normal)) + (f.offset - g.offset).abs() <= 1e-8 * size);
        if !close {
            return Err(Error::ClassMismatch(format!(
                "model label {f:?} has no counterpart"
            )));
        }
    }
    Ok(())
}
