use ksoliton::polytope::{
    classify, classify_with_hint, delzant_check, equipoised_residual, is_equipoised,
    monotone_check, monotone_sides, normalize, normalize_ortho_simplex, rationality_parameters,
    AffineMap2, CanonicalParameters, Facet, LabelledPolytope, QuadClass, TriangleHint,
};
use ksoliton::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn params(case: QuadClass, t: [f64; 8]) -> CanonicalParameters {
    CanonicalParameters::from_tuple(case, t).unwrap()
}

fn kite() -> CanonicalParameters {
    params(
        QuadClass::GenericQuadrilateral,
        [2.0, 3.0, 0.0, 1.0, 1.0, -1.0, -1.0, 1.0],
    )
}

fn random_map(rng: &mut ChaCha8Rng) -> AffineMap2 {
    loop {
        let m = [
            [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)],
            [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)],
        ];
        let det: f64 = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        if det.abs() > 0.3 {
            let t = [rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0)];
            return AffineMap2::new(m, t).unwrap();
        }
    }
}

fn same_point_set(a: &[[f64; 2]], b: &[[f64; 2]], tol: f64) -> bool {
    a.len() == b.len()
        && a.iter().all(|p| {
            b.iter()
                .any(|q| (p[0] - q[0]).abs() <= tol && (p[1] - q[1]).abs() <= tol)
        })
}

fn cross(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

#[test]
fn classify_examples() {
    let square = LabelledPolytope::from_vertices_normals(
        vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]],
        &[[0.0, 1.0], [-1.0, 0.0], [0.0, -1.0], [1.0, 0.0]],
    )
    .unwrap();
    assert_eq!(classify(&square).unwrap(), QuadClass::Parallelogram);

    let trap = LabelledPolytope::from_vertices_normals(
        vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 2.0]],
        &[[0.0, 1.0], [-1.0, 0.0], [-1.0, -1.0], [1.0, 0.0]],
    )
    .unwrap();
    assert_eq!(classify(&trap).unwrap(), QuadClass::Trapezoid);

    let verts = [[2.0, 0.0], [3.0, 0.0], [4.0, 3.0], [3.0, 2.0]];
    // no two edge directions are parallel
    for i in 0..4 {
        for j in i + 1..4 {
            let ei = [
                verts[(i + 1) % 4][0] - verts[i][0],
                verts[(i + 1) % 4][1] - verts[i][1],
            ];
            let ej = [
                verts[(j + 1) % 4][0] - verts[j][0],
                verts[(j + 1) % 4][1] - verts[j][1],
            ];
            assert!(cross(ei, ej).abs() > 0.5);
        }
    }
    let poly = kite().model_polytope().unwrap();
    assert_eq!(poly.vertices(), &verts);
    assert_eq!(classify(&poly).unwrap(), QuadClass::GenericQuadrilateral);
}

#[test]
fn near_parallel_edges_are_flagged() {
    let eps = 1e-7;
    let poly = LabelledPolytope::from_vertices_normals(
        vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0 + eps], [0.0, 1.0]],
        &[
            [0.0, 1.0],
            [-1.0, 0.0],
            [-eps, 1.0].map(|v: f64| -v),
            [1.0, 0.0],
        ],
    )
    .unwrap();
    let c = classify_with_hint(&poly, TriangleHint::Auto).unwrap();
    assert_eq!(c.class, QuadClass::Trapezoid);
    assert!(c.near_degenerate);

    let tiny = 1e-12;
    let poly = LabelledPolytope::from_vertices_normals(
        vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0 + tiny], [0.0, 1.0]],
        &[[0.0, 1.0], [-1.0, 0.0], [tiny, -1.0], [1.0, 0.0]],
    )
    .unwrap();
    assert_eq!(classify(&poly).unwrap(), QuadClass::Parallelogram);
}

#[test]
fn triangle_classification_follows_weights() {
    let tri = CanonicalParameters::calabi_triangle(1.0, [0.0, 1.0], -2.0, [-1.0, 1.0]).unwrap();
    let poly = tri.model_polytope().unwrap();
    // weights (l, k, k) with -l C_a2 = k C_b2: l = 1, k = 2
    let mut w = poly.triangle_weights().unwrap();
    w.sort_by(f64::total_cmp);
    assert!((w[0] - 1.0).abs() < 1e-14 && (w[1] - 2.0).abs() < 1e-14 && (w[2] - 2.0).abs() < 1e-14);
    assert_eq!(classify(&poly).unwrap(), QuadClass::CalabiTriangle);
    let c = classify_with_hint(&poly, TriangleHint::OrthoSimplex).unwrap();
    assert_eq!(c.class, QuadClass::OrthoSimplex);

    let simplex = CanonicalParameters::ortho_simplex(0.0, 1.0, -1.0, -0.25).unwrap();
    assert_eq!(
        classify(&simplex.model_polytope().unwrap()).unwrap(),
        QuadClass::OrthoSimplex
    );
}

#[test]
fn labels_vanish_on_model_facets() {
    let models = [
        params(
            QuadClass::Parallelogram,
            [0.0, 1.0, 0.0, 2.0, 1.0, -1.0, -2.0, 1.0],
        ),
        params(
            QuadClass::Trapezoid,
            [1.0, 2.0, 0.0, 1.0, 1.0, -1.0, -1.0, 1.0],
        ),
        kite(),
        CanonicalParameters::calabi_triangle(1.0, [0.0, 1.0], -2.0, [-1.0, 1.0]).unwrap(),
        CanonicalParameters::ortho_simplex(0.3, 2.0, -1.0, -0.7).unwrap(),
    ];
    for m in models {
        let poly = m.model_polytope().unwrap();
        let n = poly.len();
        for (k, f) in poly.facets().iter().enumerate() {
            for v in [poly.vertices()[k], poly.vertices()[(k + 1) % n]] {
                assert!(f.eval(v).abs() <= 1e-12 * poly.scale(), "{:?}", m.case);
            }
        }
    }
}

#[test]
fn normalize_rectangle_example() {
    let poly = LabelledPolytope::from_vertices_normals(
        vec![[0.0, 0.0], [1.0, 0.0], [1.0, 2.0], [0.0, 2.0]],
        &[[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]],
    )
    .unwrap();
    let (p, map) = normalize(&poly, QuadClass::Parallelogram).unwrap();
    assert_eq!(p.alpha, [0.0, 1.0]);
    assert_eq!(p.beta, [0.0, 2.0]);
    assert_eq!(p.c_alpha, [1.0, -1.0]);
    assert_eq!(p.c_beta, [-1.0, 1.0]);
    assert!(map.max_deviation(&AffineMap2::identity()) < 1e-15);
}

#[test]
fn normalize_calabi_example() {
    // sigma-preimage of the trapezoid is [1,2]x[0,1]
    let poly = LabelledPolytope::from_vertices_normals(
        vec![[1.0, 0.0], [2.0, 0.0], [2.0, 2.0], [1.0, 1.0]],
        &[[1.0, 0.0], [-2.0, 0.0], [0.0, 1.0], [1.0, -1.0]],
    )
    .unwrap();
    for v in poly.vertices() {
        let (x, y) = (v[0], v[1] / v[0]);
        assert!((1.0..=2.0).contains(&x) && (0.0..=1.0).contains(&y));
    }
    let (p, map) = normalize(&poly, QuadClass::Trapezoid).unwrap();
    let want = [1.0, 2.0, 0.0, 1.0, 1.0, -1.0, -1.0, 1.0];
    for (a, b) in p.as_tuple().iter().zip(want) {
        assert!((a - b).abs() < 1e-14);
    }
    assert!(map.max_deviation(&AffineMap2::identity()) < 1e-14);
}

/// `Φ⁻¹(model)` reproduces the input, and `Φ∘M` is an automorphism between models.
fn check_round_trip(model: &CanonicalParameters, m: &AffineMap2) -> CanonicalParameters {
    let input = model.model_polytope().unwrap().transformed(m).unwrap();
    let (found, phi) = normalize(&input, model.case).unwrap();
    let back: Vec<[f64; 2]> = found
        .model_vertices()
        .iter()
        .map(|&v| phi.inverse().apply(v))
        .collect();
    assert!(same_point_set(
        &back,
        input.vertices(),
        1e-10 * input.scale()
    ));
    let auto = phi.compose(m);
    let image = model.model_polytope().unwrap().transformed(&auto).unwrap();
    assert!(same_point_set(
        image.vertices(),
        &found.model_vertices(),
        1e-9 * image.scale()
    ));
    for f in found.model_facets() {
        let hit = image.facets().iter().any(|g: &Facet| {
            (f.normal[0] - g.normal[0]).abs()
                + (f.normal[1] - g.normal[1]).abs()
                + (f.offset - g.offset).abs()
                <= 1e-8 * (1.0 + f.offset.abs())
        });
        assert!(hit, "label {f:?} missing");
    }
    found
}

#[test]
fn generic_normalization_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let model = params(
        QuadClass::GenericQuadrilateral,
        [2.0, 3.0, 0.0, 1.0, 1.5, -0.5, -2.0, 1.0],
    );
    for _ in 0..50 {
        let m = random_map(&mut rng);
        let found = check_round_trip(&model, &m);
        // γ ↦ λγ + d with λ > 0 relates the two parameter sets
        let g0 = [0.0, 1.0, 2.0, 3.0];
        let g1 = [found.beta[0], found.beta[1], found.alpha[0], found.alpha[1]];
        let lam = (g1[3] - g1[0]) / 3.0;
        assert!(lam > 0.0);
        for i in 0..4 {
            assert!((g1[i] - (lam * g0[i] + g1[0])).abs() < 1e-9 * (1.0 + g1[i].abs()));
        }
    }
}

#[test]
fn model_input_normalizes_to_itself() {
    let (p, map) = normalize(
        &kite().model_polytope().unwrap(),
        QuadClass::GenericQuadrilateral,
    )
    .unwrap();
    for (a, b) in p.as_tuple().iter().zip(kite().as_tuple()) {
        assert!((a - b).abs() < 1e-12, "{:?}", p.as_tuple());
    }
    assert!(map.max_deviation(&AffineMap2::identity()) < 1e-12);
}

#[test]
fn parallelogram_and_trapezoid_round_trips() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let rect = params(
        QuadClass::Parallelogram,
        [0.0, 1.0, 0.0, 2.0, 1.0, -3.0, -2.0, 1.0],
    );
    let trap = params(
        QuadClass::Trapezoid,
        [1.0, 2.5, 0.5, 1.5, 0.7, -1.1, -1.0, 1.0],
    );
    for _ in 0..50 {
        let m = random_map(&mut rng);
        check_round_trip(&rect, &m);
        let t = check_round_trip(&trap, &m);
        // the trapezoid model is fixed up to shear and dilation: ratios survive
        assert!((t.alpha[1] / t.alpha[0] - 2.5).abs() < 1e-9);
        assert!((t.c_beta[1] / t.c_beta[0] + 1.0).abs() < 1e-9);
    }
}

#[test]
fn triangle_normalizations() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let tri = CanonicalParameters::calabi_triangle(1.0, [0.0, 1.0], -2.0, [-1.5, 1.5]).unwrap();
    let simplex = CanonicalParameters::ortho_simplex(0.3, 2.0, -1.0, -0.7).unwrap();
    for _ in 0..20 {
        let m = random_map(&mut rng);
        let input = tri.model_polytope().unwrap().transformed(&m).unwrap();
        let (p, _) = normalize(&input, QuadClass::CalabiTriangle).unwrap();
        for (a, b) in p.as_tuple().iter().zip(tri.as_tuple()) {
            assert!(*a == b || (a - b).abs() < 1e-9, "{:?}", p.as_tuple());
        }
        let input = simplex.model_polytope().unwrap().transformed(&m).unwrap();
        let (p, phi) = normalize_ortho_simplex(&input, 0.3).unwrap();
        for (a, b) in p.as_tuple().iter().zip(simplex.as_tuple()) {
            assert!((a - b).abs() < 1e-9, "{:?}", p.as_tuple());
        }
        assert!(phi.compose(&m).max_deviation(&AffineMap2::identity()) < 1e-9);
    }
}

#[test]
fn normalization_rejects_wrong_class() {
    let poly = kite().model_polytope().unwrap();
    assert!(matches!(
        normalize(&poly, QuadClass::Trapezoid),
        Err(Error::ClassMismatch(_))
    ));
    assert!(matches!(
        normalize(&poly, QuadClass::CalabiTriangle),
        Err(Error::ClassMismatch(_))
    ));
}

#[test]
fn monotone_examples() {
    let square = params(
        QuadClass::Parallelogram,
        [0.0, 1.0, 0.0, 1.0, 1.0, -1.0, -1.0, 1.0],
    );
    assert_eq!(monotone_check(&square), Some([0.5, 0.5]));

    let calabi = params(
        QuadClass::Trapezoid,
        [1.0, 2.0, 0.0, 1.0, 1.0, -1.0, -1.0, 1.0],
    );
    let (lhs, rhs) = monotone_sides(&calabi).unwrap();
    assert!((lhs - 2.5).abs() < 1e-15 && (rhs - 2.0).abs() < 1e-15);
    assert_eq!(monotone_check(&calabi), None);

    let calabi = params(
        QuadClass::Trapezoid,
        [1.0, 3.0, 0.0, 1.0, 1.0, -1.0 / 3.0, -1.0, 1.0],
    );
    let (lhs, rhs) = monotone_sides(&calabi).unwrap();
    assert!((lhs - 2.0).abs() < 1e-14 && (rhs - 2.0).abs() < 1e-14);
    assert!(monotone_check(&calabi).is_some());

    let (lhs, rhs) = monotone_sides(&kite()).unwrap();
    assert!((lhs - 8.0).abs() < 1e-14 && (rhs - 8.0).abs() < 1e-14);
    let p = monotone_check(&kite()).unwrap();
    // defining functions written in orthotoric coordinates L = C (γ - x)(y - γ)
    let disc = (p[0] * p[0] - 4.0 * p[1]).sqrt();
    let (x, y) = ((p[0] + disc) / 2.0, (p[0] - disc) / 2.0);
    let k = kite();
    let l: Vec<f64> = [
        (k.alpha[0], k.c_alpha[0]),
        (k.alpha[1], k.c_alpha[1]),
        (k.beta[0], k.c_beta[0]),
        (k.beta[1], k.c_beta[1]),
    ]
    .iter()
    .map(|(g, c)| c * (g - x) * (y - g))
    .collect();
    for v in &l {
        assert!((v - l[0]).abs() <= 1e-10 * l[0].abs(), "{l:?}");
    }
}

#[test]
fn equipoise_examples() {
    let square = params(
        QuadClass::Parallelogram,
        [0.0, 1.0, 0.0, 1.0, 1.0, -1.0, -1.0, 1.0],
    )
    .model_polytope()
    .unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..20 {
        let f = [
            rng.gen_range(-3.0..3.0),
            rng.gen_range(-3.0..3.0),
            rng.gen_range(-3.0..3.0),
        ];
        assert!(is_equipoised(f, &square, 1e-12).unwrap());
    }
    let trap = params(
        QuadClass::Trapezoid,
        [1.0, 2.0, 0.0, 1.0, 1.0, -1.0, -1.0, 1.0],
    )
    .model_polytope()
    .unwrap();
    assert_eq!(
        trap.vertices(),
        &[[1.0, 0.0], [2.0, 0.0], [2.0, 2.0], [1.0, 1.0]]
    );
    assert_eq!(equipoised_residual([0.0, 1.0, 0.0], &trap).unwrap(), 0.0);
    assert_eq!(equipoised_residual([0.0, 0.0, 1.0], &trap).unwrap(), -1.0);
    let tri = CanonicalParameters::calabi_triangle(1.0, [0.0, 1.0], -2.0, [-1.0, 1.0])
        .unwrap()
        .model_polytope()
        .unwrap();
    assert!(matches!(
        equipoised_residual([0.0, 1.0, 0.0], &tri),
        Err(Error::NotQuadrilateral(3))
    ));
}

#[test]
fn equipoise_is_affinely_invariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let base = kite().model_polytope().unwrap();
    // the alternating sum of the kite vertices is zero in μ₁, so f = μ₁ + c is equipoised
    let v = base.vertices();
    let alt = |i: usize| v[1][i] - v[0][i] - v[2][i] + v[3][i];
    assert_eq!(alt(0), 0.0);
    for _ in 0..30 {
        let m = random_map(&mut rng);
        let img = base.transformed(&m).unwrap();
        // pull back f(μ) = μ₁ along m⁻¹: f∘m⁻¹(q) = ⟨row 0 of M⁻¹, q⟩ + t'₀
        let inv = m.inverse();
        let f = [inv.translation[0], inv.linear[0][0], inv.linear[0][1]];
        assert!(is_equipoised(f, &img, 1e-12).unwrap());
        let g = [inv.translation[1], inv.linear[1][0], inv.linear[1][1]];
        assert!(!is_equipoised(g, &img, 1e-9).unwrap());
        // relabel s1<->s3, s2<->s4
        let r = equipoised_residual(g, &img).unwrap();
        let rot: Vec<[f64; 2]> = (0..4).map(|i| img.vertices()[(i + 2) % 4]).collect();
        let img2 = LabelledPolytope::new(rot, img.facets().to_vec()).unwrap();
        assert!((equipoised_residual(g, &img2).unwrap() - r).abs() < 1e-12);
    }
}

#[test]
fn rationality_examples() {
    let square = params(
        QuadClass::Parallelogram,
        [0.0, 1.0, 0.0, 1.0, 1.0, -1.0, -1.0, 1.0],
    );
    let r = rationality_parameters(&square).unwrap();
    assert_eq!((r.get("p"), r.get("k")), (Some(1.0), Some(1.0)));
    assert!(r.rational);
    assert!(delzant_check(&square).delzant);

    let ortho = params(
        QuadClass::GenericQuadrilateral,
        [1.0, 3.0, 0.0, 0.6, 1.2, -0.2, -1.2, 1.0],
    );
    let r = rationality_parameters(&ortho).unwrap();
    assert!(r.rational);
    let got: Vec<(i64, i64)> = r.values.iter().map(|v| (v.numer, v.denom)).collect();
    assert_eq!(got, vec![(-1, 1), (3, 1), (1, 1), (2, 1)]);
    // alpha = rβ/(β(r-1)+1) at r = -1, β = 0.6
    assert!((-0.6 / (0.6 * -2.0 + 1.0) - 3.0f64).abs() < 1e-14);

    // C_b2 = -C_b1 and (β₂-β₁)C_b2 = -α₂C_a2 = α₁C_a1
    let hirz = params(
        QuadClass::Trapezoid,
        [1.0, 2.0, 0.0, 1.0, 1.0, -0.5, -1.0, 1.0],
    );
    let r = rationality_parameters(&hirz).unwrap();
    assert_eq!(
        (r.get("p"), r.get("k"), r.get("l")),
        (Some(1.0), Some(1.0), Some(1.0))
    );
    assert!(delzant_check(&hirz).delzant);

    let irrational = params(
        QuadClass::Parallelogram,
        [
            0.0,
            1.0,
            0.0,
            1.0,
            1.0,
            -std::f64::consts::SQRT_2,
            -1.0,
            1.0,
        ],
    );
    // denominators up to 10^6 approximate anything to 1e-9, so only the size of q tells
    let r = rationality_parameters(&irrational).unwrap();
    let k = r.values.iter().find(|v| v.name == "k").unwrap();
    assert!(k.denom > 1000);
    assert!(!delzant_check(&irrational).delzant);
}

#[test]
fn delzant_examples() {
    let sq = params(
        QuadClass::Parallelogram,
        [0.0, 1.0, 0.0, 1.0, 1.0, -2.0, -1.0, 1.0],
    );
    assert!(!delzant_check(&sq).delzant);
    let k = delzant_check(&kite());
    assert!(!k.delzant);
    assert!(k.note.is_some());
    // p = 1, k = l = 2 is the second Hirzebruch surface
    let h2 = params(
        QuadClass::Trapezoid,
        [1.0, 2.0, 0.0, 1.0, 0.5, -0.25, -1.0, 1.0],
    );
    assert!(delzant_check(&h2).delzant);
    // k != l
    let bad = params(
        QuadClass::Trapezoid,
        [1.0, 2.0, 0.0, 1.0, 0.5, -0.5, -1.0, 1.0],
    );
    assert!(!delzant_check(&bad).delzant);
}
