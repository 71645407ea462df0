mod common;

use common::quad2;
use ksoliton::polytope::{CanonicalParameters, QuadClass};
use ksoliton::solver::*;
use ksoliton::verify::*;

fn params(case: QuadClass, t: [f64; 8]) -> CanonicalParameters {
    CanonicalParameters::from_tuple(case, t).unwrap()
}

fn square() -> SolitonSolution {
    solve(&params(
        QuadClass::Parallelogram,
        [0.0, 1.0, 0.0, 1.0, 1.0, -1.0, -1.0, 1.0],
    ))
    .unwrap()
}

fn calabi() -> SolitonSolution {
    solve(&params(
        QuadClass::Trapezoid,
        [1.0, 2.0, 0.0, 1.0, 1.0, -1.0, -1.0, 1.0],
    ))
    .unwrap()
}

fn solved_cases() -> Vec<(&'static str, SolitonSolution)> {
    let family = find_beta_for_family(-1.0, 1.0, 2.0, 3.0, (0.6, 0.7)).unwrap();
    vec![
        ("square", square()),
        (
            "rectangle",
            solve(&params(
                QuadClass::Parallelogram,
                [0.0, 1.0, 0.0, 2.0, 1.0, -1.0, -2.0, 1.0],
            ))
            .unwrap(),
        ),
        ("calabi", calabi()),
        (
            "monotone trapezoid",
            solve(&params(
                QuadClass::Trapezoid,
                [1.0, 2.0, 0.0, 1.0, 2.0, -0.5, -1.0, 1.0],
            ))
            .unwrap(),
        ),
        ("calabi triangle", solve_wpp_calabi(2.0, 1.0, 1.0).unwrap()),
        ("family", solve(&family.params).unwrap()),
        (
            "simplex 2,2/3",
            solve_wpp_orthotoric(2.0, 2.0 / 3.0, None).unwrap().solution,
        ),
        (
            "simplex 3,1/4",
            solve_wpp_orthotoric(3.0, 0.25, None).unwrap().solution,
        ),
    ]
}

fn interior(s: &SolitonSolution, u: f64, v: f64) -> (f64, f64) {
    let [a1, a2] = s.params.alpha;
    let [b1, b2] = s.params.beta;
    (a1 + u * (a2 - a1), b1 + v * (b2 - b1))
}

#[test]
fn square_residual_is_tiny() {
    let r = soliton_residual(&square(), &GridSpec::default()).unwrap();
    assert!(r.pass);
    assert_eq!(r.points, 2500);
    assert!(r.max <= 1e-8, "{:e}", r.max);
}

#[test]
fn calabi_example_passes() {
    let r = soliton_residual(&calabi(), &GridSpec::default()).unwrap();
    assert!(r.pass, "{r:?}");
    assert!(r.max <= 1e-6);
}

#[test]
fn every_solved_case_passes_strict() {
    for (name, s) in solved_cases() {
        let r = soliton_residual(&s, &GridSpec::default().strict()).unwrap();
        assert!(r.pass, "{name}: {r:?}");
        assert_eq!(r.skipped, 0, "{name}");
        assert!(r.boundary.closed_form <= 1e-12, "{name}");
        assert!(r.boundary.derivative <= 1e-5, "{name}");
    }
}

#[test]
fn perturbed_rate_is_caught() {
    for (name, mut s) in solved_cases() {
        s.a[0] += 0.01;
        let r = soliton_residual(&s, &GridSpec::default()).unwrap();
        assert!(!r.pass, "{name}");
        assert!(r.max > 1e-3, "{name}: {:e}", r.max);
    }
}

#[test]
fn non_solution_status_never_passes() {
    let s = solve(&params(
        QuadClass::GenericQuadrilateral,
        [2.0, 3.0, 0.0, 1.0, 1.0, -1.0, -1.0, 1.0],
    ))
    .unwrap();
    let r = soliton_residual(&s, &GridSpec::default()).unwrap();
    assert!(!r.pass);
}

#[test]
fn rows_cover_the_grid() {
    let grid = GridSpec {
        n: 12,
        ..GridSpec::default()
    };
    let (r, rows) = soliton_residual_with_rows(&calabi(), &grid).unwrap();
    assert_eq!(rows.len(), 144);
    assert_eq!(r.points, 144);
    let field = MetricField::from_solution(&calabi()).unwrap();
    for row in &rows {
        assert!(field
            .polytope()
            .defining_values([row.mu1, row.mu2])
            .iter()
            .all(|l| *l > 0.0));
        assert!((row.residual - (row.scal_fd - calabi().scal - 2.0 * row.laplacian)).abs() < 1e-12);
    }
}

#[test]
fn product_matrix_is_diagonal() {
    let s = square();
    let f = MetricField::from_solution(&s).unwrap();
    for &(x, y) in &[(0.2, 0.3), (0.5, 0.5), (0.9, 0.1)] {
        let h = metric_matrix(&f, (x, y)).unwrap();
        assert_eq!(h[0][1], 0.0);
        assert!((h[0][0] - x * (1.0 - x) * 2.0).abs() < 1e-13);
        assert!((h[1][1] - y * (1.0 - y) * 2.0).abs() < 1e-13);
    }
}

#[test]
fn determinant_is_profile_product() {
    for (name, s) in solved_cases() {
        let f = MetricField::from_solution(&s).unwrap();
        for &(u, v) in &[(0.3, 0.6), (0.7, 0.2), (0.5, 0.5)] {
            let (x, y) = interior(&s, u, v);
            let h = metric_matrix(&f, (x, y)).unwrap();
            let det = h[0][0] * h[1][1] - h[0][1] * h[1][0];
            let ab = s.profile_a.value(x) * s.profile_b.value(y);
            assert!((det - ab).abs() <= 1e-12 * (1.0 + ab.abs()), "{name}");
            assert_eq!(h[0][1], h[1][0]);
        }
    }
}

#[test]
fn moment_map_inverts_the_chart() {
    for (name, s) in solved_cases() {
        let f = MetricField::from_solution(&s).unwrap();
        let (x, y) = interior(&s, 0.37, 0.61);
        let mu = f.to_moment(x, y);
        let (x2, y2) = f.from_moment(mu).unwrap();
        assert!((x - x2).abs() < 1e-12 && (y - y2).abs() < 1e-12, "{name}");
        let h = f.h_at(mu).unwrap();
        assert_eq!(h, metric_matrix(&f, (x, y)).unwrap());
    }
}

#[test]
fn both_stencils_agree_with_closed_curvature() {
    for (name, s) in solved_cases() {
        let f = MetricField::from_solution(&s).unwrap();
        let [a1, a2] = s.params.alpha;
        let [b1, b2] = s.params.beta;
        let h = 1e-3 * (a2 - a1).min(b2 - b1);
        for &(u, v) in &[(0.4, 0.6), (0.6, 0.3)] {
            let p = interior(&s, u, v);
            let exact = scalar_curvature_closed(&f, p);
            let chart = scalar_curvature_chart(&f, p, h).unwrap();
            assert!(
                (chart - exact).abs() < 1e-5 * (1.0 + exact.abs()),
                "{name}: {chart} vs {exact}"
            );
            let lap = laplacian_affine_chart(&f, s.a, p, h).unwrap();
            let lap_exact = laplacian_closed(&f, s.a, p);
            assert!(
                (lap - lap_exact).abs() < 1e-5 * (1.0 + lap_exact.abs()),
                "{name}"
            );
            // the closed forms close the equation on solutions
            assert!((exact - s.scal - 2.0 * lap_exact).abs() < 1e-10, "{name}");
        }
    }
    // moment-coordinate stencil where the chart is far from its branch set
    for s in [square(), calabi()] {
        let f = MetricField::from_solution(&s).unwrap();
        let p = interior(&s, 0.45, 0.55);
        let mu = f.to_moment(p.0, p.1);
        let h = f.default_step(mu);
        let fd = scalar_curvature_fd(&f, mu, h).unwrap();
        assert!((fd - scalar_curvature_closed(&f, p)).abs() < 1e-5);
        let lap = laplacian_affine_fd(&f, s.a, mu, h).unwrap();
        assert!((lap - laplacian_closed(&f, s.a, p)).abs() < 1e-6);
    }
}

#[test]
fn curvature_converges_at_second_order() {
    let cases = solved_cases();
    // polynomial profiles are differenced exactly
    for (name, s) in cases.iter().filter(|(n, _)| *n != "square") {
        let f = MetricField::from_solution(s).unwrap();
        let p = interior(s, 0.6, 0.4);
        let mu = f.to_moment(p.0, p.1);
        let h = 8.0 * f.default_step(mu);
        let [e1, e2, ratio] = curvature_convergence(&f, p, h).unwrap();
        assert!(e1 > e2, "{name}");
        assert!((3.6..=4.4).contains(&ratio), "{name}: {ratio}");
    }
}

#[test]
fn average_scalar_matches_quadrature() {
    for (name, s) in solved_cases() {
        let f = MetricField::from_solution(&s).unwrap();
        let [a1, a2] = s.params.alpha;
        let [b1, b2] = s.params.beta;
        // the chart Jacobian is det J
        let jac = |x: f64, y: f64| match s.case {
            QuadClass::Parallelogram => 1.0,
            QuadClass::Trapezoid | QuadClass::CalabiTriangle => x,
            _ => x - y,
        };
        let vol = quad2(jac, (a1, a2), (b1, b2), 1e-13);
        let total = quad2(
            |x, y| scalar_curvature_closed(&f, (x, y)) * jac(x, y),
            (a1, a2),
            (b1, b2),
            1e-12,
        );
        assert!((total / vol - s.scal).abs() < 1e-8, "{name}");
    }
}

#[test]
fn boundary_conditions_hold_on_every_facet() {
    for (name, s) in solved_cases() {
        let b = boundary_conditions(&s, 20).unwrap();
        assert!(b.tangential_positive, "{name}");
        assert!(b.closed_form <= 1e-12, "{name}: {:e}", b.closed_form);
        assert!(b.derivative <= 1e-5, "{name}: {:e}", b.derivative);
        let checked = b
            .facets
            .iter()
            .filter(|f| f.derivative > 0.0 || f.closed_form > 0.0);
        assert!(checked.count() >= 1);
    }
}

#[test]
fn rescaled_profile_breaks_the_first_order_condition() {
    let mut s = calabi();
    let pa = &mut s.profile_a;
    pa.poly = pa.poly.scale(1.1);
    pa.kernel = pa.kernel.scale(1.1);
    pa.kappa *= 1.1;
    let b = boundary_conditions(&s, 20).unwrap();
    assert!(b.closed_form <= 1e-12);
    assert!(b.derivative > 1e-2, "{:e}", b.derivative);
    assert!(!soliton_residual(&s, &GridSpec::default()).unwrap().pass);
}

#[test]
fn calabi_triangle_apex_is_smooth() {
    let s = solve_wpp_calabi(2.0, 1.0, 1.0).unwrap();
    let r = apex_smoothness(&s).unwrap();
    assert!(r.smooth && r.bounded, "{r:?}");
    assert_eq!(r.ray_limits.len(), 8);
    assert!(r.a_over_x.unwrap().abs() < 1e-8);
    let second = s.profile_a.derivative(2, 0.0) / 2.0;
    assert!((r.a_over_x2.unwrap() - second).abs() < 1e-6);
    let v0 = MetricField::from_solution(&s)
        .unwrap()
        .polytope()
        .vertices()[0];
    assert_eq!(r.point, v0);
}

#[test]
fn simplex_corner_is_smooth() {
    let s = solve_wpp_orthotoric(2.0, 0.5, None).unwrap().solution;
    let r = apex_smoothness(&s).unwrap();
    assert!(r.smooth, "{r:?}");
    assert!(r.a_over_x.is_none());
    assert!(r.spread < 1e-6);
}

#[test]
fn apex_needs_a_triangle() {
    assert!(apex_smoothness(&calabi()).is_err());
}

#[test]
fn points_outside_are_rejected() {
    let s = calabi();
    let f = MetricField::from_solution(&s).unwrap();
    assert!(f.h_at([10.0, 10.0]).is_err());
    let mu = f.to_moment(1.0 + 1e-6, 0.5);
    assert!(scalar_curvature_fd(&f, mu, 1e-3).is_err());
}
