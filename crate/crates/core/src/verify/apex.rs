use serde::{Deserialize, Serialize};

use super::MetricField;
use crate::polytope::QuadClass;
use crate::solver::SolitonSolution;
use crate::{Error, Result};

const RAYS: usize = 8;
/// Halvings of the ray radius.
const RAY_STEPS: usize = 10;
/// Halvings of `x` for the profile limits.
const PROFILE_STEPS: std::ops::Range<i32> = 4..21;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ApexReport {
    /// Moment point of the collapsed facet.
    pub point: [f64; 2],
    /// Extrapolated `lim A(x)/x` and `lim A(x)/x²` as `x → 0⁺` (Calabi triangle).
    pub a_over_x: Option<f64>,
    pub a_over_x2: Option<f64>,
    /// Extrapolated `(H₁₁, H₁₂, H₂₂)` along each ray.
    pub ray_limits: Vec<[f64; 3]>,
    /// Largest spread of a limit across rays.
    pub spread: f64,
    pub bounded: bool,
    pub smooth: bool,
}

/// Limits of `H` into the collapsed facet of a triangle.
///
/// Rays leave the point at angles `φ(2j+1)/16`, `j < 8`, measured from one
/// boundary edge across the opening `φ`; limits are first-order Richardson
/// extrapolations over `r = r₀2^{-k}`. A limit is consistent when its spread
/// over the rays is at most `1e-4·(1 + |limit|)`.
pub fn apex_smoothness(s: &SolitonSolution) -> Result<ApexReport> {
    let field = MetricField::from_solution(s)?;
    let poly = field.polytope();
    let v = poly.vertices();
    let p = &s.params;
    let (point, next, prev) = match s.case {
        QuadClass::CalabiTriangle => (v[0], v[1], v[2]),
        // (β, β) sits inside the edge from σ(1, β) to σ(β, −1)
        QuadClass::OrthoSimplex => (field.to_moment(p.alpha[0], p.alpha[0]), v[0], v[2]),
        _ => {
            return Err(Error::ClassMismatch(
                "apex checks apply to triangles only".into(),
            ))
        }
    };
    let unit = |q: [f64; 2]| {
        let d = [q[0] - point[0], q[1] - point[1]];
        let n = d[0].hypot(d[1]);
        ([d[0] / n, d[1] / n], n)
    };
    let (e1, l1) = unit(next);
    let (e2, l2) = unit(prev);
    let opening = (e1[0] * e2[1] - e1[1] * e2[0])
        .atan2(e1[0] * e2[0] + e1[1] * e2[1])
        .rem_euclid(std::f64::consts::TAU);
    let r0 = 0.05 * l1.min(l2);
    let mut ray_limits = Vec::with_capacity(RAYS);
    let mut bounded = true;
    for j in 0..RAYS {
        let th = opening * (2 * j + 1) as f64 / (4 * RAYS) as f64;
        let (c, sn) = (th.cos(), th.sin());
        let d = [c * e1[0] - sn * e1[1], sn * e1[0] + c * e1[1]];
        let mut last = [[0.0; 3]; 2];
        for k in 0..=RAY_STEPS {
            let r = r0 * 0.5_f64.powi(k as i32);
            let h = field.h_at([point[0] + r * d[0], point[1] + r * d[1]])?;
            let e = [h[0][0], h[0][1], h[1][1]];
            bounded &= e.iter().all(|x| x.is_finite() && x.abs() < 1e8);
            last = [last[1], e];
        }
        ray_limits.push(std::array::from_fn(|i| 2.0 * last[1][i] - last[0][i]));
    }
    let mut spread = 0.0_f64;
    let mut consistent = true;
    for i in 0..3 {
        let vals = ray_limits.iter().map(|l| l[i]);
        let lo = vals.clone().fold(f64::INFINITY, f64::min);
        let hi = vals.clone().fold(f64::NEG_INFINITY, f64::max);
        let mid = 0.5 * (lo + hi);
        spread = spread.max(hi - lo);
        consistent &= hi - lo <= 1e-4 * (1.0 + mid.abs());
    }
    let (a_over_x, a_over_x2, profile_ok) = if s.case == QuadClass::CalabiTriangle {
        let (l1, ok1) = profile_limit(&field, p.alpha[1], 1);
        let (l2, ok2) = profile_limit(&field, p.alpha[1], 2);
        (Some(l1), Some(l2), ok1 && ok2)
    } else {
        (None, None, true)
    };
    Ok(ApexReport {
        point,
        a_over_x,
        a_over_x2,
        spread,
        bounded,
        smooth: bounded && consistent && profile_ok,
        ray_limits,
    })
}

/// Richardson limit of `A(x)/x^power` along `x = x₀2^{-k}` and whether the
/// last two extrapolates agree.
fn profile_limit(field: &MetricField, x0: f64, power: i32) -> (f64, bool) {
    let ratio = |k: i32| {
        let x = x0 * 0.5_f64.powi(k);
        field.a.value(x) / x.powi(power)
    };
    let rich: Vec<f64> = PROFILE_STEPS
        .map(|k| 2.0 * ratio(k + 1) - ratio(k))
        .collect();
    let n = rich.len();
    let (l, prev) = (rich[n - 1], rich[n - 2]);
    (
        l,
        l.is_finite() && (l - prev).abs() <= 1e-6 * (1.0 + l.abs()),
    )
}
