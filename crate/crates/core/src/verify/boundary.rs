use serde::{Deserialize, Serialize};

use super::{chart_adjugate, metric_matrix, MetricField, Sym2};
use crate::solver::SolitonSolution;
use crate::Result;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FacetBoundary {
    pub normal: [f64; 2],
    /// Largest `|H(n,·)| / max(1, |H|)` at the samples, `n = u/|u|`.
    pub closed_form: f64,
    /// Largest `|∂_n H(u,u) − 2|u||` along the inward unit normal `n`.
    pub derivative: f64,
    /// `H(t,t) > 0` for the facet direction `t` at every sample.
    pub tangential_positive: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryReport {
    pub facets: Vec<FacetBoundary>,
    pub closed_form: f64,
    pub derivative: f64,
    pub tangential_positive: bool,
}

/// Checks `H(u_k,·) = 0` and `dH(u_k,u_k) = 2u_k` at `samples` points of
/// every edge of the canonical rectangle that maps onto a facet.
///
/// `g = H(u,u)` vanishes along the edge, so its moment gradient there is
/// `adj(J)ᵀ(∂g, 0)/det J` with `∂g` the partial across the edge. That partial
/// is a one-sided difference on `h, 2h, 3h` Richardson-combined with `h/2`,
/// `h = 1e-3` of the shorter side.
pub fn boundary_conditions(s: &SolitonSolution, samples: usize) -> Result<BoundaryReport> {
    let field = MetricField::from_solution(s)?;
    let poly = field.polytope().clone();
    let [a1, a2] = s.params.alpha;
    let [b1, b2] = s.params.beta;
    let h = 1e-3 * (a2 - a1).min(b2 - b1);
    let mut facets: Vec<FacetBoundary> = poly
        .facets()
        .iter()
        .map(|f| FacetBoundary {
            normal: f.normal,
            closed_form: 0.0,
            derivative: 0.0,
            tangential_positive: true,
        })
        .collect();
    // (axis across the edge, edge coordinate, inward sign)
    let edges = [(0, a1, 1.0), (0, a2, -1.0), (1, b1, 1.0), (1, b2, -1.0)];
    for (axis, c, sign) in edges {
        let at = |w: f64| -> (f64, f64) {
            if axis == 0 {
                (c, b1 + w * (b2 - b1))
            } else {
                (a1 + w * (a2 - a1), c)
            }
        };
        let (xm, ym) = at(0.5);
        if chart_adjugate(field.case, xm, ym).1 == 0.0 {
            // collapsed onto a vertex
            continue;
        }
        let mid = field.to_moment(xm, ym);
        let k = (0..poly.len())
            .min_by(|&i, &j| {
                let d = |k: usize| {
                    let f = &poly.facets()[k];
                    f.eval(mid).abs() / f.normal[0].hypot(f.normal[1])
                };
                d(i).total_cmp(&d(j))
            })
            .expect("polytope has facets");
        let u = poly.facets()[k].normal;
        let un = u[0].hypot(u[1]);
        let nrm = [u[0] / un, u[1] / un];
        let report = &mut facets[k];
        for i in 0..samples {
            let (x, y) = at((i as f64 + 0.5) / samples as f64);
            let hp = metric_matrix(&field, (x, y))?;
            let hn = apply(&hp, nrm);
            let size = hp.iter().flatten().fold(1.0_f64, |m, v| m.max(v.abs()));
            report.closed_form = report.closed_form.max(hn[0].hypot(hn[1]) / size);
            let t = [-nrm[1], nrm[0]];
            let ht = apply(&hp, t);
            report.tangential_positive &= t[0] * ht[0] + t[1] * ht[1] > 0.0;
            let g = |d: f64| -> Result<f64> {
                let p = if axis == 0 {
                    (x + sign * d, y)
                } else {
                    (x, y + sign * d)
                };
                let hu = apply(&metric_matrix(&field, p)?, u);
                Ok(u[0] * hu[0] + u[1] * hu[1])
            };
            let one_sided = |h: f64| -> Result<f64> {
                Ok((-5.0 * g(h)? + 8.0 * g(2.0 * h)? - 3.0 * g(3.0 * h)?) / (2.0 * h))
            };
            let dg = sign * (4.0 * one_sided(h / 2.0)? - one_sided(h)?) / 3.0;
            let (adj, det) = chart_adjugate(field.case, x, y);
            let grad = [adj[axis][0] * dg / det, adj[axis][1] * dg / det];
            let dn = grad[0] * nrm[0] + grad[1] * nrm[1];
            report.derivative = report.derivative.max((dn - 2.0 * un).abs());
        }
    }
    Ok(BoundaryReport {
        closed_form: facets.iter().map(|f| f.closed_form).fold(0.0, f64::max),
        derivative: facets.iter().map(|f| f.derivative).fold(0.0, f64::max),
        tangential_positive: facets.iter().all(|f| f.tangential_positive),
        facets,
    })
}

fn apply(m: &Sym2, v: [f64; 2]) -> [f64; 2] {
    [
        m[0][0] * v[0] + m[0][1] * v[1],
        m[1][0] * v[0] + m[1][1] * v[1],
    ]
}
