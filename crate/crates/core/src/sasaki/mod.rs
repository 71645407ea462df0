//! Characteristic polytopes of the cone over a base polytope, and the
//! Calabi-type soliton family on `S²×S³`.
//!
//! Affine functions `f₀ + f₁μ₁ + f₂μ₂` on the base are vectors `(f₀,f₁,f₂)`;
//! the cone lives in the dual space, where `ev_μ = (1, μ₁, μ₂)`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::polytope::{
    classify, equipoised_residual, monotone_check, nearest_rational, normalize, AffineMap2,
    CanonicalParameters, Facet, LabelledPolytope, QuadClass,
};
use crate::solver::{solve, SolitonSolution};
use crate::verify::{soliton_residual, GridSpec, ResidualReport};
use crate::{Error, Result};

/// Relative tolerance for vanishing equipoise residuals.
pub const EQUIPOISE_TOL: f64 = 1e-9;

/// `b(μ) = b₀ + b₁μ₁ + b₂μ₂`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReebVector {
    pub b0: f64,
    pub b1: f64,
    pub b2: f64,
}

impl ReebVector {
    pub fn new(b0: f64, b1: f64, b2: f64) -> Self {
        ReebVector { b0, b1, b2 }
    }

    pub fn coeffs(&self) -> [f64; 3] {
        [self.b0, self.b1, self.b2]
    }

    pub fn eval(&self, mu: [f64; 2]) -> f64 {
        self.b0 + self.b1 * mu[0] + self.b2 * mu[1]
    }

    /// Positivity on every vertex of `base`.
    pub fn validate(&self, base: &LabelledPolytope) -> Result<()> {
        if !self.coeffs().iter().all(|c| c.is_finite()) {
            return Err(Error::InvalidReeb(format!(
                "non-finite coefficients {self:?}"
            )));
        }
        for p in base.vertices() {
            let v = self.eval(*p);
            if !(v > 0.0) {
                return Err(Error::InvalidReeb(format!(
                    "b({p:?}) = {v} is not positive"
                )));
            }
        }
        Ok(())
    }
}

/// The slice `{⟨b,y⟩ = 1/2}` of the cone, in an affine chart.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CharacteristicPolytope {
    pub b: ReebVector,
    /// Index of the dropped coordinate; the chart keeps the other two in order.
    pub dropped: usize,
    /// `Ψ_b` of the base vertices, in the cone's coordinates.
    pub images: Vec<[f64; 3]>,
    pub polytope: LabelledPolytope,
}

impl CharacteristicPolytope {
    fn kept(&self) -> [usize; 2] {
        kept(self.dropped)
    }

    /// `Ψ_b(μ) = ev_μ / 2b(μ)`.
    pub fn psi(&self, mu: [f64; 2]) -> [f64; 3] {
        psi(&self.b, mu)
    }

    pub fn to_chart(&self, y: [f64; 3]) -> [f64; 2] {
        let [i, j] = self.kept();
        [y[i], y[j]]
    }

    pub fn from_chart(&self, z: [f64; 2]) -> [f64; 3] {
        let [i, j] = self.kept();
        let b = self.b.coeffs();
        let d = self.dropped;
        let mut y = [0.0; 3];
        y[i] = z[0];
        y[j] = z[1];
        y[d] = (0.5 - b[i] * z[0] - b[j] * z[1]) / b[d];
        y
    }

    /// The linear function `⟨v,·⟩` on the slice, as a chart affine function.
    pub fn restrict(&self, v: [f64; 3]) -> [f64; 3] {
        restrict(&self.b, self.dropped, v)
    }

    /// A linear function on the cone's space restricting to the chart
    /// function `f`; unique up to multiples of `b`.
    pub fn lift(&self, f: [f64; 3]) -> [f64; 3] {
        let [i, j] = self.kept();
        let b = self.b.coeffs();
        let mut v = [2.0 * f[0] * b[0], 2.0 * f[0] * b[1], 2.0 * f[0] * b[2]];
        v[i] += f[1];
        v[j] += f[2];
        v
    }
}

fn kept(dropped: usize) -> [usize; 2] {
    match dropped {
        0 => [1, 2],
        1 => [0, 2],
        _ => [0, 1],
    }
}

fn psi(b: &ReebVector, mu: [f64; 2]) -> [f64; 3] {
    let w = 2.0 * b.eval(mu);
    [1.0 / w, mu[0] / w, mu[1] / w]
}

fn restrict(b: &ReebVector, dropped: usize, v: [f64; 3]) -> [f64; 3] {
    let [i, j] = kept(dropped);
    let b = b.coeffs();
    let d = dropped;
    [
        v[d] / (2.0 * b[d]),
        v[i] - v[d] * b[i] / b[d],
        v[j] - v[d] * b[j] / b[d],
    ]
}

/// `Δ_b` with labels `[L_k]_b`, charted by dropping the coordinate of the
/// largest `|bᵢ|`.
pub fn characteristic_polytope(
    base: &LabelledPolytope,
    b: ReebVector,
) -> Result<CharacteristicPolytope> {
    b.validate(base)?;
    let c = b.coeffs();
    let dropped = (0..3)
        .max_by(|&i, &j| c[i].abs().total_cmp(&c[j].abs()))
        .expect("three coefficients");
    let images: Vec<[f64; 3]> = base.vertices().iter().map(|p| psi(&b, *p)).collect();
    let [i, j] = kept(dropped);
    let vertices = images.iter().map(|y| [y[i], y[j]]).collect();
    let facets = base
        .facets()
        .iter()
        .map(|f| {
            let r = restrict(&b, dropped, [f.offset, f.normal[0], f.normal[1]]);
            Facet {
                normal: [r[1], r[2]],
                offset: r[0],
            }
        })
        .collect();
    Ok(CharacteristicPolytope {
        b,
        dropped,
        images,
        polytope: LabelledPolytope::new(vertices, facets)?,
    })
}

/// Equipoise of `v` on `Δ_b` against equipoise of `v/2b` on the base.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquipoiseCheck {
    /// Alternating sum of `v` over the vertices of `Δ_b`.
    pub characteristic: f64,
    /// Alternating sum of `v/2b` over the base vertices.
    pub base: f64,
    pub equipoised: bool,
    /// Both residuals vanish or neither does.
    pub consistent: bool,
}

/// Compares `Σ(-1)ⁱ v(Ψ_b(pᵢ))` computed in the chart with `Σ(-1)ⁱ v(pᵢ)/2b(pᵢ)`.
pub fn pullback_equipoise_check(
    v: [f64; 3],
    base: &LabelledPolytope,
    b: ReebVector,
) -> Result<EquipoiseCheck> {
    let ch = characteristic_polytope(base, b)?;
    let characteristic = equipoised_residual(ch.restrict(v), &ch.polytope)?;
    let pulled: Vec<f64> = base
        .vertices()
        .iter()
        .map(|p| (v[0] + v[1] * p[0] + v[2] * p[1]) / (2.0 * b.eval(*p)))
        .collect();
    let scale = pulled.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    let base_res: f64 = pulled
        .iter()
        .enumerate()
        .map(|(i, x)| if i % 2 == 0 { -x } else { *x })
        .sum();
    let tol = EQUIPOISE_TOL * (1.0 + scale);
    let (zc, zb) = (characteristic.abs() <= tol, base_res.abs() <= tol);
    Ok(EquipoiseCheck {
        characteristic,
        base: base_res,
        equipoised: zc && zb,
        consistent: zc == zb,
    })
}

/// The Delzant square `[-1,1]²`.
pub fn delzant_square() -> LabelledPolytope {
    LabelledPolytope::from_vertices_normals(
        vec![[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]],
        &[[0.0, 1.0], [-1.0, 0.0], [0.0, -1.0], [1.0, 0.0]],
    )
    .expect("the square is a valid labelled polytope")
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Regularity {
    Regular,
    /// `b₂/b₀ = numer/denom`.
    QuasiRegular {
        numer: i64,
        denom: i64,
    },
    Irregular,
}

/// Regularity of the Reeb vector `(b₀, 0, b₂)` on the square's cone.
///
/// The vertex cones of the slice have orders `|q₀ ∓ q₂|` for the primitive
/// integer direction `(q₀, 0, q₂)`, so only `b₂ = 0` is regular.
pub fn regularity(b0: f64, b2: f64) -> Regularity {
    let (numer, denom, rational) = nearest_rational(b2 / b0, 1_000_000, 1e-9);
    if !rational {
        Regularity::Irregular
    } else if numer == 0 {
        Regularity::Regular
    } else {
        Regularity::QuasiRegular { numer, denom }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct S2S3Solution {
    pub characteristic: CharacteristicPolytope,
    pub class: QuadClass,
    pub params: CanonicalParameters,
    /// Chart of `Δ_b` to the canonical model.
    pub map: AffineMap2,
    pub solution: SolitonSolution,
    /// The soliton vector as an affine function in the chart of `Δ_b`.
    pub a_chart: [f64; 3],
    pub equipoise: EquipoiseCheck,
    /// `Δ_b` is monotone with preferred point `Ψ_b(0)`.
    pub monotone: bool,
    pub regularity: Regularity,
    pub residual: ResidualReport,
}

/// The member `b = (b₀, 0, b₂)` of the family over the Delzant square.
pub fn s2s3_family(b0: f64, b2: f64, grid: &GridSpec) -> Result<S2S3Solution> {
    if !(b0 > b2.abs()) {
        return Err(Error::InvalidReeb(format!(
            "need b0 > |b2|, got b0 = {b0}, b2 = {b2}"
        )));
    }
    let base = delzant_square();
    let b = ReebVector::new(b0, 0.0, b2);
    let ch = characteristic_polytope(&base, b)?;
    let class = classify(&ch.polytope)?;
    let (params, map) = normalize(&ch.polytope, class)?;
    let solution = solve(&params)?;
    // ⟨a, Φ(z)⟩ up to a constant
    let [a1, a2] = solution.a;
    let m = map.linear;
    let a_chart = [
        a1 * map.translation[0] + a2 * map.translation[1],
        a1 * m[0][0] + a2 * m[1][0],
        a1 * m[0][1] + a2 * m[1][1],
    ];
    let equipoise = pullback_equipoise_check(ch.lift(a_chart), &base, b)?;
    let preferred = ch.to_chart(ch.psi([0.0, 0.0]));
    let monotone = monotone_check(&params).is_some_and(|p| {
        let q = map.inverse().apply(p);
        let s = ch.polytope.scale();
        (q[0] - preferred[0]).abs() <= 1e-9 * s && (q[1] - preferred[1]).abs() <= 1e-9 * s
    });
    let residual = soliton_residual(&solution, grid)?;
    Ok(S2S3Solution {
        characteristic: ch,
        class,
        params,
        map,
        solution,
        a_chart,
        equipoise,
        monotone,
        regularity: regularity(b0, b2),
        residual,
    })
}

/// Family members over several `(b₀, b₂)`, in parallel.
pub fn s2s3_sweep(samples: &[(f64, f64)], grid: &GridSpec) -> Vec<Result<S2S3Solution>> {
    samples
        .par_iter()
        .map(|&(b0, b2)| s2s3_family(b0, b2, grid))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ContinuityReport {
    /// `(b₂, |a|)` with `|a|` the norm of the soliton vector's linear part in the chart.
    pub samples: Vec<(f64, f64)>,
    /// `|a|` decreases strictly along the samples.
    pub decreasing: bool,
    pub pass: bool,
}

/// `|a| → 0` along `b₂ ∈ {0.1, 0.01, 0.001}`.
pub fn b2_continuity(b0: f64, grid: &GridSpec) -> Result<ContinuityReport> {
    let b2s = [0.1, 0.01, 0.001];
    let samples: Vec<(f64, f64)> = s2s3_sweep(&b2s.map(|b2| (b0, b2)), grid)
        .into_iter()
        .zip(b2s)
        .map(|(r, b2)| r.map(|s| (b2, s.a_chart[1].hypot(s.a_chart[2]))))
        .collect::<Result<_>>()?;
    let decreasing = samples.windows(2).all(|w| w[1].1 < w[0].1);
    Ok(ContinuityReport {
        pass: decreasing && samples.last().is_some_and(|s| s.1 < 1e-2),
        samples,
        decreasing,
    })
}
