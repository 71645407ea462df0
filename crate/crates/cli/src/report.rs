//! The report document and CSV side files.
//!
//! Field names are part of the output format; see the README.

use std::path::Path;

use anyhow::{Context, Result};
use ksoliton::expquad::ExpPolyProfile;
use ksoliton::polytope::{AffineMap2, CanonicalParameters, QuadClass, RationalityReport};
use ksoliton::solver::{SolitonSolution, Status};
use ksoliton::verify::{ResidualReport, ResidualRow};
use serde::Serialize;
use toml::Table;

/// Samples per profile in the report; the CSVs use [`CSV_SAMPLES`].
const REPORT_SAMPLES: usize = 11;
const CSV_SAMPLES: usize = 201;

#[derive(Clone, Debug, Default, Serialize)]
pub struct Report {
    pub command: String,
    pub outcome: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
    pub input: Table,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub classification: Option<ClassSection>,
    /// Same layout as the `[canonical]` input table.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub canonical: Option<CanonicalSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub map: Option<MapSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub solution: Option<SolutionSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub flags: Option<FlagSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual: Option<ResidualSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wpp: Option<WppSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub family: Option<FamilySection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cone: Option<ConeSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sasaki: Option<SasakiSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub profiles: Option<ProfileSection>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub rationality: Vec<RationalRow>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ClassSection {
    pub class: QuadClass,
    pub vertices: Vec<[f64; 2]>,
    pub normals: Vec<[f64; 2]>,
    pub near_degenerate: bool,
    pub min_cross: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub triangle_weights: Option<[f64; 3]>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CanonicalSection {
    pub case: QuadClass,
    pub alpha: [f64; 2],
    pub beta: [f64; 2],
    pub c_alpha: [f64; 2],
    pub c_beta: [f64; 2],
}

impl From<&CanonicalParameters> for CanonicalSection {
    fn from(p: &CanonicalParameters) -> Self {
        CanonicalSection {
            case: p.case,
            alpha: p.alpha,
            beta: p.beta,
            c_alpha: p.c_alpha,
            c_beta: p.c_beta,
        }
    }
}

/// The affine map from input coordinates to the canonical model.
#[derive(Clone, Debug, Serialize)]
pub struct MapSection {
    pub linear: [[f64; 2]; 2],
    pub translation: [f64; 2],
    pub det: f64,
}

impl From<&AffineMap2> for MapSection {
    fn from(m: &AffineMap2) -> Self {
        MapSection {
            linear: m.linear,
            translation: m.translation,
            det: m.det(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SolutionSection {
    pub status: String,
    pub scal: f64,
    pub m: f64,
    pub lambda: f64,
    pub a: [f64; 2],
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a_a: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a_b: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
}

impl From<&SolitonSolution> for SolutionSection {
    fn from(s: &SolitonSolution) -> Self {
        let (a_a, a_b) = match s.status {
            Status::NoOrthotoricSoliton { a_a, a_b } => (Some(a_a), Some(a_b)),
            _ => (None, None),
        };
        SolutionSection {
            status: status_name(&s.status).into(),
            scal: s.scal,
            m: s.m,
            lambda: s.lambda(),
            a: s.a,
            a_a,
            a_b,
            c: s.c,
        }
    }
}

pub fn status_name(s: &Status) -> &'static str {
    match s {
        Status::Soliton => "soliton",
        Status::GeneralizedSoliton => "generalized-soliton",
        Status::NoOrthotoricSoliton { .. } => "no-orthotoric-soliton",
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct FlagSection {
    pub monotone: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub preferred_point: Option<[f64; 2]>,
    /// Alternating vertex sum of `⟨μ, a⟩`; quadrilaterals only.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub equipoise_residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub equipoised: Option<bool>,
    /// Largest component of the soliton-vector defect; monotone only.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub soliton_vector_residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rational: Option<bool>,
    pub delzant: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct RationalRow {
    pub name: String,
    pub value: f64,
    pub numer: i64,
    pub denom: i64,
    pub rational: bool,
}

pub fn rational_rows(r: &RationalityReport) -> Vec<RationalRow> {
    r.values
        .iter()
        .map(|v| RationalRow {
            name: v.name.clone(),
            value: v.value,
            numer: v.numer,
            denom: v.denom,
            rational: v.rational,
        })
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct ResidualSection {
    pub pass: bool,
    pub points: usize,
    pub skipped: usize,
    pub max: f64,
    pub mean: f64,
    pub tol: f64,
    pub positive_definite: bool,
    pub ode: f64,
    pub boundary_closed_form: f64,
    pub boundary_derivative: f64,
    pub tangential_positive: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub apex_smooth: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub apex_spread: Option<f64>,
}

impl From<&ResidualReport> for ResidualSection {
    fn from(r: &ResidualReport) -> Self {
        ResidualSection {
            pass: r.pass,
            points: r.points,
            skipped: r.skipped,
            max: r.max,
            mean: r.mean,
            tol: r.tol,
            positive_definite: r.positive_definite,
            ode: r.ode,
            boundary_closed_form: r.boundary.closed_form,
            boundary_derivative: r.boundary.derivative,
            tangential_positive: r.boundary.tangential_positive,
            apex_smooth: r.apex.as_ref().map(|a| a.smooth),
            apex_spread: r.apex.as_ref().map(|a| a.spread),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct WppSection {
    /// Weights in increasing order.
    pub weights: [f64; 3],
    pub ansatz: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rate_gap: Option<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct FamilySection {
    pub beta: f64,
    pub a1: f64,
    pub a_a: f64,
    pub a_b: f64,
    pub rate_gap: f64,
    /// `(a_A, a_B)` at the two bracket ends.
    pub rates_lo: [f64; 2],
    pub rates_hi: [f64; 2],
}

#[derive(Clone, Debug, Serialize)]
pub struct ConeSection {
    pub shape: [f64; 4],
    pub a1: f64,
    pub basis: [[f64; 4]; 2],
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rays: Option<[[f64; 2]; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub monotone_ray: Option<[f64; 2]>,
    pub samples: Vec<ConeSample>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConeSample {
    pub t: f64,
    pub tuple: [f64; 8],
    pub status: String,
    pub a: [f64; 2],
    pub residual_max: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct SasakiSection {
    pub b: [f64; 3],
    pub dropped: usize,
    pub class: QuadClass,
    pub vertices: Vec<[f64; 2]>,
    pub a_chart: [f64; 3],
    pub monotone: bool,
    pub equipoise_characteristic: f64,
    pub equipoise_base: f64,
    pub equipoised: bool,
    pub regularity: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub continuity: Option<ContinuitySection>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ContinuitySection {
    pub b2: Vec<f64>,
    pub norm_a: Vec<f64>,
    pub decreasing: bool,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ProfileSection {
    pub a: ProfileTable,
    pub b: ProfileTable,
}

#[derive(Clone, Debug, Serialize)]
pub struct ProfileTable {
    pub rate: f64,
    pub t: Vec<f64>,
    pub value: Vec<f64>,
    pub d1: Vec<f64>,
    pub d2: Vec<f64>,
}

impl ProfileTable {
    pub fn sample(p: &ExpPolyProfile, [lo, hi]: [f64; 2], n: usize) -> Self {
        let t: Vec<f64> = (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect();
        ProfileTable {
            rate: p.rate,
            value: t.iter().map(|&x| p.value(x)).collect(),
            d1: t.iter().map(|&x| p.derivative(1, x)).collect(),
            d2: t.iter().map(|&x| p.derivative(2, x)).collect(),
            t,
        }
    }
}

impl ProfileSection {
    pub fn new(s: &SolitonSolution) -> Self {
        ProfileSection {
            a: ProfileTable::sample(&s.profile_a, s.params.alpha, REPORT_SAMPLES),
            b: ProfileTable::sample(&s.profile_b, s.params.beta, REPORT_SAMPLES),
        }
    }
}

impl Report {
    pub fn new(command: &str, input: Table) -> Self {
        Report {
            command: command.into(),
            input,
            ..Report::default()
        }
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).context("serializing report")
    }
}

pub fn write_profile_csvs(dir: &Path, s: &SolitonSolution) -> Result<()> {
    for (name, p, range) in [
        ("profile_A.csv", &s.profile_a, s.params.alpha),
        ("profile_B.csv", &s.profile_b, s.params.beta),
    ] {
        let table = ProfileTable::sample(p, range, CSV_SAMPLES);
        let path = dir.join(name);
        let mut w = csv::Writer::from_path(&path).with_context(|| format!("{}", path.display()))?;
        w.write_record(["t", "value", "d1", "d2"])?;
        for i in 0..table.t.len() {
            w.serialize((table.t[i], table.value[i], table.d1[i], table.d2[i]))?;
        }
        w.flush()?;
    }
    Ok(())
}

pub fn write_residual_csv(dir: &Path, rows: &[ResidualRow]) -> Result<()> {
    let path = dir.join("residual.csv");
    let mut w = csv::Writer::from_path(&path).with_context(|| format!("{}", path.display()))?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}
