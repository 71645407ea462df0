use anyhow::{bail, Result};
use clap::ValueEnum;
use ksoliton::polytope::{
    classify_with_hint, delzant_check, equipoised_residual, monotone_check, normalize,
    normalize_ortho_simplex, rationality_parameters, AffineMap2, CanonicalParameters,
    LabelledPolytope, QuadClass,
};
use ksoliton::sasaki::{b2_continuity, s2s3_family, Regularity};
use ksoliton::solver::{
    family_rates, find_beta_for_family, normal_cone, soliton_vector_residual, solve,
    solve_wpp_calabi, solve_wpp_orthotoric, SolitonSolution,
};
use ksoliton::verify::{soliton_residual, soliton_residual_with_rows, GridSpec, ResidualRow};
use ksoliton::Error;

use crate::input::{InputSpec, Spec};
use crate::report::*;

/// Relative tolerance for two WPP weights to count as equal.
const WEIGHT_TOL: f64 = 1e-12;
const EQUIPOISE_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Classify,
    Solve,
    Verify,
    WppCalabi,
    WppOrtho,
    FamilySolve,
    ConeScan,
    SasakiS2s3,
}

impl Command {
    pub fn name(self) -> String {
        self.to_possible_value()
            .map(|v| v.get_name().to_string())
            .unwrap_or_default()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Exit {
    Success = 0,
    Failure = 1,
    Negative = 2,
}

#[derive(Clone, Debug)]
pub struct Options {
    pub grid: GridSpec,
    pub strict: bool,
    /// Residual rows are only collected when CSVs are wanted.
    pub rows: bool,
}

impl Options {
    fn equipoise_tol(&self) -> f64 {
        if self.strict {
            EQUIPOISE_TOL / 2.0
        } else {
            EQUIPOISE_TOL
        }
    }
}

pub struct Outcome {
    pub report: Report,
    pub exit: Exit,
    /// The single solution behind the report, for the profile CSVs.
    pub solution: Option<SolitonSolution>,
    pub rows: Vec<ResidualRow>,
}

impl Outcome {
    fn new(report: Report) -> Self {
        Outcome {
            report,
            exit: Exit::Success,
            solution: None,
            rows: Vec::new(),
        }
    }

    fn finish(mut self, outcome: &str, exit: Exit) -> Self {
        self.report.outcome = outcome.into();
        self.exit = exit;
        self
    }
}

pub fn run(cmd: Command, spec: &Spec, opts: &Options) -> Result<Outcome> {
    let report = Report::new(&cmd.name(), spec.raw.clone());
    let want = |ok: &[&str]| -> Result<()> {
        if ok.contains(&spec.input.variant()) {
            Ok(())
        } else {
            bail!(
                "`{}` needs a [{}] spec, got [{}]",
                cmd.name(),
                ok.join("] or ["),
                spec.input.variant()
            )
        }
    };
    match cmd {
        Command::Classify => {
            want(&["polytope", "canonical"])?;
            classify_cmd(&spec.input, Outcome::new(report))
        }
        Command::Solve | Command::Verify => {
            want(&["polytope", "canonical"])?;
            solve_cmd(
                &spec.input,
                cmd == Command::Verify,
                opts,
                Outcome::new(report),
            )
        }
        Command::WppCalabi | Command::WppOrtho => {
            want(&["wpp"])?;
            let InputSpec::Wpp { weights, scale } = spec.input else {
                unreachable!()
            };
            wpp_cmd(
                weights,
                scale,
                cmd == Command::WppOrtho,
                opts,
                Outcome::new(report),
            )
        }
        Command::FamilySolve => {
            want(&["family"])?;
            let InputSpec::Family {
                r,
                k,
                l,
                p,
                bracket,
            } = spec.input
            else {
                unreachable!()
            };
            family_cmd([r, k, l, p], bracket, opts, Outcome::new(report))
        }
        Command::ConeScan => {
            want(&["cone_scan"])?;
            let InputSpec::ConeScan { shape, a1, samples } = spec.input else {
                unreachable!()
            };
            cone_cmd(shape, a1, samples, opts, Outcome::new(report))
        }
        Command::SasakiS2s3 => {
            want(&["sasaki"])?;
            let InputSpec::Sasaki { b0, b2, continuity } = spec.input else {
                unreachable!()
            };
            sasaki_cmd(b0, b2, continuity, opts, Outcome::new(report))
        }
    }
}

struct Resolved {
    params: CanonicalParameters,
    map: AffineMap2,
    class: Option<ClassSection>,
}

/// Canonical parameters of a polytope or canonical spec.
///
/// A simplex is normalized at the `β` where the two rates agree, so that
/// solving it gives the soliton rather than a rate mismatch.
fn resolve(input: &InputSpec) -> Result<Resolved> {
    match input {
        InputSpec::Canonical(p) => Ok(Resolved {
            params: *p,
            map: AffineMap2::identity(),
            class: None,
        }),
        InputSpec::Polytope {
            vertices,
            normals,
            triangle,
        } => {
            let poly = LabelledPolytope::from_vertices_normals(vertices.clone(), normals)?;
            let c = classify_with_hint(&poly, *triangle)?;
            let (params, map) = if c.class == QuadClass::OrthoSimplex {
                let [t, s] = simplex_ratios(sorted(poly.triangle_weights()?));
                let beta = solve_wpp_orthotoric(t, s, None)?.beta;
                normalize_ortho_simplex(&poly, beta)?
            } else {
                normalize(&poly, c.class)?
            };
            Ok(Resolved {
                params,
                map,
                class: Some(ClassSection {
                    class: c.class,
                    vertices: poly.vertices().to_vec(),
                    normals: poly.facets().iter().map(|f| f.normal).collect(),
                    near_degenerate: c.near_degenerate,
                    min_cross: c.min_cross,
                    triangle_weights: poly.triangle_weights().ok(),
                }),
            })
        }
        _ => unreachable!("checked by the caller"),
    }
}

fn sorted(mut k: [f64; 3]) -> [f64; 3] {
    k.sort_by(f64::total_cmp);
    k
}

/// `t = k₂/k₁ ≥ 1`, `s = k₂/k₃ ≤ 1` for increasing weights.
fn simplex_ratios(k: [f64; 3]) -> [f64; 2] {
    [k[1] / k[0], k[1] / k[2]]
}

fn describe(out: &mut Outcome, params: &CanonicalParameters, map: Option<&AffineMap2>) {
    let r = &mut out.report;
    r.canonical = Some(params.into());
    r.map = map.map(MapSection::from);
    let preferred = monotone_check(params);
    let rationality = rationality_parameters(params).ok();
    r.flags = Some(FlagSection {
        monotone: preferred.is_some(),
        preferred_point: preferred,
        rational: rationality.as_ref().map(|q| q.rational),
        delzant: delzant_check(params).delzant,
        ..FlagSection::default()
    });
    if let Some(q) = rationality {
        r.rationality = rational_rows(&q);
    }
}

fn record_solution(out: &mut Outcome, s: &SolitonSolution, tol: f64) {
    out.report.solution = Some(s.into());
    out.report.profiles = Some(ProfileSection::new(s));
    let flags = out.report.flags.get_or_insert_with(FlagSection::default);
    if !s.params.case.is_triangle() {
        if let Ok(poly) = s.params.model_polytope() {
            if let Ok(e) = equipoised_residual([0.0, s.a[0], s.a[1]], &poly) {
                flags.equipoise_residual = Some(e);
                flags.equipoised = Some(e.abs() <= tol);
            }
        }
    }
    if s.status.is_solution() {
        flags.soliton_vector_residual = soliton_vector_residual(&s.params, s.a)
            .ok()
            .map(|d| d[0].abs().max(d[1].abs()));
    }
    out.solution = Some(s.clone());
}

/// Residual of a solution; returns whether it passed.
fn check(out: &mut Outcome, s: &SolitonSolution, opts: &Options) -> Result<bool> {
    let r = if opts.rows {
        let (r, rows) = soliton_residual_with_rows(s, &opts.grid)?;
        out.rows = rows;
        r
    } else {
        soliton_residual(s, &opts.grid)?
    };
    out.report.residual = Some((&r).into());
    Ok(r.pass)
}

fn classify_cmd(input: &InputSpec, mut out: Outcome) -> Result<Outcome> {
    let r = resolve(input)?;
    describe(&mut out, &r.params, Some(&r.map));
    out.report.classification = r.class;
    Ok(out.finish("classified", Exit::Success))
}

fn solve_cmd(input: &InputSpec, verify: bool, opts: &Options, mut out: Outcome) -> Result<Outcome> {
    let r = resolve(input)?;
    describe(&mut out, &r.params, Some(&r.map));
    out.report.classification = r.class;
    let s = match solve(&r.params) {
        Err(Error::NoSolutionForAnsatz(msg)) => {
            out.report.message = Some(msg);
            return Ok(out.finish("ansatz-violation", Exit::Negative));
        }
        other => other?,
    };
    record_solution(&mut out, &s, opts.equipoise_tol());
    if !s.status.is_solution() {
        return Ok(out.finish("no-orthotoric-soliton", Exit::Negative));
    }
    let pass = check(&mut out, &s, opts)?;
    Ok(match (verify, pass) {
        (true, true) => out.finish("pass", Exit::Success),
        (true, false) => out.finish("fail", Exit::Failure),
        (false, _) => out.finish("solution", Exit::Success),
    })
}

fn verdict(out: Outcome, pass: bool) -> Outcome {
    if pass {
        out.finish("pass", Exit::Success)
    } else {
        out.finish("fail", Exit::Failure)
    }
}

fn wpp_cmd(
    weights: [f64; 3],
    scale: Option<f64>,
    ortho: bool,
    opts: &Options,
    mut out: Outcome,
) -> Result<Outcome> {
    let k = sorted(weights);
    let mut section = WppSection {
        weights: k,
        ansatz: if ortho {
            "ortho-simplex"
        } else {
            "calabi-triangle"
        }
        .into(),
        t: None,
        s: None,
        beta: None,
        a1: None,
        rate_gap: None,
    };
    let s = if ortho {
        let [t, s] = simplex_ratios(k);
        let w = solve_wpp_orthotoric(t, s, scale)?;
        section.t = Some(t);
        section.s = Some(s);
        section.beta = Some(w.beta);
        section.a1 = Some(w.a1);
        section.rate_gap = Some((w.a_a - w.a_b).abs());
        w.solution
    } else {
        let same = |a: f64, b: f64| (a - b).abs() <= WEIGHT_TOL * a.max(b);
        let (l, kk) = if same(k[1], k[2]) {
            (k[0], k[1])
        } else if same(k[0], k[1]) {
            (k[2], k[0])
        } else {
            out.report.wpp = Some(section);
            out.report.message = Some(format!(
                "the Calabi triangle needs two equal weights, got {k:?}"
            ));
            return Ok(out.finish("ansatz-violation", Exit::Negative));
        };
        solve_wpp_calabi(l, kk, scale.unwrap_or(1.0))?
    };
    out.report.wpp = Some(section);
    describe(&mut out, &s.params, None);
    record_solution(&mut out, &s, opts.equipoise_tol());
    let pass = check(&mut out, &s, opts)?;
    Ok(verdict(out, pass))
}

fn family_cmd(
    [r, k, l, p]: [f64; 4],
    bracket: (f64, f64),
    opts: &Options,
    mut out: Outcome,
) -> Result<Outcome> {
    let f = find_beta_for_family(r, k, l, p, bracket)?;
    let ends = |b: f64| family_rates(r, k, l, p, b).map(|(a, c)| [a, c]);
    out.report.family = Some(FamilySection {
        beta: f.beta,
        a1: f.a1,
        a_a: f.a_a,
        a_b: f.a_b,
        rate_gap: (f.a_a - f.a_b).abs(),
        rates_lo: ends(bracket.0)?,
        rates_hi: ends(bracket.1)?,
    });
    describe(&mut out, &f.params, None);
    let s = solve(&f.params)?;
    record_solution(&mut out, &s, opts.equipoise_tol());
    if !s.status.is_solution() {
        return Ok(out.finish("no-orthotoric-soliton", Exit::Negative));
    }
    let pass = check(&mut out, &s, opts)?;
    Ok(verdict(out, pass))
}

fn cone_cmd(
    shape: [f64; 4],
    a1: f64,
    samples: usize,
    opts: &Options,
    mut out: Outcome,
) -> Result<Outcome> {
    let cone = normal_cone(shape, a1)?;
    let mut section = ConeSection {
        shape,
        a1,
        basis: cone.basis,
        rays: cone.rays,
        monotone_ray: cone.monotone_ray,
        samples: Vec::new(),
    };
    if cone.rays.is_none() {
        out.report.cone = Some(section);
        out.report.message = Some("no labels with the orthotoric sign pattern".into());
        return Ok(out.finish("empty-cone", Exit::Negative));
    }
    let mut pass = true;
    for i in 0..samples {
        let t = (i as f64 + 1.0) / (samples as f64 + 1.0);
        let Some(params) = cone.sample(t) else {
            bail!("cone sample at t = {t} has invalid labels");
        };
        let s = solve(&params)?;
        let r = soliton_residual(&s, &opts.grid)?;
        pass &= r.pass;
        section.samples.push(ConeSample {
            t,
            tuple: params.as_tuple(),
            status: status_name(&s.status).into(),
            a: s.a,
            residual_max: r.max,
            pass: r.pass,
        });
    }
    out.report.cone = Some(section);
    Ok(verdict(out, pass))
}

fn sasaki_cmd(
    b0: f64,
    b2: f64,
    continuity: bool,
    opts: &Options,
    mut out: Outcome,
) -> Result<Outcome> {
    let s = s2s3_family(b0, b2, &opts.grid)?;
    let cont = if continuity {
        Some(b2_continuity(b0, &opts.grid)?)
    } else {
        None
    };
    let b = s.characteristic.b;
    out.report.sasaki = Some(SasakiSection {
        b: [b.b0, b.b1, b.b2],
        dropped: s.characteristic.dropped,
        class: s.class,
        vertices: s.characteristic.polytope.vertices().to_vec(),
        a_chart: s.a_chart,
        monotone: s.monotone,
        equipoise_characteristic: s.equipoise.characteristic,
        equipoise_base: s.equipoise.base,
        equipoised: s.equipoise.equipoised,
        regularity: match s.regularity {
            Regularity::Regular => "regular".into(),
            Regularity::QuasiRegular { numer, denom } => format!("quasi-regular {numer}/{denom}"),
            Regularity::Irregular => "irregular".into(),
        },
        continuity: cont.as_ref().map(|c| ContinuitySection {
            b2: c.samples.iter().map(|p| p.0).collect(),
            norm_a: c.samples.iter().map(|p| p.1).collect(),
            decreasing: c.decreasing,
            pass: c.pass,
        }),
    });
    describe(&mut out, &s.params, Some(&s.map));
    record_solution(&mut out, &s.solution, opts.equipoise_tol());
    out.report.residual = Some((&s.residual).into());
    if opts.rows {
        out.rows = soliton_residual_with_rows(&s.solution, &opts.grid)?.1;
    }
    let pass = s.residual.pass && cont.is_none_or(|c| c.pass);
    Ok(verdict(out, pass))
}
