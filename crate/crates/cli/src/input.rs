//! Input spec files: a TOML document with exactly one variant table.
//!
//! Numbers are TOML integers or floats, or strings holding `"p/q"`, an
//! integer, a decimal, or `"inf"`.

use std::fmt;

use ksoliton::polytope::{parse_rational, CanonicalParameters, QuadClass, TriangleHint};
use num_traits::ToPrimitive;
use toml::{Table, Value};

const VARIANTS: [&str; 6] = [
    "polytope",
    "canonical",
    "wpp",
    "sasaki",
    "family",
    "cone_scan",
];

#[derive(Clone, Debug, PartialEq)]
pub enum InputSpec {
    Polytope {
        vertices: Vec<[f64; 2]>,
        normals: Vec<[f64; 2]>,
        triangle: TriangleHint,
    },
    Canonical(CanonicalParameters),
    Wpp {
        weights: [f64; 3],
        /// `c` for the Calabi triangle, `C_β` for the simplex.
        scale: Option<f64>,
    },
    Sasaki {
        b0: f64,
        b2: f64,
        continuity: bool,
    },
    Family {
        r: f64,
        k: f64,
        l: f64,
        p: f64,
        bracket: (f64, f64),
    },
    ConeScan {
        shape: [f64; 4],
        a1: f64,
        samples: usize,
    },
}

impl InputSpec {
    pub fn variant(&self) -> &'static str {
        match self {
            InputSpec::Polytope { .. } => "polytope",
            InputSpec::Canonical(_) => "canonical",
            InputSpec::Wpp { .. } => "wpp",
            InputSpec::Sasaki { .. } => "sasaki",
            InputSpec::Family { .. } => "family",
            InputSpec::ConeScan { .. } => "cone_scan",
        }
    }
}

/// Every problem found in a spec, one `path: message` per line.
#[derive(Debug)]
pub struct InputError(pub Vec<String>);

impl fmt::Display for InputError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid spec:")?;
        for e in &self.0 {
            write!(f, "\n  {e}")?;
        }
        Ok(())
    }
}

impl std::error::Error for InputError {}

#[derive(Default)]
struct Errors(Vec<String>);

impl Errors {
    fn at(&mut self, path: &str, msg: impl fmt::Display) {
        self.0.push(format!("{path}: {msg}"));
    }
}

/// Parsed spec plus the raw table, echoed into reports.
#[derive(Clone, Debug)]
pub struct Spec {
    pub raw: Table,
    pub input: InputSpec,
}

pub fn parse(text: &str) -> Result<Spec, InputError> {
    let raw: Table = text
        .parse()
        .map_err(|e: toml::de::Error| InputError(vec![e.to_string().trim_end().to_string()]))?;
    let mut errs = Errors::default();
    for key in raw.keys() {
        if !VARIANTS.contains(&key.as_str()) {
            errs.at(
                key,
                format!("unknown section, expected one of {}", VARIANTS.join(", ")),
            );
        }
    }
    let present: Vec<&str> = VARIANTS
        .iter()
        .copied()
        .filter(|k| raw.contains_key(*k))
        .collect();
    let input = match present.as_slice() {
        [one] => match raw[*one].as_table() {
            Some(t) => variant(one, t, &mut errs),
            None => {
                errs.at(one, "must be a table");
                None
            }
        },
        [] => {
            errs.at("(root)", format!("expected one of {}", VARIANTS.join(", ")));
            None
        }
        many => {
            errs.at(
                "(root)",
                format!("exactly one variant allowed, found {}", many.join(", ")),
            );
            None
        }
    };
    match input {
        Some(input) if errs.0.is_empty() => Ok(Spec { raw, input }),
        _ => Err(InputError(errs.0)),
    }
}

fn variant(name: &str, t: &Table, e: &mut Errors) -> Option<InputSpec> {
    let path = |k: &str| format!("{name}.{k}");
    let allowed: &[&str] = match name {
        "polytope" => &["vertices", "normals", "triangle"],
        "canonical" => &["case", "alpha", "beta", "c_alpha", "c_beta"],
        "wpp" => &["weights", "scale"],
        "sasaki" => &["b0", "b2", "continuity"],
        "family" => &["r", "k", "l", "p", "bracket"],
        _ => &["shape", "a1", "samples"],
    };
    for key in t.keys() {
        if !allowed.contains(&key.as_str()) {
            e.at(&path(key), "unknown field");
        }
    }
    let req = |k: &str, e: &mut Errors| {
        let v = t.get(k);
        if v.is_none() {
            e.at(&path(k), "missing field");
        }
        v
    };
    match name {
        "polytope" => {
            let vertices = req("vertices", e).and_then(|v| points(v, &path("vertices"), e));
            let normals = req("normals", e).and_then(|v| points(v, &path("normals"), e));
            let triangle = match t.get("triangle").map(|v| v.as_str()) {
                None | Some(Some("auto")) => Some(TriangleHint::Auto),
                Some(Some("calabi-triangle")) => Some(TriangleHint::CalabiTriangle),
                Some(Some("ortho-simplex")) => Some(TriangleHint::OrthoSimplex),
                _ => {
                    e.at(
                        &path("triangle"),
                        "expected \"auto\", \"calabi-triangle\" or \"ortho-simplex\"",
                    );
                    None
                }
            };
            Some(InputSpec::Polytope {
                vertices: vertices?,
                normals: normals?,
                triangle: triangle?,
            })
        }
        "canonical" => {
            let case = req("case", e).and_then(|v| {
                let c = v.clone().try_into::<QuadClass>();
                if c.is_err() {
                    e.at(
                        &path("case"),
                        "expected parallelogram, trapezoid, generic-quadrilateral, calabi-triangle or ortho-simplex",
                    );
                }
                c.ok()
            });
            let pair = |k: &str, e: &mut Errors| req(k, e).and_then(|v| array::<2>(v, &path(k), e));
            let alpha = pair("alpha", e);
            let beta = pair("beta", e);
            let c_alpha = pair("c_alpha", e);
            let c_beta = pair("c_beta", e);
            let p = CanonicalParameters {
                case: case?,
                alpha: alpha?,
                beta: beta?,
                c_alpha: c_alpha?,
                c_beta: c_beta?,
            };
            if let Err(err) = p.validate() {
                e.at(name, err);
                return None;
            }
            Some(InputSpec::Canonical(p))
        }
        "wpp" => {
            let weights = req("weights", e).and_then(|v| array::<3>(v, &path("weights"), e));
            if let Some(w) = weights {
                if w.iter().any(|k| !(*k > 0.0 && k.is_finite())) {
                    e.at(&path("weights"), "weights must be positive");
                }
            }
            let scale = t.get("scale").map(|v| number(v, &path("scale"), e));
            Some(InputSpec::Wpp {
                weights: weights?,
                scale: match scale {
                    Some(s) => Some(s?),
                    None => None,
                },
            })
        }
        "sasaki" => {
            let b0 = req("b0", e).and_then(|v| number(v, &path("b0"), e));
            let b2 = req("b2", e).and_then(|v| number(v, &path("b2"), e));
            let continuity = match t.get("continuity") {
                None => Some(true),
                Some(Value::Boolean(b)) => Some(*b),
                Some(_) => {
                    e.at(&path("continuity"), "expected a boolean");
                    None
                }
            };
            Some(InputSpec::Sasaki {
                b0: b0?,
                b2: b2?,
                continuity: continuity?,
            })
        }
        "family" => {
            let num = |k: &str, e: &mut Errors| req(k, e).and_then(|v| number(v, &path(k), e));
            let r = num("r", e);
            let k = num("k", e);
            let l = num("l", e);
            let p = num("p", e);
            let bracket = req("bracket", e).and_then(|v| array::<2>(v, &path("bracket"), e));
            let [lo, hi] = bracket?;
            Some(InputSpec::Family {
                r: r?,
                k: k?,
                l: l?,
                p: p?,
                bracket: (lo, hi),
            })
        }
        _ => {
            let shape = req("shape", e).and_then(|v| array::<4>(v, &path("shape"), e));
            let a1 = req("a1", e).and_then(|v| number(v, &path("a1"), e));
            let samples = match t.get("samples") {
                None => Some(5),
                Some(Value::Integer(n)) if (1..=1000).contains(n) => Some(*n as usize),
                Some(_) => {
                    e.at(&path("samples"), "expected an integer in 1..=1000");
                    None
                }
            };
            Some(InputSpec::ConeScan {
                shape: shape?,
                a1: a1?,
                samples: samples?,
            })
        }
    }
}

fn number(v: &Value, path: &str, e: &mut Errors) -> Option<f64> {
    let x = match v {
        Value::Integer(i) => Some(*i as f64),
        Value::Float(f) => Some(*f),
        Value::String(s) => match s.trim() {
            "inf" | "+inf" => Some(f64::INFINITY),
            "-inf" => Some(f64::NEG_INFINITY),
            s => parse_rational(s).and_then(|q| q.to_f64()),
        },
        _ => None,
    };
    match x {
        Some(x) if !x.is_nan() => Some(x),
        _ => {
            e.at(path, format!("expected a number or \"p/q\", got {v}"));
            None
        }
    }
}

fn array<const N: usize>(v: &Value, path: &str, e: &mut Errors) -> Option<[f64; N]> {
    let Some(items) = v.as_array().filter(|a| a.len() == N) else {
        e.at(path, format!("expected an array of {N} numbers"));
        return None;
    };
    let out: Vec<Option<f64>> = items
        .iter()
        .enumerate()
        .map(|(i, x)| number(x, &format!("{path}[{i}]"), e))
        .collect();
    let out: Option<Vec<f64>> = out.into_iter().collect();
    out.map(|o| std::array::from_fn(|i| o[i]))
}

fn points(v: &Value, path: &str, e: &mut Errors) -> Option<Vec<[f64; 2]>> {
    let Some(items) = v.as_array() else {
        e.at(path, "expected an array of [x, y] pairs");
        return None;
    };
    let out: Vec<Option<[f64; 2]>> = items
        .iter()
        .enumerate()
        .map(|(i, p)| array::<2>(p, &format!("{path}[{i}]"), e))
        .collect();
    out.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rationals_and_decimals() {
        let s =
            parse("[family]\nr = -1\nk = \"1\"\nl = 2.0\np = \"6/2\"\nbracket = [\"3/5\", 0.7]\n")
                .unwrap();
        assert_eq!(
            s.input,
            InputSpec::Family {
                r: -1.0,
                k: 1.0,
                l: 2.0,
                p: 3.0,
                bracket: (0.6, 0.7)
            }
        );
    }

    #[test]
    fn infinite_label_is_accepted() {
        let s = parse(
            "[canonical]\ncase = \"calabi-triangle\"\nalpha = [0, 1]\nbeta = [0, 1]\nc_alpha = [\"inf\", -0.5]\nc_beta = [-1, 1]\n",
        )
        .unwrap();
        let InputSpec::Canonical(p) = s.input else {
            panic!()
        };
        assert!(p.c_alpha[0].is_infinite());
    }

    #[test]
    fn errors_carry_paths() {
        let err =
            parse("[family]\nr = \"x\"\nk = 1\nl = 2\nbracket = [1]\nextra = 3\n").unwrap_err();
        let all = err.0.join("\n");
        assert!(all.contains("family.r: expected a number"), "{all}");
        assert!(all.contains("family.p: missing field"), "{all}");
        assert!(
            all.contains("family.bracket: expected an array of 2"),
            "{all}"
        );
        assert!(all.contains("family.extra: unknown field"), "{all}");
    }

    #[test]
    fn exactly_one_variant() {
        let err = parse("[wpp]\nweights = [1, 2, 3]\n[sasaki]\nb0 = 3\nb2 = 1\n").unwrap_err();
        assert!(err.0[0].contains("exactly one variant"));
        assert!(parse("").is_err());
        assert!(parse("[wpp]\nweights = [1, 2, 3]\n[nope]\n").is_err());
    }

    #[test]
    fn element_paths_are_indexed() {
        let err =
            parse("[polytope]\nvertices = [[0, 0], [1, \"a/b\"]]\nnormals = []\n").unwrap_err();
        assert!(err
            .0
            .iter()
            .any(|m| m.starts_with("polytope.vertices[1][1]")));
    }

    #[test]
    fn canonical_values_are_validated() {
        let err = parse(
            "[canonical]\ncase = \"trapezoid\"\nalpha = [2, 1]\nbeta = [0, 1]\nc_alpha = [1, -1]\nc_beta = [-1, 1]\n",
        )
        .unwrap_err();
        assert!(err.0[0].starts_with("canonical:"));
    }
}
