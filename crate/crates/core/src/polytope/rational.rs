use std::ops::Neg;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Num, One, Signed};
use serde::{Deserialize, Serialize};

use super::{CanonicalParameters, QuadClass};
use crate::{Error, Result};

/// Largest denominator tried by [`nearest_rational`] in the default diagnosis.
pub const MAX_DENOMINATOR: i64 = 1_000_000;
/// Error below which a convergent counts as the value.
pub const RATIONAL_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RationalApprox {
    pub name: String,
    pub value: f64,
    pub numer: i64,
    pub denom: i64,
    /// `|value - numer/denom| / max(1, |value|)`.
    pub error: f64,
    pub rational: bool,
}

/// Last continued-fraction convergent of `x` with denominator at most `max_denom`.
pub fn nearest_rational(x: f64, max_denom: i64, tol: f64) -> (i64, i64, bool) {
    if !x.is_finite() {
        return (0, 1, false);
    }
    let (mut h0, mut h1) = (0i128, 1i128);
    let (mut k0, mut k1) = (1i128, 0i128);
    let mut r = x;
    for _ in 0..64 {
        let a = r.floor();
        if a.abs() > 1e15 {
            break;
        }
        let ai = a as i128;
        let h2 = ai * h1 + h0;
        let k2 = ai * k1 + k0;
        if k2 > max_denom as i128 {
            break;
        }
        (h0, h1, k0, k1) = (h1, h2, k1, k2);
        let frac = r - a;
        if (x - h1 as f64 / k1 as f64).abs() <= f64::EPSILON * x.abs() || frac == 0.0 {
            break;
        }
        r = 1.0 / frac;
    }
    if k1 == 0 {
        return (x.round() as i64, 1, false);
    }
    let err = (x - h1 as f64 / k1 as f64).abs() / x.abs().max(1.0);
    (h1 as i64, k1 as i64, err <= tol)
}

/// `(p, k)`, `(p, k, l)` or `(r, p, k, l)` for a labelled parallelogram,
/// Calabi trapezoid or orthotoric quadrilateral.
///
/// Generic over the number type so exact rational input stays exact.
pub fn rationality_tuple<T>(
    case: QuadClass,
    alpha: [T; 2],
    beta: [T; 2],
    c_alpha: [T; 2],
    c_beta: [T; 2],
) -> Result<Vec<(&'static str, T)>>
where
    T: Clone + Num + Neg<Output = T>,
{
    let [a1, a2] = alpha;
    let [b1, b2] = beta;
    let [ca1, ca2] = c_alpha;
    let [cb1, cb2] = c_beta;
    let p = -(cb2.clone() / cb1.clone());
    match case {
        QuadClass::Parallelogram => Ok(vec![("p", p), ("k", -(ca2 / ca1))]),
        QuadClass::Trapezoid => {
            let w = (b2 - b1) * cb2;
            Ok(vec![
                ("p", p),
                ("k", w.clone() / (a1 * ca1)),
                ("l", -(w / (a2 * ca2))),
            ])
        }
        QuadClass::GenericQuadrilateral => {
            let db = b2.clone() - b1.clone();
            let r = (b2.clone() - a1.clone()) * (a2.clone() - b1.clone())
                / (db.clone() * (a2.clone() - a1.clone()));
            let p = (a1.clone() - b1.clone()) * cb1 / ((b2 - a1.clone()) * cb2.clone());
            let k = (b1.clone() - a2) * ca2 / (db.clone() * cb2.clone());
            let l = (a1 - b1) * ca1 / (db * cb2);
            Ok(vec![("r", r), ("p", p), ("k", k), ("l", l)])
        }
        QuadClass::CalabiTriangle | QuadClass::OrthoSimplex => Err(Error::InvalidParameters(
            "rationality numbers are defined for quadrilaterals".into(),
        )),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RationalityReport {
    pub case: QuadClass,
    pub values: Vec<RationalApprox>,
    /// Every value is rational within tolerance.
    pub rational: bool,
}

impl RationalityReport {
    pub fn get(&self, name: &str) -> Option<f64> {
        self.values.iter().find(|v| v.name == name).map(|v| v.value)
    }
}

pub fn rationality_parameters(params: &CanonicalParameters) -> Result<RationalityReport> {
    let tuple = rationality_tuple(
        params.case,
        params.alpha,
        params.beta,
        params.c_alpha,
        params.c_beta,
    )?;
    let values: Vec<RationalApprox> = tuple
        .into_iter()
        .map(|(name, value)| {
            let (numer, denom, rational) = nearest_rational(value, MAX_DENOMINATOR, RATIONAL_TOL);
            RationalApprox {
                name: name.to_string(),
                value,
                numer,
                denom,
                error: (value - numer as f64 / denom as f64).abs() / value.abs().max(1.0),
                rational,
            }
        })
        .collect();
    let rational = values.iter().all(|v| v.rational);
    Ok(RationalityReport {
        case: params.case,
        values,
        rational,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DelzantReport {
    pub delzant: bool,
    pub note: Option<String>,
}

/// Delzant test through the rationality numbers: `p = k = 1` for a
/// parallelogram, `p = 1` and `k = l ∈ ℕ` for a trapezoid.
pub fn delzant_check(params: &CanonicalParameters) -> DelzantReport {
    let report = match rationality_parameters(params) {
        Ok(r) if params.case != QuadClass::GenericQuadrilateral => r,
        _ => {
            return DelzantReport {
                delzant: false,
                note: Some(format!(
                    "a {} is never Delzant in this classification; only trapezoids and parallelograms are",
                    params.case.name()
                )),
            }
        }
    };
    let is = |name: &str, n: i64| {
        report
            .values
            .iter()
            .any(|v| v.name == name && v.rational && v.denom == 1 && v.numer == n)
    };
    let delzant = match params.case {
        QuadClass::Parallelogram => is("p", 1) && is("k", 1),
        _ => {
            let k = report.values.iter().find(|v| v.name == "k");
            let l = report.values.iter().find(|v| v.name == "l");
            is("p", 1)
                && matches!((k, l), (Some(k), Some(l))
                    if k.rational && k.denom == 1 && k.numer >= 1
                        && l.rational && l.denom == 1 && l.numer == k.numer)
        }
    };
    DelzantReport {
        delzant,
        note: None,
    }
}

/// Exact variant of [`delzant_check`] on an exact rationality tuple.
pub fn delzant_exact(case: QuadClass, tuple: &[(&'static str, BigRational)]) -> DelzantReport {
    let get = |name: &str| {
        tuple
            .iter()
            .find(|(n, _)| *n == name)
            .map(|(_, v)| v.clone())
    };
    let one = BigRational::one();
    let delzant = match case {
        QuadClass::Parallelogram => get("p") == Some(one.clone()) && get("k") == Some(one),
        QuadClass::Trapezoid => match (get("p"), get("k"), get("l")) {
            (Some(p), Some(k), Some(l)) => p == one && k == l && k.is_integer() && k.is_positive(),
            _ => false,
        },
        _ => {
            return DelzantReport {
                delzant: false,
                note: Some(format!("a {} is never Delzant", case.name())),
            }
        }
    };
    DelzantReport {
        delzant,
        note: None,
    }
}

/// Parses `"p/q"`, an integer or a decimal literal into an exact rational.
pub fn parse_rational(s: &str) -> Option<BigRational> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().ok()?;
        let d: BigInt = d.trim().parse().ok()?;
        if d == BigInt::from(0) {
            return None;
        }
        return Some(BigRational::new(n, d));
    }
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (int, frac) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    let digits: BigInt = format!("{int}{frac}").parse().ok()?;
    let scale = exp - frac.len() as i32;
    let ten = BigInt::from(10);
    Some(if scale >= 0 {
        BigRational::from_integer(digits * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(digits, num_traits::pow(ten, (-scale) as usize))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn convergents() {
        assert_eq!(nearest_rational(0.75, 1000, 1e-12), (3, 4, true));
        assert_eq!(nearest_rational(-1.0 / 3.0, 1000, 1e-12), (-1, 3, true));
        assert_eq!(
            nearest_rational(2.9999999999999996, 1000, 1e-9),
            (3, 1, true)
        );
        let (_, _, ok) = nearest_rational(std::f64::consts::PI, 1000, 1e-9);
        assert!(!ok);
    }

    #[test]
    fn parses_rationals() {
        let r = |n: i64, d: i64| BigRational::new(n.into(), d.into());
        assert_eq!(parse_rational("3/6"), Some(r(1, 2)));
        assert_eq!(parse_rational("-0.25"), Some(r(-1, 4)));
        assert_eq!(parse_rational("12"), Some(r(12, 1)));
        assert_eq!(parse_rational("1.5e2"), Some(r(150, 1)));
        assert_eq!(parse_rational("1/0"), None);
        assert_eq!(parse_rational("x"), None);
    }

    #[test]
    fn exact_tuple_for_orthotoric_example() {
        let q = |s: &str| parse_rational(s).unwrap();
        let t = rationality_tuple(
            QuadClass::GenericQuadrilateral,
            [q("1"), q("3")],
            [q("0"), q("3/5")],
            [q("6/5"), q("-1/5")],
            [q("-6/5"), q("1")],
        )
        .unwrap();
        let want = [("r", -1), ("p", 3), ("k", 1), ("l", 2)];
        for ((n, v), (wn, wv)) in t.iter().zip(want) {
            assert_eq!(*n, wn);
            assert_eq!(*v, BigRational::from_integer(wv.into()));
        }
    }
}
