use serde::{Deserialize, Serialize};

/// Dense real polynomial, coefficients in ascending degree.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Poly {
    coeffs: Vec<f64>,
}

impl Poly {
    pub fn new(mut coeffs: Vec<f64>) -> Self {
        while coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn constant(c: f64) -> Self {
        Poly::new(vec![c])
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, with the zero polynomial reported as 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn coeff(&self, i: usize) -> f64 {
        self.coeffs.get(i).copied().unwrap_or(0.0)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn derivative(&self) -> Poly {
        Poly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, &c)| c * i as f64)
                .collect(),
        )
    }

    pub fn nth_derivative(&self, n: usize) -> Poly {
        (0..n).fold(self.clone(), |p, _| p.derivative())
    }

    /// Antiderivative vanishing at `x0`.
    pub fn antiderivative_from(&self, x0: f64) -> Poly {
        let mut c = vec![0.0];
        c.extend(
            self.coeffs
                .iter()
                .enumerate()
                .map(|(i, &a)| a / (i as f64 + 1.0)),
        );
        let mut p = Poly::new(c);
        let shift = p.eval(x0);
        if !p.is_zero() {
            p.coeffs[0] -= shift;
        }
        Poly::new(p.coeffs)
    }

    pub fn scale(&self, s: f64) -> Poly {
        Poly::new(self.coeffs.iter().map(|c| c * s).collect())
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        Poly::new((0..n).map(|i| self.coeff(i) + other.coeff(i)).collect())
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        self.add(&other.scale(-1.0))
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![0.0; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }

    /// Coefficients of `u ↦ p(x0 + u)`.
    pub fn taylor_shift(&self, x0: f64) -> Vec<f64> {
        let mut c = self.coeffs.clone();
        let n = c.len();
        for k in 0..n {
            for i in (k..n - 1).rev() {
                c[i] += x0 * c[i + 1];
            }
        }
        c
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0_f64, |m, c| m.max(c.abs()))
    }

    /// Sign of `p` just to the right of `x0` (first non-negligible Taylor term).
    pub fn sign_right_of(&self, x0: f64) -> i32 {
        let g = self.taylor_shift(x0);
        first_sign(&g, 1.0)
    }

    /// Sign of `p` just to the left of `x1`.
    pub fn sign_left_of(&self, x1: f64) -> i32 {
        let g = self.taylor_shift(x1);
        first_sign(&g, -1.0)
    }

    /// Number of distinct real roots in the open interval `(x0, x1)`.
    ///
    /// Roots sitting on an endpoint are deflated first, then a Sturm chain is
    /// evaluated at both ends.
    pub fn count_roots_open(&self, x0: f64, x1: f64) -> usize {
        if self.is_zero() {
            return usize::MAX;
        }
        let mut p = self.clone();
        for x in [x0, x1] {
            while p.degree() > 0 && p.eval(x).abs() <= ROOT_TOL * p.taylor_scale(x) {
                p = p.deflate(x);
            }
        }
        if p.degree() == 0 {
            return 0;
        }
        let chain = sturm_chain(&p);
        let v0 = sign_changes(&chain, x0);
        let v1 = sign_changes(&chain, x1);
        v0.saturating_sub(v1)
    }

    fn taylor_scale(&self, x: f64) -> f64 {
        self.taylor_shift(x)
            .iter()
            .fold(0.0_f64, |m, c| m.max(c.abs()))
    }

    /// Quotient of `p / (t - x)`.
    fn deflate(&self, x: f64) -> Poly {
        let n = self.coeffs.len();
        let mut q = vec![0.0; n - 1];
        let mut carry = 0.0;
        for i in (1..n).rev() {
            carry = self.coeffs[i] + carry * x;
            q[i - 1] = carry;
        }
        Poly::new(q)
    }
}

const ROOT_TOL: f64 = 1e-13;

fn first_sign(g: &[f64], dir: f64) -> i32 {
    let scale = g.iter().fold(0.0_f64, |m, c| m.max(c.abs()));
    for (n, &c) in g.iter().enumerate() {
        if c.abs() > ROOT_TOL * scale {
            let s = c * dir.powi(n as i32);
            return if s > 0.0 { 1 } else { -1 };
        }
    }
    0
}

fn normalized(p: Poly) -> Poly {
    let m = p.max_abs_coeff();
    if m == 0.0 {
        p
    } else {
        p.scale(1.0 / m)
    }
}

fn remainder(a: &Poly, b: &Poly) -> Poly {
    let mut r = a.coeffs.clone();
    let db = b.degree();
    let lead = b.coeffs[db];
    let scale = a.max_abs_coeff().max(b.max_abs_coeff());
    while r.len() > db && !r.is_empty() {
        let k = r.len() - 1;
        let q = r[k] / lead;
        for i in 0..=db {
            r[k - db + i] -= q * b.coeffs[i];
        }
        r.pop();
        while matches!(r.last(), Some(c) if c.abs() <= 1e-12 * scale) {
            r.pop();
        }
    }
    Poly::new(r)
}

fn sturm_chain(p: &Poly) -> Vec<Poly> {
    let mut chain = vec![normalized(p.clone()), normalized(p.derivative())];
    while chain.last().is_some_and(|q| q.degree() > 0) {
        let n = chain.len();
        let r = remainder(&chain[n - 2], &chain[n - 1]);
        if r.is_zero() {
            break;
        }
        chain.push(normalized(r.scale(-1.0)));
    }
    chain
}

fn sign_changes(chain: &[Poly], x: f64) -> usize {
    let mut last = 0.0_f64;
    let mut count = 0;
    for p in chain {
        let v = p.eval(x);
        if v == 0.0 {
            continue;
        }
        if last != 0.0 && (v > 0.0) != (last > 0.0) {
            count += 1;
        }
        last = v;
    }
    count
}
