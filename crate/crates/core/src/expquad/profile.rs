use serde::{Deserialize, Serialize};

use super::Poly;

/// `A(t) = P(t) + κ·e^{2a(t - anchor)}`, the solution of `A′ − 2aA = f` with
/// `A(anchor) = 0`.
///
/// The kernel `f` is kept alongside the closed form. Close to the anchor with
/// small `|a|` the closed form loses digits to cancellation, so evaluation
/// switches to the power series of `∫_{anchor}^t f(s) e^{2a(t-s)} ds` there.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpPolyProfile {
    pub rate: f64,
    pub anchor: f64,
    pub kernel: Poly,
    pub poly: Poly,
    pub kappa: f64,
}

/// Builds `A(x) = e^{2ax} ∫_{x0}^x f(t) e^{-2at} dt`.
pub fn profile_from_kernel(f: &Poly, a: f64, x0: f64) -> ExpPolyProfile {
    if a == 0.0 {
        return ExpPolyProfile {
            rate: 0.0,
            anchor: x0,
            kernel: f.clone(),
            poly: f.antiderivative_from(x0),
            kappa: 0.0,
        };
    }
    // Q = Σ f^{(n)} / (2a)^{n+1} solves Q′ − 2aQ = −f
    let mut q = Poly::zero();
    let mut d = f.clone();
    let mut w = 1.0 / (2.0 * a);
    while !d.is_zero() {
        q = q.add(&d.scale(w));
        d = d.derivative();
        w /= 2.0 * a;
    }
    ExpPolyProfile {
        rate: a,
        anchor: x0,
        kernel: f.clone(),
        kappa: q.eval(x0),
        poly: q.scale(-1.0),
    }
}

impl ExpPolyProfile {
    pub fn value(&self, t: f64) -> f64 {
        self.derivative(0, t)
    }

    /// `d^order A / dt^order` at `t`.
    pub fn derivative(&self, order: usize, t: f64) -> f64 {
        let u = t - self.anchor;
        let w = 2.0 * self.rate * u;
        if self.rate == 0.0 || w.abs() >= 1.0 {
            self.closed(order, t)
        } else {
            self.series(order, u)
        }
    }

    fn closed(&self, order: usize, t: f64) -> f64 {
        let two_a = 2.0 * self.rate;
        let p = self.poly.nth_derivative(order).eval(t);
        if self.kappa == 0.0 {
            return p;
        }
        p + self.kappa * two_a.powi(order as i32) * (two_a * (t - self.anchor)).exp()
    }

    /// Σ_j c_j j! Σ_n (2a)^n u^{j+n+1-order} / (j+n+1-order)!, with c the
    /// Taylor coefficients of the kernel at the anchor.
    fn series(&self, order: usize, u: f64) -> f64 {
        let two_a = 2.0 * self.rate;
        let c = self.kernel.taylor_shift(self.anchor);
        let mut total = 0.0;
        let mut jfact = 1.0;
        for (j, cj) in c.iter().enumerate() {
            if j > 0 {
                jfact *= j as f64;
            }
            let n0 = (order as i64 - j as i64 - 1).max(0) as usize;
            let p0 = j + n0 + 1 - order;
            let mut term = two_a.powi(n0 as i32) * u.powi(p0 as i32)
                / (1..=p0).fold(1.0, |acc, k| acc * k as f64);
            let mut sum = term;
            let mut p = p0;
            for _ in 0..400 {
                p += 1;
                term *= two_a * u / p as f64;
                sum += term;
                if term.abs() <= 1e-18 * sum.abs() || term == 0.0 {
                    break;
                }
            }
            total += cj * jfact * sum;
        }
        total
    }

    /// Pointwise defect of the defining ODE, `A′ − 2aA − f`.
    pub fn ode_defect(&self, t: f64) -> f64 {
        self.derivative(1, t) - 2.0 * self.rate * self.value(t) - self.kernel.eval(t)
    }
}
