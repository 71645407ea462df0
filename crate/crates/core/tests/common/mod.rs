//! Test oracles that share no code with the library: adaptive
//! Gauss–Kronrod quadrature and plain bisection.
#![allow(dead_code)]

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// (Kronrod value, |Kronrod − Gauss|, Kronrod value of |f|)
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * WGK[7];
    let mut kabs = fc.abs() * WGK[7];
    let mut g = fc * WG[3];
    for i in 0..7 {
        let x = h * XGK[i];
        let (fl, fr) = (f(c - x), f(c + x));
        k += WGK[i] * (fl + fr);
        kabs += WGK[i] * (fl.abs() + fr.abs());
        if i % 2 == 1 {
            g += WG[i / 2] * (fl + fr);
        }
    }
    (k * h, ((k - g) * h).abs(), kabs * h.abs())
}

/// Adaptive G7-K15 quadrature to absolute tolerance `tol`.
pub fn quad<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    fn rec<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
        let (v, err, vabs) = gk15(f, a, b);
        if err <= tol.max(1e-15 * vabs) || depth > 40 {
            return v;
        }
        let m = 0.5 * (a + b);
        rec(f, a, m, 0.5 * tol, depth + 1) + rec(f, m, b, 0.5 * tol, depth + 1)
    }
    if a == b {
        return 0.0;
    }
    rec(&f, a, b, tol, 0)
}

/// Adaptive quadrature to relative tolerance `rel` of `∫|f|`.
pub fn quad_rel<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel: f64) -> f64 {
    let n = 64;
    let h = (b - a) / n as f64;
    let rough: f64 = (0..n)
        .map(|i| {
            gk15(
                &|x: f64| f(x).abs(),
                a + i as f64 * h,
                a + (i + 1) as f64 * h,
            )
            .2
        })
        .sum();
    quad(f, a, b, rel * rough.max(f64::MIN_POSITIVE))
}

/// Tensor adaptive quadrature over a rectangle.
pub fn quad2<F: Fn(f64, f64) -> f64>(f: F, x: (f64, f64), y: (f64, f64), tol: f64) -> f64 {
    quad(|xx| quad(|yy| f(xx, yy), y.0, y.1, tol), x.0, x.1, tol)
}

/// Bisection on a sign-changing bracket.
pub fn bisect<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> f64 {
    let mut flo = f(lo);
    assert!(flo * f(hi) <= 0.0, "bisect: no sign change");
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm > 0.0) == (flo > 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 * (1.0 + lo.abs()) {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Rate root of `∫ f e^{-2at} = 0` by quadrature and bisection.
pub fn rate_root_oracle<F: Fn(f64) -> f64>(f: F, x0: f64, x1: f64, lo: f64, hi: f64) -> f64 {
    bisect(
        |a| quad(|t| f(t) * (-2.0 * a * t).exp(), x0, x1, 1e-15),
        lo,
        hi,
    )
}
