use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// `p ↦ M p + t` on the plane.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AffineMap2 {
    pub linear: [[f64; 2]; 2],
    pub translation: [f64; 2],
}

impl AffineMap2 {
    pub fn identity() -> Self {
        AffineMap2 {
            linear: [[1.0, 0.0], [0.0, 1.0]],
            translation: [0.0, 0.0],
        }
    }

    pub fn new(linear: [[f64; 2]; 2], translation: [f64; 2]) -> Result<Self> {
        let map = AffineMap2 {
            linear,
            translation,
        };
        let d = map.det();
        let scale = linear.iter().flatten().fold(0.0_f64, |m, v| m.max(v.abs()));
        if !d.is_finite() || d.abs() <= 1e-14 * scale * scale || scale == 0.0 {
            return Err(Error::Degenerate(format!(
                "affine map with determinant {d}"
            )));
        }
        Ok(map)
    }

    /// The map sending `src[i]` to `dst[i]` for three affinely independent points.
    pub fn from_points(src: [[f64; 2]; 3], dst: [[f64; 2]; 3]) -> Result<Self> {
        let s = [sub(src[1], src[0]), sub(src[2], src[0])];
        let d = [sub(dst[1], dst[0]), sub(dst[2], dst[0])];
        // M [s0 s1] = [d0 d1]
        let det = s[0][0] * s[1][1] - s[1][0] * s[0][1];
        if det.abs() <= 1e-14 * (norm(s[0]) * norm(s[1])).max(f64::MIN_POSITIVE) {
            return Err(Error::Degenerate("collinear reference points".into()));
        }
        let inv = [
            [s[1][1] / det, -s[1][0] / det],
            [-s[0][1] / det, s[0][0] / det],
        ];
        let mut m = [[0.0; 2]; 2];
        for (r, row) in m.iter_mut().enumerate() {
            for (c, entry) in row.iter_mut().enumerate() {
                *entry = d[0][r] * inv[0][c] + d[1][r] * inv[1][c];
            }
        }
        let mp = mat_vec(&m, src[0]);
        AffineMap2::new(m, sub(dst[0], mp))
    }

    pub fn det(&self) -> f64 {
        let m = &self.linear;
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }

    pub fn apply(&self, p: [f64; 2]) -> [f64; 2] {
        let q = mat_vec(&self.linear, p);
        [q[0] + self.translation[0], q[1] + self.translation[1]]
    }

    pub fn inverse(&self) -> AffineMap2 {
        let m = &self.linear;
        let d = self.det();
        let inv = [[m[1][1] / d, -m[0][1] / d], [-m[1][0] / d, m[0][0] / d]];
        let t = mat_vec(&inv, self.translation);
        AffineMap2 {
            linear: inv,
            translation: [-t[0], -t[1]],
        }
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &AffineMap2) -> AffineMap2 {
        let a = &self.linear;
        let b = &other.linear;
        let mut m = [[0.0; 2]; 2];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, entry) in row.iter_mut().enumerate() {
                *entry = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        AffineMap2 {
            linear: m,
            translation: self.apply(other.translation),
        }
    }

    /// Transports the defining function `⟨p,u⟩ + c` to `L ∘ Φ⁻¹`.
    pub fn push_label(&self, normal: [f64; 2], offset: f64) -> ([f64; 2], f64) {
        let inv = self.inverse();
        let m = &inv.linear;
        // M^{-T} u
        let u = [
            m[0][0] * normal[0] + m[1][0] * normal[1],
            m[0][1] * normal[0] + m[1][1] * normal[1],
        ];
        let back = mat_vec(m, self.translation);
        (u, offset - dot(back, normal))
    }

    pub fn max_deviation(&self, other: &AffineMap2) -> f64 {
        let mut d = 0.0_f64;
        for i in 0..2 {
            for j in 0..2 {
                d = d.max((self.linear[i][j] - other.linear[i][j]).abs());
            }
            d = d.max((self.translation[i] - other.translation[i]).abs());
        }
        d
    }
}

pub(crate) fn mat_vec(m: &[[f64; 2]; 2], p: [f64; 2]) -> [f64; 2] {
    [
        m[0][0] * p[0] + m[0][1] * p[1],
        m[1][0] * p[0] + m[1][1] * p[1],
    ]
}

pub(crate) fn sub(a: [f64; 2], b: [f64; 2]) -> [f64; 2] {
    [a[0] - b[0], a[1] - b[1]]
}

pub(crate) fn dot(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

pub(crate) fn cross(a: [f64; 2], b: [f64; 2]) -> f64 {
    a[0] * b[1] - a[1] * b[0]
}

pub(crate) fn norm(a: [f64; 2]) -> f64 {
    a[0].hypot(a[1])
}
