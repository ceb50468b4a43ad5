//! SO(3) and its Lie algebra so(3).
//!
//! Rotation vectors are axis-angle 3-vectors `w = θ·n`. The exponential map is
//! the Rodrigues formula; the logarithm uses the trace/antisymmetric-part form
//! away from θ = π and an axis extraction from the symmetric part near it.

use core::f64::consts::PI;
use core::ops::{Add, Mul, Neg, Sub};

#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};

pub type Vec3 = [f64; 3];

/// Tolerance used to accept a matrix as a rotation.
pub const ROTATION_TOLERANCE: f64 = 1e-9;

/// Below this angle the Rodrigues coefficients switch to their Taylor series.
pub const SMALL_ANGLE: f64 = 1e-4;

/// Row-major 3×3 matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat3(pub [[f64; 3]; 3]);

impl Mat3 {
    pub const ZERO: Mat3 = Mat3([[0.0; 3]; 3]);
    pub const IDENTITY: Mat3 = Mat3([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);

    pub fn transpose(&self) -> Mat3 {
        let m = &self.0;
        Mat3([
            [m[0][0], m[1][0], m[2][0]],
            [m[0][1], m[1][1], m[2][1]],
            [m[0][2], m[1][2], m[2][2]],
        ])
    }

    pub fn trace(&self) -> f64 {
        self.0[0][0] + self.0[1][1] + self.0[2][2]
    }

    pub fn det(&self) -> f64 {
        let m = &self.0;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    pub fn mul_vec(&self, v: &Vec3) -> Vec3 {
        let m = &self.0;
        [
            m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
            m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
            m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
        ]
    }

    /// First column, i.e. the image of the local x-axis.
    pub fn x_axis(&self) -> Vec3 {
        [self.0[0][0], self.0[1][0], self.0[2][0]]
    }

    pub fn scale(&self, s: f64) -> Mat3 {
        let mut out = *self;
        out.0.iter_mut().flatten().for_each(|v| *v *= s);
        out
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.0.iter().flatten().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Outer product `a bᵀ`.
    pub fn outer(a: &Vec3, b: &Vec3) -> Mat3 {
        let mut out = Mat3::ZERO;
        for (i, row) in out.0.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = a[i] * b[j];
            }
        }
        out
    }

    /// Frobenius inner product `Σ a_ij b_ij`.
    pub fn dot(&self, other: &Mat3) -> f64 {
        self.0
            .iter()
            .flatten()
            .zip(other.0.iter().flatten())
            .map(|(a, b)| a * b)
            .sum()
    }
}

impl Mul for Mat3 {
    type Output = Mat3;
    fn mul(self, rhs: Mat3) -> Mat3 {
        let mut out = Mat3::ZERO;
        for i in 0..3 {
            for j in 0..3 {
                out.0[i][j] = (0..3).map(|k| self.0[i][k] * rhs.0[k][j]).sum();
            }
        }
        out
    }
}

impl Add for Mat3 {
    type Output = Mat3;
    fn add(mut self, rhs: Mat3) -> Mat3 {
        self.0
            .iter_mut()
            .flatten()
            .zip(rhs.0.iter().flatten())
            .for_each(|(a, b)| *a += b);
        self
    }
}

impl Sub for Mat3 {
    type Output = Mat3;
    fn sub(self, rhs: Mat3) -> Mat3 {
        self + (-rhs)
    }
}

impl Neg for Mat3 {
    type Output = Mat3;
    fn neg(self) -> Mat3 {
        self.scale(-1.0)
    }
}

pub fn cross(a: &Vec3, b: &Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub fn dot(a: &Vec3, b: &Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn norm(a: &Vec3) -> f64 {
    dot(a, a).sqrt()
}

pub fn sub(a: &Vec3, b: &Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub fn add(a: &Vec3, b: &Vec3) -> Vec3 {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

pub fn scale(a: &Vec3, s: f64) -> Vec3 {
    [a[0] * s, a[1] * s, a[2] * s]
}

/// The hat operator: the skew-symmetric matrix with `skew(w)·v = w × v`.
pub fn skew(w: &Vec3) -> Mat3 {
    Mat3([[0.0, -w[2], w[1]], [w[2], 0.0, -w[0]], [-w[1], w[0], 0.0]])
}

/// Inverse of [`skew`]; reads the antisymmetric part of `m`.
pub fn unskew(m: &Mat3) -> Vec3 {
    let m = &m.0;
    [
        0.5 * (m[2][1] - m[1][2]),
        0.5 * (m[0][2] - m[2][0]),
        0.5 * (m[1][0] - m[0][1]),
    ]
}

/// A proper rotation matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rotation(Mat3);

impl Rotation {
    pub const IDENTITY: Rotation = Rotation(Mat3::IDENTITY);

    /// Accepts `m` if `‖mᵀm − I‖_F ≤ 1e-9` and `|det m − 1| ≤ 1e-9`.
    pub fn new(m: Mat3) -> Result<Self> {
        let orthogonality = (m.transpose() * m - Mat3::IDENTITY).norm();
        let det = m.det();
        if !(orthogonality <= ROTATION_TOLERANCE && (det - 1.0).abs() <= ROTATION_TOLERANCE) {
            return Err(Error::NotARotation { orthogonality, det });
        }
        Ok(Rotation(m))
    }

    pub fn matrix(&self) -> &Mat3 {
        &self.0
    }

    pub fn compose(&self, other: &Rotation) -> Rotation {
        Rotation(self.0 * other.0)
    }

    pub fn rotate(&self, v: &Vec3) -> Vec3 {
        self.0.mul_vec(v)
    }
}

/// Rodrigues coefficients `sin θ / θ` and `(1 − cos θ) / θ²`.
fn rodrigues_coeffs(theta: f64) -> (f64, f64) {
    if theta < SMALL_ANGLE {
        let t2 = theta * theta;
        (1.0 - t2 / 6.0, 0.5 - t2 / 24.0)
    } else {
        (theta.sin() / theta, (1.0 - theta.cos()) / (theta * theta))
    }
}

/// Derivatives of the Rodrigues coefficients divided by θ:
/// `a'(θ)/θ` and `b'(θ)/θ`.
fn rodrigues_coeff_derivs(theta: f64) -> (f64, f64) {
    if theta < 1e-3 {
        let t2 = theta * theta;
        (
            -1.0 / 3.0 + t2 / 30.0 - t2 * t2 / 840.0,
            -1.0 / 12.0 + t2 / 180.0 - t2 * t2 / 6720.0,
        )
    } else {
        let (s, c) = (theta.sin(), theta.cos());
        let t2 = theta * theta;
        (
            (theta * c - s) / (t2 * theta),
            (theta * s - 2.0 * (1.0 - c)) / (t2 * t2),
        )
    }
}

fn exp_matrix(w: &Vec3) -> Mat3 {
    let theta = norm(w);
    let (a, b) = rodrigues_coeffs(theta);
    let k = skew(w);
    Mat3::IDENTITY + k.scale(a) + (k * k).scale(b)
}

/// Exponential map so(3) → SO(3) (Rodrigues formula).
pub fn exp_so3(w: &Vec3) -> Rotation {
    Rotation(exp_matrix(w))
}

/// `exp(ŵ)` together with its partial derivatives `∂R/∂w_k`, k = 0, 1, 2.
pub fn exp_so3_jacobian(w: &Vec3) -> (Mat3, [Mat3; 3]) {
    let theta = norm(w);
    let (a, b) = rodrigues_coeffs(theta);
    let (da, db) = rodrigues_coeff_derivs(theta);
    let k = skew(w);
    let k2 = k * k;
    let r = Mat3::IDENTITY + k.scale(a) + k2.scale(b);
    let radial = k.scale(da) + k2.scale(db);
    let mut partials = [Mat3::ZERO; 3];
    for (axis, out) in partials.iter_mut().enumerate() {
        let mut e = [0.0; 3];
        e[axis] = 1.0;
        let g = skew(&e);
        *out = g.scale(a) + (g * k + k * g).scale(b) + radial.scale(w[axis]);
    }
    (r, partials)
}

/// Logarithm map SO(3) → so(3). The result has norm in `[0, π]`.
pub fn log_so3(r: &Rotation) -> Vec3 {
    log_matrix(&r.0)
}

fn log_matrix(m: &Mat3) -> Vec3 {
    // v = sin θ · n
    let v = unskew(m);
    let s = norm(&v);
    let c = ((m.trace() - 1.0) * 0.5).clamp(-1.0, 1.0);
    let theta = s.atan2(c);
    if theta < SMALL_ANGLE {
        // θ / sin θ ≈ 1 + θ²/6
        return scale(&v, 1.0 + theta * theta / 6.0);
    }
    if c > -0.99 {
        return scale(&v, theta / s);
    }
    // Near π: (R + Rᵀ)/2 = cos θ·I + (1 − cos θ)·n nᵀ.
    let sym = |i: usize, j: usize| 0.5 * (m.0[i][j] + m.0[j][i]);
    let denom = 1.0 - c;
    let mut nn = [[0.0; 3]; 3];
    for (i, row) in nn.iter_mut().enumerate() {
        for (j, e) in row.iter_mut().enumerate() {
            let diag = if i == j { c } else { 0.0 };
            *e = (sym(i, j) - diag) / denom;
        }
    }
    let k = (0..3)
        .max_by(|&a, &b| nn[a][a].total_cmp(&nn[b][b]))
        .unwrap_or(0);
    let mut axis = [nn[0][k], nn[1][k], nn[2][k]];
    let len = norm(&axis);
    axis = scale(&axis, 1.0 / len);
    if dot(&axis, &v) < 0.0 {
        axis = scale(&axis, -1.0);
    }
    scale(&axis, theta)
}

/// Reduces a rotation vector to the equivalent one with norm ≤ π.
pub fn canonicalize(w: &Vec3) -> Vec3 {
    if norm(w) <= PI {
        *w
    } else {
        log_matrix(&exp_matrix(w))
    }
}

/// The minimal rotation (no twist about the rotation's own result axis) that
/// takes the x-axis onto the unit vector `dir`, as a rotation vector.
pub fn align_x_to(dir: &Vec3) -> Vec3 {
    let x = [1.0, 0.0, 0.0];
    let axis = cross(&x, dir);
    let s = norm(&axis);
    let c = dot(&x, dir);
    if s < 1e-12 {
        if c > 0.0 {
            return axis;
        }
        return [0.0, 0.0, PI];
    }
    scale(&axis, s.atan2(c) / s)
}
