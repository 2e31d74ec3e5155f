//! Planar matrix algebra: cofactors, determinant expansion, polar frames and
//! the gradient of the stored energy `W(A) = |A|^2 / 2 + rho(det A)`.

use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::rho::RhoSpec;

/// A column vector in the plane.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dot(self, other: Vec2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn norm(self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// Tensor product `self ⊗ other`, i.e. the matrix `self * other^T`.
    pub fn outer(self, other: Vec2) -> Mat2 {
        Mat2::new(self.x * other.x, self.x * other.y, self.y * other.x, self.y * other.y)
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, s: f64) -> Vec2 {
        Vec2::new(self.x * s, self.y * s)
    }
}

impl Mul<Vec2> for f64 {
    type Output = Vec2;
    fn mul(self, v: Vec2) -> Vec2 {
        v * self
    }
}

/// A real 2x2 matrix `[[a11, a12], [a21, a22]]`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Mat2 {
    pub a11: f64,
    pub a12: f64,
    pub a21: f64,
    pub a22: f64,
}

impl Mat2 {
    pub const ZERO: Mat2 = Mat2::new(0.0, 0.0, 0.0, 0.0);
    pub const IDENTITY: Mat2 = Mat2::new(1.0, 0.0, 0.0, 1.0);
    /// Rotation by a quarter turn.
    pub const ROT90: Mat2 = Mat2::new(0.0, -1.0, 1.0, 0.0);

    pub const fn new(a11: f64, a12: f64, a21: f64, a22: f64) -> Self {
        Self { a11, a12, a21, a22 }
    }

    pub fn from_columns(c1: Vec2, c2: Vec2) -> Self {
        Self::new(c1.x, c2.x, c1.y, c2.y)
    }

    pub fn det(&self) -> f64 {
        self.a11 * self.a22 - self.a12 * self.a21
    }

    pub fn transpose(&self) -> Mat2 {
        Mat2::new(self.a11, self.a21, self.a12, self.a22)
    }

    /// Cofactor matrix `[[a22, -a21], [-a12, a11]]`.
    pub fn cofactor(&self) -> Mat2 {
        Mat2::new(self.a22, -self.a21, -self.a12, self.a11)
    }

    /// Adjugate, the transpose of the cofactor matrix.
    pub fn adj(&self) -> Mat2 {
        self.cofactor().transpose()
    }

    /// Frobenius inner product.
    pub fn dot(&self, other: &Mat2) -> f64 {
        self.a11 * other.a11 + self.a12 * other.a12 + self.a21 * other.a21 + self.a22 * other.a22
    }

    pub fn frobenius_sq(&self) -> f64 {
        self.dot(self)
    }

    pub fn frobenius(&self) -> f64 {
        self.frobenius_sq().sqrt()
    }

    pub fn apply(&self, v: Vec2) -> Vec2 {
        Vec2::new(self.a11 * v.x + self.a12 * v.y, self.a21 * v.x + self.a22 * v.y)
    }

    pub fn matmul(&self, o: &Mat2) -> Mat2 {
        Mat2::new(
            self.a11 * o.a11 + self.a12 * o.a21,
            self.a11 * o.a12 + self.a12 * o.a22,
            self.a21 * o.a11 + self.a22 * o.a21,
            self.a21 * o.a12 + self.a22 * o.a22,
        )
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, o: Mat2) -> Mat2 {
        Mat2::new(self.a11 + o.a11, self.a12 + o.a12, self.a21 + o.a21, self.a22 + o.a22)
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, o: Mat2) -> Mat2 {
        Mat2::new(self.a11 - o.a11, self.a12 - o.a12, self.a21 - o.a21, self.a22 - o.a22)
    }
}

impl Neg for Mat2 {
    type Output = Mat2;
    fn neg(self) -> Mat2 {
        self * -1.0
    }
}

impl Mul<f64> for Mat2 {
    type Output = Mat2;
    fn mul(self, s: f64) -> Mat2 {
        Mat2::new(self.a11 * s, self.a12 * s, self.a21 * s, self.a22 * s)
    }
}

impl Mul<Mat2> for f64 {
    type Output = Mat2;
    fn mul(self, m: Mat2) -> Mat2 {
        m * self
    }
}

/// Cofactor of `a`.
pub fn cofactor(a: &Mat2) -> Mat2 {
    a.cofactor()
}

/// Both sides of `det(A + B) = det A + det B + cof A : B`.
pub fn det_expansion(a: &Mat2, b: &Mat2) -> (f64, f64) {
    let lhs = (*a + *b).det();
    let rhs = a.det() + b.det() + a.cofactor().dot(b);
    (lhs, rhs)
}

/// Gradient of the stored energy: `A + rho'(det A) cof A`.
pub fn grad_w(a: &Mat2, rho: &RhoSpec) -> Mat2 {
    *a + a.cofactor() * rho.eval(a.det()).drho
}

/// `(DW(A) - DW(B)) : (A - B) - (1 - gamma) |A - B|^2`; nonnegative for every `gamma > 0`.
pub fn monotonicity_gap(a: &Mat2, b: &Mat2, rho: &RhoSpec) -> f64 {
    let diff = *a - *b;
    (grad_w(a, rho) - grad_w(b, rho)).dot(&diff) - (1.0 - rho.gamma()) * diff.frobenius_sq()
}

/// Rotating frame `e_R(k theta), e_theta(k theta)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarFrame {
    pub k: u32,
    pub theta: f64,
    pub e_r: Vec2,
    pub e_t: Vec2,
}

/// Polar frame with winding `k` at angle `theta`.
pub fn polar_frame(k: u32, theta: f64) -> PolarFrame {
    let (s, c) = (k as f64 * theta).sin_cos();
    PolarFrame {
        k,
        theta,
        e_r: Vec2::new(c, s),
        e_t: Vec2::new(-s, c),
    }
}

/// `e_R(phi)`.
pub fn e_r(phi: f64) -> Vec2 {
    let (s, c) = phi.sin_cos();
    Vec2::new(c, s)
}

/// `e_theta(phi)`.
pub fn e_t(phi: f64) -> Vec2 {
    let (s, c) = phi.sin_cos();
    Vec2::new(-s, c)
}
