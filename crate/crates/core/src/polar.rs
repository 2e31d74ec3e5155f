//! Tensor polar meshes on the unit disk and their finite-difference gradients.

use std::f64::consts::PI;

use crate::algebra::{e_r, e_t, Mat2, Vec2};
use crate::error::{invalid, Result};
use crate::quadrature::{periodic_derivative, three_point_weights};

/// Samples on cell-centred radii `R_i = (i + 1/2) / n_r` and uniform angles
/// `theta_j = 2 pi j / n_theta`, stored ring by ring.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarMesh<T> {
    n_r: usize,
    n_theta: usize,
    values: Vec<T>,
}

impl<T: Copy> PolarMesh<T> {
    pub fn from_values(n_r: usize, n_theta: usize, values: Vec<T>) -> Result<Self> {
        if n_r < 3 || n_theta < 7 {
            return Err(invalid("polar mesh needs at least 3 radii and 7 angles"));
        }
        if values.len() != n_r * n_theta {
            return Err(invalid("value count does not match the mesh size"));
        }
        Ok(Self { n_r, n_theta, values })
    }

    /// Samples `f(R, theta)` on the mesh.
    pub fn sample(n_r: usize, n_theta: usize, f: impl Fn(f64, f64) -> T) -> Result<Self> {
        let mut values = Vec::with_capacity(n_r * n_theta);
        for i in 0..n_r {
            let radius = (i as f64 + 0.5) / n_r as f64;
            for j in 0..n_theta {
                values.push(f(radius, 2.0 * PI * j as f64 / n_theta as f64));
            }
        }
        Self::from_values(n_r, n_theta, values)
    }

    pub fn n_r(&self) -> usize {
        self.n_r
    }

    pub fn n_theta(&self) -> usize {
        self.n_theta
    }

    pub fn radius(&self, i: usize) -> f64 {
        (i as f64 + 0.5) / self.n_r as f64
    }

    pub fn radii(&self) -> Vec<f64> {
        (0..self.n_r).map(|i| self.radius(i)).collect()
    }

    pub fn theta(&self, j: usize) -> f64 {
        2.0 * PI * j as f64 / self.n_theta as f64
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.values[i * self.n_theta + j]
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn map<U: Copy>(&self, f: impl Fn(f64, f64, T) -> U) -> PolarMesh<U> {
        let mut values = Vec::with_capacity(self.values.len());
        for i in 0..self.n_r {
            for j in 0..self.n_theta {
                values.push(f(self.radius(i), self.theta(j), self.get(i, j)));
            }
        }
        PolarMesh {
            n_r: self.n_r,
            n_theta: self.n_theta,
            values,
        }
    }

    /// Ring integrals `R_i * integral of w(R_i, theta) d theta` of a scalar density.
    pub fn ring_integrals(&self, w: impl Fn(f64, f64, T) -> f64) -> Vec<f64> {
        let dt = 2.0 * PI / self.n_theta as f64;
        (0..self.n_r)
            .map(|i| {
                let radius = self.radius(i);
                let s: f64 = (0..self.n_theta)
                    .map(|j| w(radius, self.theta(j), self.get(i, j)))
                    .sum();
                s * dt * radius
            })
            .collect()
    }

    /// Same as [`ring_integrals`](Self::ring_integrals) using every other angle.
    pub fn ring_integrals_coarse(&self, w: impl Fn(f64, f64, T) -> f64) -> Vec<f64> {
        let dt = 4.0 * PI / self.n_theta as f64;
        (0..self.n_r)
            .map(|i| {
                let radius = self.radius(i);
                let s: f64 = (0..self.n_theta)
                    .step_by(2)
                    .map(|j| w(radius, self.theta(j), self.get(i, j)))
                    .sum();
                s * dt * radius
            })
            .collect()
    }
}

/// Midpoint rule over the rings plus an asymptotic error estimate built from the
/// end slopes of the ring integrals and an angular halving comparison.
pub fn integrate_rings(rings: &[f64], coarse: &[f64]) -> (f64, f64) {
    let n = rings.len();
    let h = 1.0 / n as f64;
    let total: f64 = rings.iter().sum::<f64>() * h;
    let coarse_total: f64 = coarse.iter().sum::<f64>() * h;
    let g0 = (-3.0 * rings[0] + 4.0 * rings[1] - rings[2]) / (2.0 * h);
    let g1 = (3.0 * rings[n - 1] - 4.0 * rings[n - 2] + rings[n - 3]) / (2.0 * h);
    let radial = h * h / 24.0 * (g1 - g0).abs();
    (total, radial + (total - coarse_total).abs())
}

/// Cartesian gradient `u_R (x) e_R + R^-1 u_theta (x) e_theta` of a sampled map.
pub fn gradient(u: &PolarMesh<Vec2>) -> PolarMesh<Mat2> {
    let (n_r, n_t) = (u.n_r(), u.n_theta());
    let radii = u.radii();
    let wr = three_point_weights(&radii);
    let dt = 2.0 * PI / n_t as f64;
    let mut values = vec![Mat2::ZERO; n_r * n_t];
    for i in 0..n_r {
        let xs: Vec<f64> = (0..n_t).map(|j| u.get(i, j).x).collect();
        let ys: Vec<f64> = (0..n_t).map(|j| u.get(i, j).y).collect();
        let dxs = periodic_derivative(&xs, dt);
        let dys = periodic_derivative(&ys, dt);
        let (off, w) = wr[i];
        for j in 0..n_t {
            let u_r = u.get(off, j) * w[0] + u.get(off + 1, j) * w[1] + u.get(off + 2, j) * w[2];
            let u_t = Vec2::new(dxs[j], dys[j]) * (1.0 / radii[i]);
            let th = u.theta(j);
            values[i * n_t + j] = u_r.outer(e_r(th)) + u_t.outer(e_t(th));
        }
    }
    PolarMesh {
        n_r,
        n_theta: n_t,
        values,
    }
}

/// Angular derivative of a sampled matrix field, entry by entry.
pub fn theta_derivative(s: &PolarMesh<Mat2>) -> PolarMesh<Mat2> {
    let (n_r, n_t) = (s.n_r(), s.n_theta());
    let dt = 2.0 * PI / n_t as f64;
    let mut values = vec![Mat2::ZERO; n_r * n_t];
    for i in 0..n_r {
        let comp = |f: fn(&Mat2) -> f64| {
            let v: Vec<f64> = (0..n_t).map(|j| f(&s.get(i, j))).collect();
            periodic_derivative(&v, dt)
        };
        let (a, b, c, d) = (comp(|m| m.a11), comp(|m| m.a12), comp(|m| m.a21), comp(|m| m.a22));
        for j in 0..n_t {
            values[i * n_t + j] = Mat2::new(a[j], b[j], c[j], d[j]);
        }
    }
    PolarMesh {
        n_r,
        n_theta: n_t,
        values,
    }
}
