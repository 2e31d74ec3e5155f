//! Quadrature of `I(u) = integral of |grad u|^2 / 2 + rho(det grad u)` over the unit disk.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::algebra::Vec2;
use crate::polar::{gradient, integrate_rings, PolarMesh};
use crate::quadrature::{GaussRule, HermiteBasis};
use crate::radial_bvp::RadialProfile;
use crate::rho::RhoSpec;

/// Energy split into its Dirichlet and penalty parts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub total: f64,
    pub dirichlet_part: f64,
    pub rho_part: f64,
    pub quad_error_estimate: f64,
}

impl EnergyReport {
    fn new(dirichlet_part: f64, rho_part: f64, quad_error_estimate: f64) -> Self {
        Self {
            total: dirichlet_part + rho_part,
            dirichlet_part,
            rho_part,
            quad_error_estimate,
        }
    }
}

const GAUSS_POINTS: usize = 5;

/// Partial derivatives of the radial energy with respect to nodal values and slopes.
pub(crate) struct RadialGradient {
    pub d_r: Vec<f64>,
    pub d_dr: Vec<f64>,
}

/// Energy of the profile on `[0, 1]`: cubic Hermite cells on the grid plus a
/// core `r_0 (R / R_0)^M` on `[0, R_0]`.
pub(crate) fn radial_parts(
    grid: &[f64],
    r: &[f64],
    dr: &[f64],
    m: u32,
    rho: &RhoSpec,
    mut grad: Option<&mut RadialGradient>,
) -> (f64, f64) {
    let rule = GaussRule::new(GAUSS_POINTS);
    let mf = m as f64;
    let m2 = mf * mf;
    let two_pi = 2.0 * PI;
    let mut dir = 0.0;
    let mut pen = 0.0;

    // Core: the Dirichlet part integrates to pi M r_0^2 in closed form.
    let (r_in, r0) = (grid[0], r[0]);
    dir += PI * mf * r0 * r0;
    let mut core_grad = 2.0 * PI * mf * r0;
    for (s, w) in rule.unit() {
        let x = r_in * s;
        let q = s.powi(2 * m as i32 - 2);
        let d = m2 * r0 * r0 * q / (r_in * r_in);
        let v = rho.eval(d);
        pen += two_pi * w * r_in * v.rho * x;
        core_grad += two_pi * w * r_in * v.drho * 2.0 * m2 * r0 * q / (r_in * r_in) * x;
    }
    if let Some(g) = grad.as_deref_mut() {
        g.d_r.iter_mut().for_each(|v| *v = 0.0);
        g.d_dr.iter_mut().for_each(|v| *v = 0.0);
        g.d_r[0] += core_grad;
    }

    for i in 0..grid.len() - 1 {
        let (x0, x1) = (grid[i], grid[i + 1]);
        let h = x1 - x0;
        for (s, w) in rule.unit() {
            let b = HermiteBasis::at(s);
            let x = x0 + h * s;
            let (u, v) = b.eval(h, r[i], dr[i], r[i + 1], dr[i + 1]);
            let d = mf * u * v / x;
            let rv = rho.eval(d);
            let wt = two_pi * w * h * x;
            dir += wt * 0.5 * (v * v + m2 * u * u / (x * x));
            pen += wt * rv.rho;
            if let Some(g) = grad.as_deref_mut() {
                let du = wt * (m2 * u / (x * x) + rv.drho * mf * v / x);
                let dv = wt * (v + rv.drho * mf * u / x);
                g.d_r[i] += du * b.h00 + dv * b.d00 / h;
                g.d_r[i + 1] += du * b.h01 + dv * b.d01 / h;
                g.d_dr[i] += du * b.h10 * h + dv * b.d10;
                g.d_dr[i + 1] += du * b.h11 * h + dv * b.d11;
            }
        }
    }
    (dir, pen)
}

/// `2 pi * integral over (0, 1) of [ (r'^2 + M^2 r^2 / R^2) / 2 + rho(M r r' / R) ] R dR`.
///
/// Cells use cubic Hermite reconstruction with the stored slopes and
/// five-point Gauss-Legendre; `[0, R_0]` uses the power law through `r_0`.
/// The error estimate is the change when every other node is dropped.
pub fn radial_energy(p: &RadialProfile, rho: &RhoSpec) -> EnergyReport {
    let (dir, pen) = radial_parts(&p.grid, &p.r, &p.dr, p.m, rho, None);
    let n = p.len();
    let keep: Vec<usize> = (0..n).filter(|i| i % 2 == 0 || *i == n - 1).collect();
    let est = if keep.len() >= 2 && keep.len() < n {
        let pick = |v: &[f64]| keep.iter().map(|&i| v[i]).collect::<Vec<_>>();
        let (cd, cp) = radial_parts(&pick(&p.grid), &pick(&p.r), &pick(&p.dr), p.m, rho, None);
        ((cd + cp) - (dir + pen)).abs()
    } else {
        0.0
    };
    EnergyReport::new(dir, pen, est)
}

/// Energy of a map sampled on a polar mesh, with finite-difference gradients.
pub fn full_energy(u: &PolarMesh<Vec2>, rho: &RhoSpec) -> EnergyReport {
    let g = gradient(u);
    let dir = |_: f64, _: f64, a: crate::algebra::Mat2| 0.5 * a.frobenius_sq();
    let pen = |_: f64, _: f64, a: crate::algebra::Mat2| rho.rho(a.det());
    let (d, ed) = integrate_rings(&g.ring_integrals(dir), &g.ring_integrals_coarse(dir));
    let (p, ep) = integrate_rings(&g.ring_integrals(pen), &g.ring_integrals_coarse(pen));
    EnergyReport::new(d, p, ed + ep)
}

/// Samples the radial map `r(R) e_R(M theta)` on a polar mesh.
pub fn embed_profile(p: &RadialProfile, n_r: usize, n_theta: usize) -> PolarMesh<Vec2> {
    let mf = p.m as f64;
    PolarMesh::sample(n_r, n_theta, |x, t| {
        let r = if x < p.grid[0] {
            p.r[0] * (x / p.grid[0]).powi(p.m as i32)
        } else {
            p.eval(x).0
        };
        crate::algebra::e_r(mf * t) * r
    })
    .expect("mesh sizes validated by caller")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::e_r;
    use crate::quadrature::log_grid;
    use crate::rho::build_rho;

    fn identity_profile(n: usize) -> RadialProfile {
        RadialProfile::from_fn(1, log_grid(1e-6, n), |x| (x, 1.0)).unwrap()
    }

    #[test]
    fn identity_energy_closed_form() {
        let rho = build_rho(1.0, 1.0, 0.0).unwrap();
        let e = radial_energy(&identity_profile(512), &rho);
        assert!((e.total - 1.5 * PI).abs() < 1e-12, "{}", e.total);
        assert!((e.total - 4.712389).abs() < 1e-6);
        assert!((e.total - e.dirichlet_part - e.rho_part).abs() < 1e-12);

        let rho = build_rho(1.0, 1.0, 0.5).unwrap();
        let e = radial_energy(&identity_profile(512), &rho);
        assert!((e.total - 3.926991).abs() < 1e-6);
    }

    #[test]
    fn ramp_on_last_cell_is_positive() {
        let rho = build_rho(1.0, 1.0, 0.0).unwrap();
        let grid = log_grid(1e-6, 64);
        let n = grid.len();
        let h = grid[n - 1] - grid[n - 2];
        let mut r = vec![0.0; n];
        let mut dr = vec![0.0; n];
        r[n - 1] = 1.0;
        dr[n - 2] = 1.0 / h;
        dr[n - 1] = 1.0 / h;
        let e = radial_energy(&RadialProfile::new(1, grid, r, dr).unwrap(), &rho);
        assert!(e.dirichlet_part.is_finite() && e.dirichlet_part > 1.0 / h);
        assert!(e.rho_part >= 0.0);
    }

    #[test]
    fn full_energy_of_identity() {
        let rho = build_rho(1.0, 1.0, 0.0).unwrap();
        let u = PolarMesh::sample(256, 256, |x, t| e_r(t) * x).unwrap();
        let e = full_energy(&u, &rho);
        assert!((e.total / (1.5 * PI) - 1.0).abs() < 1e-4);
    }
}
