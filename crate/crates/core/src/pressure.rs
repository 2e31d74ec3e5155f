//! Incompressible side: the buckling functional, pressure gradients for
//! polar-diagonal quadratic forms, and the uniqueness thresholds and checks.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::algebra::{e_r, e_t, Mat2, Vec2};
use crate::error::{invalid, Error, Result};
use crate::polar::{gradient, integrate_rings, PolarMesh};
use crate::quadrature::{ceil_tol, derivative, hermite_interp, GaussRule, HermiteBasis};
use crate::radial_bvp::RadialProfile;
use crate::rho::RhoSpec;

/// Prefactor of the general small-pressure bound `P <= FACTOR * nu`, equal to `sqrt(3) / (2 sqrt(2))`.
pub const SMALL_PRESSURE_FACTOR: f64 = 0.612_372_435_695_794_5;

/// Relative slack used when comparing a computed pressure with a threshold.
const THRESHOLD_SLACK: f64 = 1e-12;

/// `(1/eps) |xi^T x|^2 + eps |adj(xi) x|^2` for a unit vector `x`.
pub fn w_eps_pointwise(xhat: Vec2, xi: &Mat2, eps: f64) -> f64 {
    xi.transpose().apply(xhat).norm_sq() / eps + eps * xi.adj().apply(xhat).norm_sq()
}

/// `p_eps = eps - 1/eps`.
pub fn p_eps(eps: f64) -> Result<f64> {
    if !(eps > 0.0) {
        return Err(invalid(format!("eps must be positive, got {eps}")));
    }
    Ok(eps - 1.0 / eps)
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps >= 1.0) || !eps.is_finite() {
        return Err(invalid(format!("eps must be at least 1, got {eps}")));
    }
    Ok(())
}

/// Buckling energy of a map sampled on a polar mesh.
pub fn buckling_energy(u: &PolarMesh<Vec2>, eps: f64) -> Result<f64> {
    check_eps(eps)?;
    let g = gradient(u);
    let w = |_: f64, t: f64, a: Mat2| w_eps_pointwise(e_r(t), &a, eps);
    Ok(integrate_rings(&g.ring_integrals(w), &g.ring_integrals_coarse(w)).0)
}

/// Twist map `v = R e_R(theta + k(R))` with `k(1) = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TwistProfile {
    pub grid: Vec<f64>,
    pub k: Vec<f64>,
    pub dk: Vec<f64>,
    pub eps: f64,
}

impl TwistProfile {
    pub fn new(grid: Vec<f64>, k: Vec<f64>, dk: Vec<f64>, eps: f64) -> Result<Self> {
        check_eps(eps)?;
        if grid.len() < 2 || k.len() != grid.len() || dk.len() != grid.len() {
            return Err(invalid("twist arrays must share a length of at least 2"));
        }
        if grid[0] < 0.0 || grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(invalid("twist grid must be nonnegative and increasing"));
        }
        if (grid[grid.len() - 1] - 1.0).abs() > 1e-12 {
            return Err(invalid("twist grid must end at R = 1"));
        }
        if k[k.len() - 1].abs() > 1e-12 {
            return Err(invalid("twist must vanish at R = 1"));
        }
        Ok(Self { grid, k, dk, eps })
    }

    /// Samples `R -> (k, k')` on `grid`.
    pub fn from_fn(grid: Vec<f64>, eps: f64, f: impl Fn(f64) -> (f64, f64)) -> Result<Self> {
        let (k, dk) = grid.iter().map(|&x| f(x)).unzip();
        Self::new(grid, k, dk, eps)
    }

    pub fn eval(&self, radius: f64) -> (f64, f64) {
        hermite_interp(&self.grid, &self.k, &self.dk, radius)
    }
}

/// Gradient of the twist map at angle 0.
fn twist_gradient(radius: f64, k: f64, dk: f64) -> Mat2 {
    let x = Vec2::new(1.0, 0.0);
    let y = Vec2::new(0.0, 1.0);
    e_r(k).outer(x) + (e_t(k) * (radius * dk)).outer(x) + e_t(k).outer(y)
}

/// Buckling energy of a twist map; the density depends on `R` only.
pub fn buckling_energy_twist(tp: &TwistProfile) -> f64 {
    let rule = GaussRule::new(5);
    let x = Vec2::new(1.0, 0.0);
    let mut total = 0.0;
    if tp.grid[0] > 0.0 {
        // Extend by the constant twist k(R_0) on [0, R_0].
        let a = twist_gradient(0.0, tp.k[0], 0.0);
        total += PI * tp.grid[0].powi(2) * w_eps_pointwise(x, &a, tp.eps);
    }
    for i in 0..tp.grid.len() - 1 {
        let (x0, x1) = (tp.grid[i], tp.grid[i + 1]);
        let h = x1 - x0;
        for (s, w) in rule.unit() {
            let (k, dk) = HermiteBasis::at(s).eval(h, tp.k[i], tp.dk[i], tp.k[i + 1], tp.dk[i + 1]);
            let radius = x0 + h * s;
            let a = twist_gradient(radius, k, dk);
            total += 2.0 * PI * w * h * radius * w_eps_pointwise(x, &a, tp.eps);
        }
    }
    total
}

/// `lambda'(R) R = [p (sin^2 k / eps - eps cos^2 k) - R^2 k'^2] / (1/eps + p cos^2 k)`.
pub fn twist_pressure_slope(tp: &TwistProfile, radius: f64) -> f64 {
    let eps = tp.eps;
    let p = eps - 1.0 / eps;
    let (k, dk) = tp.eval(radius);
    let (s, c) = k.sin_cos();
    (p * (s * s / eps - eps * c * c) - radius * radius * dk * dk) / (1.0 / eps + p * c * c)
}

/// A coefficient `c(theta)` together with its derivative.
#[derive(Clone)]
pub struct Coefficient {
    value: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    derivative: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl fmt::Debug for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Coefficient(c(0) = {})", (self.value)(0.0))
    }
}

impl Coefficient {
    pub fn constant(c: f64) -> Self {
        Self::new(move |_| c, |_| 0.0)
    }

    pub fn new(
        value: impl Fn(f64) -> f64 + Send + Sync + 'static,
        derivative: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            value: Arc::new(value),
            derivative: Arc::new(derivative),
        }
    }

    pub fn at(&self, theta: f64) -> f64 {
        (self.value)(theta)
    }

    pub fn derivative_at(&self, theta: f64) -> f64 {
        (self.derivative)(theta)
    }
}

/// Quadratic integrand diagonal in the polar frame:
/// `c_rr xi_RR^2 + c_rt xi_Rt^2 + c_tr xi_tR^2 + c_tt xi_tt^2`.
#[derive(Debug, Clone)]
pub struct PolarQuadForm {
    pub nu: f64,
    pub c_rr: Coefficient,
    pub c_rt: Coefficient,
    pub c_tr: Coefficient,
    pub c_tt: Coefficient,
    /// `a` when the coefficients are the constants `(a, 1, a, 1) nu`.
    pub fast_path: Option<f64>,
}

impl PolarQuadForm {
    /// General form; each coefficient must stay above `nu` on a sampled circle.
    pub fn new(nu: f64, c_rr: Coefficient, c_rt: Coefficient, c_tr: Coefficient, c_tt: Coefficient) -> Result<Self> {
        if !(nu > 0.0) {
            return Err(invalid(format!("nu must be positive, got {nu}")));
        }
        let n = 1024;
        for c in [&c_rr, &c_rt, &c_tr, &c_tt] {
            let lo = (0..n)
                .map(|j| c.at(2.0 * PI * j as f64 / n as f64))
                .fold(f64::INFINITY, f64::min);
            if lo < nu * (1.0 - 1e-12) {
                return Err(invalid(format!("coefficient drops to {lo} below nu = {nu}")));
            }
        }
        Ok(Self {
            nu,
            c_rr,
            c_rt,
            c_tr,
            c_tt,
            fast_path: None,
        })
    }

    /// The constant form `(a, 1, a, 1) nu` of the N-cover example.
    pub fn ncover(nu: f64, a: f64) -> Result<Self> {
        if !(a >= 1.0) {
            return Err(invalid(format!("a must be at least 1, got {a}")));
        }
        let mut f = Self::new(
            nu,
            Coefficient::constant(a * nu),
            Coefficient::constant(nu),
            Coefficient::constant(a * nu),
            Coefficient::constant(nu),
        )?;
        f.fast_path = Some(a);
        Ok(f)
    }

    /// `M(x) xi . xi` at angle `theta`.
    pub fn density(&self, theta: f64, xi: &Mat2) -> f64 {
        let (er, et) = (e_r(theta), e_t(theta));
        let rr = er.dot(xi.apply(er));
        let rt = er.dot(xi.apply(et));
        let tr = et.dot(xi.apply(er));
        let tt = et.dot(xi.apply(et));
        self.c_rr.at(theta) * rr * rr
            + self.c_rt.at(theta) * rt * rt
            + self.c_tr.at(theta) * tr * tr
            + self.c_tt.at(theta) * tt * tt
    }
}

/// `integral of M(x) grad u . grad u dx` for a map sampled on a polar mesh.
pub fn quadratic_energy(u: &PolarMesh<Vec2>, form: &PolarQuadForm) -> f64 {
    let g = gradient(u);
    let w = |_: f64, t: f64, a: Mat2| form.density(t, &a);
    integrate_rings(&g.ring_integrals(w), &g.ring_integrals_coarse(w)).0
}

/// The N-cover map `(R / sqrt(N)) e_R(N theta)`.
pub fn ncover_map(n: u32, radius: f64, theta: f64) -> Vec2 {
    e_r(n as f64 * theta) * (radius / (n as f64).sqrt())
}

fn check_n(n: u32) -> Result<()> {
    if n < 2 {
        return Err(invalid(format!("N must be at least 2, got {n}")));
    }
    Ok(())
}

/// Right-hand sides `h1`, `h2` of the pressure system at angle `theta`.
fn pressure_rhs(form: &PolarQuadForm, n: u32, theta: f64) -> (f64, f64, f64, f64) {
    let nf = n as f64;
    let sn = nf.sqrt();
    let th = (nf - 1.0) * theta;
    let (s, c) = th.sin_cos();
    let (a, b, g, d) = (
        form.c_rr.at(theta),
        form.c_rt.at(theta),
        form.c_tr.at(theta),
        form.c_tt.at(theta),
    );
    let (db, dd) = (form.c_rt.derivative_at(theta), form.c_tt.derivative_at(theta));
    let h1 = sn * db * s + (sn * (nf - 1.0) * b + sn * d - a / sn) * c;
    let h2 = -sn * dd * c + (sn * b + sn * (nf - 1.0) * d - g / sn) * s;
    (h1, h2, s, c)
}

/// Solves the 2x2 pressure system of the N-cover map for
/// `(lambda_theta, lambda_R * R)` at `(R, theta)`.
pub fn ncover_pressure_system(form: &PolarQuadForm, n: u32, _radius: f64, theta: f64) -> Result<(f64, f64)> {
    check_n(n)?;
    let sn = (n as f64).sqrt();
    let (h1, h2, s, c) = pressure_rhs(form, n, theta);
    let m = Mat2::new(-s / sn, sn * c, c / sn, sn * s);
    let det = m.det();
    if det.abs() < 1e-12 {
        return Err(Error::SingularSystem { det });
    }
    let x = m.adj().apply(Vec2::new(h1, h2)) * (1.0 / det);
    Ok((x.x, x.y))
}

/// Explicit solution of the pressure system, written out term by term.
pub fn ncover_pressure_explicit(form: &PolarQuadForm, n: u32, theta: f64) -> Result<(f64, f64)> {
    check_n(n)?;
    let nf = n as f64;
    let sn = nf.sqrt();
    let th = (nf - 1.0) * theta;
    let (s, c) = th.sin_cos();
    let (a, b, g, d) = (
        form.c_rr.at(theta),
        form.c_rt.at(theta),
        form.c_tr.at(theta),
        form.c_tt.at(theta),
    );
    let (db, dd) = (form.c_rt.derivative_at(theta), form.c_tt.derivative_at(theta));
    let big1 = sn * (nf - 1.0) * b + sn * d - a / sn;
    let big2 = sn * b + sn * (nf - 1.0) * d - g / sn;
    let sin2 = (2.0 * th).sin();
    let lam_r_r = (db - dd) * sin2 / 2.0 + (big1 * c * c + big2 * s * s) / sn;
    let lam_t = sn * (big2 - big1) * sin2 / 2.0 - nf * (db * s * s + dd * c * c);
    Ok((lam_t, lam_r_r))
}

/// Which components of the pressure gradient are present.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PressureMode {
    General,
    RadialOnly,
    AngularOnly,
}

/// Sampled `(lambda_theta, lambda_R * R)` and the component-max norm of `grad(lambda) R`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PressureGradient {
    pub radii: Vec<f64>,
    pub thetas: Vec<f64>,
    /// Row-major over `(radius, theta)`.
    pub lam_theta: Vec<f64>,
    pub lam_r_r: Vec<f64>,
    pub sup_norm_p: f64,
}

impl PressureGradient {
    /// `RadialOnly` when `lambda_theta` vanishes, `AngularOnly` when `lambda_R` does.
    pub fn mode(&self) -> PressureMode {
        let sup = |v: &[f64]| v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let floor = 1e-12 * self.sup_norm_p.max(1.0);
        if sup(&self.lam_theta) <= floor {
            PressureMode::RadialOnly
        } else if sup(&self.lam_r_r) <= floor {
            PressureMode::AngularOnly
        } else {
            PressureMode::General
        }
    }
}

/// Pressure gradient of the N-cover map on a tensor grid, through the closed
/// form when the form has one and the linear system otherwise.
pub fn ncover_pressure_field(form: &PolarQuadForm, n: u32, radii: &[f64], thetas: &[f64]) -> Result<PressureGradient> {
    check_n(n)?;
    let mut lam_theta = Vec::with_capacity(radii.len() * thetas.len());
    let mut lam_r_r = Vec::with_capacity(radii.len() * thetas.len());
    for &x in radii {
        for &t in thetas {
            let (lt, lr) = match form.fast_path {
                Some(a) => (0.0, form.nu * (n as f64 - a / n as f64)),
                None => ncover_pressure_system(form, n, x, t)?,
            };
            lam_theta.push(lt);
            lam_r_r.push(lr);
        }
    }
    let sup = |v: &[f64]| v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let sup_norm_p = sup(&lam_theta).max(sup(&lam_r_r));
    Ok(PressureGradient {
        radii: radii.to_vec(),
        thetas: thetas.to_vec(),
        lam_theta,
        lam_r_r,
        sup_norm_p,
    })
}

/// Outcome of a threshold comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdCheck {
    pub threshold: f64,
    pub pass: bool,
    pub strict: bool,
}

/// Small-pressure condition `P <= threshold`, with `threshold` equal to
/// `SMALL_PRESSURE_FACTOR * nu` in general and `nu` when the pressure depends on one variable only.
pub fn small_pressure_check(p: f64, nu: f64, mode: PressureMode) -> Result<ThresholdCheck> {
    if !(p >= 0.0) || !(nu > 0.0) {
        return Err(invalid("need P >= 0 and nu > 0"));
    }
    let threshold = match mode {
        PressureMode::General => SMALL_PRESSURE_FACTOR * nu,
        PressureMode::RadialOnly | PressureMode::AngularOnly => nu,
    };
    Ok(ThresholdCheck {
        threshold,
        pass: p <= threshold * (1.0 + THRESHOLD_SLACK),
        strict: p < threshold * (1.0 - THRESHOLD_SLACK),
    })
}

/// Open interval `(N^2 - N, N^2 + N)` of `a` for which the N-cover map is the unique minimizer.
pub fn admissible_a_range(n: u32) -> Result<(f64, f64)> {
    check_n(n)?;
    let nf = n as f64;
    Ok((nf * nf - nf, nf * nf + nf))
}

/// Closed-form minimal energy `nu pi / 2 (1 + a)(1/N + N)` as stated for the N-cover example.
pub fn ncover_min_energy(nu: f64, a: f64, n: u32) -> Result<f64> {
    check_n(n)?;
    if !(nu > 0.0 && a > 0.0) {
        return Err(invalid("need nu > 0 and a > 0"));
    }
    let nf = n as f64;
    Ok(nu * PI / 2.0 * (1.0 + a) * (1.0 / nf + nf))
}

/// Energy `nu pi (N + a/N)` of the N-cover map under the form `(a, 1, a, 1) nu`.
pub fn ncover_map_energy(nu: f64, a: f64, n: u32) -> Result<f64> {
    check_n(n)?;
    if !(nu > 0.0 && a > 0.0) {
        return Err(invalid("need nu > 0 and a > 0"));
    }
    let nf = n as f64;
    Ok(nu * PI * (nf + a / nf))
}

/// `n = ceil(P / nu)` and `m = ceil(2 sqrt(2) P / (sqrt(3) nu))`.
pub fn hf_thresholds(p: f64, nu: f64) -> Result<(u64, u64)> {
    if !(p >= 0.0) || !(nu > 0.0) {
        return Err(invalid("need P >= 0 and nu > 0"));
    }
    Ok((ceil_tol(p / nu), ceil_tol(p / (SMALL_PRESSURE_FACTOR * nu))))
}

/// `P = sup |q'(R)| R` for `q = rho'(d(R))` and the threshold `ceil(P)`.
pub fn hf_threshold_compressible(p: &RadialProfile, rho: &RhoSpec) -> (f64, u64) {
    let q: Vec<f64> = p.det().iter().map(|&d| rho.drho(d)).collect();
    let dq = derivative(&p.grid, &q);
    let sup = dq.iter().zip(&p.grid).map(|(d, x)| (d * x).abs()).fold(0.0, f64::max);
    (sup, ceil_tol(sup))
}

/// Conditions under which the compressible stationary point is unique.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct UniquenessConditions {
    /// `d >= s0` everywhere.
    pub cond_i: bool,
    /// `d` is constant.
    pub cond_ii: bool,
}

pub fn uniqueness_conditions(p: &RadialProfile, rho: &RhoSpec) -> UniquenessConditions {
    let d = p.det();
    let lo = d.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = d.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    UniquenessConditions {
        cond_i: lo >= rho.s0() - 1e-8,
        cond_ii: hi - lo <= 1e-8,
    }
}

/// Mode classes of the high-frequency condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AdmMode {
    HighModes,
    WithZeroMode,
}

/// Smallest integer `n` with `|D^2 u| R <= n / (4 alpha) |Du|` (high modes), or `m` with
/// `|D^2 u| R <= sqrt(3) m / (8 sqrt(2) alpha) |Du|` (zero mode included), on the mesh.
pub fn adm_condition(grad_norm: &PolarMesh<f64>, hess_norm: &PolarMesh<f64>, alpha: f64, mode: AdmMode) -> Result<u64> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(invalid(format!("alpha must lie in (0, 1], got {alpha}")));
    }
    if grad_norm.n_r() != hess_norm.n_r() || grad_norm.n_theta() != hess_norm.n_theta() {
        return Err(invalid("gradient and Hessian fields live on different meshes"));
    }
    let mut ratio = 0.0f64;
    for i in 0..grad_norm.n_r() {
        let x = grad_norm.radius(i);
        for j in 0..grad_norm.n_theta() {
            let (g, h) = (grad_norm.get(i, j), hess_norm.get(i, j));
            if h * x == 0.0 {
                continue;
            }
            if !(g > 0.0) {
                return Err(invalid("gradient norm must be positive where the Hessian is not"));
            }
            ratio = ratio.max(h * x / g);
        }
    }
    let factor = match mode {
        AdmMode::HighModes => 4.0 * alpha,
        AdmMode::WithZeroMode => 4.0 * alpha / SMALL_PRESSURE_FACTOR,
    };
    Ok(ceil_tol(factor * ratio))
}

/// `sup_R rho'(d(R)) R <= nu`.
pub fn ss_condition_check(p: &RadialProfile, rho: &RhoSpec, nu: f64) -> bool {
    p.det().iter().zip(&p.grid).all(|(&d, &x)| rho.drho(d).abs() * x <= nu)
}

/// Smallest integer `l` with `|sigma_theta| <= l |sigma|` on the mesh.
pub fn estimate_sigma_bound(sigma: &PolarMesh<Mat2>) -> Result<u64> {
    let ds = crate::polar::theta_derivative(sigma);
    let total = sigma.values().len();
    let mut degenerate = 0usize;
    let mut ratio = 0.0f64;
    for (s, d) in sigma.values().iter().zip(ds.values()) {
        let ns = s.frobenius();
        if ns <= 1e-12 {
            degenerate += 1;
            continue;
        }
        ratio = ratio.max(d.frobenius() / ns);
    }
    let fraction = degenerate as f64 / total as f64;
    if fraction > 0.01 {
        return Err(Error::DegenerateField { fraction });
    }
    // Differences of an R-only field are pure rounding.
    Ok(if ratio < 1e-9 { 0 } else { ceil_tol(ratio) })
}
