//! Radial M-covering stationary points `u = r(R) e_R(M theta)`.
//!
//! The profile solves
//! `M^2 r / R = r' + R r'' + M rho''(d) d' r` on `(0, 1)` with `r(0) = 0`,
//! `r(1) = 1` and `d = M r r' / R`. Integration runs in `t = ln R` on the
//! state `(r, R r')`, seeded with the power law `s R^M` at `R = eps0`, and `s`
//! is found by bracketing and bisection.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::ode::{self, Halt, Tolerances};
use crate::quadrature::{derivative, hermite_interp, log_grid};
use crate::rho::RhoSpec;

/// Samples of `r` and `r'` on radii increasing to 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialProfile {
    pub m: u32,
    pub grid: Vec<f64>,
    pub r: Vec<f64>,
    pub dr: Vec<f64>,
}

impl RadialProfile {
    /// Checks shapes and the grid; `r(1) = 1` is not enforced here.
    pub fn new(m: u32, grid: Vec<f64>, r: Vec<f64>, dr: Vec<f64>) -> Result<Self> {
        if m == 0 {
            return Err(invalid("winding number M must be at least 1"));
        }
        if grid.len() < 2 || r.len() != grid.len() || dr.len() != grid.len() {
            return Err(invalid("profile arrays must share a length of at least 2"));
        }
        if !(grid[0] > 0.0) || grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(invalid("grid radii must be positive and strictly increasing"));
        }
        if (grid[grid.len() - 1] - 1.0).abs() > 1e-12 {
            return Err(invalid("grid must end at R = 1"));
        }
        Ok(Self { m, grid, r, dr })
    }

    /// Samples a closure `R -> (r, r')` on `grid`.
    pub fn from_fn(m: u32, grid: Vec<f64>, f: impl Fn(f64) -> (f64, f64)) -> Result<Self> {
        let (r, dr) = grid.iter().map(|&x| f(x)).unzip();
        Self::new(m, grid, r, dr)
    }

    /// Nodal values with slopes from three-point differences.
    pub fn from_values(m: u32, grid: Vec<f64>, r: Vec<f64>) -> Result<Self> {
        if grid.len() < 3 {
            return Err(invalid("at least three nodes are needed for difference slopes"));
        }
        let dr = derivative(&grid, &r);
        Self::new(m, grid, r, dr)
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn r_last(&self) -> f64 {
        self.r[self.r.len() - 1]
    }

    /// Cubic Hermite reconstruction `(r, r')` at `radius`.
    pub fn eval(&self, radius: f64) -> (f64, f64) {
        hermite_interp(&self.grid, &self.r, &self.dr, radius)
    }

    /// `d = M r r' / R` at each node.
    pub fn det(&self) -> Vec<f64> {
        let m = self.m as f64;
        self.grid
            .iter()
            .zip(self.r.iter().zip(&self.dr))
            .map(|(&x, (&r, &dr))| m * r * dr / x)
            .collect()
    }

    /// Largest pointwise distance between the nodal values of two profiles on the same grid.
    pub fn sup_distance(&self, other: &RadialProfile) -> f64 {
        self.r
            .iter()
            .zip(&other.r)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Whether `r` vanishes identically near the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum LiftOff {
    Immediate,
    Delayed { delta: f64 },
}

/// The ball where `rho(d)` is still zero, on which `r = a (R / delta)^M`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PenaltyCore {
    pub delta: f64,
    pub a: f64,
}

/// Derived fields along a profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BvpDiagnostics {
    pub d: Vec<f64>,
    pub ddot: Vec<f64>,
    pub z: Vec<f64>,
    pub zdot: Vec<f64>,
    pub lift_off: LiftOff,
    /// Core of a delayed penalty, when `d` starts below the delay and later crosses it.
    pub penalty_core: Option<PenaltyCore>,
    pub dm_estimate: f64,
    pub residual_sup: f64,
}

impl BvpDiagnostics {
    /// Lift-off of either the profile or the penalty: a vanishing profile wins,
    /// otherwise a penalty core reports its radius.
    pub fn lift_off_with_penalty(&self) -> LiftOff {
        match (self.lift_off, self.penalty_core) {
            (LiftOff::Immediate, Some(core)) => LiftOff::Delayed { delta: core.delta },
            (l, _) => l,
        }
    }

    /// Number of sign changes of `z'` along the grid, ignoring values below `floor`.
    pub fn zdot_sign_changes(&self, floor: f64) -> usize {
        let scale = self.zdot.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let mut last = 0i8;
        let mut changes = 0;
        for &v in &self.zdot {
            if v.abs() <= floor * scale {
                continue;
            }
            let s = if v > 0.0 { 1 } else { -1 };
            if last != 0 && s != last {
                changes += 1;
            }
            last = s;
        }
        changes
    }
}

/// Solver settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BvpOptions {
    pub eps0: f64,
    pub n_nodes: usize,
    pub rtol: f64,
    pub tol_residual: f64,
    pub s_max: f64,
    pub s_tol: f64,
    pub liftoff_tol: f64,
}

impl Default for BvpOptions {
    fn default() -> Self {
        Self {
            eps0: 1e-6,
            n_nodes: 512,
            rtol: 1e-9,
            tol_residual: 1e-6,
            s_max: (1u64 << 20) as f64,
            s_tol: 1e-12,
            liftoff_tol: 1e-8,
        }
    }
}

impl BvpOptions {
    fn validate(&self) -> Result<()> {
        if !(self.eps0 > 0.0 && self.eps0 < 0.5) {
            return Err(invalid(format!("eps0 must lie in (0, 0.5), got {}", self.eps0)));
        }
        if self.n_nodes < 16 {
            return Err(invalid("at least 16 grid nodes are required"));
        }
        if !(self.rtol > 0.0 && self.tol_residual > 0.0 && self.s_max >= 1.0 && self.s_tol > 0.0) {
            return Err(invalid("tolerances must be positive and s_max at least 1"));
        }
        Ok(())
    }
}

/// A solved boundary value problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BvpSolution {
    pub s_star: f64,
    pub profile: RadialProfile,
    pub diagnostics: BvpDiagnostics,
}

impl BvpSolution {
    pub fn converged(&self, tol_residual: f64) -> bool {
        self.diagnostics.residual_sup < tol_residual
    }
}

/// `d' = M [(R r' - r)^2 + (M^2 - 1) r^2] / (R^3 + M^2 rho''(d) r^2 R)`.
pub fn ddot_closed_form(radius: f64, r: f64, dr: f64, m: u32, rho: &RhoSpec) -> f64 {
    let mf = m as f64;
    let d = mf * r * dr / radius;
    let num = mf * ((radius * dr - r).powi(2) + (mf * mf - 1.0) * r * r);
    let den = radius.powi(3) + mf * mf * rho.ddrho(d) * r * r * radius;
    num / den
}

/// `r''` from the Euler-Lagrange equation.
pub fn ode_rhs(radius: f64, r: f64, dr: f64, m: u32, rho: &RhoSpec) -> f64 {
    let mf = m as f64;
    let d = mf * r * dr / radius;
    let dd = ddot_closed_form(radius, r, dr, m, rho);
    (mf * mf * r / radius - dr - mf * rho.ddrho(d) * dd * r) / radius
}

/// Right-hand side in `t = ln R` for the state `(r, w)` with `w = R r'`.
fn log_rhs(t: f64, y: &[f64; 2], m: u32, rho: &RhoSpec) -> [f64; 2] {
    let radius = t.exp();
    let (r, w) = (y[0], y[1]);
    let mf = m as f64;
    let r2 = radius * radius;
    let d = mf * r * w / r2;
    let k = rho.ddrho(d);
    let dw = if k == 0.0 {
        mf * mf * r
    } else {
        // R d' from the closed form, scaled to avoid the small-R cancellation.
        let rdd = mf * ((w - r).powi(2) + (mf * mf - 1.0) * r * r) / (r2 + mf * mf * k * r * r);
        mf * mf * r - mf * k * rdd * r
    };
    [w, dw]
}

const DIVERGENCE_BOUND: f64 = 1e6;

fn integrate_log(
    m: u32,
    rho: &RhoSpec,
    t0: f64,
    y0: [f64; 2],
    ts: &[f64],
    rtol: f64,
) -> std::result::Result<Vec<[f64; 2]>, Halt> {
    let tol = Tolerances {
        rtol,
        ..Tolerances::default()
    };
    ode::integrate(
        |t, y| log_rhs(t, y, m, rho),
        t0,
        y0,
        ts,
        tol,
        |y| y[0].abs() <= DIVERGENCE_BOUND && y[0].is_finite() && y[1].is_finite(),
    )
}

fn shoot_with(m: u32, rho: &RhoSpec, s: f64, grid: &[f64], rtol: f64) -> Result<RadialProfile> {
    if !(s >= 0.0) {
        return Err(invalid(format!("shooting parameter must be nonnegative, got {s}")));
    }
    let eps0 = grid[0];
    let mf = m as f64;
    let r0 = s * eps0.powi(m as i32);
    let ts: Vec<f64> = grid.iter().map(|x| x.ln()).collect();
    let states = integrate_log(m, rho, ts[0], [r0, mf * r0], &ts[1..], rtol).map_err(|_| Error::Diverged { s })?;
    let mut r = Vec::with_capacity(grid.len());
    let mut dr = Vec::with_capacity(grid.len());
    r.push(r0);
    dr.push(mf * r0 / eps0);
    for (x, y) in grid[1..].iter().zip(&states) {
        r.push(y[0]);
        dr.push(y[1] / x);
    }
    RadialProfile::new(m, grid.to_vec(), r, dr)
}

/// Integrates from `eps0` to 1 from the seed `r = s eps0^M`, `r' = s M eps0^(M-1)`,
/// sampling on a geometric grid of `n_nodes` radii.
pub fn shoot(m: u32, rho: &RhoSpec, s: f64, eps0: f64, n_nodes: usize) -> Result<RadialProfile> {
    if m == 0 {
        return Err(invalid("winding number M must be at least 1"));
    }
    if !(eps0 > 0.0 && eps0 < 1.0) || n_nodes < 2 {
        return Err(invalid("need 0 < eps0 < 1 and at least two nodes"));
    }
    shoot_with(m, rho, s, &log_grid(eps0, n_nodes), BvpOptions::default().rtol)
}

/// Finds the seed amplitude `s*` with `r_{s*}(1) = 1` and returns the profile
/// together with its diagnostics.
pub fn solve_bvp(m: u32, rho: &RhoSpec, opts: &BvpOptions) -> Result<BvpSolution> {
    if m == 0 {
        return Err(invalid("winding number M must be at least 1"));
    }
    opts.validate()?;
    let grid = log_grid(opts.eps0, opts.n_nodes);
    // A diverged trajectory has overshot the boundary value.
    let end_value = |s: f64| match shoot_with(m, rho, s, &grid, opts.rtol) {
        Ok(p) => Ok(p.r_last()),
        Err(Error::Diverged { .. }) => Ok(f64::INFINITY),
        Err(e) => Err(e),
    };

    let mut lo = 0.0;
    let mut hi = 1.0;
    loop {
        if end_value(hi)? >= 1.0 {
            break;
        }
        lo = hi;
        hi *= 2.0;
        if hi > opts.s_max {
            return Err(Error::NoBracket { s_max: opts.s_max });
        }
    }
    for _ in 0..200 {
        if hi - lo <= opts.s_tol * hi.max(1.0) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if end_value(mid)? >= 1.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let a = end_value(lo)?;
    let b = end_value(hi)?;
    let s_star = if b.is_finite() && b > a {
        lo + (hi - lo) * (1.0 - a) / (b - a)
    } else {
        hi
    };
    let mut profile = shoot_with(m, rho, s_star, &grid, opts.rtol)?;
    let n = profile.len();
    profile.r[n - 1] = 1.0;
    let diagnostics = diagnostics_with(&profile, rho, opts.liftoff_tol, opts.rtol);
    Ok(BvpSolution {
        s_star,
        profile,
        diagnostics,
    })
}

/// Scan `s -> r_s(1) - 1` on `[0, s_hi]` and return the brackets where it changes sign.
pub fn scan_roots(m: u32, rho: &RhoSpec, s_hi: f64, n_samples: usize, opts: &BvpOptions) -> Result<Vec<(f64, f64)>> {
    let grid = log_grid(opts.eps0, opts.n_nodes);
    let mut out = Vec::new();
    let mut prev: Option<(f64, f64)> = None;
    for k in 0..=n_samples {
        let s = s_hi * k as f64 / n_samples as f64;
        let g = match shoot_with(m, rho, s, &grid, opts.rtol) {
            Ok(p) => p.r_last() - 1.0,
            Err(Error::Diverged { .. }) => f64::INFINITY,
            Err(e) => return Err(e),
        };
        if let Some((sp, gp)) = prev {
            if (gp < 0.0) != (g < 0.0) {
                out.push((sp, s));
            }
        }
        prev = Some((s, g));
    }
    Ok(out)
}

/// Computes `d`, `d'`, `z`, `z'`, lift-off data, `D_M` and the ODE residual.
pub fn diagnostics(p: &RadialProfile, rho: &RhoSpec) -> BvpDiagnostics {
    let o = BvpOptions::default();
    diagnostics_with(p, rho, o.liftoff_tol, o.rtol)
}

fn diagnostics_with(p: &RadialProfile, rho: &RhoSpec, liftoff_tol: f64, rtol: f64) -> BvpDiagnostics {
    let m = p.m;
    let mf = m as f64;
    let d = p.det();
    let ddot: Vec<f64> = (0..p.len())
        .map(|i| ddot_closed_form(p.grid[i], p.r[i], p.dr[i], m, rho))
        .collect();
    let z: Vec<f64> = (0..p.len())
        .map(|i| {
            let (x, r, dr) = (p.grid[i], p.r[i], p.dr[i]);
            0.5 * dr * dr + mf * mf * r * r / (2.0 * x * x) + rho.f_aux(d[i])
        })
        .collect();
    let z_fd = derivative(&p.grid, &z);
    let zdot: Vec<f64> = (0..p.len())
        .map(|i| {
            let (x, r, dr) = (p.grid[i], p.r[i], p.dr[i]);
            if r > 1e-10 {
                let q = x * dr / r;
                -(r * r / x.powi(3)) * (q * q - 2.0 * mf * mf * q + mf * mf)
            } else {
                z_fd[i]
            }
        })
        .collect();
    let dm_estimate =
        p.r.iter()
            .position(|&r| r > liftoff_tol)
            .map_or(f64::NAN, |i| p.grid[i] * p.dr[i] / p.r[i]);
    let penalty_core = penalty_core(p, &d, rho);
    let residual_sup = ode_residual_with(p, rho, rtol).into_iter().fold(0.0, f64::max);
    BvpDiagnostics {
        lift_off: classify_liftoff(p, liftoff_tol),
        d,
        ddot,
        z,
        zdot,
        penalty_core,
        dm_estimate,
        residual_sup,
    }
}

fn penalty_core(p: &RadialProfile, d: &[f64], rho: &RhoSpec) -> Option<PenaltyCore> {
    if rho.is_immediate() {
        return None;
    }
    let delay = rho.delay();
    let i = d.iter().position(|&v| v > delay)?;
    if i == 0 {
        return None;
    }
    let (x, r, di) = (p.grid[i - 1], p.r[i - 1], d[i - 1]);
    let delta = if p.m >= 2 && di > 0.0 {
        // Inside the core r is a multiple of R^M, so d grows like R^(2M - 2).
        x * (delay / di).powf(1.0 / (2.0 * p.m as f64 - 2.0))
    } else {
        let (t0, t1) = (x.ln(), p.grid[i].ln());
        let w = (delay - di) / (d[i] - di);
        (t0 + w * (t1 - t0)).exp()
    };
    let a = if p.m >= 2 && di > 0.0 {
        r * (delta / x).powi(p.m as i32)
    } else {
        p.eval(delta).0
    };
    Some(PenaltyCore { delta, a })
}

/// How well a profile matches `a (R / delta)^M` on its penalty core.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoreFit {
    /// Largest relative deviation from the power law over nodes in `(0, delta]`.
    pub fit_error: f64,
    /// Relative mismatch of `(r, R r')` at `delta` between the power law and the
    /// outer solution integrated back from the first node past `delta`.
    pub c1_mismatch: f64,
}

/// Compares the profile against the power law on its penalty core.
pub fn core_fit(p: &RadialProfile, rho: &RhoSpec, core: &PenaltyCore) -> Result<CoreFit> {
    let PenaltyCore { delta, a } = *core;
    if !(delta > 0.0 && delta < 1.0 && a > 0.0) {
        return Err(invalid("penalty core must have 0 < delta < 1 and a > 0"));
    }
    let mf = p.m as f64;
    let fit_error = p
        .grid
        .iter()
        .zip(&p.r)
        .take_while(|(&x, _)| x <= delta)
        .map(|(&x, &r)| {
            let model = a * (x / delta).powi(p.m as i32);
            (r - model).abs() / model
        })
        .fold(0.0, f64::max);
    let j = p
        .grid
        .iter()
        .position(|&x| x > delta)
        .ok_or_else(|| invalid("no node lies beyond the penalty core"))?;
    let rtol = BvpOptions::default().rtol * 1e-2;
    let back = integrate_log_backward(
        p.m,
        rho,
        p.grid[j].ln(),
        [p.r[j], p.grid[j] * p.dr[j]],
        delta.ln(),
        rtol,
    )
    .map_err(|_| Error::Diverged { s: a })?;
    let c1_mismatch = ((back[0] - a) / a).abs().max(((back[1] - mf * a) / (mf * a)).abs());
    Ok(CoreFit { fit_error, c1_mismatch })
}

fn integrate_log_backward(
    m: u32,
    rho: &RhoSpec,
    t_from: f64,
    y0: [f64; 2],
    t_to: f64,
    rtol: f64,
) -> std::result::Result<[f64; 2], Halt> {
    let tol = Tolerances {
        rtol,
        ..Tolerances::default()
    };
    let f = |tau: f64, y: &[f64; 2]| {
        let v = log_rhs(-tau, y, m, rho);
        [-v[0], -v[1]]
    };
    ode::integrate(f, -t_from, y0, &[-t_to], tol, |y| y[0].is_finite() && y[1].is_finite()).map(|v| v[0])
}

/// Classifies lift-off: a node counts as vanished when `r <= tol * R^M`, so a
/// power law `s R^M` with `s` of order one is never mistaken for zero.
///
/// Returns `Delayed(delta)` with `delta` the last node of the leading vanished
/// run when that run extends past the first node.
pub fn classify_liftoff(p: &RadialProfile, tol: f64) -> LiftOff {
    let run = p
        .grid
        .iter()
        .zip(&p.r)
        .take_while(|(&x, &r)| r <= tol * x.powi(p.m as i32))
        .count();
    if run <= 1 {
        LiftOff::Immediate
    } else {
        LiftOff::Delayed { delta: p.grid[run - 1] }
    }
}

/// Per-cell relative defect of the profile as a solution of the ODE: each
/// cell is re-integrated from its left state and compared with the right state.
pub fn ode_residual(p: &RadialProfile, rho: &RhoSpec) -> Vec<f64> {
    ode_residual_with(p, rho, BvpOptions::default().rtol)
}

fn ode_residual_with(p: &RadialProfile, rho: &RhoSpec, rtol: f64) -> Vec<f64> {
    // Integrate one notch tighter than the solver so the check is not its own noise.
    let rtol = rtol * 1e-2;
    (0..p.len() - 1)
        .map(|i| {
            let (x0, x1) = (p.grid[i], p.grid[i + 1]);
            let y0 = [p.r[i], x0 * p.dr[i]];
            let y1 = [p.r[i + 1], x1 * p.dr[i + 1]];
            let scale = y1[0].abs().max(y1[1].abs()).max(y0[0].abs()).max(y0[1].abs());
            if scale == 0.0 {
                return 0.0;
            }
            match integrate_log(p.m, rho, x0.ln(), y0, &[x1.ln()], rtol) {
                Ok(v) => ((v[0][0] - y1[0]).abs()).max((v[0][1] - y1[1]).abs()) / scale,
                Err(_) => f64::INFINITY,
            }
        })
        .collect()
}

/// ODE residual of `r_eps(R) = r(eps R) / eps` on the rescaled nodes inside `(0, 1]`.
pub fn rescale_check(p: &RadialProfile, rho: &RhoSpec, eps: f64) -> Result<f64> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(invalid(format!("rescaling factor must lie in (0, 1), got {eps}")));
    }
    let mut grid = Vec::new();
    let mut r = Vec::new();
    let mut dr = Vec::new();
    for i in 0..p.len() {
        if p.grid[i] <= eps * (1.0 + 1e-12) {
            grid.push(p.grid[i] / eps);
            r.push(p.r[i] / eps);
            dr.push(p.dr[i]);
        }
    }
    if grid.len() < 2 {
        return Err(invalid("rescaled profile has fewer than two nodes"));
    }
    let scaled = RadialProfile { m: p.m, grid, r, dr };
    Ok(ode_residual(&scaled, rho).into_iter().fold(0.0, f64::max))
}

/// On the sub-interval near 0 where `z' >= 0` and `r > tol`, checks
/// `M^2 - M sqrt(M^2 - 1) <= R r'/r <= M^2 + M sqrt(M^2 - 1)`.
pub fn z_interval_bound_check(p: &RadialProfile, diag: &BvpDiagnostics) -> Result<bool> {
    if p.m < 2 {
        return Err(invalid("the interval bound needs M >= 2"));
    }
    let (lo, hi) = z_interval_bounds(p.m);
    let slack = 1e-6;
    let tol = BvpOptions::default().liftoff_tol;
    for i in 0..p.len() {
        if diag.zdot[i] < 0.0 {
            break;
        }
        if p.r[i] <= tol {
            continue;
        }
        let q = p.grid[i] * p.dr[i] / p.r[i];
        if q < lo - slack || q > hi + slack {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Roots `M^2 -+ M sqrt(M^2 - 1)` of the quadratic governing the sign of `z'`.
pub fn z_interval_bounds(m: u32) -> (f64, f64) {
    let mf = m as f64;
    let root = mf * (mf * mf - 1.0).sqrt();
    (mf * mf - root, mf * mf + root)
}

/// A candidate lift-off solution vanishing on `[0, delta]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DelayedCandidate {
    pub delta: f64,
    /// `r'(delta+)` hitting `r(1) = 1`.
    pub slope: f64,
    /// Jump `delta r'(delta+)` of the flux `R r' + M rho'(d) r` at `delta`.
    pub flux_jump: f64,
}

/// Result of the delayed-lift-off search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DelayedSearch {
    pub candidates: Vec<DelayedCandidate>,
    /// Number of grid radii whose flux jump is below `flux_tol`.
    pub admissible: usize,
    pub flux_tol: f64,
}

/// For each `delta` on a uniform grid in `(0, 1)`, shoots from `r(delta) = 0`
/// in the slope `r'(delta)` to meet `r(1) = 1`, and reports the flux jump that
/// the zero extension would carry at `delta`.
pub fn delayed_search(m: u32, rho: &RhoSpec, n_delta: usize, flux_tol: f64) -> Result<DelayedSearch> {
    if m == 0 || n_delta == 0 {
        return Err(invalid("need M >= 1 and a nonempty delta grid"));
    }
    let rtol = BvpOptions::default().rtol;
    let mut candidates = Vec::with_capacity(n_delta);
    for k in 1..=n_delta {
        let delta = k as f64 / (n_delta + 1) as f64;
        let end = |c: f64| -> f64 {
            match integrate_log(m, rho, delta.ln(), [0.0, delta * c], &[0.0], rtol) {
                Ok(v) => v[0][0],
                Err(_) => f64::INFINITY,
            }
        };
        let (mut lo, mut hi) = (0.0, 1.0);
        while end(hi) < 1.0 && hi < 1e12 {
            lo = hi;
            hi *= 2.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if hi - lo <= 1e-13 * hi || mid <= lo || mid >= hi {
                break;
            }
            if end(mid) >= 1.0 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let slope = 0.5 * (lo + hi);
        candidates.push(DelayedCandidate {
            delta,
            slope,
            flux_jump: delta * slope,
        });
    }
    let admissible = candidates.iter().filter(|c| c.flux_jump < flux_tol).count();
    Ok(DelayedSearch {
        candidates,
        admissible,
        flux_tol,
    })
}
