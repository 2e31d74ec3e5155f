//! Direct minimization of the discretized radial energy.
//!
//! The unknowns are the nodal values `r_i` on the solver's geometric grid;
//! slopes follow from three-point differences, so every iterate is a genuine
//! C^1 profile. Steps follow the gradient preconditioned by the stiffness of
//! the Dirichlet part in `t = ln R`, with an Armijo backtracking search and
//! projection onto `r_i >= 0`, `r(1) = 1`.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::energy::{radial_energy, radial_parts, EnergyReport, RadialGradient};
use crate::error::{invalid, Error, Result};
use crate::quadrature::{log_grid, three_point_weights};
use crate::radial_bvp::RadialProfile;
use crate::rho::RhoSpec;

/// Starting point of the descent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Init {
    /// `r = R`.
    Identity,
    /// `r = s R^M`.
    PowerLaw(f64),
    /// `r = R^M (1 + U)` with independent `U` uniform in `[-1/2, 1/2]`.
    Random(u64),
    /// Explicit nodal values on the grid.
    Values(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinimizeOptions {
    pub grid_size: usize,
    pub eps0: f64,
    pub max_iters: usize,
    pub step0: f64,
    pub tol_grad: f64,
    pub init: Init,
}

impl Default for MinimizeOptions {
    fn default() -> Self {
        Self {
            grid_size: 512,
            eps0: 1e-6,
            max_iters: 20_000,
            step0: 1.0,
            tol_grad: 1e-6,
            init: Init::Identity,
        }
    }
}

/// One accepted step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterRecord {
    pub iter: usize,
    pub energy: f64,
    pub grad_norm: f64,
    pub step: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Minimizer {
    pub profile: RadialProfile,
    pub energy: EnergyReport,
    pub iterations: usize,
    pub grad_norm: f64,
    /// False when the line search stalled before the gradient tolerance was met.
    pub converged: bool,
    pub log: Vec<IterRecord>,
}

const ARMIJO_C: f64 = 1e-4;
const MIN_STEP: f64 = 1e-12;

/// Energy as a function of nodal values, with slopes from three-point differences.
struct Discrete<'a> {
    grid: Vec<f64>,
    weights: Vec<(usize, [f64; 3])>,
    m: u32,
    rho: &'a RhoSpec,
}

impl<'a> Discrete<'a> {
    fn new(grid: Vec<f64>, m: u32, rho: &'a RhoSpec) -> Self {
        let weights = three_point_weights(&grid);
        Self { grid, weights, m, rho }
    }

    fn slopes(&self, r: &[f64]) -> Vec<f64> {
        self.weights
            .iter()
            .map(|(o, w)| w[0] * r[*o] + w[1] * r[o + 1] + w[2] * r[o + 2])
            .collect()
    }

    fn energy(&self, r: &[f64]) -> f64 {
        let dr = self.slopes(r);
        let (d, p) = radial_parts(&self.grid, r, &dr, self.m, self.rho, None);
        d + p
    }

    fn energy_and_gradient(&self, r: &[f64]) -> (f64, Vec<f64>) {
        let dr = self.slopes(r);
        let n = r.len();
        let mut g = RadialGradient {
            d_r: vec![0.0; n],
            d_dr: vec![0.0; n],
        };
        let (d, p) = radial_parts(&self.grid, r, &dr, self.m, self.rho, Some(&mut g));
        let mut grad = g.d_r;
        for (i, (o, w)) in self.weights.iter().enumerate() {
            for k in 0..3 {
                grad[o + k] += w[k] * g.d_dr[i];
            }
        }
        (d + p, grad)
    }

    fn profile(&self, r: Vec<f64>) -> RadialProfile {
        let dr = self.slopes(&r);
        RadialProfile {
            m: self.m,
            grid: self.grid.clone(),
            r,
            dr,
        }
    }
}

/// Analytic gradient of the discrete energy with respect to the nodal values
/// of `p`; the stored slopes are ignored in favour of three-point differences.
pub fn discrete_gradient(p: &RadialProfile, rho: &RhoSpec) -> Vec<f64> {
    Discrete::new(p.grid.clone(), p.m, rho).energy_and_gradient(&p.r).1
}

/// The energy whose gradient [`discrete_gradient`] returns.
pub fn discrete_energy(p: &RadialProfile, rho: &RhoSpec) -> f64 {
    Discrete::new(p.grid.clone(), p.m, rho).energy(&p.r)
}

/// Tridiagonal stiffness of `pi * integral of (r_t^2 + M^2 r^2) dt` with linear
/// elements in `t = ln R`, plus the core term on the first node; the last
/// row is replaced by the identity for the fixed boundary value.
fn preconditioner(grid: &[f64], m: u32) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let n = grid.len();
    let m2 = (m * m) as f64;
    let t: Vec<f64> = grid.iter().map(|x| x.ln()).collect();
    let mut lower = vec![0.0; n];
    let mut diag = vec![0.0; n];
    let mut upper = vec![0.0; n];
    diag[0] = 2.0 * PI * m as f64;
    for i in 0..n - 1 {
        let h = t[i + 1] - t[i];
        let a = 2.0 * PI * (1.0 / h + m2 * h / 3.0);
        let b = 2.0 * PI * (-1.0 / h + m2 * h / 6.0);
        diag[i] += a;
        diag[i + 1] += a;
        upper[i] = b;
        lower[i + 1] = b;
    }
    diag[n - 1] = 1.0;
    lower[n - 1] = 0.0;
    upper[n - 2] = 0.0;
    (lower, diag, upper)
}

fn solve_tridiagonal(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    c[0] = upper[0] / diag[0];
    d[0] = rhs[0] / diag[0];
    for i in 1..n {
        let den = diag[i] - lower[i] * c[i - 1];
        c[i] = if i + 1 < n { upper[i] / den } else { 0.0 };
        d[i] = (rhs[i] - lower[i] * d[i - 1]) / den;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    x
}

fn initial_values(grid: &[f64], m: u32, init: &Init) -> Result<Vec<f64>> {
    let n = grid.len();
    let mi = m as i32;
    let mut r: Vec<f64> = match init {
        Init::Identity => grid.to_vec(),
        Init::PowerLaw(s) => {
            if !(*s >= 0.0) {
                return Err(invalid("power-law amplitude must be nonnegative"));
            }
            grid.iter().map(|x| s * x.powi(mi)).collect()
        }
        Init::Random(seed) => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            grid.iter()
                .map(|x| x.powi(mi) * (1.0 + rng.gen_range(-0.5..0.5)))
                .collect()
        }
        Init::Values(v) => {
            if v.len() != n {
                return Err(invalid("initial values do not match the grid size"));
            }
            v.clone()
        }
    };
    project(&mut r);
    Ok(r)
}

fn project(r: &mut [f64]) {
    let n = r.len();
    for v in r.iter_mut() {
        *v = v.max(0.0);
    }
    r[n - 1] = 1.0;
}

/// Gradient with the fixed node and the active lower bounds removed.
fn projected(r: &[f64], g: &[f64]) -> Vec<f64> {
    let n = r.len();
    let mut out: Vec<f64> = r
        .iter()
        .zip(g)
        .map(|(&x, &gi)| if x <= 0.0 && gi > 0.0 { 0.0 } else { gi })
        .collect();
    out[n - 1] = 0.0;
    out
}

/// Minimizes the radial energy over profiles with `r(1) = 1`, `r >= 0`.
pub fn minimize(m: u32, rho: &RhoSpec, opts: &MinimizeOptions) -> Result<Minimizer> {
    if m == 0 {
        return Err(invalid("winding number M must be at least 1"));
    }
    if opts.grid_size < 16 {
        return Err(invalid("grid_size must be at least 16"));
    }
    if !(opts.tol_grad > 0.0 && opts.step0 > 0.0) {
        return Err(invalid("tol_grad and step0 must be positive"));
    }
    if !(opts.eps0 > 0.0 && opts.eps0 < 0.5) {
        return Err(invalid("eps0 must lie in (0, 0.5)"));
    }
    let grid = log_grid(opts.eps0, opts.grid_size);
    let (lo, di, up) = preconditioner(&grid, m);
    let problem = Discrete::new(grid.clone(), m, rho);
    let mut r = initial_values(&grid, m, &opts.init)?;
    let (mut e, mut g) = problem.energy_and_gradient(&r);
    let mut log = Vec::new();
    let mut grad_norm;

    for iter in 0..=opts.max_iters {
        let pg = projected(&r, &g);
        grad_norm = pg.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        if grad_norm < opts.tol_grad {
            let profile = problem.profile(r);
            return Ok(Minimizer {
                energy: radial_energy(&profile, rho),
                profile,
                iterations: iter,
                grad_norm,
                converged: true,
                log,
            });
        }
        if iter == opts.max_iters {
            break;
        }
        let mut dir = solve_tridiagonal(&lo, &di, &up, &pg);
        dir.iter_mut().for_each(|v| *v = -*v);
        let mut step = opts.step0;
        let mut accepted = None;
        while step >= MIN_STEP {
            let mut trial: Vec<f64> = r.iter().zip(&dir).map(|(x, d)| x + step * d).collect();
            project(&mut trial);
            let decrease: f64 = g
                .iter()
                .zip(trial.iter().zip(&r))
                .map(|(gi, (a, b))| gi * (a - b))
                .sum();
            let et = problem.energy(&trial);
            if et <= e + ARMIJO_C * decrease && decrease < 0.0 {
                accepted = Some((trial, et));
                break;
            }
            step *= 0.5;
        }
        let Some((trial, et)) = accepted else {
            // No descent left at machine precision.
            let profile = problem.profile(r);
            return Ok(Minimizer {
                energy: radial_energy(&profile, rho),
                profile,
                iterations: iter,
                grad_norm,
                converged: false,
                log,
            });
        };
        r = trial;
        let (e_new, g_new) = problem.energy_and_gradient(&r);
        debug_assert!((e_new - et).abs() <= 1e-12 * e_new.abs().max(1.0));
        e = e_new;
        g = g_new;
        log.push(IterRecord {
            iter: iter + 1,
            energy: e,
            grad_norm,
            step,
        });
    }
    let pg = projected(&r, &g);
    grad_norm = pg.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    Err(Error::MaxItersExceeded {
        iters: opts.max_iters,
        grad_norm,
        last: Box::new(problem.profile(r)),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radial_bvp::{solve_bvp, BvpOptions};
    use crate::rho::build_rho;

    fn random_profile(rng: &mut ChaCha8Rng, m: u32, grid: &[f64]) -> RadialProfile {
        let r = grid
            .iter()
            .map(|x| x.powi(m as i32) * (1.0 + rng.gen_range(-0.5..0.5)))
            .collect();
        RadialProfile::from_values(m, grid.to_vec(), r).unwrap()
    }

    /// Fourth-order central difference of the quadrature energy in node `i`.
    fn fd_component(p: &RadialProfile, rho: &RhoSpec, i: usize, h: f64) -> f64 {
        let e = |s: f64| {
            let mut r = p.r.clone();
            r[i] += s;
            radial_energy(&RadialProfile::from_values(p.m, p.grid.clone(), r).unwrap(), rho).total
        };
        (8.0 * (e(h) - e(-h)) - (e(2.0 * h) - e(-2.0 * h))) / (12.0 * h)
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let grid = log_grid(0.05, 24);
        for k in 0..10 {
            let m = 1 + (k % 3) as u32;
            let rho = build_rho([0.25, 1.0, 2.0, 0.5, 10.0][k % 5], 1.0, [0.0, 0.5][k % 2]).unwrap();
            let p = random_profile(&mut rng, m, &grid);
            let g = discrete_gradient(&p, &rho);
            let fd: Vec<f64> = (0..p.len()).map(|i| fd_component(&p, &rho, i, 1e-5)).collect();
            let scale = fd.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            for i in 0..p.len() {
                let rel = (g[i] - fd[i]).abs() / fd[i].abs().max(1e-3 * scale);
                assert!(rel < 1e-6, "profile {k} node {i}: {} vs {}", g[i], fd[i]);
            }
        }
    }

    #[test]
    fn discrete_energy_is_quadrature_of_difference_slopes() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let rho = build_rho(1.0, 1.0, 0.0).unwrap();
        let p = random_profile(&mut rng, 2, &log_grid(1e-4, 64));
        let e = discrete_energy(&p, &rho);
        assert!((e - radial_energy(&p, &rho).total).abs() < 1e-12 * e);
    }

    #[test]
    fn identity_is_stationary() {
        let rho = build_rho(1.0, 1.0, 0.0).unwrap();
        let grid = log_grid(1e-6, 1024);
        let p = RadialProfile::from_values(1, grid.clone(), grid).unwrap();
        let g = discrete_gradient(&p, &rho);
        // The last node carries the boundary reaction and is held fixed.
        let worst = g[..g.len() - 1].iter().fold(0.0f64, |a, v| a.max(v.abs()));
        assert!(worst < 1e-8, "{worst}");
    }

    #[test]
    fn dirichlet_gradient_is_linear() {
        // No penalty below d = 0.9, which both profiles respect.
        let rho = build_rho(1.0, 1.0, 0.9).unwrap();
        let grid = log_grid(1e-3, 64);
        let r: Vec<f64> = grid.iter().map(|x| 0.1 * x * x).collect();
        let p1 = RadialProfile::from_values(2, grid.clone(), r.clone()).unwrap();
        let p2 = RadialProfile::from_values(2, grid, r.iter().map(|v| 2.0 * v).collect()).unwrap();
        let g1 = discrete_gradient(&p1, &rho);
        let g2 = discrete_gradient(&p2, &rho);
        let scale = g1.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        for (a, b) in g1.iter().zip(&g2) {
            assert!((2.0 * a - b).abs() < 1e-12 * scale);
        }
    }

    #[test]
    fn single_cover_random_starts_reach_identity() {
        for delay in [0.0, 0.5] {
            let rho = build_rho(1.0, 1.0, delay).unwrap();
            let exact = PI * (1.0 + rho.rho(1.0));
            for seed in 0..3 {
                let opts = MinimizeOptions {
                    init: Init::Random(seed),
                    ..MinimizeOptions::default()
                };
                let out = minimize(1, &rho, &opts).unwrap();
                assert!(out.converged);
                let err = out
                    .profile
                    .grid
                    .iter()
                    .zip(&out.profile.r)
                    .map(|(x, r)| (x - r).abs())
                    .fold(0.0, f64::max);
                assert!(err < 1e-3, "{err}");
                assert!((out.energy.total - exact).abs() < 1e-6 * exact);
            }
        }
    }

    #[test]
    fn energy_log_is_nonincreasing() {
        let rho = build_rho(0.5, 1.0, 0.0).unwrap();
        let opts = MinimizeOptions {
            init: Init::Random(4),
            ..MinimizeOptions::default()
        };
        let out = minimize(2, &rho, &opts).unwrap();
        assert_eq!(out.log.len(), out.iterations);
        for w in out.log.windows(2) {
            assert!(w[1].energy <= w[0].energy, "{w:?}");
        }
    }

    #[test]
    fn warm_start_from_solution_is_quick() {
        let rho = build_rho(0.5, 1.0, 0.0).unwrap();
        let sol = solve_bvp(2, &rho, &BvpOptions::default()).unwrap();
        let opts = MinimizeOptions {
            init: Init::Values(sol.profile.r.clone()),
            ..MinimizeOptions::default()
        };
        let out = minimize(2, &rho, &opts).unwrap();
        assert!(out.converged && out.iterations <= 5, "{} iterations", out.iterations);
        let bvp = radial_energy(&sol.profile, &rho).total;
        assert!((out.energy.total - bvp).abs() < 1e-3 * bvp);
        assert!(out.profile.sup_distance(&sol.profile) < 1e-3);
    }

    #[test]
    fn iteration_budget_is_reported() {
        let rho = build_rho(0.5, 1.0, 0.0).unwrap();
        let opts = MinimizeOptions {
            init: Init::Random(1),
            max_iters: 1,
            ..MinimizeOptions::default()
        };
        match minimize(2, &rho, &opts) {
            Err(Error::MaxItersExceeded { iters, grad_norm, last }) => {
                assert_eq!(iters, 1);
                assert!(grad_norm > 0.0 && last.len() == 512);
            }
            other => panic!("expected MaxItersExceeded, got {other:?}"),
        }
    }

    #[test]
    fn invalid_options_are_rejected() {
        let rho = build_rho(0.5, 1.0, 0.0).unwrap();
        let bad = |o: MinimizeOptions, m: u32| matches!(minimize(m, &rho, &o), Err(Error::InvalidParameter(_)));
        let base = MinimizeOptions::default;
        assert!(bad(base(), 0));
        assert!(bad(MinimizeOptions { grid_size: 8, ..base() }, 2));
        assert!(bad(
            MinimizeOptions {
                tol_grad: 0.0,
                ..base()
            },
            2
        ));
        assert!(bad(
            MinimizeOptions {
                init: Init::Values(vec![0.0; 3]),
                ..base()
            },
            2
        ));
        assert!(bad(
            MinimizeOptions {
                init: Init::PowerLaw(-1.0),
                ..base()
            },
            2
        ));
    }
}
