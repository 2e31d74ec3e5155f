use std::f64::consts::PI;

use serde::Serialize;

use polyelast::algebra::{e_r, Vec2};
use polyelast::direct_min::{minimize, Init, MinimizeOptions, Minimizer};
use polyelast::energy::{embed_profile, full_energy, radial_energy, EnergyReport};
use polyelast::fourier::{decompose, mode_table, PolarVectorField, RadialNodes};
use polyelast::polar::PolarMesh;
use polyelast::pressure::{
    admissible_a_range, buckling_energy, hf_thresholds, ncover_map, ncover_map_energy, ncover_min_energy,
    ncover_pressure_field, p_eps, quadratic_energy, small_pressure_check, PolarQuadForm, PressureMode, ThresholdCheck,
};
use polyelast::quadrature::log_grid;
use polyelast::radial_bvp::{
    delayed_search, diagnostics, solve_bvp, BvpDiagnostics, BvpOptions, LiftOff, PenaltyCore, RadialProfile,
};
use polyelast::rho::{build_rho, RhoSpec, RhoSpecReport};
use polyelast::Error;

use crate::args::{EnergyArgs, MinimizeArgs, PressureArgs, RhoArgs, SolveArgs};
use crate::error::{CliError, Status};
use crate::output::{fmt_num, Envelope, Sink, Table, SCHEMA};

pub fn rho_from(a: &RhoArgs) -> Result<RhoSpec, CliError> {
    Ok(build_rho(a.gamma, a.s0, a.delay)?)
}

/// Columns `R, r, dr, d, ddot, z, zdot`.
pub fn profile_table(name: impl Into<String>, p: &RadialProfile, dg: &BvpDiagnostics) -> Table {
    let mut t = Table::new(name, vec!["R", "r", "dr", "d", "ddot", "z", "zdot"]);
    for i in 0..p.len() {
        t.push_numbers(&[p.grid[i], p.r[i], p.dr[i], dg.d[i], dg.ddot[i], dg.z[i], dg.zdot[i]]);
    }
    t
}

#[derive(Serialize)]
struct SolveReport<'a> {
    status: &'static str,
    #[serde(rename = "M")]
    m: u32,
    rho: RhoSpecReport<'a>,
    s_star: f64,
    residual_sup: f64,
    lift_off: LiftOff,
    profile_lift_off: LiftOff,
    penalty_core: Option<PenaltyCore>,
    #[serde(rename = "DM_estimate")]
    dm_estimate: f64,
    energy: EnergyReport,
}

#[derive(Serialize)]
struct FallbackReport {
    energy: EnergyReport,
    converged: bool,
    iterations: usize,
    grad_norm: f64,
}

#[derive(Serialize)]
struct DelayedNote {
    admissible: usize,
    flux_tol: f64,
    smallest_flux_jump: f64,
}

#[derive(Serialize)]
struct NoBracketReport<'a> {
    status: &'static str,
    error: String,
    #[serde(rename = "M")]
    m: u32,
    rho: RhoSpecReport<'a>,
    fallback: FallbackReport,
    delayed_search: DelayedNote,
}

/// Runs the minimizer, keeping the last iterate when the budget runs out.
fn minimize_or_last(m: u32, rho: &RhoSpec, opts: &MinimizeOptions) -> Result<(Minimizer, Status), CliError> {
    match minimize(m, rho, opts) {
        Ok(out) => {
            let status = if out.converged {
                Status::Ok
            } else {
                Status::ResidualTooLarge
            };
            Ok((out, status))
        }
        Err(Error::MaxItersExceeded { iters, grad_norm, last }) => {
            let energy = radial_energy(&last, rho);
            let out = Minimizer {
                profile: *last,
                energy,
                iterations: iters,
                grad_norm,
                converged: false,
                log: Vec::new(),
            };
            Ok((out, Status::ResidualTooLarge))
        }
        Err(e) => Err(e.into()),
    }
}

pub fn solve(a: &SolveArgs, sink: &Sink) -> Result<Status, CliError> {
    let rho = rho_from(&a.rho)?;
    let opts = BvpOptions {
        eps0: a.eps0,
        n_nodes: a.grid,
        tol_residual: a.tol,
        s_max: a.s_max,
        ..BvpOptions::default()
    };
    match solve_bvp(a.m, &rho, &opts) {
        Ok(sol) => {
            let dg = &sol.diagnostics;
            let converged = sol.converged(a.tol);
            let body = SolveReport {
                status: if converged { "ok" } else { "residual_too_large" },
                m: a.m,
                rho: RhoSpecReport(&rho),
                s_star: sol.s_star,
                residual_sup: dg.residual_sup,
                lift_off: dg.lift_off_with_penalty(),
                profile_lift_off: dg.lift_off,
                penalty_core: dg.penalty_core,
                dm_estimate: dg.dm_estimate,
                energy: radial_energy(&sol.profile, &rho),
            };
            let report = Envelope {
                schema: SCHEMA,
                op: "solve",
                inputs: a,
                body,
            };
            sink.emit(&report, &[profile_table("profile", &sol.profile, dg)])?;
            Ok(if converged {
                Status::Ok
            } else {
                Status::ResidualTooLarge
            })
        }
        Err(err @ Error::NoBracket { .. }) => {
            let mopts = MinimizeOptions {
                grid_size: a.grid,
                eps0: a.eps0,
                ..MinimizeOptions::default()
            };
            let (fallback, _) = minimize_or_last(a.m, &rho, &mopts)?;
            let search = delayed_search(a.m, &rho, 32, 1e-6)?;
            let smallest = search
                .candidates
                .iter()
                .map(|c| c.flux_jump)
                .fold(f64::INFINITY, f64::min);
            let body = NoBracketReport {
                status: "no_bracket",
                error: err.to_string(),
                m: a.m,
                rho: RhoSpecReport(&rho),
                fallback: FallbackReport {
                    energy: fallback.energy,
                    converged: fallback.converged,
                    iterations: fallback.iterations,
                    grad_norm: fallback.grad_norm,
                },
                delayed_search: DelayedNote {
                    admissible: search.admissible,
                    flux_tol: search.flux_tol,
                    smallest_flux_jump: smallest,
                },
            };
            let report = Envelope {
                schema: SCHEMA,
                op: "solve",
                inputs: a,
                body,
            };
            let dg = diagnostics(&fallback.profile, &rho);
            sink.emit(&report, &[profile_table("profile", &fallback.profile, &dg)])?;
            Ok(Status::NoBracket)
        }
        Err(e) => Err(e.into()),
    }
}

#[derive(Serialize)]
struct MinimizeReport<'a> {
    #[serde(rename = "M")]
    m: u32,
    rho: RhoSpecReport<'a>,
    converged: bool,
    iterations: usize,
    grad_norm: f64,
    energy: EnergyReport,
    lift_off: LiftOff,
}

pub fn minimize_cmd(a: &MinimizeArgs, sink: &Sink) -> Result<Status, CliError> {
    let rho = rho_from(&a.rho)?;
    let opts = MinimizeOptions {
        grid_size: a.grid,
        eps0: a.eps0,
        max_iters: a.max_iters,
        tol_grad: a.tol,
        init: a.seed.map_or(Init::Identity, Init::Random),
        ..MinimizeOptions::default()
    };
    let (out, status) = minimize_or_last(a.m, &rho, &opts)?;
    let dg = diagnostics(&out.profile, &rho);
    let body = MinimizeReport {
        m: a.m,
        rho: RhoSpecReport(&rho),
        converged: out.converged,
        iterations: out.iterations,
        grad_norm: out.grad_norm,
        energy: out.energy,
        lift_off: dg.lift_off_with_penalty(),
    };
    let mut log = Table::new("iterations", vec!["iter", "energy", "grad_norm", "step"]);
    for rec in &out.log {
        log.push_numbers(&[rec.iter as f64, rec.energy, rec.grad_norm, rec.step]);
    }
    let report = Envelope {
        schema: SCHEMA,
        op: "minimize",
        inputs: a,
        body,
    };
    sink.emit(&report, &[profile_table("profile", &out.profile, &dg), log])?;
    Ok(status)
}

#[derive(Serialize)]
struct BucklingReport {
    eps: f64,
    energy: f64,
    closed_form: f64,
    p_eps: f64,
}

#[derive(Serialize)]
struct EnergyCmdReport<'a> {
    #[serde(rename = "M")]
    m: u32,
    rho: RhoSpecReport<'a>,
    radial: EnergyReport,
    planar: EnergyReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    identity_closed_form: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    buckling: Option<BucklingReport>,
}

pub fn energy(a: &EnergyArgs, sink: &Sink) -> Result<Status, CliError> {
    let rho = rho_from(&a.rho)?;
    if a.m == 0 {
        return Err(CliError::Config("M must be at least 1".into()));
    }
    if !(a.eps0 > 0.0 && a.eps0 < 0.5) || a.grid < 16 {
        return Err(CliError::Config(
            "need eps0 in (0, 0.5) and at least 16 grid nodes".into(),
        ));
    }
    let mf = a.m as f64;
    let p = RadialProfile::from_fn(a.m, log_grid(a.eps0, a.grid), |x| (x.powf(mf), mf * x.powf(mf - 1.0)))?;
    let buckling = match a.eps {
        Some(eps) => {
            let id = PolarMesh::sample(256, 64, |x, t| e_r(t) * x)?;
            Some(BucklingReport {
                eps,
                energy: buckling_energy(&id, eps)?,
                closed_form: PI * (eps + 1.0 / eps),
                p_eps: p_eps(eps)?,
            })
        }
        None => None,
    };
    let body = EnergyCmdReport {
        m: a.m,
        rho: RhoSpecReport(&rho),
        radial: radial_energy(&p, &rho),
        planar: full_energy(&embed_profile(&p, 256, 256), &rho),
        identity_closed_form: (a.m == 1).then(|| PI * (1.0 + rho.rho(1.0))),
        buckling,
    };
    sink.emit(
        &Envelope {
            schema: SCHEMA,
            op: "energy",
            inputs: a,
            body,
        },
        &[],
    )?;
    Ok(Status::Ok)
}

#[derive(Serialize)]
struct Thresholds {
    n: u64,
    m: u64,
}

#[derive(Serialize)]
struct PressureReport {
    #[serde(rename = "lamRR")]
    lam_rr: f64,
    lam_theta_max: f64,
    mode: PressureMode,
    #[serde(rename = "P")]
    p: f64,
    threshold: f64,
    strict: bool,
    pass: bool,
    admissible_a: (f64, f64),
    min_energy: f64,
    map_energy: f64,
    quadrature_energy: f64,
    hf_thresholds: Thresholds,
}

pub fn pressure(a: &PressureArgs, sink: &Sink) -> Result<Status, CliError> {
    if a.grid == 0 {
        return Err(CliError::Config("grid must be positive".into()));
    }
    let form = PolarQuadForm::ncover(a.nu, a.a)?;
    let g = a.grid as f64;
    let radii: Vec<f64> = (0..a.grid).map(|i| (i as f64 + 0.5) / g).collect();
    let thetas: Vec<f64> = (0..a.grid).map(|j| 2.0 * PI * j as f64 / g).collect();
    let field = ncover_pressure_field(&form, a.n, &radii, &thetas)?;
    let ThresholdCheck {
        threshold,
        pass,
        strict,
    } = small_pressure_check(field.sup_norm_p, a.nu, field.mode())?;
    let (n, m) = hf_thresholds(field.sup_norm_p, a.nu)?;
    let mesh = PolarMesh::sample(256, 128, |x, t| ncover_map(a.n, x, t))?;
    let body = PressureReport {
        lam_rr: field.lam_r_r[0],
        lam_theta_max: field.lam_theta.iter().fold(0.0, |m, v| m.max(v.abs())),
        mode: field.mode(),
        p: field.sup_norm_p,
        threshold,
        strict,
        pass,
        admissible_a: admissible_a_range(a.n)?,
        min_energy: ncover_min_energy(a.nu, a.a, a.n)?,
        map_energy: ncover_map_energy(a.nu, a.a, a.n)?,
        quadrature_energy: quadratic_energy(&mesh, &form),
        hf_thresholds: Thresholds { n, m },
    };
    let mut dump = Table::new("pressure", vec!["R", "theta", "lam_theta", "lam_R_R"]);
    for (i, &x) in field.radii.iter().enumerate() {
        for (j, &t) in field.thetas.iter().enumerate() {
            let k = i * field.thetas.len() + j;
            dump.push_numbers(&[x, t, field.lam_theta[k], field.lam_r_r[k]]);
        }
    }
    let report = Envelope {
        schema: SCHEMA,
        op: "pressure",
        inputs: a,
        body,
    };
    sink.emit(&report, &[dump, ncover_mode_table(a.n)?])?;
    Ok(Status::Ok)
}

/// Per-mode weighted norms of the N-cover map, columns `j, plain_norm, theta_norm, ratio`.
fn ncover_mode_table(n: u32) -> Result<Table, CliError> {
    let nf = n as f64;
    let jmax = n as usize + 2;
    let samples = PolarVectorField::sample(RadialNodes::gauss(16, 8)?, 4 * jmax + 4, |x, t| {
        let dir: Vec2 = e_r(nf * t) * (1.0 / nf.sqrt());
        (dir * x, dir)
    });
    let rows = mode_table(&decompose(&samples, jmax)?);
    let floor = 1e-14 * rows.iter().fold(0.0f64, |m, r| m.max(r.1));
    let mut t = Table::new("modes", vec!["j", "plain_norm", "theta_norm", "ratio"]);
    for (j, plain, theta) in rows {
        let ratio = if plain > floor {
            fmt_num(theta / plain)
        } else {
            String::new()
        };
        t.rows.push(vec![j.to_string(), fmt_num(plain), fmt_num(theta), ratio]);
    }
    Ok(t)
}
