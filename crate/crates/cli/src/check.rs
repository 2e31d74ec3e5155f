use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use polyelast::algebra::{det_expansion, e_r, monotonicity_gap, Mat2, Vec2};
use polyelast::direct_min::{minimize, Init, MinimizeOptions};
use polyelast::energy::radial_energy;
use polyelast::fourier::{weighted_norms, DiskField, RadialNodes};
use polyelast::polar::PolarMesh;
use polyelast::pressure::{
    admissible_a_range, buckling_energy, hf_thresholds, ncover_map, ncover_map_energy, ncover_pressure_field,
    ncover_pressure_system, quadratic_energy, small_pressure_check, PolarQuadForm,
};
use polyelast::radial_bvp::{core_fit, solve_bvp, BvpOptions, LiftOff};
use polyelast::rho::build_rho;

use crate::args::CheckArgs;
use crate::error::{CliError, Status};
use crate::output::{Envelope, Sink, Table, SCHEMA};

type Outcome = Result<String, String>;
type Entry = (&'static str, fn(&mut ChaCha8Rng) -> Outcome);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err(e: polyelast::Error) -> String {
    e.to_string()
}

fn ncover_energy(_: &mut ChaCha8Rng) -> Outcome {
    let mut worst = 0.0f64;
    for n in [2u32, 3] {
        let (lo, hi) = admissible_a_range(n).map_err(err)?;
        let a = 0.5 * (lo + hi);
        let form = PolarQuadForm::ncover(1.0, a).map_err(err)?;
        let mesh = PolarMesh::sample(256, 128, |x, t| ncover_map(n, x, t)).map_err(err)?;
        let exact = ncover_map_energy(1.0, a, n).map_err(err)?;
        worst = worst.max(((quadratic_energy(&mesh, &form) - exact) / exact).abs());
    }
    ensure(worst < 1e-6, || format!("relative error {worst:.3e}"))?;
    Ok(format!("relative error {worst:.1e}"))
}

fn pressure_closed_form(rng: &mut ChaCha8Rng) -> Outcome {
    let mut worst = 0.0f64;
    for n in 2u32..5 {
        let (lo, hi) = admissible_a_range(n).map_err(err)?;
        let a = rng.gen_range(lo..hi);
        let form = PolarQuadForm::ncover(1.0, a).map_err(err)?;
        let want = n as f64 - a / n as f64;
        for _ in 0..1000 {
            let (lt, lr) = ncover_pressure_system(&form, n, rng.gen_range(0.001..1.0), rng.gen_range(0.0..2.0 * PI))
                .map_err(err)?;
            worst = worst.max(lt.abs()).max((lr - want).abs());
        }
    }
    ensure(worst < 1e-10, || format!("deviation {worst:.3e}"))?;
    Ok(format!("deviation {worst:.1e}"))
}

fn small_pressure_endpoints(_: &mut ChaCha8Rng) -> Outcome {
    for n in 2u32..6 {
        let (lo, hi) = admissible_a_range(n).map_err(err)?;
        for (a, want) in [
            (lo - 1e-6, (false, false)),
            (lo, (true, false)),
            (lo + 1e-6, (true, true)),
            (hi - 1e-6, (true, true)),
            (hi, (true, false)),
            (hi + 1e-6, (false, false)),
        ] {
            let form = PolarQuadForm::ncover(1.0, a).map_err(err)?;
            let f = ncover_pressure_field(&form, n, &[0.5], &[0.0, 1.0]).map_err(err)?;
            let c = small_pressure_check(f.sup_norm_p, 1.0, f.mode()).map_err(err)?;
            ensure((c.pass, c.strict) == want, || format!("N={n} a={a}: {c:?}"))?;
        }
    }
    Ok("N = 2..5".into())
}

fn buckling_identity(_: &mut ChaCha8Rng) -> Outcome {
    let id = PolarMesh::sample(256, 64, |x, t| e_r(t) * x).map_err(err)?;
    let mut worst = 0.0f64;
    for eps in [1.0, 1.2, 2f64.sqrt(), 2.0] {
        let exact = PI * (eps + 1.0 / eps);
        worst = worst.max(((buckling_energy(&id, eps).map_err(err)? - exact) / exact).abs());
    }
    ensure(worst < 1e-6, || format!("relative error {worst:.3e}"))?;
    Ok(format!("relative error {worst:.1e}"))
}

fn single_cover(rng: &mut ChaCha8Rng) -> Outcome {
    let rho = build_rho(1.0, 1.0, 0.0).map_err(err)?;
    let exact = PI * (1.0 + rho.rho(1.0));
    let opts = MinimizeOptions {
        init: Init::Random(rng.gen()),
        ..MinimizeOptions::default()
    };
    let min = minimize(1, &rho, &opts).map_err(err)?;
    let sol = solve_bvp(1, &rho, &BvpOptions::default()).map_err(err)?;
    for p in [&min.profile, &sol.profile] {
        let sup = p.grid.iter().zip(&p.r).map(|(x, r)| (x - r).abs()).fold(0.0, f64::max);
        ensure(sup < 1e-3, || format!("sup distance {sup:.3e}"))?;
        let e = radial_energy(p, &rho).total;
        ensure(((e - exact) / exact).abs() < 1e-4, || format!("energy {e} vs {exact}"))?;
    }
    Ok("minimizer and shooting agree with the identity".into())
}

fn bvp_invariants(_: &mut ChaCha8Rng) -> Outcome {
    for delay in [0.0, 0.5] {
        let rho = build_rho(0.5, 1.0, delay).map_err(err)?;
        let sol = solve_bvp(2, &rho, &BvpOptions::default()).map_err(err)?;
        let (p, dg) = (&sol.profile, &sol.diagnostics);
        let tag = format!("delay={delay}");
        ensure(dg.residual_sup < 1e-6, || {
            format!("{tag}: residual {:.3e}", dg.residual_sup)
        })?;
        let nonneg = |v: &[f64]| v.iter().all(|&x| x >= -1e-8);
        ensure(
            nonneg(&p.r) && nonneg(&p.dr) && nonneg(&dg.d) && nonneg(&dg.ddot),
            || format!("{tag}: negative r, r', d or d'"),
        )?;
        ensure(dg.d[0] <= 1e-4 && dg.zdot_sign_changes(1e-9) <= 1, || {
            format!("{tag}: d(eps0) or z' sign")
        })?;
        if dg.lift_off == LiftOff::Immediate {
            ensure((dg.dm_estimate - 2.0).abs() <= 0.1, || {
                format!("{tag}: D_M = {}", dg.dm_estimate)
            })?;
        }
        if let Some(core) = dg.penalty_core {
            let fit = core_fit(p, &rho, &core).map_err(err)?;
            ensure(fit.fit_error < 1e-4 && fit.c1_mismatch < 1e-5, || {
                format!("{tag}: {fit:?}")
            })?;
        }
    }
    Ok("M=2, gamma=0.5, both penalty kinds".into())
}

fn fourier_modes(rng: &mut ChaCha8Rng) -> Outcome {
    let mut worst = 0.0f64;
    for j in 1..=8usize {
        let mut f = DiskField::zeros(8, RadialNodes::gauss(16, 8).map_err(err)?);
        let c = Vec2::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let jf = j as f64;
        f.set_mode(
            j,
            |x| (c * x.powf(jf), c * (jf * x.powf(jf - 1.0))),
            |x| (c * x.powf(jf), c * (jf * x.powf(jf - 1.0))),
        );
        let (t, p) = weighted_norms(&f).map_err(err)?;
        worst = worst.max((t - jf * jf * p).abs() / (1.0 + t));
    }
    ensure(worst < 1e-8, || format!("per-mode deviation {worst:.3e}"))?;
    Ok(format!("per-mode deviation {worst:.1e}"))
}

fn convexity(rng: &mut ChaCha8Rng) -> Outcome {
    let mut mat = || {
        Mat2::new(
            rng.gen_range(-3.0..3.0),
            rng.gen_range(-3.0..3.0),
            rng.gen_range(-3.0..3.0),
            rng.gen_range(-3.0..3.0),
        )
    };
    let mut gap = f64::INFINITY;
    for gamma in [0.1, 0.9, 1.0, 10.0] {
        let rho = build_rho(gamma, 1.0, 0.0).map_err(err)?;
        for _ in 0..1000 {
            let (a, b) = (mat(), mat());
            gap = gap.min(monotonicity_gap(&a, &b, &rho));
            let (l, r) = det_expansion(&a, &b);
            ensure(
                (l - r).abs() < 1e-12 * (1.0 + a.frobenius_sq() + b.frobenius_sq()),
                || format!("determinant expansion {l} vs {r}"),
            )?;
        }
    }
    ensure(gap >= -1e-10, || format!("monotonicity gap {gap:.3e}"))?;
    Ok(format!("min gap {gap:.2e}"))
}

fn thresholds(_: &mut ChaCha8Rng) -> Outcome {
    let t = hf_thresholds(1.5, 1.0).map_err(err)?;
    ensure(t == (2, 3), || format!("hf_thresholds(1.5, 1) = {t:?}"))?;
    for n in 1..=20u64 {
        let (_, m) = hf_thresholds(n as f64, 1.0).map_err(err)?;
        let want = (2.0 * 2f64.sqrt() * n as f64 / 3f64.sqrt()).ceil() as u64;
        ensure(m == want, || format!("n={n}: m={m}, want {want}"))?;
    }
    Ok("(2, 3) and m(n) for n <= 20".into())
}

#[derive(Serialize)]
struct Property {
    name: &'static str,
    pass: bool,
    detail: String,
}

#[derive(Serialize)]
struct CheckReport {
    passed: usize,
    failed: usize,
    properties: Vec<Property>,
}

pub fn check(a: &CheckArgs, sink: &Sink) -> Result<Status, CliError> {
    let suite: [Entry; 9] = [
        ("N-cover quadrature energy", ncover_energy),
        ("pressure closed form", pressure_closed_form),
        ("small-pressure endpoints", small_pressure_endpoints),
        ("buckling identity", buckling_identity),
        ("single-cover ground truth", single_cover),
        ("radial solution invariants", bvp_invariants),
        ("per-mode Fourier identity", fourier_modes),
        ("convexity and determinant expansion", convexity),
        ("threshold arithmetic", thresholds),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let mut properties = Vec::with_capacity(suite.len());
    for (name, run) in suite {
        let (pass, detail) = match run(&mut rng) {
            Ok(d) => (true, d),
            Err(d) => (false, d),
        };
        println!("{} {name}: {detail}", if pass { "PASS" } else { "FAIL" });
        properties.push(Property { name, pass, detail });
    }
    let failed = properties.iter().filter(|p| !p.pass).count();
    let report = Envelope {
        schema: SCHEMA,
        op: "check",
        inputs: a,
        body: CheckReport {
            passed: properties.len() - failed,
            failed,
            properties,
        },
    };
    if let Some(dir) = sink.out_dir()? {
        std::fs::write(
            dir.join("report.json"),
            format!("{}\n", serde_json::to_string_pretty(&report)?),
        )?;
        let mut t = Table::new("check", vec!["property", "result", "detail"]);
        for p in &report.body.properties {
            t.rows.push(vec![
                p.name.into(),
                if p.pass { "PASS" } else { "FAIL" }.into(),
                p.detail.clone(),
            ]);
        }
        t.write_file(dir)?;
    }
    Ok(if failed == 0 { Status::Ok } else { Status::ChecksFailed })
}
