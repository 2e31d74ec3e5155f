use rayon::prelude::*;
use serde::Serialize;

use polyelast::energy::radial_energy;
use polyelast::radial_bvp::{solve_bvp, BvpOptions, LiftOff};
use polyelast::rho::build_rho;

use crate::args::SweepArgs;
use crate::commands::profile_table;
use crate::error::{CliError, Status};
use crate::output::{fmt_num, Envelope, Sink, Table, SCHEMA};

const MAX_RUNS: usize = 10_000;

/// Parses `value` or `start:stop:step` into an inclusive grid.
pub fn parse_range(name: &str, spec: &str) -> Result<Vec<f64>, CliError> {
    let bad = || CliError::Config(format!("--{name}: expected a number or start:stop:step, got {spec:?}"));
    let parts: Vec<f64> = spec
        .split(':')
        .map(|s| s.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| bad())?;
    match parts[..] {
        [v] => Ok(vec![v]),
        [start, stop, step] => {
            if !(step > 0.0 && stop >= start && start.is_finite() && stop.is_finite()) {
                return Err(bad());
            }
            let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
            if count > MAX_RUNS {
                return Err(CliError::Config(format!("--{name}: {count} values exceed {MAX_RUNS}")));
            }
            // Snap to 12 significant digits so that 0.1 + 2 * 0.1 reads as 0.3.
            Ok((0..count)
                .map(|k| {
                    let v = start + k as f64 * step;
                    format!("{v:.11e}").parse().unwrap_or(v)
                })
                .collect())
        }
        _ => Err(bad()),
    }
}

fn parse_winding(spec: &str) -> Result<Vec<u32>, CliError> {
    parse_range("M", spec)?
        .into_iter()
        .map(|v| {
            if v >= 1.0 && v.fract() == 0.0 && v <= u32::MAX as f64 {
                Ok(v as u32)
            } else {
                Err(CliError::Config(format!("--M: {v} is not a positive integer")))
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, Serialize)]
struct Point {
    #[serde(rename = "M")]
    m: u32,
    gamma: f64,
    s0: f64,
    delay: f64,
}

#[derive(Debug, Clone, Serialize)]
struct RunEntry {
    index: usize,
    #[serde(flatten)]
    point: Point,
    status: String,
    s_star: Option<f64>,
    residual_sup: Option<f64>,
    energy: Option<f64>,
    lift_off: Option<LiftOff>,
    #[serde(skip_serializing_if = "Option::is_none")]
    file: Option<String>,
}

#[derive(Serialize)]
struct SweepIndex {
    runs: Vec<RunEntry>,
}

/// Number of workers from `POLYELAST_THREADS`, or rayon's default.
fn worker_count() -> Result<Option<usize>, CliError> {
    match std::env::var("POLYELAST_THREADS") {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::Config(format!(
                "POLYELAST_THREADS must be a positive integer, got {v:?}"
            ))),
        },
        Err(_) => Ok(None),
    }
}

fn run_one(index: usize, point: Point, a: &SweepArgs, sink: &Sink) -> Result<RunEntry, CliError> {
    let mut entry = RunEntry {
        index,
        point,
        status: String::new(),
        s_star: None,
        residual_sup: None,
        energy: None,
        lift_off: None,
        file: None,
    };
    let rho = match build_rho(point.gamma, point.s0, point.delay) {
        Ok(r) => r,
        Err(e) => {
            entry.status = format!("invalid: {e}");
            return Ok(entry);
        }
    };
    let opts = BvpOptions {
        eps0: a.eps0,
        n_nodes: a.grid,
        tol_residual: a.tol,
        ..BvpOptions::default()
    };
    match solve_bvp(point.m, &rho, &opts) {
        Ok(sol) => {
            let dg = &sol.diagnostics;
            entry.status = if sol.converged(a.tol) {
                "ok"
            } else {
                "residual_too_large"
            }
            .into();
            entry.s_star = Some(sol.s_star);
            entry.residual_sup = Some(dg.residual_sup);
            entry.energy = Some(radial_energy(&sol.profile, &rho).total);
            entry.lift_off = Some(dg.lift_off_with_penalty());
            if let Some(dir) = &sink.out {
                let name = format!("run_{index:04}");
                profile_table(name.clone(), &sol.profile, dg).write_file(&dir.join("runs"))?;
                entry.file = Some(format!("runs/{name}.csv"));
            }
        }
        Err(e @ polyelast::Error::InvalidParameter(_)) => return Err(e.into()),
        Err(e) => entry.status = format!("failed: {e}"),
    }
    Ok(entry)
}

/// Sign of the energy change from the previous row along the innermost parameter.
fn trend(prev: Option<&RunEntry>, cur: &RunEntry) -> &'static str {
    let Some(p) = prev else { return "" };
    let same_line = p.point.m == cur.point.m && p.point.s0 == cur.point.s0 && p.point.delay == cur.point.delay;
    match (same_line, p.energy, cur.energy) {
        (true, Some(e0), Some(e1)) => {
            let tol = 1e-12 * e0.abs().max(e1.abs());
            if e1 > e0 + tol {
                "up"
            } else if e1 < e0 - tol {
                "down"
            } else {
                "flat"
            }
        }
        _ => "",
    }
}

pub fn sweep(a: &SweepArgs, sink: &Sink) -> Result<Status, CliError> {
    let ms = parse_winding(&a.m)?;
    let gammas = parse_range("gamma", &a.gamma)?;
    let s0s = parse_range("s0", &a.s0)?;
    let delays = parse_range("delay", &a.delay)?;
    let total = ms.len() * gammas.len() * s0s.len() * delays.len();
    if total > MAX_RUNS {
        return Err(CliError::Config(format!("{total} runs exceed {MAX_RUNS}")));
    }
    let mut points = Vec::with_capacity(total);
    for &m in &ms {
        for &s0 in &s0s {
            for &delay in &delays {
                for &gamma in &gammas {
                    points.push(Point { m, gamma, s0, delay });
                }
            }
        }
    }
    if let Some(dir) = sink.out_dir()? {
        std::fs::create_dir_all(dir.join("runs"))?;
    }
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = worker_count()? {
        builder = builder.num_threads(n);
    }
    let pool = builder.build()?;
    let runs: Vec<RunEntry> = pool.install(|| {
        points
            .par_iter()
            .enumerate()
            .map(|(i, &p)| run_one(i, p, a, sink))
            .collect::<Result<_, _>>()
    })?;

    let mut table = Table::new(
        "sweep",
        vec![
            "index",
            "M",
            "gamma",
            "s0",
            "delay",
            "status",
            "s_star",
            "residual_sup",
            "energy",
            "trend",
        ],
    );
    let opt = |v: Option<f64>| v.map(fmt_num).unwrap_or_default();
    for (k, r) in runs.iter().enumerate() {
        table.rows.push(vec![
            r.index.to_string(),
            r.point.m.to_string(),
            fmt_num(r.point.gamma),
            fmt_num(r.point.s0),
            fmt_num(r.point.delay),
            r.status.clone(),
            opt(r.s_star),
            opt(r.residual_sup),
            opt(r.energy),
            trend(k.checked_sub(1).map(|j| &runs[j]), r).into(),
        ]);
    }
    let all_ok = runs.iter().all(|r| r.status == "ok");
    let report = Envelope {
        schema: SCHEMA,
        op: "sweep",
        inputs: a,
        body: SweepIndex { runs },
    };
    sink.emit_as("index", &report, &[table])?;
    Ok(if all_ok { Status::Ok } else { Status::ResidualTooLarge })
}
