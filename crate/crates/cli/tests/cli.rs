//! End-to-end runs of the `polyelast` binary.

use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn polyelast(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_polyelast"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn polyelast_env(args: &[&str], threads: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_polyelast"))
        .args(args)
        .env("POLYELAST_THREADS", threads)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn solve_single_cover_reports_identity_energy() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().to_str().unwrap();
    let out = polyelast(&["solve", "--M", "1", "--gamma", "1", "--s0", "1", "--out", out_dir]);
    assert_eq!(out.status.code(), Some(0));
    let report = json(&out);
    assert_eq!(report["schema"], 1);
    assert_eq!(report["op"], "solve");
    assert_eq!(report["inputs"]["M"], 1);
    let e = report["energy"]["total"].as_f64().unwrap();
    assert!((e - 1.5 * PI).abs() < 1e-6, "{e}");
    assert_eq!(read_json(&dir.path().join("report.json")), report);
    let csv = fs::read_to_string(dir.path().join("profile.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("R,r,dr,d,ddot,z,zdot"));
    assert_eq!(csv.lines().count(), 513);
}

#[test]
fn delayed_penalty_is_reported() {
    let out = polyelast(&["solve", "--M", "2", "--delay", "0.5"]);
    assert_eq!(out.status.code(), Some(0));
    let report = json(&out);
    let delta = report["lift_off"]["Delayed"]["delta"].as_f64().unwrap();
    assert!(delta > 0.0 && delta < 1.0);
    assert_eq!(report["penalty_core"]["delta"].as_f64(), Some(delta));
}

#[test]
fn invalid_configuration_exits_with_one() {
    assert_eq!(polyelast(&["solve", "--M", "0"]).status.code(), Some(1));
    assert_eq!(polyelast(&["solve", "--M", "2", "--delay", "1"]).status.code(), Some(1));
    assert_eq!(polyelast(&["solve", "--M", "two"]).status.code(), Some(1));
    assert_eq!(polyelast(&["pressure", "--N", "1", "--a", "5"]).status.code(), Some(1));
    assert_eq!(polyelast(&["sweep", "--gamma", "1:0:0.1"]).status.code(), Some(1));
    assert_eq!(polyelast(&[]).status.code(), Some(1));
    assert_eq!(polyelast(&["--help"]).status.code(), Some(0));
}

#[test]
fn missing_bracket_falls_back_to_the_minimizer() {
    let out = polyelast(&["solve", "--M", "3", "--s-max", "1"]);
    assert_eq!(out.status.code(), Some(2));
    let report = json(&out);
    assert_eq!(report["status"], "no_bracket");
    assert!(report["fallback"]["energy"]["total"].as_f64().unwrap() > 0.0);
    assert!(report["delayed_search"]["admissible"].is_u64());
}

#[test]
fn residual_above_tolerance_exits_with_three() {
    let out = polyelast(&["solve", "--M", "2", "--tol", "1e-15"]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(json(&out)["status"], "residual_too_large");
}

#[test]
fn pressure_of_the_double_cover() {
    let dir = tempfile::tempdir().unwrap();
    let out = polyelast(&[
        "pressure",
        "--N",
        "2",
        "--a",
        "5",
        "--nu",
        "1",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    assert_eq!(r["lamRR"].as_f64(), Some(-0.5));
    assert_eq!(r["strict"], true);
    assert!((r["min_energy"].as_f64().unwrap() - 23.561945).abs() < 1e-6);
    let dump = fs::read_to_string(dir.path().join("pressure.csv")).unwrap();
    assert_eq!(dump.lines().next(), Some("R,theta,lam_theta,lam_R_R"));
    assert_eq!(dump.lines().count(), 1 + 16 * 16);
    let modes = fs::read_to_string(dir.path().join("modes.csv")).unwrap();
    assert_eq!(modes.lines().next(), Some("j,plain_norm,theta_norm,ratio"));
    let row2: Vec<&str> = modes.lines().nth(2).unwrap().split(',').collect();
    assert_eq!(row2[0], "2");
    assert!((row2[3].parse::<f64>().unwrap() - 4.0).abs() < 1e-8);
}

#[test]
fn pressure_csv_format_prints_the_dump() {
    let out = polyelast(&["pressure", "--N", "3", "--a", "9", "--format", "csv", "--grid", "2"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().count(), 5);
    assert!(text.lines().skip(1).all(|l| l.ends_with(",0")));
}

#[test]
fn minimize_writes_profile_and_log() {
    let dir = tempfile::tempdir().unwrap();
    let out = polyelast(&[
        "minimize",
        "--M",
        "1",
        "--seed",
        "3",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let r = json(&out);
    assert_eq!(r["converged"], true);
    assert!((r["energy"]["total"].as_f64().unwrap() - 1.5 * PI).abs() < 1e-6);
    let log = fs::read_to_string(dir.path().join("iterations.csv")).unwrap();
    assert_eq!(log.lines().next(), Some("iter,energy,grad_norm,step"));
    let energies: Vec<f64> = log
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert!(energies.windows(2).all(|w| w[1] <= w[0]));
}

#[test]
fn energy_command_examples() {
    let r = json(&polyelast(&["energy", "--M", "1", "--delay", "0.5", "--eps", "2"]));
    let e = r["radial"]["total"].as_f64().unwrap();
    assert!((e - 3.926991).abs() < 1e-6, "{e}");
    assert!((r["identity_closed_form"].as_f64().unwrap() - 1.25 * PI).abs() < 1e-12);
    assert!((r["planar"]["total"].as_f64().unwrap() - e).abs() < 1e-4 * e);
    let b = &r["buckling"];
    assert!((b["energy"].as_f64().unwrap() - 2.5 * PI).abs() < 1e-6 * 2.5 * PI);
    assert_eq!(b["p_eps"].as_f64(), Some(1.5));
}

#[test]
fn check_passes_on_a_clean_build() {
    let out = polyelast(&["check"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(out.status.code(), Some(0), "{text}");
    assert_eq!(text.lines().filter(|l| l.starts_with("PASS ")).count(), 9);
    assert!(!text.contains("FAIL"));
}

#[test]
fn sweep_over_gamma() {
    let dir = tempfile::tempdir().unwrap();
    let out = polyelast(&[
        "sweep",
        "--M",
        "2",
        "--gamma",
        "0.1:2:0.1",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let table = fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    let rows: Vec<Vec<&str>> = table.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 20);
    assert_eq!(rows[2][2], "0.3");
    assert_eq!(rows[0][9], "");
    assert!(rows[1..].iter().all(|r| r[9] == "up"));
    let index = read_json(&dir.path().join("index.json"));
    assert_eq!(index["op"], "sweep");
    for run in index["runs"].as_array().unwrap() {
        assert!(dir.path().join(run["file"].as_str().unwrap()).is_file());
    }
}

#[test]
fn output_is_deterministic_across_thread_counts() {
    let args = |d: &str| {
        vec![
            "sweep".to_string(),
            "--M".into(),
            "2:3:1".into(),
            "--gamma".into(),
            "0.5:1.5:0.5".into(),
            "--delay".into(),
            "0:0.5:0.5".into(),
            "--out".into(),
            d.to_string(),
        ]
    };
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let run = |d: &Path, threads: &str| {
        let owned = args(d.to_str().unwrap());
        let refs: Vec<&str> = owned.iter().map(String::as_str).collect();
        assert_eq!(polyelast_env(&refs, threads).status.code(), Some(0));
    };
    run(a.path(), "1");
    run(b.path(), "4");
    for name in ["sweep.csv", "index.json", "runs/run_0000.csv", "runs/run_0011.csv"] {
        assert_eq!(
            fs::read(a.path().join(name)).unwrap(),
            fs::read(b.path().join(name)).unwrap(),
            "{name}"
        );
    }
    let s1 = polyelast(&["solve", "--M", "2", "--gamma", "0.5"]).stdout;
    let s2 = polyelast(&["solve", "--M", "2", "--gamma", "0.5"]).stdout;
    assert_eq!(s1, s2);
}

#[test]
fn thread_count_must_be_positive() {
    let out = polyelast_env(&["sweep", "--M", "1"], "0");
    assert_eq!(out.status.code(), Some(1));
}
