use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

/// Radial stationary points, pressure fields and uniqueness thresholds.
#[derive(Debug, Parser)]
#[command(name = "polyelast", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Directory receiving the JSON report and CSV tables.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    /// What to print on stdout: the JSON report or the primary CSV table.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve the radial boundary value problem by shooting.
    Solve(SolveArgs),
    /// Minimize the discretized radial energy directly.
    Minimize(MinimizeArgs),
    /// Energies of the power-law profile `r = R^M` and of the buckling functional.
    Energy(EnergyArgs),
    /// Pressure field and thresholds for the N-cover quadratic form.
    Pressure(PressureArgs),
    /// Run the invariant suite and print PASS/FAIL per property.
    Check(CheckArgs),
    /// Solve over a parameter grid, one row per run.
    Sweep(SweepArgs),
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct RhoArgs {
    /// Slope of the penalty beyond `s0`.
    #[arg(long, default_value_t = 1.0)]
    pub gamma: f64,
    /// Start of the linear branch of the penalty.
    #[arg(long, default_value_t = 1.0)]
    pub s0: f64,
    /// Determinant below which the penalty vanishes.
    #[arg(long, default_value_t = 0.0)]
    pub delay: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SolveArgs {
    /// Winding number of the boundary datum.
    #[arg(long = "M")]
    #[serde(rename = "M")]
    pub m: u32,
    #[command(flatten)]
    #[serde(flatten)]
    pub rho: RhoArgs,
    /// Inner radius of the grid.
    #[arg(long, default_value_t = 1e-6)]
    pub eps0: f64,
    /// Number of grid nodes.
    #[arg(long, default_value_t = 512)]
    pub grid: usize,
    /// Largest accepted residual of the equation.
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    /// Largest shooting parameter tried before giving up.
    #[arg(long = "s-max", default_value_t = 1048576.0)]
    pub s_max: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct MinimizeArgs {
    #[arg(long = "M")]
    #[serde(rename = "M")]
    pub m: u32,
    #[command(flatten)]
    #[serde(flatten)]
    pub rho: RhoArgs,
    #[arg(long, default_value_t = 1e-6)]
    pub eps0: f64,
    #[arg(long, default_value_t = 512)]
    pub grid: usize,
    /// Gradient tolerance.
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    /// Random start `R^M (1 + U)`; the identity-like start `R` is used without it.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long = "max-iters", default_value_t = 20_000)]
    pub max_iters: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct EnergyArgs {
    #[arg(long = "M")]
    #[serde(rename = "M")]
    pub m: u32,
    #[command(flatten)]
    #[serde(flatten)]
    pub rho: RhoArgs,
    #[arg(long, default_value_t = 1e-6)]
    pub eps0: f64,
    #[arg(long, default_value_t = 512)]
    pub grid: usize,
    /// Also evaluate the buckling functional of the identity at this `eps`.
    #[arg(long)]
    pub eps: Option<f64>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct PressureArgs {
    /// Covering number of the map `(R / sqrt N) e_R(N theta)`.
    #[arg(long = "N")]
    #[serde(rename = "N")]
    pub n: u32,
    /// Stiffness ratio of the quadratic form.
    #[arg(long)]
    pub a: f64,
    /// Uniform-convexity floor.
    #[arg(long, default_value_t = 1.0)]
    pub nu: f64,
    /// Samples per direction in the pressure dump.
    #[arg(long, default_value_t = 16)]
    pub grid: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CheckArgs {
    /// Seed for the randomized properties.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SweepArgs {
    /// Single value or `start:stop:step`.
    #[arg(long = "M", default_value = "2")]
    #[serde(rename = "M")]
    pub m: String,
    #[arg(long, default_value = "1")]
    pub gamma: String,
    #[arg(long, default_value = "1")]
    pub s0: String,
    #[arg(long, default_value = "0")]
    pub delay: String,
    #[arg(long, default_value_t = 1e-6)]
    pub eps0: f64,
    #[arg(long, default_value_t = 512)]
    pub grid: usize,
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
}
