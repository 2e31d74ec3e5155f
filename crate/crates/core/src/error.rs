use thiserror::Error;

use crate::radial_bvp::RadialProfile;

/// Errors raised by the numerical routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("trajectory diverged for shooting parameter s = {s}")]
    Diverged { s: f64 },

    #[error("no shooting bracket: r_s(1) < 1 for every s up to {s_max}")]
    NoBracket { s_max: f64 },

    #[error("minimizer stopped after {iters} iterations with gradient norm {grad_norm:e}")]
    MaxItersExceeded {
        iters: usize,
        grad_norm: f64,
        last: Box<RadialProfile>,
    },

    #[error("singular 2x2 system (|det| = {det:e})")]
    SingularSystem { det: f64 },

    #[error("field vanishes on {fraction:.3} of the nodes")]
    DegenerateField { fraction: f64 },

    #[error("Jmax = {jmax} exceeds half the angular resolution ({n_theta} nodes)")]
    AliasRisk { jmax: usize, n_theta: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}
