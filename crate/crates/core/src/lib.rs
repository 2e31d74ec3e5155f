//! Numerical toolkit for planar polyconvex energies
//! `I(u) = integral of |grad u|^2 / 2 + rho(det grad u)` on the unit disk.
//!
//! * [`radial_bvp`] solves for radial M-covering stationary points by shooting,
//!   and [`direct_min`] minimizes the discretized energy as an independent check.
//! * [`energy`] evaluates the functional for radial profiles and sampled maps.
//! * [`pressure`] covers the incompressible side: pressure gradients for
//!   polar-diagonal quadratic forms, uniqueness thresholds and condition checks.
//! * [`fourier`] provides angular mode decompositions and the weighted norm estimates.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod algebra;
pub mod direct_min;
pub mod energy;
pub mod error;
pub mod fourier;
pub mod ode;
pub mod polar;
pub mod pressure;
pub mod quadrature;
pub mod radial_bvp;
pub mod rho;

pub use error::{Error, Result};
