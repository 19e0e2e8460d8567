//! Covariance-matrix simulation of two dissipative optomechanical cavities and
//! the activation of mirror-field entanglement from mechanical discord.
//!
//! Modules, bottom-up:
//! - [`gaussian`]: Gaussian states, symplectic spectra, log-negativity, discord.
//! - [`model`]: physical parameters to drift and diffusion matrices.
//! - [`dynamics`]: Lyapunov-equation integrator and algebraic steady state.
//! - [`protocol`]: state preparation, activation runs, sweeps and demon sampling.
//! - [`report`]: CSV output shared by the command-line front end.

pub mod dynamics;
pub mod error;
pub mod gaussian;
pub mod model;
pub mod protocol;
pub mod report;

pub use error::{Error, Result};
