//! Truncated Fock-space simulation of a conditional displacement gate built
//! from a cross-Kerr medium between two displacing beam splitters, its use
//! inside a Mach-Zehnder interferometer to prepare `|psi> +- D(beta)|psi>`,
//! and reconstruction of Wigner functions from simulated detector
//! probabilities.
//!
//! The crate is `no_std` and needs only `alloc`. File formats and the command
//! line front end live in the companion `kerrcdo` crate.
#![no_std]

extern crate alloc;

pub mod bs_model;
pub mod cdo;
pub mod displacement;
pub mod error;
pub mod fock;
mod linalg;
pub mod mzi;
pub mod optics;
pub mod tomography;

pub use error::{Error, Result};
pub use fock::{FockDim, Mode, ModeState, RailPattern, Sign, ThreeSystemState, TwoModeState};
pub use linalg::{expm, max_abs_diff, unitarity_defect};
pub use num_complex::Complex64;

/// Kerr phase reached by current cross-phase media.
pub const DEFAULT_THETA: f64 = 0.01;
