//! Backscattering transform terms for three-dimensional Schrodinger potentials:
//! kernel profiles, Born series for the wave group, Fourier and physical-space
//! evaluation of `B_N v`, and numerical checks of the accompanying estimates.

pub mod backscatter;
pub mod born_wave;
pub mod bounds_lab;
pub mod error;
pub mod fundamental_solution;
pub mod io;
pub mod quadrature;
pub mod special_kernels;
pub mod sphere;

pub use error::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
