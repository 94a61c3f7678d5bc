//! Evaluation of the backscattering terms `B_N v`: the Fourier lattice path for
//! `N = 2`, the physical-space pairing, radial Monte Carlo for higher `N`, Sobolev
//! norms and the smoothing sweep.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::born_wave::GridField;

pub mod lattice;
pub mod physical;
pub mod potential;
pub mod radial_mc;
pub mod smoothing;
pub mod sobolev;
pub mod transform;

pub use lattice::{b2_fourier, b2_fourier_bilinear, lattice_kernel, BetaLattice, LatticeOutput, LatticeSpec};
pub use physical::b2_physical;
pub use potential::{bump, GaussianPotential, GridPotential, Potential, PotentialSpec, RadialPotential};
pub use radial_mc::{bn_radial, McSpec};
pub use smoothing::{radial_spectrum, smoothing_report, tail_slope, tail_slopes, SmoothingReport, TailWindow};
pub use sobolev::{local_cutoff, local_sobolev, sobolev_norm};

/// Radial profile of `B_N v` with per-radius standard errors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialSamples {
    pub radii: Vec<f64>,
    pub values: Vec<f64>,
    pub std_errors: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum TermField {
    Grid(GridField),
    Radial(RadialSamples),
    Points { points: Vec<[f64; 3]>, values: Vec<Complex64> },
}

impl TermField {
    pub fn max_abs(&self) -> f64 {
        match self {
            TermField::Grid(g) => g.max_abs(),
            TermField::Radial(r) => r.values.iter().map(|v| v.abs()).fold(0.0, f64::max),
            TermField::Points { values, .. } => values.iter().map(|v| v.norm()).fold(0.0, f64::max),
        }
    }

    pub fn grid(&self) -> Option<&GridField> {
        match self {
            TermField::Grid(g) => Some(g),
            _ => None,
        }
    }
}

/// One Born term with the metadata needed to reproduce it.
#[derive(Debug, Clone, PartialEq)]
pub struct BornTermResult {
    pub order: usize,
    pub field: TermField,
    pub metadata: serde_json::Value,
    pub error_estimate: f64,
    pub elapsed: f64,
}
pub use transform::{truncated_transform, TermMethod, TermNorm, TruncatedTransform};
