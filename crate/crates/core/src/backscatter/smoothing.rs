use std::time::Instant;

use serde::{Deserialize, Serialize};

use num_complex::Complex64;

use super::lattice::{lattice_kernel, BetaLattice, LatticeSpec};
use super::potential::{GridPotential, Potential};
use crate::born_wave::GridField;
use crate::error::{Error, Result};
use crate::fundamental_solution::loglog_slope;

/// Log-spaced radial window for the tail fits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailWindow {
    pub k_min: f64,
    pub k_max: f64,
    pub bins: usize,
}

impl TailWindow {
    /// From a quarter to 0.8 of the axis Nyquist frequency.
    pub fn for_grid(f: &GridField) -> Self {
        let nyquist = std::f64::consts::PI / f.spacing();
        Self { k_min: 0.25 * nyquist, k_max: 0.8 * nyquist, bins: 12 }
    }
}

/// RMS of `|f_hat|` in each log bin of the window, with the bin centers.
pub fn radial_spectrum(f: &GridField, w: &TailWindow) -> (Vec<f64>, Vec<f64>) {
    let spec = f.fft();
    binned(spec.magnitudes().into_iter().zip(spec.data().iter().copied()), w)
}

fn binned<I: Iterator<Item = (f64, Complex64)>>(samples: I, w: &TailWindow) -> (Vec<f64>, Vec<f64>) {
    let (lo, hi) = (w.k_min.ln(), w.k_max.ln());
    let mut sum = vec![0.0; w.bins];
    let mut count = vec![0usize; w.bins];
    for (k, z) in samples {
        if k < w.k_min || k >= w.k_max {
            continue;
        }
        let b = (((k.ln() - lo) / (hi - lo)) * w.bins as f64) as usize;
        sum[b.min(w.bins - 1)] += z.norm_sqr();
        count[b.min(w.bins - 1)] += 1;
    }
    let mut centers = Vec::new();
    let mut values = Vec::new();
    for b in 0..w.bins {
        if count[b] > 0 && sum[b] > 0.0 {
            centers.push((lo + (b as f64 + 0.5) * (hi - lo) / w.bins as f64).exp());
            values.push((sum[b] / count[b] as f64).sqrt());
        }
    }
    (centers, values)
}

/// Least-squares log-log slope of the radial spectrum; needs at least 8 filled bins.
pub fn tail_slope(f: &GridField, w: &TailWindow) -> Result<f64> {
    let (k, a) = radial_spectrum(f, w);
    fit(&k, &a)
}

fn fit(k: &[f64], a: &[f64]) -> Result<f64> {
    if k.len() < 8 {
        return Err(Error::FitFailed(format!("only {} points in the tail window", k.len())));
    }
    loglog_slope(k, a)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmoothingReport {
    pub s: f64,
    pub epsilon: f64,
    pub slope_v: f64,
    pub slope_b2: f64,
    pub gain: f64,
    pub required: f64,
    pub pass: bool,
    pub window: TailWindow,
    pub lattice_radius: f64,
    pub elapsed: f64,
}

/// Tail slopes `(v, B_2 v)` over the window. The spectrum of `B_2 v` is read off
/// `beta` directly; `B_2 v` reaches past the sample box, so a grid transform would leak.
pub fn tail_slopes(v: &GridPotential, window: &TailWindow) -> Result<(f64, f64)> {
    let rk = 2.0 * v.support_radius();
    let spec = LatticeSpec::auto(v, rk);
    let k = lattice_kernel(rk, &spec)?;
    let beta = BetaLattice::build(v, v, &k, &spec)?;
    let slope_v = tail_slope(v.field(), window)?;
    let (zk, za) = binned(beta.spectrum().into_iter(), window);
    Ok((slope_v, fit(&zk, &za)?))
}

pub fn smoothing_report(v: &GridPotential, epsilon: f64) -> Result<SmoothingReport> {
    let start = Instant::now();
    let s = v.sobolev_s();
    if !s.is_finite() || s < 0.0 {
        return Err(Error::InvalidInput("smoothing report needs a finite tail exponent s".into()));
    }
    let window = TailWindow::for_grid(v.field());
    let (slope_v, slope_b2) = tail_slopes(v, &window)?;
    let gain = slope_v - slope_b2;
    let required = s.min(1.0 - epsilon) - 0.3;
    Ok(SmoothingReport {
        s,
        epsilon,
        slope_v,
        slope_b2,
        gain,
        required,
        pass: gain >= required,
        window,
        lattice_radius: std::f64::consts::PI / v.field().spacing(),
        elapsed: start.elapsed().as_secs_f64(),
    })
}
