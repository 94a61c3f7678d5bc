//! Spectral wave propagation in three dimensions: the free group, the Born
//! recursion and a split-step solver for `(d_t^2 - Delta + v) u = 0`.

pub mod born;
pub mod grid;

use serde::{Deserialize, Serialize};

pub use born::{born_series, born_term, born_term_with_estimate, BornEstimate};
pub use grid::{GridField, SpectralField};

use crate::error::{Error, Result};

/// `sin(t r) / r`, with the limit `t` at `r = 0`.
pub fn sinc_multiplier(t: f64, r: f64) -> f64 {
    if r == 0.0 {
        t
    } else {
        (t * r).sin() / r
    }
}

/// `K_0(t) f = sin(t|D|)/|D| f`.
pub fn free_propagate(f: &GridField, t: f64) -> Result<GridField> {
    if !(t >= 0.0) {
        return Err(Error::InvalidInput(format!("time must be nonnegative, got {t}")));
    }
    Ok(f.fft().apply_radial(|r| sinc_multiplier(t, r)).ifft())
}

/// `cos(t|D|) f`.
pub fn free_velocity(f: &GridField, t: f64) -> Result<GridField> {
    Ok(f.fft().apply_radial(|r| (t * r).cos()).ifft())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveState {
    pub u: GridField,
    pub u_dot: GridField,
    pub time: f64,
}

/// Largest admissible split-step size for the grid.
pub fn stability_limit(m: usize, l: f64) -> f64 {
    2.0 / (std::f64::consts::PI / l * (m / 2) as f64 * 3f64.sqrt())
}

/// Exact free evolution of `(u, u_dot)` by `tau` in spectral space.
fn free_step(u: &SpectralField, ud: &SpectralField, tau: f64, mags: &[f64]) -> (SpectralField, SpectralField) {
    let mut nu = u.clone();
    let mut nud = ud.clone();
    for (idx, &r) in mags.iter().enumerate() {
        let (a, b) = (u.data()[idx], ud.data()[idx]);
        let c = (tau * r).cos();
        let s = sinc_multiplier(tau, r);
        nu.data_mut()[idx] = a * c + b * s;
        nud.data_mut()[idx] = b * c - a * (r * (tau * r).sin());
    }
    (nu, nud)
}

/// Solves `u(0) = 0, u_t(0) = f` up to time `t` with Strang splitting: exact free
/// half steps around potential kicks `u_dot -= dt v u`.
pub fn wave_solve(v: &GridField, f: &GridField, t: f64, dt: f64) -> Result<WaveState> {
    v.same_grid(f)?;
    let limit = stability_limit(f.m(), f.l());
    if !(dt > 0.0) || dt >= limit {
        return Err(Error::UnstableTimestep { dt, limit });
    }
    if !(t >= 0.0) {
        return Err(Error::InvalidInput(format!("time must be nonnegative, got {t}")));
    }
    let steps = (t / dt).ceil() as usize;
    let dt = if steps > 0 { t / steps as f64 } else { 0.0 };
    let mut u = GridField::zeros(f.m(), f.l())?.fft();
    let mut ud = f.fft();
    let mags = u.magnitudes();
    for _ in 0..steps {
        let (a, b) = free_step(&u, &ud, 0.5 * dt, &mags);
        let phys = a.ifft();
        let kick = v.mul(&phys)?.fft();
        let mut b = b;
        for (z, k) in b.data_mut().iter_mut().zip(kick.data()) {
            *z -= k * dt;
        }
        let (a2, b2) = free_step(&a, &b, 0.5 * dt, &mags);
        u = a2;
        ud = b2;
    }
    Ok(WaveState { u: u.ifft(), u_dot: ud.ifft(), time: t })
}

/// `int |u_dot|^2 + |grad u|^2 + v |u|^2`; the gradient term is spectral.
pub fn energy(state: &WaveState, v: &GridField) -> Result<f64> {
    let s = state.u.fft();
    let mags = s.magnitudes();
    let norm = s.dk().powi(3) / (2.0 * std::f64::consts::PI).powi(3);
    let grad: f64 = s.data().iter().zip(&mags).map(|(z, r)| r * r * z.norm_sqr()).sum::<f64>() * norm;
    let kinetic = state.u_dot.l2_norm().powi(2);
    let pot: f64 = state.u.data().iter().zip(v.data()).map(|(u, v)| v.re * u.norm_sqr()).sum::<f64>()
        * state.u.cell_volume();
    Ok(kinetic + grad + pot)
}
