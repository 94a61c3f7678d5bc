//! Periodic grid fields on `[-L, L)^3` and their spectral coefficients.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridField {
    m: usize,
    l: f64,
    data: Vec<Complex64>,
}

/// Coefficients `h^3 sum_x f(x) e^{-i k x}` on the dual lattice `(pi/L) Z^3`, stored in
/// FFT order (index `i` means wavenumber `i` for `i < M/2`, `i - M` otherwise).
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    m: usize,
    l: f64,
    data: Vec<Complex64>,
}

fn check_shape(m: usize, l: f64) -> Result<()> {
    if m < 8 || m % 2 != 0 {
        return Err(Error::InvalidInput(format!("grid size must be even and >= 8, got {m}")));
    }
    if !(l > 0.0 && l.is_finite()) {
        return Err(Error::InvalidInput(format!("box half-width must be positive, got {l}")));
    }
    Ok(())
}

impl GridField {
    pub fn zeros(m: usize, l: f64) -> Result<Self> {
        check_shape(m, l)?;
        Ok(Self { m, l, data: vec![Complex64::new(0.0, 0.0); m * m * m] })
    }

    pub fn from_fn<F: Fn([f64; 3]) -> Complex64 + Sync>(m: usize, l: f64, f: F) -> Result<Self> {
        check_shape(m, l)?;
        let h = 2.0 * l / m as f64;
        let data = (0..m * m * m)
            .into_par_iter()
            .map(|idx| {
                let (i, j, k) = (idx / (m * m), (idx / m) % m, idx % m);
                f([-l + i as f64 * h, -l + j as f64 * h, -l + k as f64 * h])
            })
            .collect();
        Ok(Self { m, l, data })
    }

    pub fn from_real_fn<F: Fn([f64; 3]) -> f64 + Sync>(m: usize, l: f64, f: F) -> Result<Self> {
        Self::from_fn(m, l, |x| Complex64::new(f(x), 0.0))
    }

    pub fn from_samples(m: usize, l: f64, data: Vec<Complex64>) -> Result<Self> {
        check_shape(m, l)?;
        if data.len() != m * m * m {
            return Err(Error::InvalidInput("sample count does not match M^3".into()));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidInput("grid samples must be finite".into()));
        }
        Ok(Self { m, l, data })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn l(&self) -> f64 {
        self.l
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.l / self.m as f64
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn point(&self, idx: usize) -> [f64; 3] {
        let (m, h) = (self.m, self.spacing());
        let (i, j, k) = (idx / (m * m), (idx / m) % m, idx % m);
        [-self.l + i as f64 * h, -self.l + j as f64 * h, -self.l + k as f64 * h]
    }

    pub fn same_grid(&self, other: &GridField) -> Result<()> {
        if self.m != other.m || self.l != other.l {
            return Err(Error::InvalidInput("fields live on different grids".into()));
        }
        Ok(())
    }

    pub fn map<F: Fn(Complex64) -> Complex64 + Sync>(&self, f: F) -> Self {
        Self { m: self.m, l: self.l, data: self.data.par_iter().map(|z| f(*z)).collect() }
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map(|z| z * c)
    }

    pub fn add(&self, other: &GridField) -> Result<Self> {
        self.same_grid(other)?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        Ok(Self { m: self.m, l: self.l, data })
    }

    pub fn sub(&self, other: &GridField) -> Result<Self> {
        self.add(&other.scale(-1.0))
    }

    /// Pointwise product.
    pub fn mul(&self, other: &GridField) -> Result<Self> {
        self.same_grid(other)?;
        let data = self.data.par_iter().zip(&other.data).map(|(a, b)| a * b).collect();
        Ok(Self { m: self.m, l: self.l, data })
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(3)
    }

    /// `(int |f|^2)^{1/2}` by the rectangle rule (exact for trigonometric polynomials).
    pub fn l2_norm(&self) -> f64 {
        (self.data.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.cell_volume()).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `int f conj(g)`.
    pub fn inner(&self, other: &GridField) -> Result<Complex64> {
        self.same_grid(other)?;
        Ok(self.data.iter().zip(&other.data).map(|(a, b)| a * b.conj()).sum::<Complex64>() * self.cell_volume())
    }

    pub fn fft(&self) -> SpectralField {
        let mut data = self.data.clone();
        fft3(&mut data, self.m, false);
        let h3 = self.cell_volume();
        let m = self.m;
        // Shift the origin from the corner -L to the center: factor e^{i k L} = (-1)^n.
        data.par_iter_mut().enumerate().for_each(|(idx, z)| {
            let (i, j, k) = (idx / (m * m), (idx / m) % m, idx % m);
            let sign = if (wave_index(i, m) + wave_index(j, m) + wave_index(k, m)).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            *z *= h3 * sign;
        });
        SpectralField { m, l: self.l, data }
    }
}

/// Signed wavenumber index of FFT slot `i`.
pub fn wave_index(i: usize, m: usize) -> i64 {
    if i < m / 2 {
        i as i64
    } else {
        i as i64 - m as i64
    }
}

impl SpectralField {
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn l(&self) -> f64 {
        self.l
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn dk(&self) -> f64 {
        std::f64::consts::PI / self.l
    }

    /// Wave vector of slot `idx`.
    pub fn wavevector(&self, idx: usize) -> [f64; 3] {
        let m = self.m;
        let dk = self.dk();
        let (i, j, k) = (idx / (m * m), (idx / m) % m, idx % m);
        [dk * wave_index(i, m) as f64, dk * wave_index(j, m) as f64, dk * wave_index(k, m) as f64]
    }

    /// `|k|` for every slot.
    pub fn magnitudes(&self) -> Vec<f64> {
        (0..self.data.len())
            .map(|idx| {
                let k = self.wavevector(idx);
                (k[0] * k[0] + k[1] * k[1] + k[2] * k[2]).sqrt()
            })
            .collect()
    }

    pub fn max_frequency(&self) -> f64 {
        self.dk() * (self.m / 2) as f64 * 3f64.sqrt()
    }

    /// Multiplies by a radial multiplier `mult(|k|)`.
    pub fn apply_radial<F: Fn(f64) -> f64 + Sync>(&self, mult: F) -> Self {
        let mags = self.magnitudes();
        let data = self.data.par_iter().zip(mags.par_iter()).map(|(z, r)| z * mult(*r)).collect();
        Self { m: self.m, l: self.l, data }
    }

    pub fn ifft(&self) -> GridField {
        let m = self.m;
        let inv = 1.0 / (2.0 * self.l / m as f64).powi(3) / (m * m * m) as f64;
        let mut data = self.data.clone();
        data.par_iter_mut().enumerate().for_each(|(idx, z)| {
            let (i, j, k) = (idx / (m * m), (idx / m) % m, idx % m);
            let sign = if (wave_index(i, m) + wave_index(j, m) + wave_index(k, m)).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
            *z *= inv * sign;
        });
        fft3(&mut data, m, true);
        GridField { m, l: self.l, data }
    }

    pub fn from_parts(m: usize, l: f64, data: Vec<Complex64>) -> Result<Self> {
        check_shape(m, l)?;
        if data.len() != m * m * m {
            return Err(Error::InvalidInput("coefficient count does not match M^3".into()));
        }
        Ok(Self { m, l, data })
    }
}

fn plan(m: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    let mut planner = FftPlanner::new();
    if inverse {
        planner.plan_fft_inverse(m)
    } else {
        planner.plan_fft_forward(m)
    }
}

/// Unnormalized 3-D FFT of an `m^3` array in row-major order.
pub fn fft3(data: &mut [Complex64], m: usize, inverse: bool) {
    let fft = plan(m, inverse);
    data.par_chunks_mut(m).for_each(|line| fft.process(line));
    // Middle axis: transpose within each plane.
    data.par_chunks_mut(m * m).for_each(|plane| {
        let mut line = vec![Complex64::new(0.0, 0.0); m];
        for k in 0..m {
            for j in 0..m {
                line[j] = plane[j * m + k];
            }
            fft.process(&mut line);
            for j in 0..m {
                plane[j * m + k] = line[j];
            }
        }
    });
    // Outer axis: gather columns across planes.
    let mm = m * m;
    let columns: Vec<Vec<Complex64>> = (0..mm)
        .into_par_iter()
        .map(|c| {
            let mut line: Vec<Complex64> = (0..m).map(|i| data[i * mm + c]).collect();
            fft.process(&mut line);
            line
        })
        .collect();
    for (c, line) in columns.into_iter().enumerate() {
        for (i, z) in line.into_iter().enumerate() {
            data[i * mm + c] = z;
        }
    }
}
