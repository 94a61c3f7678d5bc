use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::phi::{phi_sq, separation_threshold, stable_divided_sum, RadialTuple};
use crate::error::{Error, Result};
use crate::quadrature::{refine_until_converged, QuadratureSpec};

/// Complex damping `sigma` of the one-sided Laplace transform; `Re sigma > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexShift(Complex64);

impl ComplexShift {
    pub fn new(sigma: Complex64) -> Result<Self> {
        if !(sigma.re > 0.0) || !sigma.im.is_finite() {
            return Err(Error::InvalidInput(format!("Re(sigma) must be positive, got {sigma}")));
        }
        Ok(Self(sigma))
    }

    pub fn real(sigma: f64) -> Result<Self> {
        Self::new(Complex64::new(sigma, 0.0))
    }

    pub fn value(&self) -> Complex64 {
        self.0
    }
}

/// Time profile of `phi_{a_1} * ... * phi_{a_m}` with its expansion coefficients
/// precomputed when the squares are separated.
#[derive(Debug, Clone)]
pub struct ChainProfile {
    squares: Vec<f64>,
    coefficients: Option<Vec<f64>>,
}

impl ChainProfile {
    pub fn new(radii: &[f64]) -> Self {
        let squares: Vec<f64> = radii.iter().map(|a| a * a).collect();
        let thr = separation_threshold(&squares);
        let separated = squares
            .iter()
            .enumerate()
            .all(|(i, qi)| squares.iter().skip(i + 1).all(|qj| (qi - qj).abs() >= thr));
        let coefficients = separated.then(|| {
            (0..squares.len())
                .map(|j| {
                    squares
                        .iter()
                        .enumerate()
                        .filter(|(k, _)| *k != j)
                        .fold(1.0, |c, (_, qk)| c / (qk - squares[j]))
                })
                .collect()
        });
        Self { squares, coefficients }
    }

    pub fn eval(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        match &self.coefficients {
            Some(c) => c.iter().zip(&self.squares).map(|(c, q)| c * phi_sq(*q, t)).sum(),
            None => stable_divided_sum(&self.squares, |q| phi_sq(q, t)),
        }
    }

    /// Upper bound of the number of sine frequencies present.
    pub fn frequency_bound(&self) -> f64 {
        self.squares.iter().map(|q| q.sqrt()).sum()
    }

    pub fn len(&self) -> usize {
        self.squares.len()
    }

    pub fn is_empty(&self) -> bool {
        self.squares.is_empty()
    }
}

/// Closed form `F(a_1..a_N; sigma)` of the damped cosine transform of a phi chain.
pub fn laplace_f_closed(a: &RadialTuple, sigma: ComplexShift) -> Result<Complex64> {
    if a.len() < 2 {
        return Err(Error::InvalidInput("need at least two radii".into()));
    }
    let s = sigma.value();
    let an = a.radii()[a.len() - 1];
    let i = Complex64::i();
    let minus = Complex64::new(an, 0.0) - i * s;
    let plus = Complex64::new(an, 0.0) + i * s;
    let mut p1 = Complex64::new(1.0, 0.0);
    let mut p2 = Complex64::new(1.0, 0.0);
    for &aj in &a.radii()[..a.len() - 1] {
        p1 /= aj * aj - minus * minus;
        p2 /= aj * aj - plus * plus;
    }
    Ok(0.5 * (p1 + p2))
}

/// The same transform computed by quadrature in `t`, truncated where the damped
/// integrand drops below `abs_tol`.
pub fn laplace_f_direct(a: &RadialTuple, sigma: ComplexShift, q: &QuadratureSpec) -> Result<Complex64> {
    if a.len() < 2 {
        return Err(Error::InvalidInput("need at least two radii".into()));
    }
    q.validate()?;
    let s = sigma.value();
    let n = a.len();
    let chain = ChainProfile::new(&a.radii()[..n - 1]);
    let an = a.radii()[n - 1];
    // |chain(t)| <= t^{2m-1}/(2m-1)! for m factors.
    let power = (2 * chain.len() - 1) as i32;
    let factorial: f64 = (1..=power).map(|k| k as f64).product();
    let envelope = |t: f64| (-s.re * t).exp() * t.max(1.0).powi(power) / factorial / s.re;
    let mut horizon = 1.0;
    while envelope(horizon) > q.abs_tol * 1e-2 {
        horizon *= 1.1;
    }
    let freq = chain.frequency_bound() + an + s.im.abs() + s.re;
    let width = (q.oscillation_guard * std::f64::consts::PI / freq.max(1e-12)).min(0.25);
    let panels = (horizon / width).ceil() as usize;
    refine_until_converged(
        |t| Complex64::new(chain.eval(t) * (t * an).cos(), 0.0) * (-s * t).exp(),
        0.0,
        horizon,
        panels,
        q,
    )
}
