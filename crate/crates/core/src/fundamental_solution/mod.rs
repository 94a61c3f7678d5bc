//! Fourier profiles of the truncated fundamental solutions `E_{N,R}`, their
//! structural identities, and the physical-space pairing with `E_2`.

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::QuadratureSpec;
use crate::special_kernels::{f_n_eval, KernelTable, MomentKernel, RadialTuple};

pub mod e2;
pub mod relations;

pub use e2::{e2_pair, E2Pairing, PairTest, Reduction};
pub use relations::{loglog_slope, pv_product, recursion_check};

/// `N >= 2` frequency vectors in three dimensions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyTuple {
    pub xi: Vec<[f64; 3]>,
}

impl FrequencyTuple {
    pub fn new(xi: Vec<[f64; 3]>) -> Result<Self> {
        if xi.len() < 2 {
            return Err(Error::InvalidInput("frequency tuple needs N >= 2 vectors".into()));
        }
        Ok(Self { xi })
    }

    pub fn radii(&self) -> Vec<f64> {
        self.xi.iter().map(|v| (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()).collect()
    }
}

#[derive(Debug, Clone)]
pub enum KernelBackend {
    /// Quadrature per evaluation.
    OnDemand(QuadratureSpec),
    /// Interpolated cutoff moments.
    Moments(Arc<MomentKernel>),
    /// Tabulated profile; out-of-range radii use the fallback spec when present.
    Table { table: Arc<KernelTable>, fallback: Option<QuadratureSpec> },
}

/// `E_{N,R}` seen through its radial Fourier profile.
#[derive(Debug, Clone)]
pub struct TruncatedKernel {
    order: usize,
    radius: f64,
    backend: KernelBackend,
}

impl TruncatedKernel {
    fn checked(order: usize, radius: f64, backend: KernelBackend) -> Result<Self> {
        if order < 2 {
            return Err(Error::InvalidInput("kernel order must be >= 2".into()));
        }
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidInput(format!("kernel radius must be positive, got {radius}")));
        }
        Ok(Self { order, radius, backend })
    }

    pub fn on_demand(order: usize, radius: f64, q: QuadratureSpec) -> Result<Self> {
        q.validate()?;
        Self::checked(order, radius, KernelBackend::OnDemand(q))
    }

    /// Moment backend able to evaluate frequencies up to `max_frequency`.
    pub fn moments(order: usize, radius: f64, max_frequency: f64) -> Result<Self> {
        let omega = 2.0 * radius * max_frequency * 1.05 + 2.0;
        Self::checked(order, radius, KernelBackend::Moments(MomentKernel::shared(order, omega)?))
    }

    pub fn with_table(table: Arc<KernelTable>, radius: f64, q: &QuadratureSpec, fallback: bool) -> Result<Self> {
        if table.header().quadrature != *q {
            return Err(Error::InvalidInput(format!(
                "kernel table {} was built with different quadrature settings",
                table.hash()
            )));
        }
        let order = table.order();
        Self::checked(order, radius, KernelBackend::Table { table, fallback: fallback.then_some(*q) })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn backend(&self) -> &KernelBackend {
        &self.backend
    }

    pub fn with_radius(&self, radius: f64) -> Result<Self> {
        let backend = match &self.backend {
            KernelBackend::Moments(m) => {
                let need = m.omega_max() * radius / self.radius;
                if need > m.omega_max() {
                    KernelBackend::Moments(MomentKernel::shared(self.order, need)?)
                } else {
                    self.backend.clone()
                }
            }
            b => b.clone(),
        };
        Self::checked(self.order, radius, backend)
    }

    /// `R^{2N-2} F_N(R r_1, ..., R r_N)`.
    pub fn fourier_e_radii(&self, radii: &[f64]) -> Result<Complex64> {
        if radii.len() != self.order {
            return Err(Error::InvalidInput(format!("expected {} radii, got {}", self.order, radii.len())));
        }
        let scaled: Vec<f64> = radii.iter().map(|r| r.abs() * self.radius).collect();
        let value = match &self.backend {
            KernelBackend::OnDemand(q) => f_n_eval(&RadialTuple::new(scaled)?, q)?,
            KernelBackend::Moments(m) => Complex64::new(m.f_n(&scaled)?, 0.0),
            KernelBackend::Table { table, fallback } => match table.interpolate(&scaled) {
                Ok(v) => v,
                Err(Error::TableRangeExceeded { .. }) if fallback.is_some() => {
                    f_n_eval(&RadialTuple::new(scaled)?, fallback.as_ref().unwrap())?
                }
                Err(e) => return Err(e),
            },
        };
        Ok(value * self.radius.powi(2 * self.order as i32 - 2))
    }

    /// Fast two-radius path used by the lattice sums (moment backend only).
    #[inline]
    pub(crate) fn f2_fast(&self, r1: f64, r2: f64) -> Option<f64> {
        match &self.backend {
            KernelBackend::Moments(m) if self.order == 2 => {
                Some(m.f2(r1 * self.radius, r2 * self.radius) * self.radius * self.radius)
            }
            _ => None,
        }
    }

    pub fn max_fast_frequency(&self) -> Option<f64> {
        match &self.backend {
            KernelBackend::Moments(m) => Some((m.omega_max() - 1.0) / self.radius),
            _ => None,
        }
    }
}

/// `F E_{N,R}(xi_1, ..., xi_N)`.
pub fn fourier_e(k: &TruncatedKernel, xi: &FrequencyTuple) -> Result<Complex64> {
    if xi.xi.len() != k.order {
        return Err(Error::InvalidInput(format!("expected {} frequencies, got {}", k.order, xi.xi.len())));
    }
    k.fourier_e_radii(&xi.radii())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rotate(v: [f64; 3], angle: f64) -> [f64; 3] {
        let (s, c) = angle.sin_cos();
        [c * v[0] - s * v[1], s * v[0] + c * v[1], v[2]]
    }

    #[test]
    fn rotation_invariance_and_scaling() {
        let k1 = TruncatedKernel::on_demand(2, 1.0, QuadratureSpec::default()).unwrap();
        let k2 = TruncatedKernel::on_demand(2, 2.0, QuadratureSpec::default()).unwrap();
        let xi = FrequencyTuple::new(vec![[0.3, -0.4, 1.1], [0.9, 0.2, -0.5]]).unwrap();
        let rot = FrequencyTuple::new(vec![rotate(xi.xi[0], 0.7), rotate(xi.xi[1], -1.9)]).unwrap();
        let a = fourier_e(&k1, &xi).unwrap();
        assert!((a - fourier_e(&k1, &rot).unwrap()).norm() < 1e-14);
        let doubled = FrequencyTuple::new(xi.xi.iter().map(|v| [2.0 * v[0], 2.0 * v[1], 2.0 * v[2]]).collect()).unwrap();
        let lhs = fourier_e(&k2, &xi).unwrap();
        let rhs = fourier_e(&k1, &doubled).unwrap() * 4.0;
        assert!((lhs - rhs).norm() < 1e-10);
    }

    #[test]
    fn symmetric_in_leading_slots() {
        let k = TruncatedKernel::on_demand(3, 1.0, QuadratureSpec::default()).unwrap();
        let a = FrequencyTuple::new(vec![[0.5, 0.0, 0.0], [0.0, 1.5, 0.0], [0.0, 0.0, 2.5]]).unwrap();
        let b = FrequencyTuple::new(vec![a.xi[1], a.xi[0], a.xi[2]]).unwrap();
        assert!((fourier_e(&k, &a).unwrap() - fourier_e(&k, &b).unwrap()).norm() < 1e-12);
    }

    #[test]
    fn table_backend_checks_settings_and_range() {
        let q = QuadratureSpec::default();
        let table = Arc::new(
            KernelTable::build(2, 2.0, 0.05, crate::special_kernels::table::TableEvaluator::Moments, &q).unwrap(),
        );
        let other = QuadratureSpec { rel_tol: 1e-9, ..q };
        assert!(TruncatedKernel::with_table(table.clone(), 1.0, &other, false).is_err());
        let strict = TruncatedKernel::with_table(table.clone(), 1.0, &q, false).unwrap();
        assert!(matches!(strict.fourier_e_radii(&[3.0, 0.0]), Err(Error::TableRangeExceeded { .. })));
        let lenient = TruncatedKernel::with_table(table, 1.0, &q, true).unwrap();
        let exact = f_n_eval(&RadialTuple::new(vec![3.0, 0.0]).unwrap(), &q).unwrap();
        assert!((lenient.fourier_e_radii(&[3.0, 0.0]).unwrap() - exact).norm() < 1e-14);
    }
}
