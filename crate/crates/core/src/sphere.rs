//! Quadrature on the unit sphere: Gauss-Legendre in `cos(theta)` times the
//! trapezoid rule in `phi`. Weights are normalized to the mean (they sum to 1).

use std::f64::consts::PI;

use crate::quadrature::gauss_legendre;

#[derive(Debug, Clone)]
pub struct SphereRule {
    pub dirs: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
}

impl SphereRule {
    /// Exact for spherical harmonics of degree `< min(2 n_theta, n_phi)`.
    pub fn product(n_theta: usize, n_phi: usize) -> Self {
        let (x, w) = gauss_legendre(n_theta.max(1));
        let n_phi = n_phi.max(1);
        let mut dirs = Vec::with_capacity(x.len() * n_phi);
        let mut weights = Vec::with_capacity(x.len() * n_phi);
        for (ct, wt) in x.iter().zip(w) {
            let st = (1.0 - ct * ct).max(0.0).sqrt();
            for k in 0..n_phi {
                let ph = 2.0 * PI * (k as f64 + 0.5) / n_phi as f64;
                dirs.push([st * ph.cos(), st * ph.sin(), *ct]);
                weights.push(wt * 0.5 / n_phi as f64);
            }
        }
        Self { dirs, weights }
    }

    /// Rule resolving angular frequencies up to about `bandwidth * radius`.
    pub fn for_band(bandwidth_radius: f64, max_theta: usize) -> Self {
        let n = (10 + (0.75 * bandwidth_radius).ceil() as usize).min(max_theta.max(10));
        Self::product(n, 2 * n)
    }

    pub fn len(&self) -> usize {
        self.dirs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dirs.is_empty()
    }

    /// Mean of `f` over the sphere of radius `r` centered at `c`.
    pub fn mean<F: Fn([f64; 3]) -> f64>(&self, c: [f64; 3], r: f64, f: F) -> f64 {
        self.dirs
            .iter()
            .zip(&self.weights)
            .map(|(d, w)| w * f([c[0] + r * d[0], c[1] + r * d[1], c[2] + r * d[2]]))
            .sum()
    }
}
