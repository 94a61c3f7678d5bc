//! `A(2, R, s, sigma)` and the quadratic inequality it controls.

use std::f64::consts::{E, PI};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::integrals::pair_angular;
use super::report::CheckRecord;
use super::SobolevParams;
use crate::backscatter::{lattice_kernel, sobolev_norm, BetaLattice, GridPotential, LatticeSpec, Potential};
use crate::error::{Error, Result};
use crate::quadrature::adaptive_with_breaks;
use crate::special_kernels::MomentKernel;

/// Frequencies `|xi_2|` at which the supremum is sampled: 0 plus a log grid.
pub fn default_rho_grid() -> Vec<f64> {
    let (lo, hi, n) = (0.05f64, 40.0f64, 24);
    std::iter::once(0.0).chain((0..n).map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64))).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct A2Value {
    pub kernel_radius: f64,
    pub sigma: f64,
    pub rho: Vec<f64>,
    /// Weighted integral at each sampled `|xi_2|`.
    pub values: Vec<f64>,
    pub a: f64,
    pub argmax_rho: f64,
    /// Radial integration stops here; the neglected tail only lowers `A`.
    pub r_max: f64,
}

/// `max_rho (1 + 4 rho^2)^sigma int |F E_{2,R}(xi_1, xi_2)|^2 M_s^2 d xi_1` over `rho = |xi_2|`.
pub fn a2_value(kernel_radius: f64, params: &SobolevParams, rho: &[f64]) -> Result<A2Value> {
    if params.s_list.len() != 2 {
        return Err(Error::InvalidInput("A(2, ...) needs two exponents".into()));
    }
    if !(kernel_radius > 0.0) {
        return Err(Error::InvalidInput("kernel radius must be positive".into()));
    }
    let (s1, s2) = (params.s_list[0], params.s_list[1]);
    let sigma = params.sigma();
    let rk = kernel_radius;
    let rho_max = rho.iter().cloned().fold(0.0, f64::max);
    let r_max = 2.0 * rho_max + 400.0 / rk;
    let kernel = MomentKernel::shared(2, rk * (r_max + rho_max) * 1.02 + 4.0)?;
    let step = 2.0 / rk;
    let values: Result<Vec<f64>> = rho
        .par_iter()
        .map(|&p| {
            let mut breaks: Vec<f64> = (0..=(r_max / step).ceil() as usize).map(|i| i as f64 * step).collect();
            breaks.extend([p - 0.5 * step, p, p + 0.5 * step].into_iter().filter(|b| *b > 0.0 && *b < r_max));
            breaks.sort_by(f64::total_cmp);
            let failed = std::cell::Cell::new(None);
            let g = |r: f64| {
                let e = rk * rk * kernel.f2(rk * r, rk * p);
                match pair_angular(r, p, s1, s2) {
                    Ok(ang) => r * r * e * e * ang,
                    Err(err) => {
                        failed.set(Some(err));
                        0.0
                    }
                }
            };
            let v = adaptive_with_breaks(g, &breaks, 0.0, 1e-8, 4000)?;
            if let Some(e) = failed.into_inner() {
                return Err(e);
            }
            Ok((1.0 + 4.0 * p * p).powf(sigma) * v)
        })
        .collect();
    let values = values?;
    let (i, a) = values.iter().enumerate().fold((0, f64::MIN), |b, (i, v)| if *v > b.1 { (i, *v) } else { b });
    Ok(A2Value { kernel_radius, sigma, rho: rho.to_vec(), values, a, argmax_rho: rho[i], r_max })
}

/// `C^2 2^{2 min(s_j - a_j)} 2^{10} R e^4` with `C = 1`: the kernel envelope at `gamma = 1/R`.
pub fn envelope(kernel_radius: f64, params: &SobolevParams) -> f64 {
    let a = params.a();
    let gap = params.s_list.iter().zip(&a).map(|(s, a)| s - a).fold(f64::INFINITY, f64::min);
    2f64.powf(2.0 * gap) * 1024.0 * kernel_radius * E.powi(4)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairCheck {
    /// `||B_{2,R}(v_1, v_2)||_{(sigma)}^2`.
    pub lhs: f64,
    /// `(2 pi)^{-3} A prod ||v_j||_{(s_j)}^2`.
    pub rhs: f64,
    pub norms: [f64; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct A2Report {
    pub value: A2Value,
    pub envelope: f64,
    /// `sqrt(A / envelope)`: the constant the envelope needs.
    pub implied_constant: f64,
    pub pairs: Vec<PairCheck>,
}

impl A2Report {
    pub fn records(&self, params: &SobolevParams, ceiling: Option<f64>) -> Vec<CheckRecord> {
        let p = json!({"kernel_radius": self.value.kernel_radius, "s": params.s_list, "epsilon": params.epsilon,
            "sigma": self.value.sigma, "sup_over": "max over sampled |xi_2|", "argmax": self.value.argmax_rho});
        let mut out = vec![CheckRecord::one_sided("a2_envelope", p.clone(), self.value.a, f64::INFINITY)
            .with_constant(self.implied_constant, ceiling)
            .with_samples(self.value.rho.len())];
        for (i, c) in self.pairs.iter().enumerate() {
            let mut q = p.clone();
            q["pair"] = json!(i);
            out.push(CheckRecord::one_sided("b2_quadratic_bound", q, c.lhs, c.rhs).with_constant(c.lhs / c.rhs, None));
        }
        out
    }
}

fn pair_lattice(v1: &GridPotential, v2: &GridPotential, kernel_radius: f64) -> LatticeSpec {
    let support = v1.support_radius().max(v2.support_radius());
    let h = v1.field().spacing().max(v2.field().spacing());
    LatticeSpec { spacing: 0.999 * 2.0 * PI / (2.0 * support + 2.0 * kernel_radius), radius: PI / h, symmetry: true }
}

/// `A(2, R)` plus `||B_{2,R}(v_1, v_2)||^2_{(sigma)} <= (2 pi)^{-3} A ||v_1||^2 ||v_2||^2` on each pair.
pub fn check_a2_chain(
    kernel_radius: f64,
    params: &SobolevParams,
    pairs: &[(GridPotential, GridPotential)],
) -> Result<A2Report> {
    let value = a2_value(kernel_radius, params, &default_rho_grid())?;
    let env = envelope(kernel_radius, params);
    let sigma = params.sigma();
    let mut checks = Vec::new();
    for (v1, v2) in pairs {
        let spec = pair_lattice(v1, v2, kernel_radius);
        let k = lattice_kernel(kernel_radius, &spec)?;
        let beta = BetaLattice::build(v1, v2, &k, &spec)?;
        let lhs = beta.sobolev_norm_sq(sigma);
        let norms = [sobolev_norm(v1.field(), params.s_list[0]), sobolev_norm(v2.field(), params.s_list[1])];
        let rhs = value.a * (norms[0] * norms[1]).powi(2) / (2.0 * PI).powi(3);
        checks.push(PairCheck { lhs, rhs, norms });
    }
    Ok(A2Report { implied_constant: (value.a / env).sqrt(), envelope: env, value, pairs: checks })
}
