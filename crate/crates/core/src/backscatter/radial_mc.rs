//! Monte Carlo for `B_N v` with rotation-invariant `v`. With `xi_N = rho e_z`
//! fixed by symmetry, the chain `xi_1 .. xi_{N-1}` is drawn from a mixture of a
//! uniform ball and a Cauchy shell around `|xi_N|`; `rho` is uniform.

use std::f64::consts::PI;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::potential::RadialPotential;
use super::{BornTermResult, RadialSamples, TermField};
use crate::error::{Error, Result};
use crate::special_kernels::MomentKernel;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McSpec {
    pub samples: usize,
    pub seed: u64,
    /// Shell width; defaults to `N / (4R)`.
    #[serde(default)]
    pub gamma: Option<f64>,
}

const BLOCK: usize = 4096;
const MIN_SAMPLES: usize = 10_000;
const PROFILE_TOL: f64 = 1e-9;

struct Shell {
    center: f64,
    gamma: f64,
    lo: f64,
    mass: f64,
}

impl Shell {
    fn new(center: f64, gamma: f64, r_max: f64) -> Self {
        let cdf = |r: f64| ((r - center) / gamma).atan() / PI;
        let lo = cdf(0.0);
        Self { center, gamma, lo, mass: cdf(r_max) - lo }
    }

    fn sample(&self, u: f64) -> f64 {
        let p = self.lo + u * self.mass;
        (self.center + self.gamma * (PI * p).tan()).max(0.0)
    }

    fn density(&self, r: f64) -> f64 {
        let z = (r - self.center) / self.gamma;
        1.0 / (PI * self.gamma * (1.0 + z * z) * self.mass)
    }
}

fn unit_vector<R: Rng>(rng: &mut R) -> [f64; 3] {
    let z: f64 = rng.gen_range(-1.0..1.0);
    let ph: f64 = rng.gen_range(0.0..2.0 * PI);
    let s = (1.0 - z * z).sqrt();
    [s * ph.cos(), s * ph.sin(), z]
}

fn norm(v: [f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

fn sinc(z: f64) -> f64 {
    if z.abs() < 1e-6 {
        1.0 - z * z / 6.0
    } else {
        z.sin() / z
    }
}

/// Radius beyond which the profile stays below `PROFILE_TOL` of its maximum.
fn effective_radius(v: &RadialPotential) -> f64 {
    let max = v.profile.iter().map(|p| p.abs()).fold(0.0, f64::max);
    let n = v.profile.len();
    let last = v.profile.iter().rposition(|p| p.abs() > PROFILE_TOL * max).unwrap_or(n - 1);
    ((last + 1).min(n - 1)) as f64 * v.rho_max / (n - 1) as f64
}

/// `B_N v` at the given radii, with standard errors.
pub fn bn_radial(v: &RadialPotential, order: usize, radii: &[f64], mc: &McSpec) -> Result<BornTermResult> {
    let start = Instant::now();
    if order < 2 {
        return Err(Error::InvalidInput("order must be >= 2".into()));
    }
    if mc.samples < MIN_SAMPLES {
        return Err(Error::InvalidInput(format!("need at least {MIN_SAMPLES} samples")));
    }
    let support = v.support_radius;
    let rk = 2.0 * (order - 1) as f64 * support;
    let gamma = mc.gamma.unwrap_or(order as f64 / (4.0 * support));
    let r_max = 0.5 * order as f64 * effective_radius(v);
    let kernel = MomentKernel::shared(order, rk * 2.0 * r_max * 1.01 + 4.0)?;
    let ball = 4.0 / 3.0 * PI * r_max.powi(3);
    let scale = rk.powi(2 * order as i32 - 2);
    let out_factor = 8.0 / (2.0 * PI).powi(3 * order as i32);
    let nr = radii.len();

    let blocks = mc.samples.div_ceil(BLOCK);
    let sums: Result<Vec<(Vec<f64>, Vec<f64>)>> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(mc.seed);
            rng.set_stream(b as u64);
            let count = BLOCK.min(mc.samples - b * BLOCK);
            let mut s1 = vec![0.0; nr];
            let mut s2 = vec![0.0; nr];
            let mut chain = vec![[0.0; 3]; order];
            let mut mags = vec![0.0; order];
            for _ in 0..count {
                let rho = rng.gen_range(0.0..r_max);
                let shell = Shell::new(rho, gamma, r_max);
                chain[order - 1] = [0.0, 0.0, rho];
                mags[order - 1] = rho;
                let mut inv_q = r_max;
                for j in 0..order - 1 {
                    let r = if rng.gen_bool(0.5) {
                        r_max * rng.gen::<f64>().cbrt()
                    } else {
                        shell.sample(rng.gen())
                    };
                    let d = unit_vector(&mut rng);
                    chain[j] = [r * d[0], r * d[1], r * d[2]];
                    mags[j] = r;
                    let q = 0.5 / ball + 0.5 * shell.density(r) / (4.0 * PI * r * r).max(1e-300);
                    inv_q /= q;
                }
                let n = order - 1;
                let mut prod = v.fourier(norm([chain[0][0] + chain[n][0], chain[0][1] + chain[n][1], chain[0][2] + chain[n][2]]));
                for j in 1..order {
                    if prod == 0.0 {
                        break;
                    }
                    let a = chain[j];
                    let b = chain[j - 1];
                    prod *= v.fourier(norm([a[0] - b[0], a[1] - b[1], a[2] - b[2]]));
                }
                if prod == 0.0 {
                    continue;
                }
                let scaled: Vec<f64> = mags.iter().map(|m| m * rk).collect();
                let w = inv_q * prod * scale * kernel.f_n(&scaled)? * 4.0 * PI * rho * rho * out_factor;
                for (i, r) in radii.iter().enumerate() {
                    let x = w * sinc(2.0 * r * rho);
                    s1[i] += x;
                    s2[i] += x * x;
                }
            }
            Ok((s1, s2))
        })
        .collect();
    let mut m1 = vec![0.0; nr];
    let mut m2 = vec![0.0; nr];
    for (a, b) in sums? {
        for i in 0..nr {
            m1[i] += a[i];
            m2[i] += b[i];
        }
    }
    let n = mc.samples as f64;
    let values: Vec<f64> = m1.iter().map(|s| s / n).collect();
    let std_errors: Vec<f64> =
        m2.iter().zip(&values).map(|(s, mean)| ((s / n - mean * mean).max(0.0) / (n - 1.0)).sqrt()).collect();
    let peak = values.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let rms_se = (std_errors.iter().map(|s| s * s).sum::<f64>() / nr.max(1) as f64).sqrt();
    let rel_se = if peak > 0.0 { rms_se / peak } else if rms_se > 0.0 { f64::INFINITY } else { 0.0 };
    if rel_se > 0.25 {
        return Err(Error::InsufficientSamples { rel_se });
    }
    let error_estimate = std_errors.iter().cloned().fold(0.0, f64::max);
    Ok(BornTermResult {
        order,
        field: TermField::Radial(RadialSamples { radii: radii.to_vec(), values, std_errors }),
        metadata: json!({
            "path": "radial_monte_carlo",
            "kernel_radius": rk,
            "gamma": gamma,
            "r_max": r_max,
            "samples": mc.samples,
            "seed": mc.seed,
            "relative_standard_error": rel_se,
        }),
        error_estimate,
        elapsed: start.elapsed().as_secs_f64(),
    })
}
