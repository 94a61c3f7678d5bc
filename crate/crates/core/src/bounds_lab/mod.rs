//! Numerical checks of the estimate chain behind the smoothing bounds: the
//! elementary inequality for `h_gamma`, the radial integrals with `h_gamma^2`,
//! `T_{2,gamma}`, the constant `A(2, R, s, sigma)` and the scaling sweep.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub mod a2;
pub mod integrals;
pub mod report;
pub mod sweep;

pub use a2::{a2_value, check_a2_chain, A2Report, A2Value, PairCheck};
pub use integrals::{check_fs_bound, check_hgamma_conv, check_t2, fs_closed, fs_sphere, Ceilings};
pub use report::{CheckRecord, VerificationReport};
pub use sweep::{main_scaling_sweep, ScalingFamily, ScalingPoint, ScalingReport};

/// `<x> = (1 + |x|^2)^{1/2}`.
pub fn japanese(x: &[f64]) -> f64 {
    (1.0 + x.iter().map(|v| v * v).sum::<f64>()).sqrt()
}

/// Exponents `s_j >= m`, `a_j = min(s_j - m, 1 - eps)` and
/// `sigma = min(s_j - a_j) + sum a_j`, with `m = 0` in three dimensions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SobolevParams {
    pub s_list: Vec<f64>,
    pub epsilon: f64,
}

impl SobolevParams {
    pub const M: f64 = 0.0;

    pub fn new(s_list: Vec<f64>, epsilon: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::InvalidInput(format!("epsilon {epsilon} outside (0, 1)")));
        }
        if s_list.is_empty() || s_list.iter().any(|s| !(*s >= Self::M)) {
            return Err(Error::InvalidInput("every s_j must be >= m = 0".into()));
        }
        Ok(Self { s_list, epsilon })
    }

    pub fn a(&self) -> Vec<f64> {
        self.s_list.iter().map(|s| (s - Self::M).min(1.0 - self.epsilon)).collect()
    }

    pub fn sigma(&self) -> f64 {
        let a = self.a();
        let gap = self.s_list.iter().zip(&a).map(|(s, a)| s - a).fold(f64::INFINITY, f64::min);
        gap + a.iter().sum::<f64>()
    }
}

/// `M_s(xi_1..xi_N) = <xi_1 + xi_N>^{-s_1} <xi_2 - xi_1>^{-s_2} ... <xi_N - xi_{N-1}>^{-s_N}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightM {
    pub s_list: Vec<f64>,
}

fn add(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2]]
}

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

impl WeightM {
    pub fn new(s_list: Vec<f64>) -> Result<Self> {
        if s_list.len() < 2 {
            return Err(Error::InvalidInput("WeightM needs at least two exponents".into()));
        }
        Ok(Self { s_list })
    }

    pub fn eval(&self, xi: &[[f64; 3]]) -> f64 {
        let n = xi.len();
        assert_eq!(n, self.s_list.len(), "one frequency per exponent");
        let mut out = japanese(&add(xi[0], xi[n - 1])).powf(-self.s_list[0]);
        for j in 1..n {
            out *= japanese(&sub(xi[j], xi[j - 1])).powf(-self.s_list[j]);
        }
        out
    }

    /// Both sides of the splitting of `M_s` into weights with one fewer frequency.
    pub fn split_sides(&self, xi: &[[f64; 3]]) -> (f64, f64) {
        let s = &self.s_list;
        let n = xi.len();
        let lhs = self.eval(xi);
        let rest = &xi[1..];
        let (s1, s2) = (s[0], s[1]);
        let m_tail = |exps: Vec<f64>| -> f64 {
            if exps.len() == 1 {
                japanese(&add(rest[0], rest[0])).powf(-exps[0])
            } else {
                WeightM { s_list: exps }.eval(rest)
            }
        };
        let drop_first: Vec<f64> = s[1..].to_vec();
        let mut drop_second = vec![s1];
        drop_second.extend_from_slice(&s[2..]);
        let rhs = 2f64.powf(s2) * japanese(&add(xi[0], xi[n - 1])).powf(-s1) * m_tail(drop_first)
            + 2f64.powf(s1) * japanese(&sub(xi[1], xi[0])).powf(-s2) * m_tail(drop_second);
        (lhs, rhs)
    }
}

/// Summary of a randomized one-sided check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub samples: usize,
    /// Smallest `rhs - lhs` (or `rhs / lhs` for multiplicative checks) seen.
    pub min_margin: f64,
}

/// `(1 + |s - t|)(1 + |t|) >= 1 + |s|` on dyadic rationals `k / 2^20`, checked in
/// exact integer arithmetic.
pub fn check_hgamma_lemma(samples: usize, seed: u64) -> Result<SweepSummary> {
    const ONE: i128 = 1 << 20;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut min_margin = f64::INFINITY;
    let fixed = [(0i128, 0i128), (5 * ONE, -5 * ONE)];
    let random = (0..samples.saturating_sub(fixed.len())).map(|_| {
        let span = 1i128 << 40;
        (rng.gen_range(-span..span), rng.gen_range(-span..span))
    });
    let all: Vec<(i128, i128)> = fixed.into_iter().chain(random).collect();
    for (s, t) in &all {
        let lhs = (ONE + (s - t).abs()) * (ONE + t.abs());
        let rhs = ONE * (ONE + s.abs());
        if lhs < rhs {
            return Err(Error::CounterexampleFound(format!(
                "s = {}, t = {}",
                *s as f64 / ONE as f64,
                *t as f64 / ONE as f64
            )));
        }
        min_margin = min_margin.min((lhs - rhs) as f64 / (ONE * ONE) as f64);
    }
    Ok(SweepSummary { samples: all.len(), min_margin })
}

fn random_tuple(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> Vec<[f64; 3]> {
    (0..n)
        .map(|_| {
            let mag = scale * rng.gen::<f64>().powi(2);
            [mag * rng.gen_range(-1.0..1.0), mag * rng.gen_range(-1.0..1.0), mag * rng.gen_range(-1.0..1.0)]
        })
        .collect()
}

/// Splitting of `M_s` on random tuples; fails on the first violation beyond rounding.
pub fn check_weight_splitting(weight: &WeightM, samples: usize, seed: u64) -> Result<SweepSummary> {
    let n = weight.s_list.len();
    let margins: Result<Vec<f64>> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let xi = random_tuple(&mut rng, n, 20.0);
            let (lhs, rhs) = weight.split_sides(&xi);
            if lhs > rhs * (1.0 + 1e-12) {
                return Err(Error::CounterexampleFound(format!("M split fails at {xi:?}: {lhs} > {rhs}")));
            }
            Ok(rhs / lhs)
        })
        .collect();
    Ok(SweepSummary { samples, min_margin: margins?.into_iter().fold(f64::INFINITY, f64::min) })
}

/// `prod <chain differences>^{-1} <= N <2 xi_N>^{-1}` on random tuples.
pub fn check_chain_lower_bound(order: usize, samples: usize, seed: u64) -> Result<SweepSummary> {
    if order < 2 {
        return Err(Error::InvalidInput("order must be >= 2".into()));
    }
    let ones = WeightM { s_list: vec![1.0; order] };
    let margins: Result<Vec<f64>> = (0..samples)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let xi = random_tuple(&mut rng, order, 20.0);
            let lhs = ones.eval(&xi);
            let last = xi[order - 1];
            let rhs = order as f64 / japanese(&[2.0 * last[0], 2.0 * last[1], 2.0 * last[2]]);
            if lhs > rhs * (1.0 + 1e-12) {
                return Err(Error::CounterexampleFound(format!("chain bound fails at {xi:?}")));
            }
            Ok(rhs / lhs)
        })
        .collect();
    Ok(SweepSummary { samples, min_margin: margins?.into_iter().fold(f64::INFINITY, f64::min) })
}
