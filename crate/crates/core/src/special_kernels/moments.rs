//! Fast evaluation of the truncated-kernel profiles through tabulated cutoff
//! moments `m_k(w) = int_0^2 t^k trig(w t) chi_N(t) dt` (sine for even `k`,
//! cosine for odd `k`), interpolated by quintic Hermite splines.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rayon::prelude::*;

use super::cutoff::{chi, CutoffSpec};
use super::kernel::cutoff_pieces;
use super::phi::stable_divided_sum;
use crate::error::{Error, Result};
use crate::quadrature::gauss_legendre;

const STORED: usize = 10;
const INTERPOLATED: usize = 8;
const SERIES_RADIUS: f64 = 0.05;

#[derive(Debug)]
pub struct MomentKernel {
    order: usize,
    step: f64,
    omega_max: f64,
    values: Vec<[f64; STORED]>,
}

struct NodeSet {
    t: Vec<f64>,
    w: Vec<f64>,
}

fn node_set(order: usize, max_width: f64) -> NodeSet {
    let cut = CutoffSpec { order, scale: 1.0 };
    let (x, w) = gauss_legendre(16);
    let mut nodes = NodeSet { t: Vec::new(), w: Vec::new() };
    for piece in cutoff_pieces(order).windows(2) {
        let len = piece[1] - piece[0];
        let panels = ((len / max_width).ceil() as usize).max(1);
        let width = len / panels as f64;
        for p in 0..panels {
            let mid = piece[0] + (p as f64 + 0.5) * width;
            for (xi, wi) in x.iter().zip(w) {
                let t = mid + 0.5 * width * xi;
                nodes.t.push(t);
                nodes.w.push(0.5 * width * wi * chi(&cut, t));
            }
        }
    }
    nodes
}

fn moments_at(nodes: &NodeSet, omega: f64) -> [f64; STORED] {
    let mut out = [0.0; STORED];
    for (&t, &w) in nodes.t.iter().zip(&nodes.w) {
        let (s, c) = (omega * t).sin_cos();
        let mut p = w;
        for (k, slot) in out.iter_mut().enumerate() {
            *slot += p * if k % 2 == 0 { s } else { c };
            p *= t;
        }
    }
    out
}

impl MomentKernel {
    /// Tabulates moments on `[0, omega_max]` with the given step.
    pub fn new(order: usize, omega_max: f64, step: f64) -> Result<Self> {
        CutoffSpec::unit(order)?;
        if !(omega_max > 0.0 && step > 0.0 && step <= 0.05) {
            return Err(Error::InvalidInput(format!("bad moment table range {omega_max} / step {step}")));
        }
        let count = (omega_max / step).ceil() as usize + 1;
        let block = 2048;
        let blocks: Vec<usize> = (0..count.div_ceil(block)).collect();
        let values: Vec<Vec<[f64; STORED]>> = blocks
            .par_iter()
            .map(|&b| {
                let lo = b * block;
                let hi = ((b + 1) * block).min(count);
                let wmax = (hi - 1) as f64 * step;
                let nodes = node_set(order, (3.0 / wmax.max(1.0)).min(0.125));
                (lo..hi).map(|i| moments_at(&nodes, i as f64 * step)).collect()
            })
            .collect();
        let values: Vec<[f64; STORED]> = values.into_iter().flatten().collect();
        Ok(Self { order, step, omega_max: (count - 1) as f64 * step, values })
    }

    /// Process-wide cached table covering at least `omega_max`.
    pub fn shared(order: usize, omega_max: f64) -> Result<Arc<Self>> {
        static CACHE: OnceLock<Mutex<HashMap<(usize, u64), Arc<MomentKernel>>>> = OnceLock::new();
        let bucket = (omega_max / 64.0).ceil().max(1.0) as u64;
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        if let Some(k) = cache.lock().unwrap().iter().find(|((o, b), _)| *o == order && *b >= bucket).map(|(_, v)| v) {
            return Ok(k.clone());
        }
        let table = Arc::new(Self::new(order, bucket as f64 * 64.0, 0.01)?);
        cache.lock().unwrap().insert((order, bucket), table.clone());
        Ok(table)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn omega_max(&self) -> f64 {
        self.omega_max
    }

    /// Interpolated moment `m_k(omega)`, `k < 8`, for `|omega| <= omega_max`.
    pub fn moment(&self, k: usize, omega: f64) -> f64 {
        debug_assert!(k < INTERPOLATED);
        let parity = if k % 2 == 0 && omega < 0.0 { -1.0 } else { 1.0 };
        let w = omega.abs();
        let x = w / self.step;
        let i = (x.floor() as usize).min(self.values.len() - 2);
        let u = x - i as f64;
        let d1 = if k % 2 == 0 { 1.0 } else { -1.0 };
        let (a, b) = (&self.values[i], &self.values[i + 1]);
        let h = self.step;
        let (u2, u3) = (u * u, u * u * u);
        let (u4, u5) = (u3 * u, u3 * u2);
        let h0 = 1.0 - 10.0 * u3 + 15.0 * u4 - 6.0 * u5;
        let h1 = u - 6.0 * u3 + 8.0 * u4 - 3.0 * u5;
        let h2 = 0.5 * (u2 - 3.0 * u3 + 3.0 * u4 - u5);
        let h3 = 10.0 * u3 - 15.0 * u4 + 6.0 * u5;
        let h4 = -4.0 * u3 + 7.0 * u4 - 3.0 * u5;
        let h5 = 0.5 * (u3 - 2.0 * u4 + u5);
        let v = a[k] * h0
            + h * d1 * a[k + 1] * h1
            - h * h * a[k + 2] * h2
            + b[k] * h3
            + h * d1 * b[k + 1] * h4
            - h * h * b[k + 2] * h5;
        parity * v
    }

    /// `int_0^2 sin(a t)/a cos(b t) chi_N(t) dt` as a function of `q = a^2`.
    fn g(&self, q: f64, b: f64) -> f64 {
        if q < SERIES_RADIUS * SERIES_RADIUS {
            let mut total = 0.0;
            let mut term = 1.0;
            for l in 0..4 {
                total += term * self.moment(2 * l + 1, b);
                term *= -q / ((2 * l + 2) * (2 * l + 3)) as f64;
            }
            total
        } else {
            let a = q.sqrt();
            0.5 * (self.moment(0, a + b) + self.moment(0, a - b)) / a
        }
    }

    /// Largest `sum` of two radii reachable without leaving the table, after the
    /// perturbation applied to clustered radii.
    fn required_omega(&self, radii: &[f64]) -> f64 {
        let n = radii.len();
        let amax = radii[..n - 1].iter().cloned().fold(0.0, f64::max);
        let eps0 = 1e-3 * (1.0 + amax) * (1.0 + amax);
        (amax * amax + n as f64 * eps0).sqrt() + radii[n - 1]
    }

    /// Profile `F_N(r_1..r_N)` of the unit-radius truncated kernel.
    pub fn f_n(&self, radii: &[f64]) -> Result<f64> {
        let n = radii.len();
        if n != self.order {
            return Err(Error::InvalidInput(format!("expected {} radii, got {n}", self.order)));
        }
        let need = self.required_omega(radii);
        if need > self.omega_max {
            return Err(Error::TableRangeExceeded { radius: need, max: self.omega_max });
        }
        let rn = radii[n - 1];
        let squares: Vec<f64> = radii[..n - 1].iter().map(|a| a * a).collect();
        let sign = if n % 2 == 0 { -1.0 } else { 1.0 };
        Ok(sign * stable_divided_sum(&squares, |q| self.g(q, rn)))
    }

    /// Two-radius profile without the generic divided-difference machinery.
    #[inline]
    pub fn f2(&self, r1: f64, r2: f64) -> f64 {
        -self.g(r1 * r1, r2)
    }
}
