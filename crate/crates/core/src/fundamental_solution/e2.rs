//! Physical-space pairing with `E_2 = -(4 pi^2)^{-1} delta'(|x|^2 - |y|^2)` in three
//! dimensions, through double spherical means of the test function.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::quadrature::{gauss_legendre, QuadratureSpec};
use crate::sphere::SphereRule;

/// How the double spherical mean of the test function is obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Reduction {
    /// `g(x, y)` depends on `|x|, |y|` only.
    Radial,
    /// Numerical spherical means; angular order grows with `bandwidth * radius`.
    Spherical { bandwidth: f64 },
}

/// Test function on `R^3 x R^3`, negligible once `|x|` or `|y|` exceeds `t_max`.
pub struct PairTest<'a> {
    pub g: &'a (dyn Fn([f64; 3], [f64; 3]) -> f64 + Sync),
    pub t_max: f64,
    pub reduction: Reduction,
    /// Double spherical mean `(s, t) -> gbar(s, t)` supplied by the caller; overrides `reduction`.
    pub mean: Option<&'a (dyn Fn(f64, f64) -> f64 + Sync)>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct E2Pairing {
    pub value: f64,
    pub error_estimate: f64,
    pub panels: usize,
}

const MAX_THETA: usize = 64;

fn double_mean(test: &PairTest, s: f64, t: f64) -> f64 {
    if let Some(mean) = test.mean {
        return mean(s, t);
    }
    match test.reduction {
        Reduction::Radial => (test.g)([0.0, 0.0, s], [0.0, 0.0, t]),
        Reduction::Spherical { bandwidth } => {
            let outer = SphereRule::for_band(bandwidth * t, MAX_THETA);
            let inner = SphereRule::for_band(bandwidth * s, MAX_THETA);
            outer
                .dirs
                .iter()
                .zip(&outer.weights)
                .map(|(d, w)| {
                    let y = [t * d[0], t * d[1], t * d[2]];
                    w * inner.mean([0.0; 3], s, |x| (test.g)(x, y))
                })
                .sum()
        }
    }
}

/// `2 t^2 d/dw [ sqrt(w) gbar(sqrt(w), t) ]` at `w = t^2`, written as
/// `t d/ds [ s gbar(s, t) ]` at `s = t` (the s-form stays smooth at the origin).
/// The w-step `1e-3 (1 + t^2)` maps to `h_s = h_w / (2t)`, capped at 0.05, with one
/// Richardson step; every sample stays within 0.05 of the cone.
fn cone_integrand(test: &PairTest, t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    let h = (1e-3 * (1.0 + t * t) / (2.0 * t)).min(0.05);
    let big_g = |s: f64| s * double_mean(test, s, t);
    let d = |h: f64| (big_g(t + h) - big_g(t - h)) / (2.0 * h);
    let deriv = (4.0 * d(0.5 * h) - d(h)) / 3.0;
    t * deriv
}

/// `<E_2, g>` with a panel-doubling error estimate.
pub fn e2_pair(test: &PairTest, q: &QuadratureSpec) -> Result<E2Pairing> {
    q.validate()?;
    if !(test.t_max > 0.0 && test.t_max.is_finite()) {
        return Err(Error::InvalidInput("t_max must be positive".into()));
    }
    let (x, wts) = gauss_legendre(16);
    let rule = |panels: usize| -> f64 {
        let width = test.t_max / panels as f64;
        let nodes: Vec<(f64, f64)> = (0..panels)
            .flat_map(|p| {
                let mid = (p as f64 + 0.5) * width;
                x.iter().zip(wts).map(move |(xi, wi)| (mid + 0.5 * width * xi, 0.5 * width * wi))
            })
            .collect();
        let vals: Vec<f64> = nodes.par_iter().map(|(t, w)| w * cone_integrand(test, *t)).collect();
        vals.iter().sum()
    };
    let mut panels = ((test.t_max / 0.75).ceil() as usize).max(2);
    let mut previous = rule(panels);
    loop {
        if 2 * panels > q.max_subdivisions {
            return Err(Error::QuadratureBudgetExceeded { subdivisions: panels, last_change: f64::NAN });
        }
        panels *= 2;
        let current = rule(panels);
        let change = (current - previous).abs();
        if change <= q.abs_tol.max(q.rel_tol * current.abs()) {
            return Ok(E2Pairing { value: current, error_estimate: change, panels });
        }
        previous = current;
    }
}
