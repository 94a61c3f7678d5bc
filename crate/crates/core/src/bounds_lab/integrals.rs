//! Radial and angular integrals with the weight `h_gamma^2`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use serde_json::json;

use super::report::CheckRecord;
use crate::error::{Error, Result};
use crate::quadrature::{adaptive, adaptive_with_breaks};
use crate::special_kernels::h_gamma;
use crate::sphere::SphereRule;

const ANCHORS: &str = include_str!("../../data/bounds_anchors.json");

/// First-run implied constants; ceilings default to ten times these.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ceilings {
    pub hgamma_conv: f64,
    pub t2: f64,
    pub a2: f64,
    pub scaling_n2: f64,
    pub scaling_n3: f64,
}

impl Ceilings {
    pub fn anchors() -> Self {
        serde_json::from_str(ANCHORS).expect("committed anchors parse")
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            hgamma_conv: c * self.hgamma_conv,
            t2: c * self.t2,
            a2: c * self.a2,
            scaling_n2: c * self.scaling_n2,
            scaling_n3: c * self.scaling_n3,
        }
    }
}

impl Default for Ceilings {
    fn default() -> Self {
        Self::anchors().scaled(10.0)
    }
}

fn check_s(s: f64, epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::InvalidInput(format!("epsilon {epsilon} outside (0, 1)")));
    }
    if !(0.0..=1.0 - epsilon).contains(&s) {
        return Err(Error::InvalidInput(format!("s = {s} outside [0, 1 - epsilon]")));
    }
    Ok(())
}

/// `C_1 = 2^{m+1} c_{n-2} / epsilon` with `n = 3`, `m = 0`, `c_1 = 2 pi`.
pub fn c1(epsilon: f64) -> f64 {
    4.0 * PI / epsilon
}

/// `int_{S^2} <r theta - eta>^{-2s} d theta` in closed form.
pub fn fs_closed(r: f64, eta: f64, s: f64) -> f64 {
    let a = 1.0 + r * r + eta * eta;
    let b = 2.0 * r * eta.abs();
    if b < 1e-8 * a {
        return 4.0 * PI * a.powf(-s);
    }
    if (s - 1.0).abs() < 1e-12 {
        return 2.0 * PI * ((a + b) / (a - b)).ln() / b;
    }
    2.0 * PI * ((a + b).powf(1.0 - s) - (a - b).powf(1.0 - s)) / (b * (1.0 - s))
}

/// Same integral by a product rule on the sphere, `eta` along the polar axis.
pub fn fs_sphere(r: f64, eta: f64, s: f64) -> f64 {
    let a = 1.0 + r * r + eta * eta;
    let b = 2.0 * r * eta.abs();
    // Gauss-Legendre resolves an endpoint layer of width ~ n^{-2}.
    let n = (24.0 + 6.0 * (b / (a - b)).sqrt()).min(2000.0) as usize;
    let rule = SphereRule::product(n, 8);
    4.0 * PI * rule.mean([0.0, 0.0, -eta], r, |x| (1.0 + x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).powf(-s))
}

pub fn check_fs_bound(r: f64, eta: f64, s: f64, epsilon: f64) -> Result<CheckRecord> {
    check_s(s, epsilon)?;
    let lhs = fs_sphere(r, eta, s);
    let rhs = c1(epsilon) * (1.0 + r * r).powf(-s);
    let rec = CheckRecord::one_sided("fs_bound", json!({"r": r, "eta": eta, "s": s, "epsilon": epsilon}), lhs, rhs)
        .with_constant(lhs * (1.0 + r * r).powf(s), Some(c1(epsilon)));
    if !rec.pass {
        return Err(Error::BoundViolated { lhs, rhs, context: format!("f_s at r={r}, eta={eta}, s={s}") });
    }
    Ok(rec)
}

const REL: f64 = 1e-9;
const BUDGET: usize = 4000;

/// `int_0^inf g(r) dr` with breaks near the features at `marks`, plus a mapped tail.
fn radial_integral<F: Fn(f64) -> f64>(g: F, marks: &[f64], scale: f64) -> Result<f64> {
    let mut breaks = vec![0.0];
    for &m in marks {
        for p in [m - scale, m, m + scale] {
            if p > 0.0 {
                breaks.push(p);
            }
        }
    }
    let far = marks.iter().cloned().fold(0.0, f64::max) + 40.0 * scale.max(1.0);
    breaks.push(far);
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let body = adaptive_with_breaks(&g, &breaks, 0.0, REL, BUDGET)?;
    // r = far / u on (0, 1]
    let tail = adaptive(|u: f64| if u <= 0.0 { 0.0 } else { g(far / u) * far / (u * u) }, 0.0, 1.0, 0.0, REL, BUDGET)?;
    Ok(body + tail)
}

/// `int_{R^3} h_gamma^2(|xi|, rho) <xi - eta>^{-2s} d xi`.
pub fn hgamma_conv(gamma: f64, rho: f64, eta: f64, s: f64) -> Result<f64> {
    let g = |r: f64| {
        let h = h_gamma(gamma, r, rho);
        r * r * h * h * fs_closed(r, eta, s)
    };
    radial_integral(g, &[rho, eta.abs()], gamma.min(1.0))
}

pub fn check_hgamma_conv(gamma: f64, rho: f64, eta: f64, s: f64, epsilon: f64, ceiling: Option<f64>) -> Result<CheckRecord> {
    check_s(s, epsilon)?;
    if !(gamma > 0.0) {
        return Err(Error::InvalidInput("gamma must be positive".into()));
    }
    let lhs = hgamma_conv(gamma, rho, eta, s)?;
    let weight = (1.0 + rho * rho).powf(s);
    let rhs = 8.0 * c1(epsilon) / gamma / weight;
    Ok(CheckRecord::one_sided(
        "hgamma_conv",
        json!({"gamma": gamma, "rho": rho, "eta": eta, "s": s, "epsilon": epsilon}),
        lhs,
        rhs,
    )
    .with_constant(lhs * gamma * weight, ceiling))
}

/// `2 pi int_{-1}^{1} (A + B u)^{-s1} (A - B u)^{-s2} du`: the sphere integral of
/// `<r theta + xi>^{-2 s1} <r theta - xi>^{-2 s2}` with `|xi| = rho`.
pub fn pair_angular(r: f64, rho: f64, s1: f64, s2: f64) -> Result<f64> {
    let a = 1.0 + r * r + rho * rho;
    let b = 2.0 * r * rho;
    if b < 1e-10 * a {
        return Ok(4.0 * PI * a.powf(-s1 - s2));
    }
    let f = |u: f64| (a + b * u).powf(-s1) * (a - b * u).powf(-s2);
    // Endpoint layers have width (A - B) / B.
    let w = ((a - b) / b).min(0.5);
    let breaks = [-1.0, -1.0 + w, 0.0, 1.0 - w, 1.0];
    Ok(2.0 * PI * adaptive_with_breaks(f, &breaks, 0.0, 1e-11, BUDGET)?)
}

/// `T_{2,gamma}(xi; s1, s2) = int h_gamma^2(|xi_1|, |xi|) <xi_1 + xi>^{-2 s1} <xi_1 - xi>^{-2 s2} d xi_1`.
pub fn t2(gamma: f64, rho: f64, s1: f64, s2: f64) -> Result<f64> {
    let failed = std::cell::Cell::new(None);
    let g = |r: f64| {
        let h = h_gamma(gamma, r, rho);
        match pair_angular(r, rho, s1, s2) {
            Ok(ang) => r * r * h * h * ang,
            Err(e) => {
                failed.set(Some(e));
                0.0
            }
        }
    };
    let v = radial_integral(g, &[rho], gamma.min(1.0))?;
    match failed.into_inner() {
        Some(e) => Err(e),
        None => Ok(v),
    }
}

pub fn check_t2(gamma: f64, rho: f64, s1: f64, s2: f64, epsilon: f64, ceiling: Option<f64>) -> Result<CheckRecord> {
    check_s(s1, epsilon)?;
    check_s(s2, epsilon)?;
    if !(gamma > 0.0) {
        return Err(Error::InvalidInput("gamma must be positive".into()));
    }
    let lhs = t2(gamma, rho, s1, s2)?;
    let weight = (1.0 + rho * rho).powf(s1 + s2);
    let rhs = 16.0 * c1(epsilon) / gamma / weight;
    Ok(CheckRecord::one_sided(
        "t2",
        json!({"gamma": gamma, "xi": rho, "s1": s1, "s2": s2, "epsilon": epsilon}),
        lhs,
        rhs,
    )
    .with_constant(lhs * gamma * weight, ceiling))
}
