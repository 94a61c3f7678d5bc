//! Smooth cutoffs `chi_N` built as the indicator of `[-3/2, 3/2]` convolved with
//! `2N+2` uniform densities on `[-h, h]`, `h = 1/(4(N+1))`. The result is an exact
//! piecewise polynomial: equal to 1 on `|t| <= 1`, zero for `|t| >= 2`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutoffSpec {
    pub order: usize,
    pub scale: f64,
}

impl CutoffSpec {
    pub fn new(order: usize, scale: f64) -> Result<Self> {
        if order < 2 {
            return Err(Error::InvalidInput(format!("cutoff order must be >= 2, got {order}")));
        }
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::InvalidInput(format!("cutoff scale must be positive, got {scale}")));
        }
        Ok(Self { order, scale })
    }

    pub fn unit(order: usize) -> Result<Self> {
        Self::new(order, 1.0)
    }

    pub fn mollifier_halfwidth(&self) -> f64 {
        1.0 / (4.0 * (self.order as f64 + 1.0))
    }

    /// Number of box densities in the convolution.
    pub fn boxes(&self) -> usize {
        2 * self.order + 2
    }

    pub fn max_derivative(&self) -> usize {
        2 * self.order + 2
    }

    /// Breakpoints of the unit-scale piecewise polynomial on `t >= 0`.
    pub fn breakpoints(&self) -> Vec<f64> {
        let h = self.mollifier_halfwidth();
        (0..=self.boxes()).map(|i| 1.0 + 2.0 * h * i as f64).collect()
    }
}

/// Cardinal B-spline of order `q` (degree `q-1`) on the integer knots `0..=q`.
pub fn cardinal_bspline(q: usize, u: f64) -> f64 {
    if q == 0 || !(u >= 0.0 && u < q as f64) {
        return 0.0;
    }
    let j = u.floor() as usize;
    let mut vals = vec![0.0; q + 1];
    vals[j] = 1.0;
    for r in 2..=q {
        for i in 0..q {
            let fi = i as f64;
            vals[i] = ((u - fi) * vals[i] + (fi + r as f64 - u) * vals[i + 1]) / (r - 1) as f64;
        }
    }
    vals[0]
}

/// `int_0^u M_q`, via the sum of shifted order-(q+1) splines.
fn bspline_integral(q: usize, u: f64) -> f64 {
    if u <= 0.0 {
        return 0.0;
    }
    if u >= q as f64 {
        return 1.0;
    }
    (0..=u.floor() as usize).map(|i| cardinal_bspline(q + 1, u - i as f64)).sum()
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// j-th derivative of `M_q` as a finite difference of lower-order splines.
fn bspline_derivative(q: usize, j: usize, u: f64) -> f64 {
    if j == 0 {
        return cardinal_bspline(q, u);
    }
    let mut total = 0.0;
    for i in 0..=j {
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        total += sign * binomial(j, i) * cardinal_bspline(q - j, u - i as f64);
    }
    total
}

/// Evaluates the scaled cutoff `chi_{N,R}(t) = chi_N(t/R)`.
pub fn chi(spec: &CutoffSpec, t: f64) -> f64 {
    let x = (t / spec.scale).abs();
    if x <= 1.0 {
        return 1.0;
    }
    if x >= 2.0 {
        return 0.0;
    }
    let h = spec.mollifier_halfwidth();
    let p = spec.boxes();
    let u = |s: f64| (s + 0.5) / (2.0 * h);
    // The difference cancels near both ends; the true value lies in [0, 1].
    (bspline_integral(p, u(x + 1.5)) - bspline_integral(p, u(x - 1.5))).clamp(0.0, 1.0)
}

/// Exact `k`-th derivative of `chi_{N,R}` for `0 <= k <= 2N+2`.
pub fn chi_derivative(spec: &CutoffSpec, k: usize, t: f64) -> Result<f64> {
    if k > spec.max_derivative() {
        return Err(Error::DerivativeOrderTooHigh { k, max: spec.max_derivative() });
    }
    if k == 0 {
        return Ok(chi(spec, t));
    }
    let x = t / spec.scale;
    let h = spec.mollifier_halfwidth();
    let p = spec.boxes();
    let u = |s: f64| (s + 0.5) / (2.0 * h);
    let factor = (2.0 * h).powi(-(k as i32)) * spec.scale.powi(-(k as i32));
    Ok(factor * (bspline_derivative(p, k - 1, u(x + 1.5)) - bspline_derivative(p, k - 1, u(x - 1.5))))
}

/// Supremum of `|chi_N^{(k)}|` (unit scale) sampled densely on every polynomial piece,
/// including both ends of each piece.
pub fn chi_derivative_sup(order: usize, k: usize, samples_per_piece: usize) -> Result<f64> {
    let spec = CutoffSpec::unit(order)?;
    let bp = spec.breakpoints();
    let mut sup: f64 = 0.0;
    for w in bp.windows(2) {
        let (a, b) = (w[0], w[1]);
        for i in 0..=samples_per_piece {
            // Stay inside the piece so the left/right limits are both sampled.
            let frac = (i as f64 / samples_per_piece as f64).clamp(1e-12, 1.0 - 1e-12);
            let t = a + frac * (b - a);
            sup = sup.max(chi_derivative(&spec, k, t)?.abs());
        }
    }
    Ok(sup)
}

/// Analytic bound `(2h)^{-k} 2^{k-1}` on `|chi_N^{(k)}|`, `k >= 1`.
pub fn chi_derivative_bound(order: usize, k: usize) -> f64 {
    if k == 0 {
        return 1.0;
    }
    let h = 1.0 / (4.0 * (order as f64 + 1.0));
    (2.0 * h).powi(-(k as i32)) * 2f64.powi(k as i32 - 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::composite_gauss;

    #[test]
    fn plateau_and_support() {
        let s5 = CutoffSpec::unit(5).unwrap();
        assert_eq!(chi(&s5, 0.5), 1.0);
        assert_eq!(chi(&s5, -1.0), 1.0);
        assert_eq!(chi(&s5, 2.1), 0.0);
        assert_eq!(chi(&s5, -2.0), 0.0);
        let s3 = CutoffSpec::new(3, 2.0).unwrap();
        assert_eq!(chi(&s3, 1.9), 1.0);
    }

    #[test]
    fn bspline_has_unit_mass() {
        for q in [1usize, 2, 4, 10, 18] {
            let m: f64 = composite_gauss(|u| cardinal_bspline(q, u), 0.0, q as f64, q * 4, 24);
            assert!((m - 1.0).abs() < 1e-12, "q={q} mass={m}");
        }
    }

    #[test]
    fn values_in_unit_interval_and_monotone() {
        let s = CutoffSpec::unit(4).unwrap();
        let mut prev = 1.0;
        for i in 0..=400 {
            let t = 1.0 + i as f64 / 400.0;
            let v = chi(&s, t);
            assert!((0.0..=1.0).contains(&v));
            assert!(v <= prev + 1e-14);
            prev = v;
        }
    }

    #[test]
    fn derivative_matches_finite_differences() {
        let s = CutoffSpec::unit(3).unwrap();
        let h = 1e-5;
        for &t in &[1.1, 1.37, 1.5, 1.81] {
            for k in 1..=4 {
                let fd = (chi_derivative(&s, k - 1, t + h).unwrap() - chi_derivative(&s, k - 1, t - h).unwrap())
                    / (2.0 * h);
                let exact = chi_derivative(&s, k, t).unwrap();
                assert!((fd - exact).abs() < 1e-5 * (1.0 + exact.abs()), "k={k} t={t}: {fd} vs {exact}");
            }
        }
        assert_eq!(chi_derivative(&CutoffSpec::unit(4).unwrap(), 1, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn derivative_order_limit() {
        let s = CutoffSpec::unit(2).unwrap();
        assert!(chi_derivative(&s, 6, 1.5).is_ok());
        assert!(matches!(chi_derivative(&s, 7, 1.5), Err(Error::DerivativeOrderTooHigh { k: 7, max: 6 })));
    }

    #[test]
    fn third_derivative_bound_for_order_four() {
        let sup = chi_derivative_sup(4, 3, 64).unwrap();
        assert!(sup <= (8.0f64 * 4.0).powi(3));
        assert!(sup <= chi_derivative_bound(4, 3) * (1.0 + 1e-12));
    }
}
