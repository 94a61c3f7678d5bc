use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::Scalar;

/// Ordered tuple of nonnegative radii indexing a rotation-invariant kernel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialTuple(Vec<f64>);

impl RadialTuple {
    pub fn new(radii: Vec<f64>) -> Result<Self> {
        if radii.is_empty() {
            return Err(Error::InvalidInput("radial tuple must be nonempty".into()));
        }
        if radii.iter().any(|r| !(r.is_finite() && *r >= 0.0)) {
            return Err(Error::InvalidInput(format!("radii must be finite and nonnegative: {radii:?}")));
        }
        Ok(Self(radii))
    }

    /// Builds a tuple from signed values; only squares enter the kernels.
    pub fn from_abs(radii: &[f64]) -> Result<Self> {
        Self::new(radii.iter().map(|r| r.abs()).collect())
    }

    pub fn radii(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn max(&self) -> f64 {
        self.0.iter().cloned().fold(0.0, f64::max)
    }

    pub fn squares(&self) -> Vec<f64> {
        self.0.iter().map(|a| a * a).collect()
    }
}

/// `Y_+(t) sin(ta)/a`, with the limit `t` at `a = 0`.
pub fn phi(a: f64, t: f64) -> f64 {
    phi_sq(a * a, t)
}

/// `phi` as an entire function of the squared radius `q = a^2`; negative `q`
/// gives the hyperbolic continuation used by the perturbation scheme.
pub fn phi_sq(q: f64, t: f64) -> f64 {
    if t < 0.0 {
        return 0.0;
    }
    if q > 0.0 {
        let a = q.sqrt();
        (t * a).sin() / a
    } else if q < 0.0 {
        let a = (-q).sqrt();
        (t * a).sinh() / a
    } else {
        t
    }
}

/// Relative gap below which two squared radii are treated as coincident.
pub fn separation_threshold(squares: &[f64]) -> f64 {
    let qmax = squares.iter().cloned().fold(0.0, f64::max);
    1e-4 * (1.0 + qmax)
}

fn first_close_pair(squares: &[f64]) -> Option<(usize, usize, f64)> {
    let thr = separation_threshold(squares);
    for i in 0..squares.len() {
        for j in i + 1..squares.len() {
            let gap = (squares[i] - squares[j]).abs();
            if gap < thr {
                return Some((i, j, gap));
            }
        }
    }
    None
}

fn closed_sum<T: Scalar, F: Fn(f64) -> T>(squares: &[f64], f: &F) -> T {
    let mut total = T::zero();
    for (j, &qj) in squares.iter().enumerate() {
        let mut coeff = 1.0;
        for (k, &qk) in squares.iter().enumerate() {
            if k != j {
                coeff /= qk - qj;
            }
        }
        total = total + f(qj) * coeff;
    }
    total
}

/// `sum_j prod_{k != j} (q_k - q_j)^{-1} f(q_j)` for arbitrary (possibly coincident)
/// nodes `q`. This is a signed divided difference of `f`; `f` must be smooth in `q`.
///
/// Separated nodes use the closed sum directly. Otherwise every node is shifted
/// by `rank * eps` (ranks in sorted order, so gaps only widen), the closed sum is
/// evaluated at `eps0, eps0/2, eps0/4`, and the quadratic through those three
/// values is extrapolated to `eps = 0`.
pub fn stable_divided_sum<T: Scalar, F: Fn(f64) -> T>(squares: &[f64], f: F) -> T {
    if squares.len() == 1 {
        return f(squares[0]);
    }
    if first_close_pair(squares).is_none() {
        return closed_sum(squares, &f);
    }
    let mut order: Vec<usize> = (0..squares.len()).collect();
    order.sort_by(|&i, &j| squares[i].total_cmp(&squares[j]));
    let amax = squares.iter().map(|q| q.abs().sqrt()).fold(0.0, f64::max);
    let eps0 = 1e-3 * (1.0 + amax) * (1.0 + amax);
    let at = |scale: f64| -> T {
        let mut shifted = squares.to_vec();
        for (rank, &idx) in order.iter().enumerate() {
            shifted[idx] += rank as f64 * eps0 * scale;
        }
        closed_sum(&shifted, &f)
    };
    // Lagrange weights at 0 for nodes 1, 1/2, 1/4.
    at(1.0) * (1.0 / 3.0) + at(0.5) * -2.0 + at(0.25) * (8.0 / 3.0)
}

/// Closed form of the time convolution `phi_{a_1} * ... * phi_{a_N}` for radii with
/// pairwise distinct squares.
pub fn phi_conv_closed(a: &RadialTuple, t: f64) -> Result<f64> {
    let squares = a.squares();
    if let Some((i, j, gap)) = first_close_pair(&squares) {
        return Err(Error::NearDegenerateRadii { i, j, gap });
    }
    Ok(closed_sum(&squares, &|q| phi_sq(q, t)))
}

/// The same convolution, valid for coincident or clustered radii.
pub fn phi_conv_stable(a: &RadialTuple, t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    stable_divided_sum(&a.squares(), |q| phi_sq(q, t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::composite_gauss;
    use std::f64::consts::PI;

    /// Direct time-quadrature oracle of a two-fold convolution.
    fn conv2_oracle(a: f64, b: f64, t: f64) -> f64 {
        composite_gauss(|s| phi(a, s) * phi(b, t - s), 0.0, t, 64, 16)
    }

    #[test]
    fn phi_examples() {
        assert!((phi(1.0, PI / 2.0) - 1.0).abs() < 1e-15);
        assert_eq!(phi(3.0, -1.0), 0.0);
        assert_eq!(phi(0.0, 2.5), 2.5);
    }

    #[test]
    fn closed_form_examples() {
        let a12 = RadialTuple::new(vec![1.0, 2.0]).unwrap();
        let a21 = RadialTuple::new(vec![2.0, 1.0]).unwrap();
        let oracle = conv2_oracle(1.0, 2.0, PI / 2.0);
        assert!((oracle - 1.0 / 3.0).abs() < 1e-13);
        assert!((phi_conv_closed(&a12, PI / 2.0).unwrap() - 1.0 / 3.0).abs() < 1e-14);
        assert!((phi_conv_closed(&a21, PI / 2.0).unwrap() - 1.0 / 3.0).abs() < 1e-14);
        assert_eq!(phi_conv_closed(&a12, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn closed_form_rejects_clustered_radii() {
        let a = RadialTuple::new(vec![1.0, 1.0 + 1e-9]).unwrap();
        assert!(matches!(phi_conv_closed(&a, 1.0), Err(Error::NearDegenerateRadii { .. })));
    }

    #[test]
    fn stable_form_handles_coincident_radii() {
        // (sin t - t cos t)/2 at t = pi.
        let oracle = conv2_oracle(1.0, 1.0, PI);
        assert!((oracle - PI / 2.0).abs() < 1e-12);
        let a = RadialTuple::new(vec![1.0, 1.0]).unwrap();
        assert!((phi_conv_stable(&a, PI) - PI / 2.0).abs() < 1e-6);
        let b = RadialTuple::new(vec![1.0, 1.0 + 1e-8]).unwrap();
        assert!((phi_conv_stable(&b, PI) - PI / 2.0).abs() < 1e-6);
        let c = RadialTuple::new(vec![1.0, 2.0, 3.0]).unwrap();
        let closed = phi_conv_closed(&c, 1.0).unwrap();
        assert!((phi_conv_stable(&c, 1.0) - closed).abs() < 1e-12);
    }

    #[test]
    fn stable_form_triple_and_zero_radii() {
        // phi_0 * phi_0 * phi_0 = t^5 / 5!
        let z = RadialTuple::new(vec![0.0, 0.0, 0.0]).unwrap();
        let t = 1.3f64;
        assert!((phi_conv_stable(&z, t) - t.powi(5) / 120.0).abs() < 1e-7);
        // phi_1 * phi_1 * phi_1 against nested quadrature.
        let inner = |s: f64| conv2_oracle(1.0, 1.0, s);
        let oracle = composite_gauss(|s| inner(s) * phi(1.0, 2.0 - s), 0.0, 2.0, 16, 16);
        let ones = RadialTuple::new(vec![1.0, 1.0, 1.0]).unwrap();
        assert!((phi_conv_stable(&ones, 2.0) - oracle).abs() < 1e-7);
    }

    #[test]
    fn stable_form_vanishes_for_nonpositive_time() {
        let a = RadialTuple::new(vec![0.5, 0.5, 2.0]).unwrap();
        for t in [-3.0, -0.1, 0.0] {
            assert_eq!(phi_conv_stable(&a, t), 0.0);
        }
    }
}
