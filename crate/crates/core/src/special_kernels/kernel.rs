use num_complex::Complex64;

use super::cutoff::{chi, CutoffSpec};
use super::h_gamma;
use super::laplace::ChainProfile;
use super::phi::RadialTuple;
use crate::error::{Error, Result};
use crate::quadrature::{composite_gauss, QuadratureSpec, Rule, Scalar};

/// Panel endpoints on `[0, 2]` aligned with the polynomial pieces of the cutoff.
pub(crate) fn cutoff_pieces(order: usize) -> Vec<f64> {
    let spec = CutoffSpec { order, scale: 1.0 };
    let mut pts = vec![0.0];
    pts.extend(spec.breakpoints());
    pts
}

/// Integrates `f` over `[0, 2]` piece by piece, doubling the panels per piece
/// until two successive totals agree.
pub(crate) fn integrate_pieces<T: Scalar, F: FnMut(f64) -> T>(
    mut f: F,
    pieces: &[f64],
    max_width: f64,
    spec: &QuadratureSpec,
) -> Result<T> {
    let rule = |f: &mut F, refine: usize| -> T {
        let mut total = T::zero();
        for w in pieces.windows(2) {
            let len = w[1] - w[0];
            let panels = ((len / max_width).ceil() as usize).max(1) * refine;
            total = total
                + match spec.rule {
                    Rule::Trapezoid => crate::quadrature::trapezoid(&mut *f, w[0], w[1], panels * 16),
                    _ => composite_gauss(&mut *f, w[0], w[1], panels, 16),
                };
        }
        total
    };
    let mut refine = 1;
    let mut previous = rule(&mut f, refine);
    let mut last_change = f64::INFINITY;
    while refine * 2 <= spec.max_subdivisions {
        refine *= 2;
        let current = rule(&mut f, refine);
        last_change = (current - previous).magnitude();
        if last_change <= spec.abs_tol.max(spec.rel_tol * current.magnitude()) {
            return Ok(current);
        }
        previous = current;
    }
    Err(Error::QuadratureBudgetExceeded { subdivisions: refine, last_change })
}

/// Radial profile `F_N(r_1..r_N) = (-1)^{N-1} int chain(t) cos(t r_N) chi_N(t) dt`
/// of the unit-radius truncated kernel.
pub fn f_n_eval(r: &RadialTuple, q: &QuadratureSpec) -> Result<Complex64> {
    let n = r.len();
    if n < 2 {
        return Err(Error::InvalidInput("F_N needs N >= 2 radii".into()));
    }
    q.validate()?;
    let radii = r.radii();
    let chain = ChainProfile::new(&radii[..n - 1]);
    let rn = radii[n - 1];
    let cut = CutoffSpec { order: n, scale: 1.0 };
    let freq: f64 = radii.iter().sum();
    let width = if freq > 0.0 { (q.oscillation_guard * std::f64::consts::PI / freq).min(0.25) } else { 0.25 };
    let value: f64 = integrate_pieces(|t| chain.eval(t) * (t * rn).cos() * chi(&cut, t), &cutoff_pieces(n), width, q)?;
    let sign = if n % 2 == 0 { -1.0 } else { 1.0 };
    Ok(Complex64::new(sign * value, 0.0))
}

/// `N^{2N+1} gamma^{-(2N+1)} e^{2 gamma} prod_{j<N} h_gamma(r_j, r_N)`, the kernel
/// bound without its `C^N` factor.
pub fn kernel_bound_envelope(r: &RadialTuple, gamma: f64) -> f64 {
    let n = r.len();
    let radii = r.radii();
    let rn = radii[n - 1];
    let p = (2 * n + 1) as i32;
    let h: f64 = radii[..n - 1].iter().map(|&rj| h_gamma(gamma, rj, rn)).product();
    (n as f64).powi(p) * gamma.powi(-p) * (2.0 * gamma).exp() * h
}

/// Smallest `C` with `|F_N| <= C^N * envelope` on one sample.
pub fn implied_kernel_constant(value: Complex64, r: &RadialTuple, gamma: f64) -> f64 {
    (value.norm() / kernel_bound_envelope(r, gamma)).powf(1.0 / r.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::simpson;

    fn tuple(v: &[f64]) -> RadialTuple {
        RadialTuple::new(v.to_vec()).unwrap()
    }

    #[test]
    fn matches_simpson_oracle() {
        let cut = CutoffSpec::unit(2).unwrap();
        // chain of a single radius 1 is sin(t); cos(0 t) = 1.
        let oracle: f64 = -simpson(|t: f64| t.sin() * chi(&cut, t), 0.0, 2.0, 40_000);
        let v = f_n_eval(&tuple(&[1.0, 0.0]), &QuadratureSpec::default()).unwrap();
        assert!((v.re - oracle).abs() < 1e-8, "{} vs {oracle}", v.re);
        assert!(v.im.abs() < 1e-12);
    }

    #[test]
    fn bounded_by_envelope() {
        let r = tuple(&[3.0, 0.5]);
        let v = f_n_eval(&r, &QuadratureSpec::default()).unwrap();
        let c = implied_kernel_constant(v, &r, 1.0);
        assert!(c.is_finite() && c > 0.0);
        assert!(v.norm() <= c.powi(2) * kernel_bound_envelope(&r, 1.0) * (1.0 + 1e-12));
    }

    #[test]
    fn three_radii_against_nested_oracle() {
        let r = tuple(&[0.7, 1.3, 2.0]);
        let cut = CutoffSpec::unit(3).unwrap();
        let chain = ChainProfile::new(&[0.7, 1.3]);
        let oracle: f64 = simpson(|t: f64| chain.eval(t) * (2.0 * t).cos() * chi(&cut, t), 0.0, 2.0, 40_000);
        let v = f_n_eval(&r, &QuadratureSpec::default()).unwrap();
        assert!((v.re - oracle).abs() < 1e-9);
    }
}
