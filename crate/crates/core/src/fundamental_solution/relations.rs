use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::special_kernels::phi::separation_threshold;
use crate::special_kernels::{laplace_f_closed, ComplexShift, RadialTuple};

fn sign(n: usize) -> f64 {
    if n % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

fn check_last_separated(r: &RadialTuple) -> Result<()> {
    let q = r.squares();
    let n = q.len();
    let thr = separation_threshold(&q);
    for j in 0..n - 1 {
        if (q[n - 1] - q[j]).abs() < thr {
            return Err(Error::DegenerateRadii(format!("r_{} and r_{n} have equal squares", j + 1)));
        }
    }
    Ok(())
}

fn check_all_separated(r: &RadialTuple) -> Result<()> {
    let q = r.squares();
    let thr = separation_threshold(&q);
    for i in 0..q.len() {
        for j in i + 1..q.len() {
            if (q[i] - q[j]).abs() < thr {
                return Err(Error::DegenerateRadii(format!("r_{} and r_{} have equal squares", i + 1, j + 1)));
            }
        }
    }
    Ok(())
}

/// `prod_{j<N} (r_N^2 - r_j^2) (-1)^{N-1} F(r; sigma)` for each sigma; tends to 1.
pub fn pv_product(r: &RadialTuple, sigmas: &[f64]) -> Result<Vec<Complex64>> {
    let n = r.len();
    if n < 2 {
        return Err(Error::InvalidInput("need N >= 2 radii".into()));
    }
    check_last_separated(r)?;
    let q = r.squares();
    let symbol: f64 = q[..n - 1].iter().map(|qj| q[n - 1] - qj).product();
    sigmas
        .iter()
        .map(|&s| Ok(laplace_f_closed(r, ComplexShift::real(s)?)? * (symbol * sign(n - 1))))
        .collect()
}

/// Fourier-side reading of `(Delta_{N-1} - Delta_N) E_N = E_{N-1} delta(x_{N-1})`:
/// both entries share the same `sigma -> 0` limit. For `N = 2` the right side is
/// `E_1 = delta`, whose transform is 1.
pub fn recursion_check(r: &RadialTuple, sigma: f64) -> Result<(Complex64, Complex64)> {
    let n = r.len();
    if n < 2 {
        return Err(Error::InvalidInput("recursion check needs N >= 2".into()));
    }
    check_all_separated(r)?;
    let radii = r.radii();
    let shift = ComplexShift::real(sigma)?;
    let q = r.squares();
    let first = laplace_f_closed(r, shift)? * ((q[n - 1] - q[n - 2]) * sign(n - 1));
    if n == 2 {
        return Ok((first, Complex64::new(1.0, 0.0)));
    }
    let mut reduced = radii[..n - 2].to_vec();
    reduced.push(radii[n - 1]);
    let second = laplace_f_closed(&RadialTuple::new(reduced)?, shift)? * sign(n - 2);
    Ok((first, second))
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> Result<f64> {
    let pts: Vec<(f64, f64)> =
        x.iter().zip(y).filter(|(a, b)| **a > 0.0 && **b > 0.0).map(|(a, b)| (a.ln(), b.ln())).collect();
    if pts.len() < 2 {
        return Err(Error::FitFailed("fewer than two positive points".into()));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::FitFailed("degenerate abscissae".into()));
    }
    Ok(pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / sxx)
}

/// Tidy CSV of a sigma sequence: `sigma,re,im,abs_error`.
pub fn convergence_csv(sigmas: &[f64], values: &[Complex64], target: &[Complex64]) -> String {
    let mut out = String::from("sigma,re,im,abs_error\n");
    for ((s, v), t) in sigmas.iter().zip(values).zip(target) {
        out.push_str(&format!("{s},{},{},{}\n", v.re, v.im, (v - t).norm()));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tuple(v: &[f64]) -> RadialTuple {
        RadialTuple::new(v.to_vec()).unwrap()
    }

    #[test]
    fn pv_product_examples() {
        let one = Complex64::new(1.0, 0.0);
        for r in [vec![1.0, 2.0], vec![1.0, 2.0, 4.0]] {
            let v = pv_product(&tuple(&r), &[1e-4]).unwrap();
            assert!((v[0] - one).norm() < 1e-3);
        }
        assert!(matches!(pv_product(&tuple(&[1.0, 1.0]), &[1e-3]), Err(Error::DegenerateRadii(_))));
    }

    #[test]
    fn pv_product_converges_monotonically() {
        let sig = [1e-2, 1e-3, 1e-4];
        let v = pv_product(&tuple(&[1.0, 2.0, 3.0, 5.0]), &sig).unwrap();
        let err: Vec<f64> = v.iter().map(|z| (z - 1.0).norm()).collect();
        assert!(err[0] > err[1] && err[1] > err[2]);
        assert!(loglog_slope(&sig, &err).unwrap() >= 0.9);
    }

    #[test]
    fn recursion_examples() {
        for r in [vec![1.0, 2.0], vec![1.0, 2.0, 4.0], vec![1.0, 2.0, 3.0, 5.0]] {
            let (a, b) = recursion_check(&tuple(&r), 1e-4).unwrap();
            assert!((a - b).norm() < 1e-3);
        }
        assert!(recursion_check(&tuple(&[1.0, 2.0, 2.0]), 1e-4).is_err());
    }

    #[test]
    fn slope_of_power_law() {
        let x = [1.0, 2.0, 4.0];
        let y = [3.0, 12.0, 48.0];
        assert!((loglog_slope(&x, &y).unwrap() - 2.0).abs() < 1e-12);
    }
}
