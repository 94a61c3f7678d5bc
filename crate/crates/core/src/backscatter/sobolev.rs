use crate::born_wave::GridField;
use crate::error::{Error, Result};
use crate::special_kernels::{chi, CutoffSpec};

/// `|| <xi>^s f_hat ||_{L^2} / (2 pi)^{3/2}` from the discrete transform.
pub fn sobolev_norm(f: &GridField, s: f64) -> f64 {
    let spec = f.fft();
    let dk3 = spec.dk().powi(3);
    let total: f64 = spec
        .data()
        .iter()
        .zip(spec.magnitudes())
        .map(|(z, k)| (1.0 + k * k).powf(s) * z.norm_sqr())
        .sum();
    (total * dk3 / (2.0 * std::f64::consts::PI).powi(3)).sqrt()
}

/// Cutoff equal to 1 on `B(0, r)` and vanishing outside `B(0, 1.2 r)`.
pub fn local_cutoff(r: f64, x: [f64; 3]) -> f64 {
    let rho = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if rho <= r {
        return 1.0;
    }
    chi(&CutoffSpec { order: 3, scale: 1.0 }, 1.0 + (rho - r) / (0.2 * r))
}

/// Sobolev norm of `psi_R f`.
pub fn local_sobolev(f: &GridField, s: f64, r: f64) -> Result<f64> {
    if !(r > 0.0) || 1.2 * r > f.l() {
        return Err(Error::InvalidInput(format!("localization radius {r} must lie in (0, L/1.2]")));
    }
    let data: Vec<_> = f.data().iter().enumerate().map(|(i, z)| z * local_cutoff(r, f.point(i))).collect();
    Ok(sobolev_norm(&GridField::from_samples(f.m(), f.l(), data)?, s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn single_mode_norm() {
        let (m, l) = (16, 2.0);
        let dk = std::f64::consts::PI / l;
        let k = [2.0 * dk, -dk, 3.0 * dk];
        let f = GridField::from_fn(m, l, |x| Complex64::from_polar(1.0, k[0] * x[0] + k[1] * x[1] + k[2] * x[2])).unwrap();
        let kk: f64 = k.iter().map(|v| v * v).sum();
        for s in [0.0, 0.5, 1.7] {
            let expect = (1.0 + kk).powf(0.5 * s) * (2.0 * l).powf(1.5);
            assert!((sobolev_norm(&f, s) - expect).abs() < 1e-10 * expect);
        }
    }

    #[test]
    fn zero_order_is_l2_and_local_is_smaller() {
        let f = GridField::from_real_fn(16, 2.0, |x| (-(x[0] * x[0] + x[1] * x[1] + x[2] * x[2])).exp() + 0.1).unwrap();
        assert!((sobolev_norm(&f, 0.0) - f.l2_norm()).abs() < 1e-10 * f.l2_norm());
        assert!(local_sobolev(&f, 0.0, 1.0).unwrap() < f.l2_norm());
        assert!(local_sobolev(&f, 0.0, 1.9).is_err());
    }
}
