//! Scalar kernels: `phi_a` and its convolution chains, the Laplace closed form,
//! the cutoff family, the weight `h_gamma` and the radial profiles `F_N`.

pub mod cutoff;
pub mod kernel;
pub mod laplace;
pub mod moments;
pub mod phi;
pub mod table;

pub use cutoff::{chi, chi_derivative, chi_derivative_bound, chi_derivative_sup, CutoffSpec};
pub use kernel::{f_n_eval, implied_kernel_constant, kernel_bound_envelope};
pub use laplace::{laplace_f_closed, laplace_f_direct, ChainProfile, ComplexShift};
pub use moments::MomentKernel;
pub use phi::{phi, phi_conv_closed, phi_conv_stable, phi_sq, stable_divided_sum, RadialTuple};
pub use table::{KernelTable, TableHeader};

/// `(gamma + |r - s|)^{-1} (gamma + |r + s|)^{-1}`.
pub fn h_gamma(gamma: f64, r: f64, s: f64) -> f64 {
    1.0 / ((gamma + (r - s).abs()) * (gamma + (r + s).abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn h_gamma_examples() {
        assert_eq!(h_gamma(1.0, 0.0, 0.0), 1.0);
        assert_eq!(h_gamma(2.0, 3.0, 3.0), 1.0 / 16.0);
        let (s, r, t) = (5.0, 1.0, 2.0f64);
        assert!(h_gamma(1.0, s, r + t) <= (1.0 + t.abs()).powi(2) * h_gamma(1.0, s, r));
    }
}
