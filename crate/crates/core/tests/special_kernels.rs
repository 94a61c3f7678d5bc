mod common;

use std::f64::consts::PI;

use backscatter_core::quadrature::{composite_gauss, QuadratureSpec};
use backscatter_core::special_kernels::*;
use common::{chain_by_convolution, rng, separated_radii};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn stable_chain_vanishes_for_nonpositive_time(
        radii in prop::collection::vec(0.0f64..5.0, 1..5),
        t in -10.0f64..=0.0,
    ) {
        prop_assert_eq!(phi_conv_stable(&RadialTuple::new(radii).unwrap(), t), 0.0);
    }

    #[test]
    fn stable_chain_is_permutation_invariant(
        radii in prop::collection::vec(0.0f64..4.0, 2..5),
        t in 0.0f64..10.0,
        rot in 0usize..4,
    ) {
        let a = RadialTuple::new(radii.clone()).unwrap();
        let mut p = radii.clone();
        p.rotate_left(rot % radii.len());
        p.swap(0, radii.len() - 1);
        let b = RadialTuple::new(p).unwrap();
        let (x, y) = (phi_conv_stable(&a, t), phi_conv_stable(&b, t));
        prop_assert!((x - y).abs() <= 1e-12 * (1.0 + x.abs()), "{} vs {}", x, y);
    }

    #[test]
    fn laplace_closed_matches_direct(
        radii in prop::collection::vec(0.0f64..3.0, 2..4),
        re in 0.3f64..2.0,
        im in -1.5f64..1.5,
    ) {
        let a = RadialTuple::new(radii).unwrap();
        let s = ComplexShift::new(Complex64::new(re, im)).unwrap();
        let closed = laplace_f_closed(&a, s).unwrap();
        let direct = laplace_f_direct(&a, s, &QuadratureSpec::default()).unwrap();
        prop_assert!((closed - direct).norm() <= 1e-8 * (1.0 + closed.norm()));
    }

    #[test]
    fn hgamma_shift_inequality(s in -50.0f64..50.0, t in -50.0f64..50.0) {
        prop_assert!(1.0 + (s - t).abs() >= (1.0 + s.abs()) / (1.0 + t.abs()));
    }
}

#[test]
fn closed_chain_matches_iterated_convolution() {
    let mut r = rng(11);
    for _ in 0..40 {
        let len = r.gen_range(2..=4);
        let a = separated_radii(&mut r, len, 4.0, 0.5);
        let t = r.gen_range(0.0..10.0);
        let closed = phi_conv_closed(&RadialTuple::new(a.clone()).unwrap(), t).unwrap();
        let oracle = chain_by_convolution(&a, t, 1000);
        assert!((closed - oracle).abs() < 1e-6, "{a:?} t={t}: {closed} vs {oracle}");
    }
}

#[test]
fn newton4_identity_on_random_triples() {
    let mut r = rng(12);
    let q = QuadratureSpec::default();
    for _ in 0..24 {
        let (a, b, s) = (r.gen_range(0.0..3.0), r.gen_range(0.0..3.0), r.gen_range(0.2..2.0));
        let d = a * a - b * b + s * s;
        let exact = d / (d * d + 4.0 * b * b * s * s);
        let tuple = RadialTuple::new(vec![a, b]).unwrap();
        let direct = laplace_f_direct(&tuple, ComplexShift::real(s).unwrap(), &q).unwrap();
        assert!((direct.re - exact).abs() < 1e-7 * (1.0 + exact.abs()), "a={a} b={b} s={s}");
        assert!((laplace_f_closed(&tuple, ComplexShift::real(s).unwrap()).unwrap().re - exact).abs() < 1e-12);
    }
}

#[test]
fn cutoff_derivative_bounds_hold_for_all_orders() {
    for n in 2..=8 {
        for k in 0..=2 * n + 2 {
            let sup = chi_derivative_sup(n, k, 16).unwrap();
            assert!(sup <= (8.0 * n as f64).powi(k as i32), "N={n} k={k}: {sup}");
        }
    }
}

#[test]
fn cutoff_mass_and_symmetry() {
    let spec = CutoffSpec::unit(3).unwrap();
    let mass: f64 = composite_gauss(|t| chi(&spec, t), -2.0, 2.0, 64, 16);
    assert!((mass - 3.0).abs() < 1e-12);
    for t in [0.3, 1.2, 1.7] {
        assert_eq!(chi(&spec, t), chi(&spec, -t));
    }
}

#[test]
fn kernel_profile_bound_with_single_constant() {
    let q = QuadratureSpec::default();
    let mut r = rng(13);
    let mut c_max: f64 = 0.0;
    let mut samples = Vec::new();
    for n in 2..=4 {
        for _ in 0..12 {
            let radii: Vec<f64> = (0..n).map(|_| r.gen_range(0.0..6.0)).collect();
            let tuple = RadialTuple::new(radii).unwrap();
            let v = f_n_eval(&tuple, &q).unwrap();
            for gamma in [0.5, 1.0, 2.0] {
                c_max = c_max.max(implied_kernel_constant(v, &tuple, gamma));
                samples.push((v, tuple.clone(), gamma));
            }
        }
    }
    assert!(c_max.is_finite() && c_max < 8.0, "implied constant {c_max}");
    for (v, tuple, gamma) in samples {
        let bound = c_max.powi(tuple.len() as i32) * kernel_bound_envelope(&tuple, gamma);
        assert!(v.norm() <= bound * (1.0 + 1e-12));
    }
}

#[test]
fn quadrature_oracle_for_spec_examples() {
    let oracle: f64 = composite_gauss(|s: f64| s.sin() * (2.0 * (PI / 2.0 - s)).sin() / 2.0, 0.0, PI / 2.0, 8, 16);
    assert!((oracle - 1.0 / 3.0).abs() < 1e-14);
    let a = RadialTuple::new(vec![1.0, 2.0]).unwrap();
    assert!((phi_conv_closed(&a, PI / 2.0).unwrap() - oracle).abs() < 1e-13);
}
