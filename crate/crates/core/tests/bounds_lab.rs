use std::f64::consts::PI;

use backscatter_core::backscatter::PotentialSpec;
use backscatter_core::bounds_lab::a2::{a2_value, envelope};
use backscatter_core::bounds_lab::integrals::{c1, hgamma_conv, pair_angular, t2};
use backscatter_core::bounds_lab::*;
use backscatter_core::error::Error;
use proptest::prelude::*;

#[test]
fn integer_inequality_on_many_samples() {
    let r = check_hgamma_lemma(100_000, 42).unwrap();
    assert_eq!(r.samples, 100_000);
    assert!(r.min_margin >= 0.0);
}

#[test]
fn sphere_integral_examples() {
    let s = 0.4;
    let at_origin = check_fs_bound(0.0, 2.5, s, 0.1).unwrap();
    assert!((at_origin.lhs - 4.0 * PI * (1.0f64 + 6.25).powf(-s)).abs() < 1e-12);
    assert!(at_origin.lhs <= c1(0.1));
    let centered = check_fs_bound(3.0, 0.0, s, 0.1).unwrap();
    assert!((centered.lhs - 4.0 * PI * 10f64.powf(-s)).abs() < 1e-12);
    assert!(matches!(check_fs_bound(1.0, 1.0, 0.95, 0.1), Err(Error::InvalidInput(_))));
}

#[test]
fn sphere_integral_sweep_is_one_sided() {
    let mut worst: f64 = 0.0;
    for i in 0..12 {
        for j in 0..12 {
            for s in [0.0, 0.3, 0.6, 0.9] {
                let (r, eta) = (0.25 * (1.6f64).powi(i) - 0.25, 0.25 * (1.6f64).powi(j) - 0.25);
                let rec = check_fs_bound(r, eta, s, 0.1).unwrap();
                worst = worst.max(rec.implied_constant.unwrap());
            }
        }
    }
    assert!(worst < c1(0.1), "{worst}");
}

#[test]
fn hgamma_convolution_scaling() {
    let base = hgamma_conv(1.0, 0.0, 0.0, 0.4).unwrap();
    assert!(base.is_finite() && base > 0.0);
    for rho in [0.0, 1.0, 4.0, 16.0] {
        for gamma in [0.1, 1.0] {
            let rec = check_hgamma_conv(gamma, rho, 0.5 * rho, 0.4, 0.1, Some(Ceilings::default().hgamma_conv)).unwrap();
            assert!(rec.pass, "{rec:?}");
        }
    }
    // gamma^{-1} behaviour at large rho
    let ratio = hgamma_conv(0.5, 16.0, 0.0, 0.4).unwrap() / hgamma_conv(0.25, 16.0, 0.0, 0.4).unwrap();
    assert!((ratio - 0.5).abs() < 0.1, "{ratio}");
}

#[test]
fn t2_follows_the_predicted_power() {
    let (s1, s2) = (0.4, 0.4);
    let at_zero = t2(1.0, 0.0, s1, s2).unwrap();
    assert!(at_zero.is_finite() && at_zero > 0.0);
    for rho in [8.0, 16.0] {
        let ratio = t2(1.0, 2.0 * rho, s1, s2).unwrap() / t2(1.0, rho, s1, s2).unwrap();
        let predicted = ((1.0 + 4.0 * rho * rho) / (1.0 + rho * rho)).powf(-(s1 + s2));
        assert!((ratio / predicted - 1.0).abs() < 0.3, "rho={rho}: {ratio} vs {predicted}");
    }
    let rec = check_t2(1.0, 8.0, s1, s2, 0.1, Some(Ceilings::default().t2)).unwrap();
    assert!(rec.pass && rec.lhs <= rec.rhs);
    let a = pair_angular(5.0, 5.0, 0.4, 0.0).unwrap();
    let closed = backscatter_core::bounds_lab::fs_closed(5.0, 5.0, 0.4);
    assert!((a - closed).abs() < 1e-9 * closed);
}

#[test]
fn a2_constant_doubles_with_the_radius() {
    let p = SobolevParams::new(vec![0.4, 0.4], 0.1).unwrap();
    let rho = [0.0, 0.5, 2.0, 8.0];
    let a1 = a2_value(1.0, &p, &rho).unwrap();
    let a2 = a2_value(2.0, &p, &rho).unwrap();
    let ratio = a2.a / a1.a;
    let env_ratio = envelope(2.0, &p) / envelope(1.0, &p);
    assert!(ratio / env_ratio > 0.25 && ratio / env_ratio < 4.0, "{ratio}");
}

#[test]
fn quadratic_bound_on_a_random_pair() {
    let p = SobolevParams::new(vec![0.4, 0.4], 0.1).unwrap();
    let mk = |seed| {
        PotentialSpec::TrigRandom { modes: 4, max_frequency: 3.0, amplitude: 1.0, support_radius: 1.0, seed }
            .build(16, 1.5)
            .unwrap()
    };
    let rep = check_a2_chain(2.0, &p, &[(mk(11), mk(12))]).unwrap();
    let recs = rep.records(&p, Some(Ceilings::default().a2));
    assert!(recs.iter().all(|r| r.pass), "{recs:?}");
    assert!(rep.implied_constant > 0.0);
}

#[test]
fn scaling_sweep_on_a_small_family() {
    let family = ScalingFamily { radii: vec![0.5, 1.0], grid_m: 32, ..ScalingFamily::default() };
    let r = main_scaling_sweep(&family, 2).unwrap();
    assert!(r.exponents.iter().all(|e| *e <= r.exponent_limit), "{:?}", r.exponents);
    assert!(r.homogeneity_error < 1e-10);
    assert!(r.implied_constant_spread < 1.5);
    assert!(main_scaling_sweep(&family, 4).is_err());
}

#[test]
fn report_round_trip() {
    let mut rep = VerificationReport::default();
    rep.push(check_fs_bound(1.0, 2.0, 0.3, 0.2).unwrap());
    let dir = tempfile::tempdir().unwrap();
    rep.write(dir.path(), "bounds").unwrap();
    let back: VerificationReport =
        serde_json::from_slice(&std::fs::read(dir.path().join("bounds.json")).unwrap()).unwrap();
    assert_eq!(back, rep);
    assert!(std::fs::read_to_string(dir.path().join("bounds.csv")).unwrap().contains("fs_bound"));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn splitting_holds_for_random_exponents(s in prop::collection::vec(0.0f64..2.0, 2..5), seed in 0u64..1000) {
        let w = WeightM::new(s).unwrap();
        prop_assert!(check_weight_splitting(&w, 200, seed).is_ok());
    }

    #[test]
    fn sigma_never_exceeds_total_order(s in prop::collection::vec(0.0f64..3.0, 1..5), eps in 0.01f64..0.99) {
        let p = SobolevParams::new(s.clone(), eps).unwrap();
        let total: f64 = s.iter().sum();
        prop_assert!(p.sigma() <= total + 1e-12);
        prop_assert!(p.a().iter().all(|a| *a <= 1.0 - eps + 1e-15));
    }
}
