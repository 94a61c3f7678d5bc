mod common;

use std::collections::BTreeMap;

use backscatter_core::backscatter::*;
use backscatter_core::born_wave::GridField;
use backscatter_core::quadrature::QuadratureSpec;
use backscatter_core::Error;
use num_complex::Complex64;
use proptest::prelude::*;

fn skew() -> GaussianPotential {
    GaussianPotential { amplitude: 1.0, center: [0.1, -0.05, 0.0], alphas: [4.0, 5.0, 6.0] }
}

/// Small lattice: enough for algebraic identities, not for accuracy.
fn small(v: &GridPotential) -> (LatticeSpec, backscatter_core::fundamental_solution::TruncatedKernel) {
    let rk = 2.0 * v.support_radius();
    let spec = LatticeSpec { radius: 7.0, symmetry: false, ..LatticeSpec::auto(v, rk) };
    (spec, lattice_kernel(rk, &spec).unwrap())
}

fn grid(r: &BornTermResult) -> &GridField {
    r.field.grid().unwrap()
}

#[test]
fn quadratic_scaling_and_polarization() {
    let v = GridPotential::from_potential(&skew(), 16, 2.0, f64::INFINITY).unwrap();
    let w = GridPotential::from_potential(&GaussianPotential::isotropic(0.5, 3.0, [0.0, 0.1, -0.1]), 16, 2.0, f64::INFINITY)
        .unwrap();
    let support = v.support_radius().max(w.support_radius());
    let sum = GridPotential::new(v.field().add(w.field()).unwrap(), support, f64::INFINITY).unwrap();
    let (spec, k) = small(&sum);
    let out = LatticeOutput::HalfGrid;
    let b = b2_fourier(&v, &k, Some(spec), &out).unwrap();
    let b2 = b2_fourier(&v.scaled(2.0), &k, Some(spec), &out).unwrap();
    let diff = grid(&b2).sub(&grid(&b).scale(4.0)).unwrap().max_abs();
    assert!(diff <= 1e-12 * grid(&b2).max_abs(), "{diff}");
    assert_eq!(grid(&b).m(), 8);

    // B(v + w) - B(v) - B(w) = B(v, w) + B(w, v)
    let bw = b2_fourier_bilinear(&w, &w, &k, &spec, &out).unwrap();
    let bs = b2_fourier_bilinear(&sum, &sum, &k, &spec, &out).unwrap();
    let bvw = b2_fourier_bilinear(&v, &w, &k, &spec, &out).unwrap();
    let bwv = b2_fourier_bilinear(&w, &v, &k, &spec, &out).unwrap();
    let lhs = grid(&bs).sub(grid(&b)).unwrap().sub(grid(&bw)).unwrap();
    let rhs = grid(&bvw).add(grid(&bwv)).unwrap();
    assert!(lhs.sub(&rhs).unwrap().max_abs() <= 1e-10 * rhs.max_abs());
    let diag = b2_fourier_bilinear(&v, &v, &k, &spec, &out).unwrap();
    assert_eq!(grid(&diag), grid(&b));
}

#[test]
fn translation_by_grid_vector_shifts_output() {
    let v = GridPotential::from_potential(&skew(), 24, 3.2, f64::INFINITY).unwrap();
    let moved = v.shifted([2, 0, -2]).unwrap();
    let rk = 2.0 * moved.support_radius();
    let spec = LatticeSpec { radius: 7.0, symmetry: false, ..LatticeSpec::auto(&moved, rk) };
    let k = lattice_kernel(rk, &spec).unwrap();
    let a = b2_fourier(&v, &k, Some(spec), &LatticeOutput::HalfGrid).unwrap();
    let b = b2_fourier(&moved, &k, Some(spec), &LatticeOutput::HalfGrid).unwrap();
    let (a, b) = (grid(&a), grid(&b));
    let m = a.m();
    let mut worst: f64 = 0.0;
    for i in 0..m - 1 {
        for j in 0..m {
            for l in 1..m {
                let x = a.data()[(i * m + j) * m + l];
                let y = b.data()[((i + 1) * m + j) * m + l - 1];
                worst = worst.max((x - y).norm());
            }
        }
    }
    assert!(worst <= 1e-8 * a.max_abs(), "{worst}");
}

#[test]
fn output_is_real_and_lattice_is_checked() {
    let v = GridPotential::from_potential(&skew(), 16, 2.0, f64::INFINITY).unwrap();
    let (spec, k) = small(&v);
    let b = b2_fourier(&v, &k, Some(spec), &LatticeOutput::HalfGrid).unwrap();
    let imag = grid(&b).data().iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    assert!(imag < 1e-8 * grid(&b).max_abs());
    assert!(b.error_estimate >= 0.0);
    let coarse = LatticeSpec { spacing: 1.0, ..spec };
    assert!(matches!(b2_fourier(&v, &k, Some(coarse), &LatticeOutput::HalfGrid), Err(Error::LatticeTooCoarse(_))));
    let short = lattice_kernel(v.support_radius(), &spec).unwrap();
    assert!(b2_fourier(&v, &short, Some(spec), &LatticeOutput::HalfGrid).is_err());
}

#[test]
fn fourier_and_physical_paths_agree_on_gaussian() {
    let g = GaussianPotential::isotropic(1.0, 4.0, [0.0; 3]);
    let v = GridPotential::from_potential(&g, 24, 2.1, f64::INFINITY).unwrap();
    let rk = 2.0 * v.support_radius();
    let spec = LatticeSpec::auto(&v, rk);
    let k = lattice_kernel(rk, &spec).unwrap();
    let pts = vec![[0.35, 0.0, 0.0], [0.35, 0.35, 0.0], [0.7, 0.35, -0.35], [1.05, 0.0, 0.35], [0.0, 0.7, 0.7]];
    let f = b2_fourier(&v, &k, Some(spec), &LatticeOutput::Points(pts.clone())).unwrap();
    let q = QuadratureSpec { rel_tol: 1e-8, abs_tol: 1e-14, ..QuadratureSpec::default() };
    let p = b2_physical(&g, &pts, &q).unwrap();
    let (TermField::Points { values: a, .. }, TermField::Points { values: b, .. }) = (&f.field, &p.field) else {
        panic!("point output expected");
    };
    for (x, y) in a.iter().zip(b) {
        assert!((x - y).norm() <= f.error_estimate + p.error_estimate, "{x} vs {y}");
    }
}

#[test]
fn monte_carlo_matches_lattice_for_order_two() {
    let radii = [0.35, 0.5, 0.7, 1.0];
    let rv = RadialPotential::gaussian(1.0, 4.0).unwrap();
    let mc = bn_radial(&rv, 2, &radii, &McSpec { samples: 200_000, seed: 11, gamma: None }).unwrap();
    let TermField::Radial(mc) = mc.field else { panic!() };
    let v = GridPotential::from_potential(&GaussianPotential::isotropic(1.0, 4.0, [0.0; 3]), 24, 2.1, f64::INFINITY)
        .unwrap();
    let rk = 2.0 * v.support_radius();
    let spec = LatticeSpec::auto(&v, rk);
    let k = lattice_kernel(rk, &spec).unwrap();
    let pts: Vec<[f64; 3]> = radii.iter().map(|r| [0.0, *r, 0.0]).collect();
    let f = b2_fourier(&v, &k, Some(spec), &LatticeOutput::Points(pts)).unwrap();
    let TermField::Points { values, .. } = f.field else { panic!() };
    for i in 0..radii.len() {
        assert!((mc.values[i] - values[i].re).abs() <= 3.0 * mc.std_errors[i], "r={}", radii[i]);
    }
}

#[test]
fn monte_carlo_scaling_and_rate() {
    let radii = [0.2, 0.35];
    let rv = RadialPotential::gaussian(1.0, 4.0).unwrap();
    let spec = McSpec { samples: 300_000, seed: 3, gamma: None };
    let a = bn_radial(&rv, 3, &radii, &spec).unwrap();
    let b = bn_radial(&rv.scaled(2.0), 3, &radii, &spec).unwrap();
    let (TermField::Radial(a), TermField::Radial(b)) = (&a.field, &b.field) else { panic!() };
    for i in 0..2 {
        assert!((b.values[i] - 8.0 * a.values[i]).abs() <= 3.0 * (b.std_errors[i] + 8.0 * a.std_errors[i]));
    }
    let one = bn_radial(&rv, 2, &radii, &McSpec { samples: 100_000, seed: 5, gamma: None }).unwrap();
    let two = bn_radial(&rv, 2, &radii, &McSpec { samples: 200_000, seed: 5, gamma: None }).unwrap();
    let (TermField::Radial(one), TermField::Radial(two)) = (&one.field, &two.field) else { panic!() };
    for i in 0..2 {
        let ratio = two.std_errors[i] / one.std_errors[i];
        assert!((0.6..=0.82).contains(&ratio), "{ratio}");
    }
}

#[test]
fn monte_carlo_reports_insufficient_samples() {
    let rv = RadialPotential::gaussian(1.0, 4.0).unwrap();
    let r = bn_radial(&rv, 4, &[0.5], &McSpec { samples: 10_000, seed: 1, gamma: Some(0.01) });
    assert!(matches!(r, Err(Error::InsufficientSamples { .. })), "{r:?}");
}

#[test]
fn truncated_transform_of_order_one_is_identity() {
    let v = PotentialSpec::TrigRandom { modes: 5, max_frequency: 2.0, amplitude: 0.3, support_radius: 1.5, seed: 4 }
        .build(16, 2.0)
        .unwrap();
    let t = truncated_transform(&v, 1, &BTreeMap::new()).unwrap();
    assert_eq!(&t.field, v.field());
    assert!(t.terms.is_empty());
    assert!(truncated_transform(&v, 2, &BTreeMap::new()).is_err());
    let mut methods = BTreeMap::new();
    methods.insert(2, TermMethod::Lattice(None));
    let t2 = truncated_transform(&v, 2, &methods).unwrap();
    assert_eq!(t2.terms.len(), 1);
    assert!(t2.terms[0].l2 > 0.0 && t2.terms[0].l2.is_finite());
}

#[test]
fn tail_construction_and_gaussian_regression() {
    let v = PotentialSpec::RadialTail { s: 0.49, support_radius: 1.5 }.build(48, 2.0).unwrap();
    let slope = tail_slope(v.field(), &TailWindow::for_grid(v.field())).unwrap();
    assert!((slope + 2.0).abs() <= 0.2, "{slope}");

    let g = GridPotential::from_potential(&GaussianPotential::isotropic(1.0, 4.0, [0.0; 3]), 24, 2.1, f64::INFINITY)
        .unwrap();
    // Both tails are super-algebraic: steeper than any tail the rough potentials carry.
    let w = TailWindow { k_min: 3.0, k_max: 12.0, bins: 10 };
    let (sv, sb) = tail_slopes(&g, &w).unwrap();
    assert!(sv < -2.5 && sb < -2.5, "{sv} {sb}");
    let narrow = TailWindow { k_min: 3.0, k_max: 3.5, bins: 10 };
    assert!(matches!(tail_slope(g.field(), &narrow), Err(Error::FitFailed(_))));
}

#[test]
fn local_norm_examples() {
    let f = GridField::from_real_fn(32, 2.0, |x| {
        let r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
        if r2 < 0.81 { (1.0 - r2 / 0.81).powi(4) } else { 0.0 }
    })
    .unwrap();
    for s in [0.0, 0.5, 1.0] {
        assert!(local_sobolev(&f, s, 0.9).unwrap() <= sobolev_norm(&f, s) * 1.5);
    }
    let outside = GridField::from_real_fn(32, 2.0, |x| if x[0] > 1.3 { 1.0 } else { 0.0 }).unwrap();
    assert_eq!(local_sobolev(&outside, 0.7, 1.0).unwrap(), 0.0);
    let n0 = local_sobolev(&f, 0.0, 0.9).unwrap();
    assert!((n0 - f.l2_norm()).abs() < 1e-10 * n0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn sobolev_norm_grows_with_order(seed in 0u64..1000, s in 0.0f64..2.0, ds in 0.0f64..1.0) {
        use rand::Rng;
        let mut rng = common::rng(seed);
        let data: Vec<Complex64> = (0..8 * 8 * 8).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), 0.0)).collect();
        let f = GridField::from_samples(8, 1.5, data).unwrap();
        prop_assert!(sobolev_norm(&f, s + ds) >= sobolev_norm(&f, s) * (1.0 - 1e-12));
    }
}
