//! One-dimensional quadrature rules shared by the kernel, wave and bounds layers.

use std::collections::HashMap;
use std::ops::{Add, Mul, Sub};
use std::sync::{Mutex, OnceLock};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Values that can be integrated: reals and complex numbers.
pub trait Scalar: Copy + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {
    fn zero() -> Self;
    fn magnitude(self) -> f64;
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn magnitude(self) -> f64 {
        self.abs()
    }
}

impl Scalar for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
    fn magnitude(self) -> f64 {
        self.norm()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Rule {
    Gauss,
    Adaptive,
    Trapezoid,
}

/// Settings for the oscillatory integrals of the kernel layer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    pub rule: Rule,
    pub max_subdivisions: usize,
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Largest panel width as a fraction of pi / (frequency bound).
    pub oscillation_guard: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            rule: Rule::Gauss,
            max_subdivisions: 1 << 16,
            abs_tol: 1e-13,
            rel_tol: 1e-11,
            oscillation_guard: 0.25,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0) {
            return Err(Error::InvalidInput("quadrature tolerances must be positive".into()));
        }
        if !(self.oscillation_guard > 0.0 && self.oscillation_guard <= 1.0) {
            return Err(Error::InvalidInput("oscillation guard must lie in (0, 1]".into()));
        }
        if self.max_subdivisions == 0 {
            return Err(Error::InvalidInput("max_subdivisions must be positive".into()));
        }
        Ok(())
    }
}

/// Gauss-Legendre nodes and weights on [-1, 1], computed by Newton iteration and cached.
pub fn gauss_legendre(n: usize) -> &'static (Vec<f64>, Vec<f64>) {
    static CACHE: OnceLock<Mutex<HashMap<usize, &'static (Vec<f64>, Vec<f64>)>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("gauss-legendre cache poisoned");
    if let Some(rule) = guard.get(&n) {
        return rule;
    }
    let rule: &'static (Vec<f64>, Vec<f64>) = Box::leak(Box::new(legendre_rule(n)));
    guard.insert(n, rule);
    rule
}

fn legendre_rule(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 1 { x } else { p1 };
            let pm1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * p - pm1) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        if n == 1 {
            nodes[0] = 0.0;
            weights[0] = 2.0;
            break;
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Composite Gauss-Legendre rule with `panels` equal panels of `order` nodes each.
pub fn composite_gauss<T: Scalar, F: FnMut(f64) -> T>(
    mut f: F,
    a: f64,
    b: f64,
    panels: usize,
    order: usize,
) -> T {
    let (x, w) = gauss_legendre(order);
    let width = (b - a) / panels as f64;
    let half = 0.5 * width;
    let mut total = T::zero();
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * width;
        let mut panel = T::zero();
        for (xi, wi) in x.iter().zip(w) {
            panel = panel + f(mid + half * xi) * *wi;
        }
        total = total + panel * half;
    }
    total
}

/// Composite Simpson rule with `intervals` (rounded up to even) subintervals.
pub fn simpson<T: Scalar, F: FnMut(f64) -> T>(mut f: F, a: f64, b: f64, intervals: usize) -> T {
    let n = intervals.max(2) + intervals % 2;
    let h = (b - a) / n as f64;
    let mut total = f(a) + f(b);
    for i in 1..n {
        let c = if i % 2 == 1 { 4.0 } else { 2.0 };
        total = total + f(a + i as f64 * h) * c;
    }
    total * (h / 3.0)
}

/// Composite trapezoid rule.
pub fn trapezoid<T: Scalar, F: FnMut(f64) -> T>(mut f: F, a: f64, b: f64, intervals: usize) -> T {
    let n = intervals.max(1);
    let h = (b - a) / n as f64;
    let mut total = (f(a) + f(b)) * 0.5;
    for i in 1..n {
        total = total + f(a + i as f64 * h);
    }
    total * h
}

/// Integrates by the rule of `spec`, doubling the panel count from `initial_panels`
/// until two successive results agree to `rel_tol` (or `abs_tol`).
pub fn refine_until_converged<T: Scalar, F: FnMut(f64) -> T>(
    mut f: F,
    a: f64,
    b: f64,
    initial_panels: usize,
    spec: &QuadratureSpec,
) -> Result<T> {
    let rule = |f: &mut F, panels: usize| -> T {
        match spec.rule {
            Rule::Gauss | Rule::Adaptive => composite_gauss(&mut *f, a, b, panels, 16),
            Rule::Trapezoid => trapezoid(&mut *f, a, b, panels * 16),
        }
    };
    let mut panels = initial_panels.max(1);
    let mut previous = rule(&mut f, panels);
    let mut last_change = f64::INFINITY;
    while panels * 2 <= spec.max_subdivisions {
        panels *= 2;
        let current = rule(&mut f, panels);
        last_change = (current - previous).magnitude();
        if last_change <= spec.abs_tol.max(spec.rel_tol * current.magnitude()) {
            return Ok(current);
        }
        previous = current;
    }
    Err(Error::QuadratureBudgetExceeded { subdivisions: panels, last_change })
}

const KRONROD_X: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const KRONROD_W: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const GAUSS7_W: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn kronrod15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = fc * KRONROD_W[7];
    let mut g = fc * GAUSS7_W[3];
    for j in 0..7 {
        let dx = h * KRONROD_X[j];
        let s = f(c - dx) + f(c + dx);
        k += KRONROD_W[j] * s;
        if j % 2 == 1 {
            g += GAUSS7_W[j / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

/// Globally adaptive Gauss-Kronrod (7/15) integration of a real function.
pub fn adaptive<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_intervals: usize,
) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let (v, e) = kronrod15(&mut f, a, b);
    let mut intervals = vec![(a, b, v, e)];
    loop {
        let total: f64 = intervals.iter().map(|iv| iv.2).sum();
        let err: f64 = intervals.iter().map(|iv| iv.3).sum();
        if err <= abs_tol.max(rel_tol * total.abs()) {
            return Ok(total);
        }
        if intervals.len() >= max_intervals {
            return Err(Error::QuadratureBudgetExceeded { subdivisions: intervals.len(), last_change: err });
        }
        let (idx, _) = intervals
            .iter()
            .enumerate()
            .fold((0, -1.0), |best, (i, iv)| if iv.3 > best.1 { (i, iv.3) } else { best });
        let (lo, hi, _, _) = intervals.swap_remove(idx);
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = kronrod15(&mut f, lo, mid);
        let (v2, e2) = kronrod15(&mut f, mid, hi);
        intervals.push((lo, mid, v1, e1));
        intervals.push((mid, hi, v2, e2));
    }
}

/// Adaptive integration over consecutive breakpoints, summing the pieces.
pub fn adaptive_with_breaks<F: FnMut(f64) -> f64>(
    mut f: F,
    breaks: &[f64],
    abs_tol: f64,
    rel_tol: f64,
    max_intervals: usize,
) -> Result<f64> {
    let mut total = 0.0;
    let pieces = breaks.len().saturating_sub(1).max(1) as f64;
    for w in breaks.windows(2) {
        if w[1] > w[0] {
            total += adaptive(&mut f, w[0], w[1], abs_tol / pieces, rel_tol, max_intervals)?;
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_rule_integrates_polynomials_exactly() {
        for n in [1usize, 2, 5, 16, 40] {
            let (x, w) = gauss_legendre(n);
            let sum: f64 = w.iter().sum();
            assert!((sum - 2.0).abs() < 1e-13, "n={n}");
            let deg = 2 * n - 1;
            let q: f64 = x.iter().zip(w).map(|(x, w)| w * x.powi(deg as i32 - 1)).sum();
            let exact = if (deg - 1) % 2 == 0 { 2.0 / deg as f64 } else { 0.0 };
            assert!((q - exact).abs() < 1e-13, "n={n}");
        }
    }

    #[test]
    fn simpson_and_gauss_agree_on_smooth_integrand() {
        let g: f64 = composite_gauss(|t: f64| t.sin(), 0.0, 3.0, 4, 16);
        let s: f64 = simpson(|t: f64| t.sin(), 0.0, 3.0, 2000);
        let exact = 1.0 - 3f64.cos();
        assert!((g - exact).abs() < 1e-14);
        assert!((s - exact).abs() < 1e-11);
    }

    #[test]
    fn adaptive_handles_endpoint_peak() {
        let v = adaptive(|x| 1.0 / (1e-4 + x * x), 0.0, 1.0, 1e-12, 1e-12, 2000).unwrap();
        let exact = (1.0f64 / 1e-2).atan() / 1e-2;
        assert!((v - exact).abs() / exact < 1e-10);
    }

    #[test]
    fn budget_exhaustion_is_reported() {
        let spec = QuadratureSpec { max_subdivisions: 2, rel_tol: 1e-15, abs_tol: 1e-300, ..Default::default() };
        let r = refine_until_converged(|t: f64| (400.0 * t).sin(), 0.0, 10.0, 1, &spec);
        assert!(matches!(r, Err(Error::QuadratureBudgetExceeded { .. })));
    }
}
