//! `B_2 v` through the Fourier representation: `v_hat` on a cubic frequency
//! lattice, the `xi_1` sum for every `xi_2`, then direct summation of
//! `e^{2i<x, xi_2>}` at the output points.

use std::f64::consts::PI;
use std::time::Instant;

use num_complex::Complex64;
use rayon::prelude::*;
use serde_json::json;

use super::potential::{GridPotential, Potential};
use super::{BornTermResult, TermField};
use crate::born_wave::GridField;
use crate::error::{Error, Result};
use crate::fundamental_solution::TruncatedKernel;

/// Frequency lattice `spacing * Z^3`; pairs `(p, q) = (xi_2 + xi_1, xi_2 - xi_1)` are kept
/// while `|p|^2 + |q|^2 <= radius^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticeSpec {
    pub spacing: f64,
    pub radius: f64,
    /// Reduce to `xi_2` with `n_x >= n_y >= n_z >= 0` when `v_hat` is invariant under
    /// the signed permutations.
    pub symmetry: bool,
}

/// Asymmetry of `v_hat` (relative to its maximum) tolerated before symmetrizing.
const SYMMETRY_TOL: f64 = 1e-7;

impl LatticeSpec {
    /// Coarsest spacing free of aliasing for this support and kernel radius; the
    /// radius is the Nyquist frequency of the sample grid.
    pub fn auto(v: &GridPotential, kernel_radius: f64) -> Self {
        let spacing = 0.999 * 2.0 * PI / (2.0 * v.support_radius() + 2.0 * kernel_radius);
        Self { spacing, radius: PI / v.field().spacing(), symmetry: true }
    }

    /// The `xi_1` Riemann sum is exact for integrands whose inverse transform lives in
    /// `|y| < 2 pi / spacing`; that support is `2 R + 2 R_k`.
    pub fn check(&self, support: f64, kernel_radius: f64) -> Result<()> {
        if !(self.spacing > 0.0 && self.radius > self.spacing) {
            return Err(Error::InvalidInput(format!("bad lattice {self:?}")));
        }
        let period = 2.0 * PI / self.spacing;
        if period < 2.0 * support + 2.0 * kernel_radius {
            return Err(Error::LatticeTooCoarse(format!(
                "period {period:.4} < 2R + 2R_k = {:.4}",
                2.0 * support + 2.0 * kernel_radius
            )));
        }
        Ok(())
    }

    fn index_radius(&self) -> i64 {
        (self.radius / self.spacing).floor() as i64
    }

    /// Largest `|n_1|^2 + |n_2|^2`.
    fn pair_bound(&self) -> i64 {
        ((self.radius / self.spacing).powi(2) / 2.0).floor() as i64
    }
}

/// `v_hat` on the cube `|n_i| <= half` of lattice indices.
#[derive(Debug, Clone)]
struct Spectrum {
    half: i64,
    data: Vec<Complex64>,
}

impl Spectrum {
    fn width(&self) -> usize {
        (2 * self.half + 1) as usize
    }

    fn idx(&self, a: i64, b: i64, c: i64) -> usize {
        let w = self.width();
        (((a + self.half) as usize) * w + (b + self.half) as usize) * w + (c + self.half) as usize
    }

    /// Direct separable transform `h^3 sum_x v(x) e^{-i p x}` at `p = d n`.
    fn of(field: &GridField, d: f64, half: i64) -> Self {
        let m = field.m();
        let h = field.spacing();
        let w = (2 * half + 1) as usize;
        let x = |i: usize| -field.l() + i as f64 * h;
        let phase: Vec<Complex64> = (0..w)
            .flat_map(|a| {
                let n = a as f64 - half as f64;
                (0..m).map(move |i| Complex64::from_polar(1.0, -d * n * x(i)))
            })
            .collect();
        let e = |a: usize, i: usize| phase[a * m + i];
        let src = field.data();
        // t1[i][j][c] = sum_k v[i][j][k] e[c][k]
        let t1: Vec<Complex64> = (0..m * m)
            .into_par_iter()
            .flat_map_iter(|ij| (0..w).map(move |c| (0..m).map(|k| src[ij * m + k] * e(c, k)).sum::<Complex64>()))
            .collect();
        // t2[i][b][c] = sum_j t1[i][j][c] e[b][j]
        let t2: Vec<Complex64> = (0..m * w)
            .into_par_iter()
            .flat_map_iter(|ib| {
                let (i, b) = (ib / w, ib % w);
                let t1 = &t1;
                (0..w).map(move |c| (0..m).map(|j| t1[(i * m + j) * w + c] * e(b, j)).sum::<Complex64>())
            })
            .collect();
        let h3 = h * h * h;
        let data: Vec<Complex64> = (0..w * w)
            .into_par_iter()
            .flat_map_iter(|ab| {
                let (a, b) = (ab / w, ab % w);
                let t2 = &t2;
                (0..w).map(move |c| h3 * (0..m).map(|i| t2[(i * w + b) * w + c] * e(a, i)).sum::<Complex64>())
            })
            .collect();
        Self { half, data }
    }

    fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest deviation under the 48 signed permutations, relative to the maximum.
    fn asymmetry(&self) -> f64 {
        let max = self.max_abs();
        if max == 0.0 {
            return 0.0;
        }
        let n = self.half;
        let mut worst: f64 = 0.0;
        for a in -n..=n {
            for b in -n..=n {
                for c in -n..=n {
                    let z = self.data[self.idx(a, b, c)];
                    for (x, y, w) in [(-a, b, c), (b, a, c), (a, c, b)] {
                        worst = worst.max((z - self.data[self.idx(x, y, w)]).norm());
                    }
                }
            }
        }
        worst / max
    }

    /// Averages over the signed permutations.
    fn symmetrize(&mut self) {
        let n = self.half;
        let mut out = vec![Complex64::new(0.0, 0.0); self.data.len()];
        for a in -n..=n {
            for b in -n..=n {
                for c in -n..=n {
                    let sum: Complex64 = images([a, b, c]).iter().map(|g| self.data[self.idx(g[0], g[1], g[2])]).sum();
                    out[self.idx(a, b, c)] = sum / 48.0;
                }
            }
        }
        self.data = out;
    }
}

/// The 48 signed permutations of `v`, with repetition.
fn images(v: [i64; 3]) -> [[i64; 3]; 48] {
    const PERMS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    let mut out = [[0i64; 3]; 48];
    let mut k = 0;
    for p in PERMS {
        for signs in 0..8 {
            for d in 0..3 {
                let s = if signs >> d & 1 == 1 { -1 } else { 1 };
                out[k][d] = s * v[p[d]];
            }
            k += 1;
        }
    }
    out
}

/// `beta(xi_2)` on the lattice cube `|n_i| <= half`.
#[derive(Debug, Clone)]
pub struct BetaLattice {
    spacing: f64,
    half: i64,
    beta: Vec<Complex64>,
    pairs: u64,
    symmetrized: bool,
    asymmetry: f64,
}

fn isqrt(n: i64) -> i64 {
    if n < 0 {
        return -1;
    }
    let mut r = (n as f64).sqrt() as i64;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

/// Kernel values `F E(|xi_1|, |xi_2|)` indexed by `|n_1|^2`.
fn kernel_row(k: &TruncatedKernel, d: f64, r2: f64, count: usize) -> Result<Vec<f64>> {
    let reach = d * ((count - 1) as f64).sqrt() + r2;
    let fast = k.max_fast_frequency().is_some_and(|f| reach <= f);
    (0..count)
        .map(|m| {
            let r1 = d * (m as f64).sqrt();
            match k.f2_fast(r1, r2).filter(|_| fast) {
                Some(v) => Ok(v),
                None => Ok(k.fourier_e_radii(&[r1, r2])?.re),
            }
        })
        .collect()
}

fn beta_at(k: &TruncatedKernel, spec: &LatticeSpec, s1: &Spectrum, s2: &Spectrum, n2: [i64; 3]) -> Result<(Complex64, u64)> {
    let n2sq = n2.iter().map(|v| v * v).sum::<i64>();
    let avail = spec.pair_bound() - n2sq;
    if avail < 0 {
        return Ok((Complex64::new(0.0, 0.0), 0));
    }
    let d = spec.spacing;
    let row = kernel_row(k, d, d * (n2sq as f64).sqrt(), avail as usize + 1)?;
    let mut total = Complex64::new(0.0, 0.0);
    let mut pairs = 0u64;
    let ra = isqrt(avail);
    for a in -ra..=ra {
        let rem_a = avail - a * a;
        let rb = isqrt(rem_a);
        for b in -rb..=rb {
            let rem_b = rem_a - b * b;
            let rc = isqrt(rem_b);
            let base_p = s1.idx(n2[0] + a, n2[1] + b, n2[2]);
            let base_q = s2.idx(n2[0] - a, n2[1] - b, n2[2]);
            let ab = a * a + b * b;
            let mut line = Complex64::new(0.0, 0.0);
            for c in -rc..=rc {
                let kv = row[(ab + c * c) as usize];
                line += s1.data[(base_p as i64 + c) as usize] * s2.data[(base_q as i64 - c) as usize] * kv;
            }
            total += line;
            pairs += (2 * rc + 1) as u64;
        }
    }
    Ok((total * d.powi(3), pairs))
}

impl BetaLattice {
    pub fn build(v1: &GridPotential, v2: &GridPotential, k: &TruncatedKernel, spec: &LatticeSpec) -> Result<Self> {
        if k.order() != 2 {
            return Err(Error::InvalidInput("the lattice path needs an order-2 kernel".into()));
        }
        let support = v1.support_radius().max(v2.support_radius());
        if k.radius() < 2.0 * support * (1.0 - 1e-12) {
            return Err(Error::InvalidInput(format!(
                "kernel radius {} below 2R = {}",
                k.radius(),
                2.0 * support
            )));
        }
        spec.check(support, k.radius())?;
        let half = spec.index_radius();
        let mut s1 = Spectrum::of(v1.field(), spec.spacing, half);
        let same = v1 == v2;
        let mut s2 = if same { s1.clone() } else { Spectrum::of(v2.field(), spec.spacing, half) };
        let mut symmetrized = false;
        let mut asymmetry = 0.0;
        if spec.symmetry {
            asymmetry = s1.asymmetry().max(if same { 0.0 } else { s2.asymmetry() });
            if asymmetry <= SYMMETRY_TOL {
                if asymmetry > 0.0 {
                    s1.symmetrize();
                    s2 = if same { s1.clone() } else {
                        s2.symmetrize();
                        s2
                    };
                }
                symmetrized = true;
            }
        }
        let out_half = isqrt(spec.pair_bound());
        let w = (2 * out_half + 1) as usize;
        let mut targets = Vec::new();
        for a in -out_half..=out_half {
            for b in -out_half..=out_half {
                for c in -out_half..=out_half {
                    if a * a + b * b + c * c > spec.pair_bound() {
                        continue;
                    }
                    if !symmetrized || (a >= b && b >= c && c >= 0) {
                        targets.push([a, b, c]);
                    }
                }
            }
        }
        let values: Result<Vec<(Complex64, u64)>> =
            targets.par_iter().map(|n2| beta_at(k, spec, &s1, &s2, *n2)).collect();
        let values = values?;
        let mut beta = vec![Complex64::new(0.0, 0.0); w * w * w];
        let at = |g: [i64; 3]| (((g[0] + out_half) as usize) * w + (g[1] + out_half) as usize) * w + (g[2] + out_half) as usize;
        let mut pairs = 0;
        for (n2, (val, count)) in targets.iter().zip(values) {
            if symmetrized {
                let imgs = images(*n2);
                let mut seen: Vec<[i64; 3]> = Vec::with_capacity(48);
                for g in imgs {
                    if !seen.contains(&g) {
                        seen.push(g);
                        beta[at(g)] = val;
                    }
                }
                pairs += count * seen.len() as u64;
            } else {
                beta[at(*n2)] = val;
                pairs += count;
            }
        }
        Ok(Self { spacing: spec.spacing, half: out_half, beta, pairs, symmetrized, asymmetry })
    }

    fn prefactor(&self) -> f64 {
        8.0 * self.spacing.powi(3) / (2.0 * PI).powi(6)
    }

    /// `(2 pi)^{-6} 2^3 sum e^{2i<x, xi_2>} beta(xi_2) d^3` at one point.
    pub fn eval(&self, x: [f64; 3]) -> Complex64 {
        let n = self.half;
        let w = (2 * n + 1) as usize;
        let axis = |xi: f64| -> Vec<Complex64> {
            (-n..=n).map(|a| Complex64::from_polar(1.0, 2.0 * xi * self.spacing * a as f64)).collect()
        };
        let (ex, ey, ez) = (axis(x[0]), axis(x[1]), axis(x[2]));
        let mut total = Complex64::new(0.0, 0.0);
        for a in 0..w {
            for b in 0..w {
                let row = &self.beta[(a * w + b) * w..(a * w + b + 1) * w];
                let line: Complex64 = row.iter().zip(&ez).map(|(z, e)| z * e).sum();
                total += line * ex[a] * ey[b];
            }
        }
        total * self.prefactor()
    }

    /// Separable direct summation on an `m^3` grid over `[-l, l)^3`.
    pub fn eval_grid(&self, m: usize, l: f64) -> Result<GridField> {
        let n = self.half;
        let w = (2 * n + 1) as usize;
        let h = 2.0 * l / m as f64;
        let e: Vec<Complex64> = (0..w)
            .flat_map(|a| {
                let k = 2.0 * self.spacing * (a as f64 - n as f64);
                (0..m).map(move |i| Complex64::from_polar(1.0, k * (-l + i as f64 * h)))
            })
            .collect();
        let e = |a: usize, i: usize| e[a * m + i];
        let beta = &self.beta;
        let t1: Vec<Complex64> = (0..w * w)
            .into_par_iter()
            .flat_map_iter(|ab| (0..m).map(move |k| (0..w).map(|c| beta[ab * w + c] * e(c, k)).sum::<Complex64>()))
            .collect();
        let t2: Vec<Complex64> = (0..w * m)
            .into_par_iter()
            .flat_map_iter(|aj| {
                let (a, j) = (aj / m, aj % m);
                let t1 = &t1;
                (0..m).map(move |k| (0..w).map(|b| t1[(a * w + b) * m + k] * e(b, j)).sum::<Complex64>())
            })
            .collect();
        let pre = self.prefactor();
        let data: Vec<Complex64> = (0..m * m)
            .into_par_iter()
            .flat_map_iter(|ij| {
                let (i, j) = (ij / m, ij % m);
                let t2 = &t2;
                (0..m).map(move |k| pre * (0..w).map(|a| t2[(a * m + j) * m + k] * e(a, i)).sum::<Complex64>())
            })
            .collect();
        GridField::from_samples(m, l, data)
    }

    /// `(|zeta|, F(B_2 v)(zeta))` for every stored `xi_2`, with `zeta = 2 xi_2` and
    /// `F(B_2 v)(zeta) = (2 pi)^{-3} beta(zeta / 2)`.
    pub fn spectrum(&self) -> Vec<(f64, Complex64)> {
        let n = self.half;
        let w = (2 * n + 1) as usize;
        let c = (2.0 * PI).powi(-3);
        let mut out = Vec::with_capacity(self.beta.len());
        for a in -n..=n {
            for b in -n..=n {
                for k in -n..=n {
                    let idx = (((a + n) as usize) * w + (b + n) as usize) * w + (k + n) as usize;
                    let zeta = 2.0 * self.spacing * ((a * a + b * b + k * k) as f64).sqrt();
                    out.push((zeta, self.beta[idx] * c));
                }
            }
        }
        out
    }

    /// `||B_2 v||_{(sigma)}^2` by the lattice rule in `zeta`, cell volume `(2d)^3`.
    pub fn sobolev_norm_sq(&self, sigma: f64) -> f64 {
        let cell = 8.0 * self.spacing.powi(3);
        let total: f64 =
            self.spectrum().iter().map(|(z, f)| (1.0 + z * z).powf(sigma) * f.norm_sqr()).sum();
        total * cell / (2.0 * PI).powi(3)
    }

    pub fn pairs(&self) -> u64 {
        self.pairs
    }

    pub fn symmetrized(&self) -> bool {
        self.symmetrized
    }

    pub fn asymmetry(&self) -> f64 {
        self.asymmetry
    }
}

/// Where the lattice sum is evaluated.
#[derive(Debug, Clone, PartialEq)]
pub enum LatticeOutput {
    /// Every other point of the potential's grid.
    HalfGrid,
    Grid { m: usize, l: f64 },
    Points(Vec<[f64; 3]>),
}

/// Rerun on a lattice truncated to this fraction of the radius to estimate the error.
const RERUN_FRACTION: f64 = 0.85;

fn evaluate(beta: &BetaLattice, out: &LatticeOutput, v: &GridPotential) -> Result<TermField> {
    Ok(match out {
        LatticeOutput::HalfGrid => TermField::Grid(beta.eval_grid(v.field().m() / 2, v.field().l())?),
        LatticeOutput::Grid { m, l } => TermField::Grid(beta.eval_grid(*m, *l)?),
        LatticeOutput::Points(points) => TermField::Points {
            points: points.clone(),
            values: points.par_iter().map(|x| beta.eval(*x)).collect(),
        },
    })
}

fn max_diff(a: &TermField, b: &TermField) -> f64 {
    match (a, b) {
        (TermField::Grid(x), TermField::Grid(y)) => {
            x.data().iter().zip(y.data()).map(|(p, q)| (p - q).norm()).fold(0.0, f64::max)
        }
        (TermField::Points { values: x, .. }, TermField::Points { values: y, .. }) => {
            x.iter().zip(y).map(|(p, q)| (p - q).norm()).fold(0.0, f64::max)
        }
        _ => f64::INFINITY,
    }
}

/// Bilinear form `B_2(v1, v2)`; `b2_fourier` is the diagonal.
pub fn b2_fourier_bilinear(
    v1: &GridPotential,
    v2: &GridPotential,
    k: &TruncatedKernel,
    spec: &LatticeSpec,
    out: &LatticeOutput,
) -> Result<BornTermResult> {
    let start = Instant::now();
    let beta = BetaLattice::build(v1, v2, k, spec)?;
    let field = evaluate(&beta, out, v1)?;
    let coarse_spec = LatticeSpec { radius: RERUN_FRACTION * spec.radius, ..*spec };
    let coarse = evaluate(&BetaLattice::build(v1, v2, k, &coarse_spec)?, out, v1)?;
    let mut error_estimate = max_diff(&field, &coarse);
    if beta.symmetrized {
        error_estimate += 2.0 * beta.asymmetry * field.max_abs();
    }
    let metadata = json!({
        "path": "fourier_lattice",
        "kernel_radius": k.radius(),
        "lattice_spacing": spec.spacing,
        "lattice_radius": spec.radius,
        "rerun_radius": coarse_spec.radius,
        "pairs": beta.pairs,
        "symmetrized": beta.symmetrized,
        "asymmetry": beta.asymmetry,
    });
    Ok(BornTermResult { order: 2, field, metadata, error_estimate, elapsed: start.elapsed().as_secs_f64() })
}

/// `B_2 v` on the lattice `spec` (or the automatic lattice for `k`).
pub fn b2_fourier(
    v: &GridPotential,
    k: &TruncatedKernel,
    spec: Option<LatticeSpec>,
    out: &LatticeOutput,
) -> Result<BornTermResult> {
    let spec = spec.unwrap_or_else(|| LatticeSpec::auto(v, k.radius()));
    b2_fourier_bilinear(v, v, k, &spec, out)
}

/// Order-2 moment kernel of radius `kernel_radius` covering every frequency `spec` uses.
pub fn lattice_kernel(kernel_radius: f64, spec: &LatticeSpec) -> Result<TruncatedKernel> {
    TruncatedKernel::moments(2, kernel_radius, spec.radius)
}
