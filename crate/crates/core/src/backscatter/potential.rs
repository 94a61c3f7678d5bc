//! Potentials: analytic Gaussians, grid samples with a declared support, radial
//! Fourier profiles, and the JSON potential specs used by the CLI.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::born_wave::{GridField, SpectralField};
use crate::error::{Error, Result};
use crate::special_kernels::{chi, CutoffSpec};
use crate::sphere::SphereRule;

/// Point evaluation used by the physical-space path.
pub trait Potential: Sync {
    fn eval(&self, x: [f64; 3]) -> f64;

    fn support_radius(&self) -> f64;

    /// Angular frequency scale per unit radius, used to size sphere rules.
    fn bandwidth(&self) -> f64;

    /// Double spherical mean of `v(x - (y1 + y2)/2) v(x - (y2 - y1)/2)` over
    /// `|y1| = s, |y2| = t` when it can be computed faster than the generic way.
    fn pair_mean(&self, _x: [f64; 3], _s: f64, _t: f64) -> Option<f64> {
        None
    }
}

/// `amplitude * exp(-sum_i alpha_i (x_i - c_i)^2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianPotential {
    pub amplitude: f64,
    pub center: [f64; 3],
    pub alphas: [f64; 3],
}

impl GaussianPotential {
    pub fn isotropic(amplitude: f64, alpha: f64, center: [f64; 3]) -> Self {
        Self { amplitude, center, alphas: [alpha; 3] }
    }

    fn quad(&self, d: [f64; 3]) -> f64 {
        self.alphas[0] * d[0] * d[0] + self.alphas[1] * d[1] * d[1] + self.alphas[2] * d[2] * d[2]
    }

    /// Radius outside which the potential is below `1e-12 * |amplitude|`.
    pub fn negligible_radius(&self) -> f64 {
        let amin = self.alphas.iter().cloned().fold(f64::INFINITY, f64::min);
        let c = self.center.iter().map(|v| v * v).sum::<f64>().sqrt();
        c + (27.631_021_115_928_547 / amin).sqrt()
    }

    /// Continuous Fourier transform `int v(x) e^{-i xi x} dx`.
    pub fn fourier(&self, xi: [f64; 3]) -> Complex64 {
        let mut mag = self.amplitude;
        let mut phase = 0.0;
        for i in 0..3 {
            mag *= (std::f64::consts::PI / self.alphas[i]).sqrt() * (-xi[i] * xi[i] / (4.0 * self.alphas[i])).exp();
            phase -= xi[i] * self.center[i];
        }
        Complex64::from_polar(mag, phase)
    }
}

impl Potential for GaussianPotential {
    fn eval(&self, x: [f64; 3]) -> f64 {
        let d = [x[0] - self.center[0], x[1] - self.center[1], x[2] - self.center[2]];
        self.amplitude * (-self.quad(d)).exp()
    }

    fn support_radius(&self) -> f64 {
        self.negligible_radius()
    }

    fn bandwidth(&self) -> f64 {
        let amax = self.alphas.iter().cloned().fold(0.0, f64::max);
        2.0 * amax * (self.negligible_radius() + 1.0)
    }

    /// `v(u - a) v(u + a) = A^2 exp(-2 Q(u - c) - 2 Q(a))` separates the two means.
    fn pair_mean(&self, x: [f64; 3], s: f64, t: f64) -> Option<f64> {
        let amax = self.alphas.iter().cloned().fold(0.0, f64::max);
        let amin = self.alphas.iter().cloned().fold(f64::INFINITY, f64::min);
        let inner_rule = SphereRule::for_band((amax - amin) * s * s, 64);
        let inner = inner_rule.mean([0.0; 3], s, |a| (-0.5 * self.quad(a)).exp());
        let xc = [x[0] - self.center[0], x[1] - self.center[1], x[2] - self.center[2]];
        let r = xc.iter().map(|v| v * v).sum::<f64>().sqrt();
        let outer_rule = SphereRule::for_band(2.0 * amax * r * t + (amax - amin) * t * t, 64);
        let outer = outer_rule.mean([0.0; 3], 0.5 * t, |w| {
            (-2.0 * self.quad([xc[0] - w[0], xc[1] - w[1], xc[2] - w[2]])).exp()
        });
        Some(self.amplitude * self.amplitude * inner * outer)
    }
}

/// Grid samples of a potential with a declared support ball and regularity.
#[derive(Debug, Clone, PartialEq)]
pub struct GridPotential {
    field: GridField,
    support_radius: f64,
    sobolev_s: f64,
}

impl GridPotential {
    /// Rejects samples above `1e-12 * max` outside `B(0, support_radius)`.
    pub fn new(field: GridField, support_radius: f64, sobolev_s: f64) -> Result<Self> {
        if !(support_radius > 0.0) {
            return Err(Error::InvalidInput("support radius must be positive".into()));
        }
        let max = field.max_abs();
        for (idx, z) in field.data().iter().enumerate() {
            let p = field.point(idx);
            if p.iter().map(|v| v * v).sum::<f64>().sqrt() > support_radius && z.norm() > 1e-12 * max {
                return Err(Error::InvalidInput(format!(
                    "sample {:e} at {p:?} lies outside the declared support radius {support_radius}",
                    z.norm()
                )));
            }
        }
        Ok(Self { field, support_radius, sobolev_s })
    }

    pub fn from_potential<P: Potential>(p: &P, m: usize, l: f64, sobolev_s: f64) -> Result<Self> {
        let field = GridField::from_real_fn(m, l, |x| p.eval(x))?;
        Self::new(field, p.support_radius(), sobolev_s)
    }

    pub fn field(&self) -> &GridField {
        &self.field
    }

    pub fn sobolev_s(&self) -> f64 {
        self.sobolev_s
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self { field: self.field.scale(c), ..self.clone() }
    }

    /// Translation by an integer number of grid cells (periodic).
    pub fn shifted(&self, cells: [i64; 3]) -> Result<Self> {
        let m = self.field.m();
        let mut data = vec![Complex64::new(0.0, 0.0); m * m * m];
        for (idx, z) in self.field.data().iter().enumerate() {
            let (i, j, k) = (idx / (m * m), (idx / m) % m, idx % m);
            let w = |a: usize, s: i64| (a as i64 + s).rem_euclid(m as i64) as usize;
            data[(w(i, cells[0]) * m + w(j, cells[1])) * m + w(k, cells[2])] = *z;
        }
        let h = self.field.spacing();
        let shift = cells.iter().map(|c| (*c as f64 * h).powi(2)).sum::<f64>().sqrt();
        Self::new(GridField::from_samples(m, self.field.l(), data)?, self.support_radius + shift, self.sobolev_s)
    }
}

fn catmull(p: [f64; 4], u: f64) -> f64 {
    // Cubic Lagrange through nodes -1, 0, 1, 2.
    let w = [
        -u * (u - 1.0) * (u - 2.0) / 6.0,
        (u + 1.0) * (u - 1.0) * (u - 2.0) / 2.0,
        -(u + 1.0) * u * (u - 2.0) / 2.0,
        (u + 1.0) * u * (u - 1.0) / 6.0,
    ];
    p.iter().zip(w).map(|(a, b)| a * b).sum()
}

impl Potential for GridPotential {
    /// Periodic tricubic interpolation of the real part.
    fn eval(&self, x: [f64; 3]) -> f64 {
        let m = self.field.m() as i64;
        let h = self.field.spacing();
        let l = self.field.l();
        let mut base = [0i64; 3];
        let mut frac = [0.0; 3];
        for d in 0..3 {
            let g = (x[d] + l) / h;
            base[d] = g.floor() as i64;
            frac[d] = g - g.floor();
        }
        let at = |i: i64, j: i64, k: i64| {
            let w = |a: i64| a.rem_euclid(m) as usize;
            self.field.data()[(w(i) * m as usize + w(j)) * m as usize + w(k)].re
        };
        let mut plane = [0.0; 4];
        for (a, pa) in plane.iter_mut().enumerate() {
            let mut line = [0.0; 4];
            for (b, lb) in line.iter_mut().enumerate() {
                let mut col = [0.0; 4];
                for (c, cc) in col.iter_mut().enumerate() {
                    *cc = at(base[0] + a as i64 - 1, base[1] + b as i64 - 1, base[2] + c as i64 - 1);
                }
                *lb = catmull(col, frac[2]);
            }
            *pa = catmull(line, frac[1]);
        }
        catmull(plane, frac[0])
    }

    fn support_radius(&self) -> f64 {
        self.support_radius
    }

    fn bandwidth(&self) -> f64 {
        std::f64::consts::PI / self.field.spacing()
    }
}

/// Rotation-invariant potential given by samples of its (real) Fourier profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialPotential {
    pub rho_max: f64,
    pub profile: Vec<f64>,
    pub support_radius: f64,
}

impl RadialPotential {
    pub fn from_fn<F: Fn(f64) -> f64>(rho_max: f64, samples: usize, support_radius: f64, f: F) -> Result<Self> {
        if samples < 4 || !(rho_max > 0.0) || !(support_radius > 0.0) {
            return Err(Error::InvalidInput("radial profile needs >= 4 samples and positive ranges".into()));
        }
        let step = rho_max / (samples - 1) as f64;
        Ok(Self { rho_max, profile: (0..samples).map(|i| f(i as f64 * step)).collect(), support_radius })
    }

    /// `amplitude exp(-alpha |x|^2)`, profile sampled to where it drops below 1e-16.
    pub fn gaussian(amplitude: f64, alpha: f64) -> Result<Self> {
        let g = GaussianPotential::isotropic(amplitude, alpha, [0.0; 3]);
        let rho_max = (4.0 * alpha * 36.8).sqrt();
        Self::from_fn(rho_max, 4001, g.negligible_radius(), |r| g.fourier([r, 0.0, 0.0]).re)
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self { profile: self.profile.iter().map(|v| v * c).collect(), ..self.clone() }
    }

    /// Cubic interpolation of the profile; zero beyond `rho_max`.
    pub fn fourier(&self, rho: f64) -> f64 {
        let n = self.profile.len();
        let step = self.rho_max / (n - 1) as f64;
        let x = rho.abs() / step;
        if x > (n - 1) as f64 {
            return 0.0;
        }
        let i = (x.floor() as isize).clamp(1, n as isize - 3) as usize;
        let u = x - i as f64;
        catmull([self.profile[i - 1], self.profile[i], self.profile[i + 1], self.profile[i + 2]], u)
    }
}

/// JSON potential description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PotentialSpec {
    Gaussian {
        #[serde(default = "one")]
        amplitude: f64,
        alpha: f64,
        #[serde(default)]
        center: [f64; 3],
        #[serde(default)]
        anisotropy: Option<[f64; 3]>,
    },
    /// `psi * w` with `w_hat = <xi>^{-tau}`, `tau = s + 3/2 + 0.01`, cut off smoothly
    /// inside `B(0, support_radius)`.
    RadialTail { s: f64, support_radius: f64 },
    /// Random trigonometric polynomial times a smooth bump supported in `B(0, support_radius)`.
    TrigRandom { modes: usize, max_frequency: f64, amplitude: f64, support_radius: f64, seed: u64 },
}

fn one() -> f64 {
    1.0
}

/// Smooth bump equal to 1 on `|x| <= r/2`, zero for `|x| >= r`.
pub fn bump(r: f64, x: [f64; 3]) -> f64 {
    let spec = CutoffSpec { order: 3, scale: 0.5 * r };
    chi(&spec, x.iter().map(|v| v * v).sum::<f64>().sqrt())
}

impl PotentialSpec {
    pub fn sobolev_s(&self) -> f64 {
        match self {
            PotentialSpec::RadialTail { s, .. } => *s,
            _ => f64::INFINITY,
        }
    }

    pub fn build(&self, m: usize, l: f64) -> Result<GridPotential> {
        match self {
            PotentialSpec::Gaussian { amplitude, alpha, center, anisotropy } => {
                let alphas = anisotropy.map(|a| [a[0] * alpha, a[1] * alpha, a[2] * alpha]).unwrap_or([*alpha; 3]);
                let g = GaussianPotential { amplitude: *amplitude, center: *center, alphas };
                GridPotential::from_potential(&g, m, l, f64::INFINITY)
            }
            PotentialSpec::RadialTail { s, support_radius } => {
                let tau = s + 1.51;
                // The Nyquist planes have no mirror partner; leaving them out keeps the
                // samples symmetric under signed permutations.
                let half = m / 2;
                let ones: Vec<Complex64> = (0..m * m * m)
                    .map(|idx| {
                        let nyquist = [idx / (m * m), (idx / m) % m, idx % m].contains(&half);
                        Complex64::new(if nyquist { 0.0 } else { 1.0 }, 0.0)
                    })
                    .collect();
                let ones = SpectralField::from_parts(m, l, ones)?;
                let w = ones.apply_radial(|r| (1.0 + r * r).powf(-0.5 * tau)).ifft();
                let r = *support_radius;
                let data: Vec<Complex64> =
                    w.data().iter().enumerate().map(|(i, z)| Complex64::new(z.re * bump(r, w.point(i)), 0.0)).collect();
                GridPotential::new(GridField::from_samples(m, l, data)?, r, *s)
            }
            PotentialSpec::TrigRandom { modes, max_frequency, amplitude, support_radius, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                let terms: Vec<([f64; 3], f64, f64)> = (0..*modes)
                    .map(|_| {
                        let k = [
                            rng.gen_range(-max_frequency..*max_frequency),
                            rng.gen_range(-max_frequency..*max_frequency),
                            rng.gen_range(-max_frequency..*max_frequency),
                        ];
                        (k, rng.gen_range(-1.0..1.0), rng.gen_range(0.0..std::f64::consts::TAU))
                    })
                    .collect();
                let r = *support_radius;
                let field = GridField::from_real_fn(m, l, |x| {
                    let s: f64 = terms.iter().map(|(k, a, ph)| a * (k[0] * x[0] + k[1] * x[1] + k[2] * x[2] + ph).cos()).sum();
                    amplitude * s * bump(r, x)
                })?;
                GridPotential::new(field, r, f64::INFINITY)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_pair_mean_matches_generic_quadrature() {
        let g = GaussianPotential { amplitude: 1.3, center: [0.2, -0.1, 0.05], alphas: [3.0, 4.0, 5.0] };
        let x = [0.3, 0.1, -0.2];
        let (s, t) = (0.8, 0.85);
        let fast = g.pair_mean(x, s, t).unwrap();
        let rule = SphereRule::product(40, 80);
        let slow = rule
            .dirs
            .iter()
            .zip(&rule.weights)
            .map(|(d, w)| {
                let y2 = [t * d[0], t * d[1], t * d[2]];
                w * rule.mean([0.0; 3], s, |y1| {
                    g.eval([x[0] - 0.5 * (y1[0] + y2[0]), x[1] - 0.5 * (y1[1] + y2[1]), x[2] - 0.5 * (y1[2] + y2[2])])
                        * g.eval([x[0] - 0.5 * (y2[0] - y1[0]), x[1] - 0.5 * (y2[1] - y1[1]), x[2] - 0.5 * (y2[2] - y1[2])])
                })
            })
            .sum::<f64>();
        assert!((fast - slow).abs() < 1e-12 * slow.abs().max(1e-3), "{fast} vs {slow}");
    }

    #[test]
    fn grid_potential_support_check_and_interpolation() {
        let g = GaussianPotential::isotropic(1.0, 4.0, [0.0; 3]);
        let gp = GridPotential::from_potential(&g, 24, 2.1, f64::INFINITY).unwrap();
        assert!(GridPotential::new(gp.field().clone(), 1.0, 0.0).is_err());
        let x = [0.11, -0.23, 0.31];
        assert!((gp.eval(x) - g.eval(x)).abs() < 2e-2);
        let fine = GridPotential::from_potential(&g, 64, 2.1, f64::INFINITY).unwrap();
        assert!((fine.eval(x) - g.eval(x)).abs() < 2e-4);
    }

    #[test]
    fn specs_round_trip_through_json() {
        let spec = PotentialSpec::TrigRandom { modes: 4, max_frequency: 3.0, amplitude: 0.2, support_radius: 1.5, seed: 9 };
        let text = serde_json::to_string(&spec).unwrap();
        assert!(text.contains("\"kind\":\"trig_random\""));
        let back: PotentialSpec = serde_json::from_str(&text).unwrap();
        assert_eq!(back, spec);
        let gp = back.build(16, 2.0).unwrap();
        assert_eq!(gp, spec.build(16, 2.0).unwrap());
        let g: PotentialSpec = serde_json::from_str(r#"{"kind":"gaussian","alpha":4.0}"#).unwrap();
        assert!(g.build(24, 2.1).is_ok());
    }

    #[test]
    fn radial_profile_interpolates_gaussian() {
        let r = RadialPotential::gaussian(1.0, 4.0).unwrap();
        let exact = (std::f64::consts::PI / 4.0).powf(1.5) * (-(3.3f64).powi(2) / 16.0).exp();
        assert!((r.fourier(3.3) - exact).abs() < 1e-10);
    }
}
