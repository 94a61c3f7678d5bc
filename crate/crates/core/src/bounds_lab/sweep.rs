//! Scaling of `||B_N v||_{H_(sigma)(B(0,R))} / ||v||_{(s)}^N` over a family of potentials.

use serde::{Deserialize, Serialize};
use serde_json::json;

use super::report::CheckRecord;
use super::SobolevParams;
use crate::backscatter::{
    bn_radial, lattice_kernel, local_sobolev, sobolev_norm, BetaLattice, GaussianPotential, GridPotential,
    LatticeSpec, McSpec, Potential, RadialPotential, TermField,
};
use crate::born_wave::GridField;
use crate::error::{Error, Result};
use crate::fundamental_solution::loglog_slope;

/// `lambda exp(-shape |x|^2 / R^2)`: the Gaussian falls to `e^{-shape}` at `|x| = R`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingFamily {
    pub radii: Vec<f64>,
    pub amplitudes: Vec<f64>,
    pub s: f64,
    pub epsilon: f64,
    pub shape: f64,
    pub grid_m: usize,
    /// Box half-width in units of `R`.
    pub box_factor: f64,
    pub mc: McSpec,
    pub radial_points: usize,
}

impl Default for ScalingFamily {
    fn default() -> Self {
        Self {
            radii: vec![0.5, 1.0, 2.0],
            amplitudes: vec![0.2, 2.0],
            s: 0.4,
            epsilon: 0.1,
            shape: 27.631,
            grid_m: 48,
            box_factor: 1.3,
            mc: McSpec { samples: 200_000, seed: 7, gamma: None },
            radial_points: 64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingPoint {
    pub radius: f64,
    pub amplitude: f64,
    pub v_norm: f64,
    pub bn_norm: f64,
    /// `bn_norm / v_norm^N`.
    pub ratio: f64,
    /// `C` with `ratio = C^N R^{(N-1)/2} N^{-N/2}`.
    pub implied_constant: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub order: usize,
    pub sigma: f64,
    pub points: Vec<ScalingPoint>,
    /// Fitted exponent of `R` at each amplitude.
    pub exponents: Vec<f64>,
    pub exponent_limit: f64,
    /// Largest relative deviation from exact `lambda^N` scaling of `bn_norm`.
    pub homogeneity_error: f64,
    pub implied_constant_max: f64,
    pub implied_constant_spread: f64,
}

impl ScalingReport {
    pub fn records(&self, ceiling: Option<f64>) -> Vec<CheckRecord> {
        let p = json!({"order": self.order, "sigma": self.sigma});
        let worst = self.exponents.iter().cloned().fold(f64::MIN, f64::max);
        vec![
            CheckRecord::one_sided("scaling_exponent", p.clone(), worst, self.exponent_limit)
                .with_constant(self.implied_constant_max, ceiling)
                .with_samples(self.points.len()),
            CheckRecord::one_sided("scaling_homogeneity", p, self.homogeneity_error, 1e-8),
        ]
    }
}

fn gaussian_grid(f: &ScalingFamily, radius: f64, amplitude: f64) -> Result<GridPotential> {
    let g = GaussianPotential::isotropic(amplitude, f.shape / (radius * radius), [0.0; 3]);
    GridPotential::from_potential(&g, f.grid_m, f.box_factor * radius, f64::INFINITY)
}

fn b2_grid(v: &GridPotential) -> Result<GridField> {
    let rk = 2.0 * v.support_radius();
    let spec = LatticeSpec::auto(v, rk);
    let k = lattice_kernel(rk, &spec)?;
    BetaLattice::build(v, v, &k, &spec)?.eval_grid(v.field().m(), v.field().l())
}

fn b3_grid(f: &ScalingFamily, v: &GridPotential, radius: f64, amplitude: f64) -> Result<GridField> {
    let rv = RadialPotential::gaussian(amplitude, f.shape / (radius * radius))?;
    let l = v.field().l();
    let r_top = 3f64.sqrt() * l * 1.001;
    let n = f.radial_points.max(8);
    let radii: Vec<f64> = (0..n).map(|i| r_top * i as f64 / (n - 1) as f64).collect();
    let res = bn_radial(&rv, 3, &radii, &f.mc)?;
    let TermField::Radial(samples) = res.field else {
        return Err(Error::InvalidInput("radial Monte Carlo returned a non-radial field".into()));
    };
    let step = r_top / (n - 1) as f64;
    let vals = samples.values;
    GridField::from_real_fn(f.grid_m, l, |x| {
        let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt() / step;
        let i = (r.floor() as usize).min(n - 2);
        let u = r - i as f64;
        vals[i] * (1.0 - u) + vals[i + 1] * u
    })
}

pub fn main_scaling_sweep(f: &ScalingFamily, order: usize) -> Result<ScalingReport> {
    if !(order == 2 || order == 3) {
        return Err(Error::InvalidInput(format!("scaling sweep supports N = 2, 3, got {order}")));
    }
    if f.radii.len() < 2 || f.amplitudes.is_empty() {
        return Err(Error::InvalidInput("need at least two radii and one amplitude".into()));
    }
    let params = SobolevParams::new(vec![f.s; order], f.epsilon)?;
    let sigma = params.sigma();
    let nf = order as f64;
    let mut points = Vec::new();
    for &radius in &f.radii {
        for &amplitude in &f.amplitudes {
            let v = gaussian_grid(f, radius, amplitude)?;
            let out = if order == 2 { b2_grid(&v)? } else { b3_grid(f, &v, radius, amplitude)? };
            let v_norm = sobolev_norm(v.field(), f.s);
            let bn_norm = local_sobolev(&out, sigma, radius)?;
            let ratio = bn_norm / v_norm.powi(order as i32);
            let implied_constant = (ratio * nf.powf(nf / 2.0) / radius.powf((nf - 1.0) / 2.0)).powf(1.0 / nf);
            points.push(ScalingPoint { radius, amplitude, v_norm, bn_norm, ratio, implied_constant });
        }
    }
    let mut exponents = Vec::new();
    for &a in &f.amplitudes {
        let sel: Vec<&ScalingPoint> = points.iter().filter(|p| p.amplitude == a).collect();
        let x: Vec<f64> = sel.iter().map(|p| p.radius).collect();
        let y: Vec<f64> = sel.iter().map(|p| p.ratio).collect();
        exponents.push(loglog_slope(&x, &y)?);
    }
    let mut homogeneity_error: f64 = 0.0;
    for &radius in &f.radii {
        let sel: Vec<&ScalingPoint> = points.iter().filter(|p| p.radius == radius).collect();
        let base = sel[0];
        for p in &sel[1..] {
            let expect = base.bn_norm * (p.amplitude / base.amplitude).powi(order as i32);
            homogeneity_error = homogeneity_error.max((p.bn_norm - expect).abs() / expect);
        }
    }
    let cs: Vec<f64> = points.iter().map(|p| p.implied_constant).collect();
    let cmax = cs.iter().cloned().fold(f64::MIN, f64::max);
    let cmin = cs.iter().cloned().fold(f64::MAX, f64::min);
    Ok(ScalingReport {
        order,
        sigma,
        points,
        exponents,
        exponent_limit: (nf - 1.0) / 2.0 + 0.3,
        homogeneity_error,
        implied_constant_max: cmax,
        implied_constant_spread: cmax / cmin,
    })
}
