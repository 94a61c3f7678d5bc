use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::Serialize;

use super::lattice::{b2_fourier, lattice_kernel, LatticeOutput, LatticeSpec};
use super::potential::{GridPotential, Potential, RadialPotential};
use super::radial_mc::{bn_radial, McSpec};
use super::TermField;
use crate::born_wave::GridField;
use crate::error::{Error, Result};

/// How the term of a given order is evaluated.
#[derive(Debug, Clone, PartialEq)]
pub enum TermMethod {
    /// Fourier lattice (order 2 only); `None` picks the automatic lattice.
    Lattice(Option<LatticeSpec>),
    /// Radial Monte Carlo on the rotation-invariant description of `v`.
    RadialMonteCarlo { profile: RadialPotential, mc: McSpec, radial_points: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TermNorm {
    pub order: usize,
    pub l2: f64,
    pub error_estimate: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedTransform {
    pub field: GridField,
    pub terms: Vec<TermNorm>,
}

fn radial_to_grid(grid: &GridField, radii: &[f64], values: &[f64]) -> Result<GridField> {
    let step = radii[1] - radii[0];
    let data = (0..grid.data().len())
        .map(|idx| {
            let p = grid.point(idx);
            let r = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
            let x = (r - radii[0]) / step;
            let i = (x.floor().max(0.0) as usize).min(radii.len() - 2);
            let u = (x - i as f64).clamp(0.0, 1.0);
            Complex64::new(values[i] * (1.0 - u) + values[i + 1] * u, 0.0)
        })
        .collect();
    GridField::from_samples(grid.m(), grid.l(), data)
}

/// `v + sum_{N=2}^{max_order} B_N v` on the grid of `v`.
pub fn truncated_transform(
    v: &GridPotential,
    max_order: usize,
    methods: &BTreeMap<usize, TermMethod>,
) -> Result<TruncatedTransform> {
    if max_order == 0 {
        return Err(Error::InvalidInput("max_order must be >= 1".into()));
    }
    let (m, l) = (v.field().m(), v.field().l());
    let mut field = v.field().clone();
    let mut terms = Vec::new();
    for order in 2..=max_order {
        let method = methods.get(&order).ok_or_else(|| Error::InvalidInput(format!("no method for order {order}")))?;
        let (term, err) = match method {
            TermMethod::Lattice(spec) => {
                if order != 2 {
                    return Err(Error::InvalidInput("the lattice path covers order 2 only".into()));
                }
                let rk = 2.0 * v.support_radius();
                let spec = spec.unwrap_or_else(|| LatticeSpec::auto(v, rk));
                let k = lattice_kernel(rk, &spec)?;
                let r = b2_fourier(v, &k, Some(spec), &LatticeOutput::Grid { m, l })?;
                match r.field {
                    TermField::Grid(g) => (g, r.error_estimate),
                    _ => unreachable!("grid output requested"),
                }
            }
            TermMethod::RadialMonteCarlo { profile, mc, radial_points } => {
                let n = (*radial_points).max(2);
                let r_out = l * 3f64.sqrt();
                let radii: Vec<f64> = (0..n).map(|i| r_out * i as f64 / (n - 1) as f64).collect();
                let r = bn_radial(profile, order, &radii, mc)?;
                match r.field {
                    TermField::Radial(s) => (radial_to_grid(&field, &s.radii, &s.values)?, r.error_estimate),
                    _ => unreachable!("radial output requested"),
                }
            }
        };
        terms.push(TermNorm { order, l2: term.l2_norm(), error_estimate: err });
        field = field.add(&term)?;
    }
    Ok(TruncatedTransform { field, terms })
}
