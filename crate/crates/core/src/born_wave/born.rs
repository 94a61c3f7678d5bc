//! Born terms `K_N(t) f`, built from `u_0(s) = K_0(s) f` and
//! `u_N(t) = int_0^t K_0(t - s) v u_{N-1}(s) ds` on a uniform `s` grid.

use num_complex::Complex64;

use super::grid::{GridField, SpectralField};
use super::{free_propagate, sinc_multiplier};
use crate::error::{Error, Result};

/// Cumulative integrals `A(t_i) = int_0^{t_i} cos(s r) w(s) ds` and the sine analogue,
/// per wave vector, advanced node by node with Simpson (even nodes) or Simpson plus a
/// closing 3/8 panel (odd nodes).
struct Accumulator {
    even_prev: Option<(Vec<Complex64>, Vec<Complex64>)>,
    even_last: (Vec<Complex64>, Vec<Complex64>),
}

fn trig_terms(w: &SpectralField, s: f64, mags: &[f64]) -> (Vec<Complex64>, Vec<Complex64>) {
    let c = w.data().iter().zip(mags).map(|(z, r)| z * (s * r).cos()).collect();
    let sn = w.data().iter().zip(mags).map(|(z, r)| if *r == 0.0 { z * s } else { z * (s * r).sin() }).collect();
    (c, sn)
}

fn combine(base: Option<&[Complex64]>, terms: &[(&[Complex64], f64)]) -> Vec<Complex64> {
    let n = terms[0].0.len();
    (0..n)
        .map(|i| {
            let mut acc = base.map_or(Complex64::new(0.0, 0.0), |b| b[i]);
            for (v, w) in terms {
                acc += v[i] * *w;
            }
            acc
        })
        .collect()
}

/// Given `w_j = F(v u_{N-1}(s_j))` for all nodes, returns `F u_N(s_i)` for all nodes.
fn duhamel_stage(w: Vec<SpectralField>, h: f64, mags: &[f64]) -> Vec<SpectralField> {
    let n = w.len();
    let template = w[0].clone();
    let terms: Vec<(Vec<Complex64>, Vec<Complex64>)> =
        w.into_iter().enumerate().map(|(j, wj)| trig_terms(&wj, j as f64 * h, mags)).collect();
    let zero = vec![Complex64::new(0.0, 0.0); mags.len()];
    let mut acc = Accumulator { even_prev: None, even_last: (zero.clone(), zero.clone()) };
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let (a, b) = if i == 0 {
            (zero.clone(), zero.clone())
        } else if i % 2 == 0 {
            let (pa, pb) = &acc.even_last;
            let ws = [h / 3.0, 4.0 * h / 3.0, h / 3.0];
            let a = combine(Some(pa), &[(&terms[i - 2].0, ws[0]), (&terms[i - 1].0, ws[1]), (&terms[i].0, ws[2])]);
            let b = combine(Some(pb), &[(&terms[i - 2].1, ws[0]), (&terms[i - 1].1, ws[1]), (&terms[i].1, ws[2])]);
            acc.even_prev = Some(std::mem::replace(&mut acc.even_last, (a.clone(), b.clone())));
            (a, b)
        } else if i == 1 {
            let ws = [5.0 * h / 12.0, 8.0 * h / 12.0, -h / 12.0];
            let a = combine(None, &[(&terms[0].0, ws[0]), (&terms[1].0, ws[1]), (&terms[2].0, ws[2])]);
            let b = combine(None, &[(&terms[0].1, ws[0]), (&terms[1].1, ws[1]), (&terms[2].1, ws[2])]);
            (a, b)
        } else {
            // Simpson up to node i-3 (even), then a 3/8 panel.
            let (pa, pb) = match (i, &acc.even_prev) {
                (3, _) | (_, None) => (&zero, &zero),
                (_, Some(p)) => (&p.0, &p.1),
            };
            let ws = [3.0 * h / 8.0, 9.0 * h / 8.0, 9.0 * h / 8.0, 3.0 * h / 8.0];
            let idx = [i - 3, i - 2, i - 1, i];
            let a = combine(Some(pa), &[(&terms[idx[0]].0, ws[0]), (&terms[idx[1]].0, ws[1]), (&terms[idx[2]].0, ws[2]), (&terms[idx[3]].0, ws[3])]);
            let b = combine(Some(pb), &[(&terms[idx[0]].1, ws[0]), (&terms[idx[1]].1, ws[1]), (&terms[idx[2]].1, ws[2]), (&terms[idx[3]].1, ws[3])]);
            (a, b)
        };
        let t = i as f64 * h;
        let mut coeffs = template.clone();
        for (k, z) in coeffs.data_mut().iter_mut().enumerate() {
            let r = mags[k];
            *z = if r == 0.0 { a[k] * t - b[k] } else { (a[k] * (t * r).sin() - b[k] * (t * r).cos()) / r };
        }
        out.push(coeffs);
    }
    out
}

/// `K_0(t) f, ..., K_{n_max}(t) f` with `steps` (even, >= 4) quadrature intervals in `s`.
pub fn born_series(v: &GridField, f: &GridField, n_max: usize, t: f64, steps: usize) -> Result<Vec<GridField>> {
    v.same_grid(f)?;
    if steps < 4 {
        return Err(Error::InvalidInput(format!("born quadrature needs at least 4 steps, got {steps}")));
    }
    if !(t >= 0.0) {
        return Err(Error::InvalidInput(format!("time must be nonnegative, got {t}")));
    }
    let steps = steps + steps % 2;
    let h = t / steps as f64;
    let fhat = f.fft();
    let mags = fhat.magnitudes();
    let mut terms = vec![free_propagate(f, t)?];
    if n_max == 0 || t == 0.0 {
        terms.extend((0..n_max).map(|_| f.scale(0.0)));
        return Ok(terms);
    }
    // Stage 0 at every node.
    let mut stage: Vec<SpectralField> =
        (0..=steps).map(|j| fhat.apply_radial(|r| sinc_multiplier(j as f64 * h, r))).collect();
    for _ in 1..=n_max {
        let w: Result<Vec<SpectralField>> = stage.iter().map(|u| Ok(v.mul(&u.ifft())?.fft())).collect();
        stage = duhamel_stage(w?, h, &mags);
        terms.push(stage[steps].ifft());
    }
    Ok(terms)
}

/// `K_N(t) f`; `N = 0` is the free propagator.
pub fn born_term(v: &GridField, f: &GridField, n: usize, t: f64, steps: usize) -> Result<GridField> {
    Ok(born_series(v, f, n, t, steps)?.pop().unwrap())
}

#[derive(Debug, Clone)]
pub struct BornEstimate {
    pub field: GridField,
    pub error_estimate: f64,
    pub steps: usize,
}

/// `K_N(t) f` with `steps` and `2 steps`, returning the finer result, its relative
/// change, and the Richardson-improved field when the change exceeds `rel_tol`.
pub fn born_term_with_estimate(
    v: &GridField,
    f: &GridField,
    n: usize,
    t: f64,
    steps: usize,
    rel_tol: f64,
) -> Result<BornEstimate> {
    let coarse = born_term(v, f, n, t, steps)?;
    let fine = born_term(v, f, n, t, 2 * steps)?;
    let diff = fine.sub(&coarse)?;
    let scale = fine.l2_norm().max(f64::MIN_POSITIVE);
    let change = diff.l2_norm() / scale;
    if change <= rel_tol {
        return Ok(BornEstimate { field: fine, error_estimate: change, steps: 2 * steps });
    }
    // Fourth-order rule: remove the leading h^4 term.
    let improved = fine.add(&diff.scale(1.0 / 15.0))?;
    Ok(BornEstimate { field: improved, error_estimate: change / 15.0, steps: 2 * steps })
}
