use std::time::Instant;

use num_complex::Complex64;
use serde_json::json;

use super::potential::Potential;
use super::{BornTermResult, TermField};
use crate::error::Result;
use crate::fundamental_solution::{e2_pair, PairTest, Reduction};
use crate::quadrature::QuadratureSpec;

/// `B_2 v(x) = <E_2, g_x>` with `g_x(y_1, y_2) = v(x - (y_1 + y_2)/2) v(x - (y_2 - y_1)/2)`.
pub fn b2_physical<P: Potential>(v: &P, points: &[[f64; 3]], q: &QuadratureSpec) -> Result<BornTermResult> {
    let start = Instant::now();
    let t_max = 2.0 * v.support_radius();
    let mut values = Vec::with_capacity(points.len());
    let mut error_estimate: f64 = 0.0;
    let mut panels = Vec::with_capacity(points.len());
    for &x in points {
        let g = |y1: [f64; 3], y2: [f64; 3]| {
            v.eval([x[0] - 0.5 * (y1[0] + y2[0]), x[1] - 0.5 * (y1[1] + y2[1]), x[2] - 0.5 * (y1[2] + y2[2])])
                * v.eval([x[0] - 0.5 * (y2[0] - y1[0]), x[1] - 0.5 * (y2[1] - y1[1]), x[2] - 0.5 * (y2[2] - y1[2])])
        };
        let fast = v.pair_mean(x, 1.0, 1.0).is_some();
        let mean = |s: f64, t: f64| v.pair_mean(x, s, t).unwrap_or(0.0);
        let test = PairTest {
            g: &g,
            t_max,
            reduction: Reduction::Spherical { bandwidth: v.bandwidth() },
            mean: if fast { Some(&mean) } else { None },
        };
        let r = e2_pair(&test, q)?;
        values.push(Complex64::new(r.value, 0.0));
        error_estimate = error_estimate.max(r.error_estimate);
        panels.push(r.panels);
    }
    Ok(BornTermResult {
        order: 2,
        field: TermField::Points { points: points.to_vec(), values },
        metadata: json!({ "path": "physical_pairing", "t_max": t_max, "panels": panels }),
        error_estimate,
        elapsed: start.elapsed().as_secs_f64(),
    })
}
