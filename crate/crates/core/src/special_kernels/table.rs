use std::fmt::Write as _;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::kernel::f_n_eval;
use super::moments::MomentKernel;
use super::phi::RadialTuple;
use crate::error::{Error, Result};
use crate::quadrature::QuadratureSpec;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TableEvaluator {
    Quadrature,
    Moments,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableHeader {
    pub order: usize,
    pub r_max: f64,
    pub step: f64,
    pub points_per_axis: usize,
    pub interpolation: String,
    pub evaluator: TableEvaluator,
    pub quadrature: QuadratureSpec,
    /// Set when the step is coarser than the default 0.05.
    pub coarse: bool,
    pub hash: String,
    pub version: String,
}

/// `F_N` on a uniform tensor grid `[0, r_max]^N`, interpolated by local cubics.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelTable {
    header: TableHeader,
    values: Vec<Complex64>,
}

pub const DEFAULT_STEP: f64 = 0.05;

fn rows_text(header: &TableHeader, values: &[Complex64]) -> String {
    let n = header.order;
    let p = header.points_per_axis;
    let mut out = String::with_capacity(values.len() * 48);
    let mut idx = vec![0usize; n];
    for v in values {
        for &i in &idx {
            let _ = write!(out, "{},", i as f64 * header.step);
        }
        let _ = writeln!(out, "{},{}", v.re, v.im);
        for d in (0..n).rev() {
            idx[d] += 1;
            if idx[d] < p {
                break;
            }
            idx[d] = 0;
        }
    }
    out
}

fn digest(text: &str) -> String {
    format!("{:x}", Sha256::digest(text.as_bytes()))
}

/// Cubic Lagrange weights and first node for coordinate `x` on a grid of `p` nodes.
fn stencil(x: f64, p: usize) -> (usize, [f64; 4]) {
    let i = (x.floor() as isize).clamp(1, p as isize - 3) as usize - 1;
    let u = x - i as f64;
    let w = [
        -(u - 1.0) * (u - 2.0) * (u - 3.0) / 6.0,
        u * (u - 2.0) * (u - 3.0) / 2.0,
        -u * (u - 1.0) * (u - 3.0) / 2.0,
        u * (u - 1.0) * (u - 2.0) / 6.0,
    ];
    (i, w)
}

impl KernelTable {
    pub fn build(order: usize, r_max: f64, step: f64, evaluator: TableEvaluator, q: &QuadratureSpec) -> Result<Self> {
        if order < 2 {
            return Err(Error::InvalidInput("table order must be >= 2".into()));
        }
        if !(r_max > 0.0 && step > 0.0 && step < r_max) {
            return Err(Error::InvalidInput(format!("bad table range r_max={r_max} step={step}")));
        }
        q.validate()?;
        let p = (r_max / step).round() as usize + 1;
        if p < 4 {
            return Err(Error::InvalidInput("table needs at least 4 points per axis".into()));
        }
        let total = p.checked_pow(order as u32).filter(|t| *t <= 50_000_000).ok_or_else(|| {
            Error::InvalidInput(format!("table of {p}^{order} entries is too large"))
        })?;
        let moments = match evaluator {
            TableEvaluator::Moments => Some(MomentKernel::shared(order, 2.0 * (p - 1) as f64 * step + 2.0)?),
            TableEvaluator::Quadrature => None,
        };
        let values: Result<Vec<Complex64>> = (0..total)
            .into_par_iter()
            .map(|flat| {
                let mut rem = flat;
                let mut radii = vec![0.0; order];
                for d in (0..order).rev() {
                    radii[d] = (rem % p) as f64 * step;
                    rem /= p;
                }
                match &moments {
                    Some(m) => Ok(Complex64::new(m.f_n(&radii)?, 0.0)),
                    None => f_n_eval(&RadialTuple::new(radii)?, q),
                }
            })
            .collect();
        let values = values?;
        let mut header = TableHeader {
            order,
            r_max: (p - 1) as f64 * step,
            step,
            points_per_axis: p,
            interpolation: "tensor-cubic".into(),
            evaluator,
            quadrature: *q,
            coarse: step > DEFAULT_STEP,
            hash: String::new(),
            version: crate::VERSION.into(),
        };
        header.hash = digest(&rows_text(&header, &values));
        Ok(Self { header, values })
    }

    pub fn header(&self) -> &TableHeader {
        &self.header
    }

    pub fn hash(&self) -> &str {
        &self.header.hash
    }

    pub fn order(&self) -> usize {
        self.header.order
    }

    pub fn r_max(&self) -> f64 {
        self.header.r_max
    }

    /// Tensor-cubic interpolation of `F_N` at `radii`.
    pub fn interpolate(&self, radii: &[f64]) -> Result<Complex64> {
        let n = self.header.order;
        if radii.len() != n {
            return Err(Error::InvalidInput(format!("expected {n} radii, got {}", radii.len())));
        }
        let p = self.header.points_per_axis;
        let mut stencils = Vec::with_capacity(n);
        for &r in radii {
            if !(r >= 0.0 && r <= self.header.r_max * (1.0 + 1e-12)) {
                return Err(Error::TableRangeExceeded { radius: r, max: self.header.r_max });
            }
            stencils.push(stencil(r / self.header.step, p));
        }
        let mut total = Complex64::new(0.0, 0.0);
        for combo in 0..4usize.pow(n as u32) {
            let mut c = combo;
            let mut flat = 0;
            let mut w = 1.0;
            for (first, weights) in &stencils {
                let k = c % 4;
                c /= 4;
                flat = flat * p + first + k;
                w *= weights[k];
            }
            total += self.values[flat] * w;
        }
        Ok(total)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(file, "# {}", serde_json::to_string(&self.header)?)?;
        let names: Vec<String> = (1..=self.header.order).map(|i| format!("r{i}")).collect();
        writeln!(file, "{},re,im", names.join(","))?;
        file.write_all(rows_text(&self.header, &self.values).as_bytes())?;
        file.flush()?;
        Ok(())
    }

    /// Loads a table and verifies its content hash.
    pub fn load(path: &Path) -> Result<Self> {
        let mut lines = BufReader::new(std::fs::File::open(path)?).lines();
        let first = lines.next().ok_or_else(|| Error::Io("empty table file".into()))??;
        let json = first.strip_prefix("# ").ok_or_else(|| Error::Io("missing table header".into()))?;
        let header: TableHeader = serde_json::from_str(json)?;
        lines.next();
        let n = header.order;
        let mut values = Vec::new();
        for line in lines {
            let line = line?;
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != n + 2 {
                return Err(Error::Io(format!("malformed table row: {line}")));
            }
            let parse = |s: &str| s.parse::<f64>().map_err(|e| Error::Io(e.to_string()));
            values.push(Complex64::new(parse(cols[n])?, parse(cols[n + 1])?));
        }
        if values.len() != header.points_per_axis.pow(n as u32) {
            return Err(Error::Io("table row count does not match header".into()));
        }
        let hash = digest(&rows_text(&header, &values));
        if hash != header.hash {
            return Err(Error::Io(format!("table hash mismatch: {hash} vs {}", header.hash)));
        }
        Ok(Self { header, values })
    }
}
