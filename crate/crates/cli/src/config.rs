//! JSON run configuration. Unknown keys are rejected.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use backscatter_core::backscatter::PotentialSpec;
use backscatter_core::bounds_lab::Ceilings;
use backscatter_core::quadrature::QuadratureSpec;
use backscatter_core::special_kernels::table::TableEvaluator;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub potential: Option<PotentialSpec>,
    #[serde(default)]
    pub grid: Option<GridSpec>,
    #[serde(default)]
    pub kernel: KernelConfig,
    #[serde(default)]
    pub quadrature: QuadratureSpec,
    #[serde(default)]
    pub monte_carlo: MonteCarloConfig,
    #[serde(default)]
    pub b2: B2Config,
    #[serde(default)]
    pub wave: WaveConfig,
    #[serde(default)]
    pub bounds: BoundsConfig,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub table: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub m: usize,
    pub l: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct KernelConfig {
    pub order: usize,
    pub r_max: f64,
    pub step: f64,
    pub evaluator: TableEvaluator,
    /// Cutoff radius of the kernel in units of the potential's support; 2 is the minimum.
    pub radius_factor: f64,
}

impl Default for KernelConfig {
    fn default() -> Self {
        Self { order: 2, r_max: 16.0, step: 0.05, evaluator: TableEvaluator::Moments, radius_factor: 2.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MonteCarloConfig {
    pub order: usize,
    pub samples: usize,
    pub gamma: Option<f64>,
    pub amplitude: f64,
    pub alpha: f64,
    /// Output radii `0, r_max / (points - 1), ..., r_max`.
    pub points: usize,
    pub r_max: f64,
}

impl Default for MonteCarloConfig {
    fn default() -> Self {
        Self { order: 3, samples: 200_000, gamma: None, amplitude: 1.0, alpha: 4.0, points: 16, r_max: 1.5 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum B2Output {
    HalfGrid,
    Grid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct B2Config {
    pub output: B2Output,
    /// Run the tail-slope smoothing check with this epsilon (needs a finite-s potential).
    pub smoothing_epsilon: Option<f64>,
    pub regression: Option<Regression>,
}

impl Default for B2Config {
    fn default() -> Self {
        Self { output: B2Output::HalfGrid, smoothing_epsilon: None, regression: None }
    }
}

/// Compare against a committed manifest; the path is relative to the config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Regression {
    pub manifest: PathBuf,
    pub rel_tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WaveConfig {
    pub t: f64,
    pub dt: Option<f64>,
    pub born_orders: usize,
    pub born_steps: usize,
    /// Initial velocity `exp(-alpha |x - center|^2)`.
    pub initial_alpha: f64,
    pub initial_center: [f64; 3],
}

impl Default for WaveConfig {
    fn default() -> Self {
        Self { t: 1.0, dt: None, born_orders: 3, born_steps: 64, initial_alpha: 4.0, initial_center: [0.0; 3] }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BoundsConfig {
    pub lemma_samples: usize,
    pub split_samples: usize,
    pub s: f64,
    pub epsilon: f64,
    pub ceilings: Option<Ceilings>,
    pub a2: bool,
    pub sweep_orders: Vec<usize>,
}

impl Default for BoundsConfig {
    fn default() -> Self {
        Self {
            lemma_samples: 100_000,
            split_samples: 20_000,
            s: 0.4,
            epsilon: 0.1,
            ceilings: None,
            a2: false,
            sweep_orders: Vec::new(),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let mut cfg: RunConfig =
            serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        if let Some(r) = cfg.b2.regression.as_mut() {
            if r.manifest.is_relative() {
                r.manifest = base.join(&r.manifest);
            }
        }
        if let Some(t) = cfg.table.as_mut() {
            if t.is_relative() {
                *t = base.join(&*t);
            }
        }
        Ok(cfg)
    }

    pub fn grid(&self) -> Result<GridSpec> {
        let g = self.grid.context("config needs a \"grid\" with m and l")?;
        if g.m < 8 || g.m % 2 != 0 || !(g.l > 0.0) {
            bail!("grid must have even m >= 8 and l > 0");
        }
        Ok(g)
    }

    pub fn potential(&self) -> Result<&PotentialSpec> {
        self.potential.as_ref().context("config needs a \"potential\"")
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }
}
