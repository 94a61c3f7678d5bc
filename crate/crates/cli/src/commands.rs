//! One function per subcommand. Each writes `manifest.json` plus its data files
//! into the output directory and reports whether its checks passed.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use backscatter_core::backscatter::{
    b2_fourier, bn_radial, lattice_kernel, smoothing_report, sobolev_norm, GridPotential, LatticeOutput,
    LatticeSpec, McSpec, Potential, PotentialSpec, RadialPotential, TermField,
};
use backscatter_core::born_wave::{born_series, energy, free_propagate, stability_limit, wave_solve, GridField};
use backscatter_core::bounds_lab::{
    check_a2_chain, check_chain_lower_bound, check_fs_bound, check_hgamma_conv, check_hgamma_lemma, check_t2,
    check_weight_splitting, main_scaling_sweep, CheckRecord, ScalingFamily, SobolevParams,
    VerificationReport, WeightM,
};
use backscatter_core::fundamental_solution::TruncatedKernel;
use backscatter_core::io::{provenance_line, write_csv, write_field, write_file, Manifest};
use backscatter_core::special_kernels::KernelTable;
use serde::Serialize;
use serde_json::json;

use crate::config::{B2Output, RunConfig};

pub struct Ctx {
    pub out: PathBuf,
    pub table: Option<PathBuf>,
    pub cache: Option<PathBuf>,
}

pub struct Outcome {
    pub pass: bool,
    pub summary: String,
}

fn finish(ctx: &Ctx, mut manifest: Manifest, pass: bool, summary: String) -> Result<Outcome> {
    manifest.pass = Some(pass);
    manifest.write(&ctx.out.join("manifest.json"))?;
    Ok(Outcome { pass, summary })
}

fn grid_potential(cfg: &RunConfig) -> Result<GridPotential> {
    let g = cfg.grid()?;
    Ok(cfg.potential()?.build(g.m, g.l)?)
}

pub fn cmd_potential(cfg: &RunConfig, ctx: &Ctx) -> Result<Outcome> {
    let v = grid_potential(cfg)?;
    let mut manifest = Manifest::new("potential", cfg)?;
    manifest.files = write_field(&ctx.out, "potential", v.field(), None, &manifest.config_hash)?;
    let s = v.sobolev_s();
    manifest.results = json!({
        "support_radius": v.support_radius(),
        "sobolev_s": if s.is_finite() { Some(s) } else { None },
        "sobolev_norm": if s.is_finite() { Some(sobolev_norm(v.field(), s)) } else { None },
        "l2": v.field().l2_norm(),
        "max_abs": v.field().max_abs(),
    });
    finish(ctx, manifest, true, format!("potential on {}^3 grid", v.field().m()))
}

fn table_path(cfg: &RunConfig, ctx: &Ctx) -> PathBuf {
    if let Some(p) = &ctx.table {
        return p.clone();
    }
    let k = &cfg.kernel;
    let name = format!("kernel_n{}_r{}_h{}.tbl", k.order, k.r_max, k.step);
    match &ctx.cache {
        Some(dir) => dir.join(name),
        None => ctx.out.join(name),
    }
}

pub fn cmd_kernels(cfg: &RunConfig, ctx: &Ctx) -> Result<Outcome> {
    let k = &cfg.kernel;
    let table = KernelTable::build(k.order, k.r_max, k.step, k.evaluator, &cfg.quadrature)?;
    let path = table_path(cfg, ctx);
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    table.save(&path)?;
    let mut manifest = Manifest::new("kernels", cfg)?;
    let bytes = std::fs::read(&path)?;
    manifest.files.push(backscatter_core::io::FileEntry {
        name: path.display().to_string(),
        sha256: backscatter_core::io::sha256_hex(&bytes),
    });
    manifest.results = json!({ "header": table.header(), "path": path });
    let summary = format!("table {} ({})", table.hash(), path.display());
    finish(ctx, manifest, true, summary)
}

#[derive(Serialize)]
struct AxisRow {
    x: f64,
    re: f64,
    im: f64,
}

fn axis_profile(f: &GridField) -> Vec<AxisRow> {
    let m = f.m();
    let c = m / 2;
    (0..m)
        .map(|i| {
            let idx = (i * m + c) * m + c;
            AxisRow { x: f.point(idx)[0], re: f.data()[idx].re, im: f.data()[idx].im }
        })
        .collect()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}

pub fn cmd_b2(cfg: &RunConfig, ctx: &Ctx) -> Result<Outcome> {
    let g = cfg.grid()?;
    let v = grid_potential(cfg)?;
    if cfg.kernel.radius_factor < 2.0 {
        bail!("kernel radius factor must be at least 2");
    }
    let rk = cfg.kernel.radius_factor * v.support_radius();
    let spec = LatticeSpec::auto(&v, rk);
    let kernel = match &ctx.table {
        Some(path) => {
            let table = Arc::new(KernelTable::load(path).with_context(|| format!("loading {}", path.display()))?);
            let reach = rk * 2.0 * spec.radius;
            if table.r_max() < reach {
                bail!("kernel table covers r <= {}, this run needs {reach:.1}", table.r_max());
            }
            TruncatedKernel::with_table(table, rk, &cfg.quadrature, false)?
        }
        None => lattice_kernel(rk, &spec)?,
    };
    let out = match cfg.b2.output {
        B2Output::HalfGrid => LatticeOutput::HalfGrid,
        B2Output::Grid => LatticeOutput::Grid { m: g.m, l: g.l },
    };
    let res = b2_fourier(&v, &kernel, Some(spec), &out)?;
    let TermField::Grid(field) = &res.field else { bail!("lattice path returned a non-grid field") };
    let mut manifest = Manifest::new("b2", cfg)?;
    let hash = manifest.config_hash.clone();
    manifest.files = write_field(&ctx.out, "b2", field, None, &hash)?;
    manifest.files.push(write_csv(&ctx.out, "b2_axis.csv", &axis_profile(field), &hash)?);
    let centre = field.data()[(field.m() / 2 * field.m() + field.m() / 2) * field.m() + field.m() / 2];
    let mut results = json!({
        "order": res.order,
        "l2": field.l2_norm(),
        "max_abs": field.max_abs(),
        "center": [centre.re, centre.im],
        "error_estimate": res.error_estimate,
        "lattice": res.metadata,
    });
    let mut pass = true;
    if let Some(eps) = cfg.b2.smoothing_epsilon {
        let mut rep = smoothing_report(&v, eps)?;
        rep.elapsed = 0.0;
        pass &= rep.pass;
        results["smoothing"] = serde_json::to_value(&rep)?;
    }
    if let Some(reg) = &cfg.b2.regression {
        let reference = Manifest::read(&reg.manifest)
            .with_context(|| format!("reading reference manifest {}", reg.manifest.display()))?;
        let r = &reference.results;
        let num = |v: &serde_json::Value| v.as_f64().unwrap_or(f64::NAN);
        let diffs = [
            rel(num(&results["l2"]), num(&r["l2"])),
            rel(num(&results["max_abs"]), num(&r["max_abs"])),
            rel(num(&results["center"][0]), num(&r["center"][0])),
        ];
        let worst = diffs.iter().cloned().fold(0.0, f64::max);
        let ok = worst <= reg.rel_tol;
        pass &= ok;
        results["regression"] = json!({ "reference": reg.manifest, "max_rel_diff": worst, "rel_tol": reg.rel_tol, "pass": ok });
    }
    manifest.results = results;
    let summary = format!("B2 l2 {:.6e}, error estimate {:.2e}", field.l2_norm(), res.error_estimate);
    finish(ctx, manifest, pass, summary)
}

#[derive(Serialize)]
struct RadialRow {
    r: f64,
    value: f64,
    std_error: f64,
}

pub fn cmd_radial(cfg: &RunConfig, ctx: &Ctx) -> Result<Outcome> {
    let mc = &cfg.monte_carlo;
    if mc.points < 2 || !(mc.r_max > 0.0) {
        bail!("monte_carlo needs points >= 2 and r_max > 0");
    }
    let v = RadialPotential::gaussian(mc.amplitude, mc.alpha)?;
    let radii: Vec<f64> = (0..mc.points).map(|i| mc.r_max * i as f64 / (mc.points - 1) as f64).collect();
    let spec = McSpec { samples: mc.samples, seed: cfg.seed(), gamma: mc.gamma };
    let res = bn_radial(&v, mc.order, &radii, &spec)?;
    let TermField::Radial(samples) = &res.field else { bail!("radial path returned a non-radial field") };
    let rows: Vec<RadialRow> = samples
        .radii
        .iter()
        .zip(&samples.values)
        .zip(&samples.std_errors)
        .map(|((r, v), s)| RadialRow { r: *r, value: *v, std_error: *s })
        .collect();
    let mut manifest = Manifest::new("radial", cfg)?;
    let hash = manifest.config_hash.clone();
    manifest.files.push(write_csv(&ctx.out, "radial.csv", &rows, &hash)?);
    manifest.results = json!({
        "order": res.order,
        "max_abs": res.field.max_abs(),
        "error_estimate": res.error_estimate,
        "monte_carlo": res.metadata,
    });
    let summary = format!("B{} at {} radii, max standard error {:.2e}", res.order, radii.len(), res.error_estimate);
    finish(ctx, manifest, true, summary)
}

#[derive(Serialize)]
struct ResidualRow {
    order: usize,
    residual: f64,
}

pub fn cmd_wave(cfg: &RunConfig, ctx: &Ctx) -> Result<Outcome> {
    let g = cfg.grid()?;
    let w = &cfg.wave;
    let v = match &cfg.potential {
        Some(p) => p.build(g.m, g.l)?.field().clone(),
        None => GridField::zeros(g.m, g.l)?,
    };
    let c = w.initial_center;
    let f = GridField::from_real_fn(g.m, g.l, |x| {
        let d = [x[0] - c[0], x[1] - c[1], x[2] - c[2]];
        (-w.initial_alpha * (d[0] * d[0] + d[1] * d[1] + d[2] * d[2])).exp()
    })?;
    let dt = w.dt.unwrap_or_else(|| (w.t / 1024.0).min(0.5 * stability_limit(g.m, g.l)));
    let state = wave_solve(&v, &f, w.t, dt)?;
    let free = free_propagate(&f, w.t)?;
    let terms = born_series(&v, &f, w.born_orders, w.t, w.born_steps)?;
    let norm = state.u.l2_norm().max(1e-300);
    let mut partial = GridField::zeros(g.m, g.l)?;
    let mut rows = Vec::new();
    for (n, term) in terms.iter().enumerate() {
        partial = partial.add(&term.scale(if n % 2 == 0 { 1.0 } else { -1.0 }))?;
        rows.push(ResidualRow { order: n, residual: state.u.sub(&partial)?.l2_norm() / norm });
    }
    let e0 = f.l2_norm().powi(2);
    let e1 = energy(&state, &v)?;
    let vmax = v.max_abs();
    let free_gap = state.u.sub(&free)?.l2_norm() / free.l2_norm().max(1e-300);
    let decreasing = rows.windows(2).all(|p| p[1].residual < p[0].residual);
    let pass = if vmax == 0.0 {
        free_gap < 1e-10
    } else if vmax * w.t * w.t <= 0.5 {
        decreasing
    } else {
        true
    };
    let mut manifest = Manifest::new("wave", cfg)?;
    let hash = manifest.config_hash.clone();
    manifest.files = write_field(&ctx.out, "u_final", &state.u, Some(w.t), &hash)?;
    manifest.files.push(write_csv(&ctx.out, "born_residuals.csv", &rows, &hash)?);
    manifest.results = json!({
        "dt": dt,
        "potential_max": vmax,
        "free_propagation_gap": free_gap,
        "energy_initial": e0,
        "energy_final": e1,
        "born_residuals": rows.iter().map(|r| r.residual).collect::<Vec<_>>(),
        "residuals_decreasing": decreasing,
    });
    let summary = if vmax == 0.0 {
        format!("free propagation identity gap {free_gap:.2e}")
    } else {
        format!("Born residuals {:?}", rows.iter().map(|r| format!("{:.2e}", r.residual)).collect::<Vec<_>>())
    };
    finish(ctx, manifest, pass, summary)
}

fn random_pair(seed: u64) -> Result<(GridPotential, GridPotential)> {
    let mk = |s| PotentialSpec::TrigRandom { modes: 6, max_frequency: 3.0, amplitude: 1.0, support_radius: 1.0, seed: s }
        .build(20, 1.5);
    Ok((mk(2 * seed + 1)?, mk(2 * seed + 2)?))
}

pub fn cmd_bounds(cfg: &RunConfig, ctx: &Ctx) -> Result<Outcome> {
    let b = &cfg.bounds;
    let seed = cfg.seed();
    let ceilings = b.ceilings.unwrap_or_default();
    let mut rep = VerificationReport::default();

    let lemma = check_hgamma_lemma(b.lemma_samples, seed)?;
    rep.push(
        CheckRecord::one_sided("hgamma_lemma", json!({"seed": seed, "exact": "i128, dyadic 2^-20"}), 0.0, lemma.min_margin)
            .with_samples(lemma.samples),
    );
    for n in 2..=4 {
        let w = WeightM::new(vec![b.s; n])?;
        let split = check_weight_splitting(&w, b.split_samples, seed)?;
        rep.push(
            CheckRecord::one_sided("weight_splitting", json!({"s": w.s_list}), 1.0, split.min_margin)
                .with_samples(split.samples),
        );
        let chain = check_chain_lower_bound(n, b.split_samples, seed)?;
        rep.push(
            CheckRecord::one_sided("chain_lower_bound", json!({"order": n}), 1.0, chain.min_margin)
                .with_samples(chain.samples),
        );
    }
    let rhos = [0.0, 1.0, 4.0, 16.0];
    for &r in &rhos {
        for &eta in &rhos {
            rep.push(check_fs_bound(r, eta, b.s, b.epsilon)?);
        }
        rep.push(check_hgamma_conv(1.0, r, 0.0, b.s, b.epsilon, Some(ceilings.hgamma_conv))?);
        rep.push(check_t2(1.0, r, b.s, b.s, b.epsilon, Some(ceilings.t2))?);
    }
    if b.a2 {
        let params = SobolevParams::new(vec![b.s, b.s], b.epsilon)?;
        let pairs = (0..3).map(|i| random_pair(seed + i)).collect::<Result<Vec<_>>>()?;
        let a2 = check_a2_chain(2.0, &params, &pairs)?;
        rep.records.extend(a2.records(&params, Some(ceilings.a2)));
        rep.notes.push("A(2,R) supremum taken as a maximum over |xi_2| in {0} and 24 log-spaced values in [0.05, 40]".into());
    }
    for &n in &b.sweep_orders {
        let family = ScalingFamily {
            s: b.s,
            epsilon: b.epsilon,
            mc: McSpec { seed, ..ScalingFamily::default().mc },
            ..ScalingFamily::default()
        };
        let sweep = main_scaling_sweep(&family, n)?;
        let ceiling = if n == 2 { ceilings.scaling_n2 } else { ceilings.scaling_n3 };
        rep.records.extend(sweep.records(Some(ceiling)));
    }
    let mut manifest = Manifest::new("bounds", cfg)?;
    let hash = manifest.config_hash.clone();
    let mut csv = provenance_line(&hash).into_bytes();
    csv.extend(rep.to_csv()?.into_bytes());
    manifest.files.push(write_file(&ctx.out, "bounds.csv", &csv)?);
    let pass = rep.all_pass();
    let failures: Vec<String> = rep.failures().iter().map(|r| format!("{} {}", r.name, r.params)).collect();
    manifest.results = serde_json::to_value(&rep)?;
    let summary = if pass {
        format!("{} checks passed", rep.records.len())
    } else {
        format!("{} of {} checks failed: {}", failures.len(), rep.records.len(), failures.join("; "))
    };
    finish(ctx, manifest, pass, summary)
}

pub fn out_dir(cfg: &RunConfig, flag: Option<&Path>, command: &str) -> PathBuf {
    flag.map(Path::to_path_buf).or_else(|| cfg.out.clone()).unwrap_or_else(|| PathBuf::from("out").join(command))
}
