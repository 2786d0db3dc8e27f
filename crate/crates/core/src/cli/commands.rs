use std::fs;
use std::path::Path;

use super::{Command, Settings};
use crate::analysis::{
    cook_integral_probe, hellmann_feynman_check, linear_fit, single_well_ground_curve, weyl_residual, WeylPacket,
};
use crate::disorder::{
    event_lower_bound_approx, event_lower_bound_product, event_probability_exact, event_probability_mc, realize_field,
    sample_site, EventSpec, FatTail, ModelParams,
};
use crate::error::{Error, Result};
use crate::harness::{run_localization_study, run_phase_sweep, run_wegner_probe, save_run, ExperimentConfig, Persist};
use crate::operator::{assemble, assemble_free, Grid, LatticeBox, Site};
use crate::spectral::{counting_upper_bound, dense_eig, greens_boundary_norm, lanczos_smallest, SpectralResult};

type Lines = Vec<String>;

pub(super) fn run(cmd: Command, s: Settings, out: &Path) -> Result<Lines> {
    match cmd {
        Command::Sample => sample(s, out),
        Command::Events => events(s, out),
        Command::Spectrum => spectrum(s, out),
        Command::Count => count(s, out),
        Command::Localize => localize(s, out),
        Command::Green => green(s, out),
        Command::Weyl => weyl(s, out),
        Command::WellCurve => well_curve(s, out),
        Command::HfCheck => hf_check(s, out),
        Command::Cook => cook(s, out),
        Command::PhaseSweep => phase_sweep(s, out),
        Command::Wegner => wegner(s, out),
    }
}

fn write_table(out: &Path, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<String> {
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let path = out.join(format!("{name}.csv"));
    let mut text = header.join(",");
    text.push('\n');
    for r in rows {
        text.push_str(&r.join(","));
        text.push('\n');
    }
    fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    Ok(path.display().to_string())
}

fn experiment(s: &Settings) -> Result<ExperimentConfig> {
    let d = ExperimentConfig::default();
    let cfg = ExperimentConfig {
        dim: s.get("dim", d.dim)?,
        alphas: s.list("alphas", d.alphas)?,
        deltas: s.list("deltas", d.deltas)?,
        grid: s.get("grid", d.grid)?,
        ladder: s.list("ladder", d.ladder)?,
        realizations: s.get("realizations", d.realizations)?,
        seed: s.get("seed", d.seed)?,
        eps: s.get("eps", d.eps)?,
        etas: s.list("etas", d.etas)?,
        energy: s.get("energy", d.energy)?,
        wegner_exponent: s.get("wegner_exponent", d.wegner_exponent)?,
        tau_grow: s.get("tau_grow", d.tau_grow)?,
        tau_sat: s.get("tau_sat", d.tau_sat)?,
        tol: s.get("tol", d.tol)?,
        workers: s.get("workers", d.workers)?,
    };
    cfg.validate()?;
    Ok(cfg)
}

fn model(s: &Settings, alpha: f64, delta: f64) -> Result<ModelParams> {
    ModelParams::new(s.get("dim", 1)?, s.get("alpha", alpha)?, s.get("delta", delta)?)
}

/// Reads the global keys every subcommand accepts, used or not.
fn common(s: &Settings) -> Result<()> {
    s.get::<usize>("workers", 1)?;
    s.get::<u64>("seed", 0)?;
    Ok(())
}

fn saved_line<T: Persist>(name: &str, result: &T, cfg: &ExperimentConfig, out: &Path, extra: String) -> Result<String> {
    let saved = save_run(result, &cfg.manifest(T::KIND), out)?;
    Ok(format!(
        "{name}: run {} -> {} ({} rows){extra}",
        saved.run_id,
        saved.table.display(),
        result.rows().len()
    ))
}

fn sample(s: Settings, out: &Path) -> Result<Lines> {
    common(&s)?;
    let seed = s.get("seed", 0u64)?;
    let delta = s.get("delta", 1.0)?;
    let count = s.get("count", 100_000usize)?;
    let radius = s.get("tail_radius", 9.0)?;
    s.finish()?;
    let dist = FatTail::new(delta)?;
    if count == 0 {
        return Err(Error::Config("sample: count must be positive".into()));
    }
    let mut values: Vec<f64> = (0..count as i64)
        .map(|i| sample_site(seed, &Site::new(&[i]), &dist))
        .collect();
    let rows: Vec<Vec<String>> = values
        .iter()
        .enumerate()
        .map(|(i, v)| vec![i.to_string(), v.to_string()])
        .collect();
    let path = write_table(out, "sample", &["site", "omega"], &rows)?;
    let tail = values.iter().filter(|&&v| v < -radius).count() as f64 / count as f64;
    values.sort_by(f64::total_cmp);
    let n = count as f64;
    let ks = values
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let f = dist.cdf(v);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max);
    Ok(vec![format!(
        "sample: {count} draws -> {path}; P(omega < -{radius}) = {tail:.5} (law {:.5}); KS = {ks:.5} (99% bound {:.5})",
        dist.cdf(-radius),
        1.628 / n.sqrt()
    )])
}

fn events(s: Settings, out: &Path) -> Result<Lines> {
    common(&s)?;
    let params = model(&s, 1.0, 1.0)?;
    let center: Vec<i64> = s.list("center", vec![10])?;
    let radius = s.get("radius", 1u32)?;
    let eps = s.get("eps", 0.1)?;
    let window: Option<Vec<f64>> = match s.optional::<String>("window")? {
        None => None,
        Some(w) => Some(
            w.split(',')
                .map(|x| {
                    x.trim()
                        .parse()
                        .map_err(|_| Error::Config(format!("events: key `window`: cannot read {w:?}")))
                })
                .collect::<Result<_>>()?,
        ),
    };
    let trials = s.get("trials", 10_000usize)?;
    let seed = s.get("seed", 0u64)?;
    s.finish()?;
    if center.len() != params.dim() {
        return Err(Error::Config(format!(
            "events: key `center` has {} coordinates for dimension {}",
            center.len(),
            params.dim()
        )));
    }
    let mut spec = EventSpec::new(Site::new(&center), radius, eps);
    if let Some(w) = window {
        if w.len() != 2 {
            return Err(Error::Config("events: key `window` needs two numbers `lo, hi`".into()));
        }
        spec = spec.with_window(w[0], w[1]);
    }
    let exact = event_probability_exact(&spec, &params)?;
    let mc = event_probability_mc(&spec, &params, seed, trials)?;
    let mut rows = vec![
        vec!["exact".into(), exact.to_string()],
        vec!["mc_estimate".into(), mc.estimate.to_string()],
        vec!["mc_halfwidth".into(), mc.half_width.to_string()],
    ];
    if spec.window.is_none() {
        rows.push(vec![
            "bound_c_half".into(),
            event_lower_bound_approx(&spec, &params, 0.5).to_string(),
        ]);
        rows.push(vec![
            "bound_product".into(),
            event_lower_bound_product(&spec, &params).to_string(),
        ]);
    }
    let path = write_table(out, "events", &["quantity", "value"], &rows)?;
    Ok(vec![format!(
        "events: exact {exact:.6}, monte carlo {:.6} ± {:.6} over {trials} trials -> {path}",
        mc.estimate, mc.half_width
    )])
}

fn spectrum(s: Settings, out: &Path) -> Result<Lines> {
    common(&s)?;
    let params = model(&s, 0.5, 1.0)?;
    let side = s.get("side", 40u32)?;
    let grid = Grid::new(s.get("grid", 4u32)?)?;
    let k = s.get("k", 6usize)?;
    let solver = s.get("solver", "lanczos".to_string())?;
    let tol = s.get("tol", 1e-10)?;
    let free = s.get("free", false)?;
    let export = s.get("export", false)?;
    let seed = s.get("seed", 0u64)?;
    s.finish()?;
    let bx = LatticeBox::centered(params.dim(), side)?;
    let op = if free {
        assemble_free(&bx, &grid)?
    } else {
        assemble(&realize_field(seed, &params, &bx)?, &bx, &grid)?
    };
    let res: SpectralResult = match solver.as_str() {
        "lanczos" => lanczos_smallest(&op, k, tol, seed)?,
        "dense" => dense_eig(&op, true)?,
        other => {
            return Err(Error::Config(format!(
                "spectrum: key `solver`: expected lanczos or dense, got {other:?}"
            )))
        }
    };
    let shown = res.eigenvalues.len().min(k);
    let rows: Vec<Vec<String>> = (0..shown)
        .map(|i| {
            vec![
                i.to_string(),
                res.eigenvalues[i].to_string(),
                res.residuals[i].to_string(),
            ]
        })
        .collect();
    let path = write_table(out, "spectrum", &["index", "eigenvalue", "residual"], &rows)?;
    let mut lines = vec![format!(
        "spectrum: {shown} lowest eigenvalues of a dimension-{} operator -> {path}; lowest {:.8}",
        op.dimension(),
        res.eigenvalues[0]
    )];
    if export {
        let p = out.join("operator.txt");
        let f = fs::File::create(&p).map_err(|e| Error::io(&p, e))?;
        op.export_triples(std::io::BufWriter::new(f))
            .map_err(|e| Error::io(&p, e))?;
        lines.push(format!("spectrum: operator triples -> {}", p.display()));
    }
    Ok(lines)
}

fn count(s: Settings, out: &Path) -> Result<Lines> {
    common(&s)?;
    let params = model(&s, 0.5, 1.0)?;
    let side = s.get("side", 20u32)?;
    let grid = Grid::new(s.get("grid", 8u32)?)?;
    let eps = s.get("eps", 0.1)?;
    let seed = s.get("seed", 0u64)?;
    s.finish()?;
    let bx = LatticeBox::centered(params.dim(), side)?;
    let field = realize_field(seed, &params, &bx)?;
    let b = counting_upper_bound(&field, &bx, &grid, eps)?;
    let path = write_table(
        out,
        "count",
        &["lhs", "rhs", "continuum_rhs"],
        &[vec![b.lhs.to_string(), b.rhs.to_string(), b.continuum_rhs.to_string()]],
    )?;
    Ok(vec![format!(
        "count: N(-{eps}) = {} <= {} (cell sum; continuum {}) -> {path}",
        b.lhs, b.rhs, b.continuum_rhs
    )])
}

fn localize(s: Settings, out: &Path) -> Result<Lines> {
    let cfg = experiment(&s)?;
    s.finish()?;
    let study = run_localization_study(&cfg)?;
    let extra = match study.exponential_fraction() {
        Some(f) => format!("; exponential fraction {f:.4}"),
        None => "; no eigenvalues below -eps".into(),
    };
    Ok(vec![saved_line("localize", &study, &cfg, out, extra)?])
}

fn green(s: Settings, out: &Path) -> Result<Lines> {
    common(&s)?;
    let params = model(&s, 2.0, 3.0)?;
    let sides: Vec<u32> = s.list("sides", vec![12, 18, 24, 30])?;
    let grid = Grid::new(s.get("grid", 8u32)?)?;
    let energy = s.get("energy", -1.0)?;
    let tol = s.get("tol", 1e-10)?;
    let free = s.get("free", true)?;
    let seed = s.get("seed", 0u64)?;
    s.finish()?;
    let mut rows = Vec::new();
    let mut data = Vec::new();
    for &side in &sides {
        let bx = LatticeBox::centered(params.dim(), side)?;
        let op = if free {
            assemble_free(&bx, &grid)?
        } else {
            assemble(&realize_field(seed, &params, &bx)?, &bx, &grid)?
        };
        let g = greens_boundary_norm(&op, energy, tol)?;
        data.push((f64::from(side), g.norm.ln()));
        rows.push(vec![
            side.to_string(),
            g.norm.to_string(),
            g.distance.to_string(),
            (g.norm <= 1.0 / g.distance).to_string(),
        ]);
    }
    let path = write_table(
        out,
        "green",
        &["L", "norm", "distance", "within_resolvent_bound"],
        &rows,
    )?;
    let slope = if data.len() >= 2 { linear_fit(&data).0 } else { f64::NAN };
    Ok(vec![format!(
        "green: log-norm slope per unit L {slope:.4} over {sides:?} -> {path}"
    )])
}

fn weyl(s: Settings, out: &Path) -> Result<Lines> {
    common(&s)?;
    let dim = s.get("dim", 1usize)?;
    let energy: f64 = s.get("energy", 0.0)?;
    let k: Vec<f64> = s.list("k", {
        let mut k = vec![0.0; dim];
        if let Some(k0) = k.first_mut() {
            *k0 = energy.max(0.0).sqrt();
        }
        k
    })?;
    let radii: Vec<f64> = s.list("radii", vec![4.0, 8.0, 16.0, 32.0])?;
    let grid = Grid::new(s.get("grid", 20u32)?)?;
    s.finish()?;
    if k.len() != dim {
        return Err(Error::Config(format!(
            "weyl: key `k` has {} components for dimension {dim}",
            k.len()
        )));
    }
    let mut rows = Vec::new();
    let mut data = Vec::new();
    for &r in &radii {
        let side = 2 * ((r + 1.0).ceil() as u32);
        let bx = LatticeBox::centered(dim, side)?;
        let ratio = weyl_residual(&WeylPacket::new(energy, &k, r)?, &bx, &grid, None)?;
        data.push((r.ln(), ratio.ln()));
        rows.push(vec![r.to_string(), ratio.to_string()]);
    }
    let path = write_table(out, "weyl", &["r", "ratio"], &rows)?;
    let slope = if data.len() >= 2 { linear_fit(&data).0 } else { f64::NAN };
    Ok(vec![format!(
        "weyl: log-log slope {slope:.4} over r = {radii:?} -> {path}"
    )])
}

fn well_curve(s: Settings, out: &Path) -> Result<Lines> {
    common(&s)?;
    let dim = s.get("dim", 1usize)?;
    let lambdas: Vec<f64> = s.list("lambdas", vec![-50.0, -20.0, -10.0, -5.0, -2.0, -0.5])?;
    let side = s.get("side", 40u32)?;
    let grid = Grid::new(s.get("grid", 20u32)?)?;
    s.finish()?;
    let bx = LatticeBox::centered(dim, side)?;
    let curve = single_well_ground_curve(&lambdas, &bx, &grid)?;
    let rows: Vec<Vec<String>> = curve
        .iter()
        .map(|p| {
            vec![
                p.depth.to_string(),
                p.energy.to_string(),
                p.occupation.to_string(),
                p.binds.to_string(),
            ]
        })
        .collect();
    let path = write_table(out, "well_curve", &["lambda", "energy", "occupation", "binds"], &rows)?;
    let binds = curve.iter().filter(|p| p.binds).count();
    Ok(vec![format!(
        "well-curve: {binds} of {} depths bind -> {path}",
        curve.len()
    )])
}

fn hf_check(s: Settings, out: &Path) -> Result<Lines> {
    common(&s)?;
    let dim = s.get("dim", 1usize)?;
    let lambda = s.get("lambda", -5.0)?;
    let dlambda = s.get("dlambda", 1e-3)?;
    let side = s.get("side", 40u32)?;
    let grid = Grid::new(s.get("grid", 20u32)?)?;
    s.finish()?;
    let bx = LatticeBox::centered(dim, side)?;
    let c = hellmann_feynman_check(lambda, dlambda, &bx, &grid)?;
    let path = write_table(
        out,
        "hf_check",
        &["lambda", "dlambda", "derivative", "occupation", "discrepancy"],
        &[vec![
            lambda.to_string(),
            dlambda.to_string(),
            c.derivative.to_string(),
            c.occupation.to_string(),
            c.discrepancy.to_string(),
        ]],
    )?;
    Ok(vec![format!(
        "hf-check: dE/dlambda {:.8} vs occupation {:.8}, relative discrepancy {:.2e} -> {path}",
        c.derivative, c.occupation, c.discrepancy
    )])
}

fn cook(s: Settings, out: &Path) -> Result<Lines> {
    common(&s)?;
    let params = model(&s, 2.0, 3.0)?;
    let m = s.get("m", 1.0)?;
    let radii: Vec<u64> = s.list("radii", vec![50, 100, 200, 400])?;
    let seed = s.get("seed", 0u64)?;
    s.finish()?;
    let rmax = *radii
        .last()
        .ok_or_else(|| Error::Config("cook: key `radii` is empty".into()))?;
    let bx = LatticeBox::centered(params.dim(), 2 * rmax as u32 + 2)?;
    let field = realize_field(seed, &params, &bx)?;
    let sums = cook_integral_probe(&field, m, &radii)?;
    let rows: Vec<Vec<String>> = radii
        .iter()
        .zip(&sums)
        .map(|(r, v)| vec![r.to_string(), v.to_string()])
        .collect();
    let path = write_table(out, "cook", &["radius", "partial_sum"], &rows)?;
    Ok(vec![format!(
        "cook: I({rmax}) = {:.6e} -> {path}",
        sums.last().unwrap()
    )])
}

fn phase_sweep(s: Settings, out: &Path) -> Result<Lines> {
    let cfg = experiment(&s)?;
    s.finish()?;
    let result = run_phase_sweep(&cfg)?;
    let mut lines = vec![saved_line("phase-sweep", &result, &cfg, out, String::new())?];
    for p in &result.points {
        lines.push(format!(
            "phase-sweep: alpha = {} delta = {} means = {:?} g = {:.4} -> {}",
            p.alpha, p.delta, p.means, p.growth, p.classification
        ));
    }
    Ok(lines)
}

fn wegner(s: Settings, out: &Path) -> Result<Lines> {
    let cfg = experiment(&s)?;
    s.finish()?;
    let table = run_wegner_probe(&cfg)?;
    let extra = format!(
        "; accepted {}; log-log slope {}",
        table.accepted,
        table.log_slope().map_or("undefined".into(), |x| format!("{x:.4}"))
    );
    Ok(vec![saved_line("wegner", &table, &cfg, out, extra)?])
}
