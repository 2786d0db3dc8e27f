use rayon::prelude::*;

use super::persist::{parse_cell, parse_table, Persist, RunManifest};
use super::ExperimentConfig;
use crate::analysis::{ipr, LocalizationReport};
use crate::disorder::realize_field;
use crate::error::{Error, Result};
use crate::operator::{assemble, AssembledOperator};
use crate::spectral::{inertia_count, lanczos_smallest, residual_norm, BandedLdlt};

/// One eigenfunction of one realization.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalizationRow {
    pub realization: usize,
    pub eigenvalue: f64,
    pub center: Vec<f64>,
    pub ipr: f64,
    pub decay_rate: f64,
    pub r2: f64,
}

impl LocalizationRow {
    pub fn is_exponential(&self) -> bool {
        self.r2 >= 0.9 && self.decay_rate > 0.05
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LocalizationStudy {
    pub rows: Vec<LocalizationRow>,
}

impl LocalizationStudy {
    /// Share of eigenfunctions meeting `R² ≥ 0.9` and `m > 0.05`; `None` when empty.
    pub fn exponential_fraction(&self) -> Option<f64> {
        if self.rows.is_empty() {
            return None;
        }
        let pass = self.rows.iter().filter(|r| r.is_exponential()).count();
        Some(pass as f64 / self.rows.len() as f64)
    }
}

/// A few steps of inverse iteration to push the eigenvector error below the
/// shell floor of the decay fit. Keeps the input if the residual gets worse.
fn polish(op: &AssembledOperator, lambda: f64, psi: &[f64]) -> Vec<f64> {
    let before = residual_norm(op, lambda, psi);
    let shift = lambda + 1e-9 * (1.0 + lambda.abs());
    let ldlt = BandedLdlt::factor(op, shift);
    let mut x = psi.to_vec();
    for _ in 0..2 {
        let y = ldlt.solve(&x);
        let n = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !n.is_finite() || n == 0.0 {
            return psi.to_vec();
        }
        x = y.into_iter().map(|v| v / n).collect();
    }
    if x.iter().zip(psi).map(|(a, b)| a * b).sum::<f64>() < 0.0 {
        x.iter_mut().for_each(|v| *v = -*v);
    }
    if residual_norm(op, lambda, &x) <= before {
        x
    } else {
        psi.to_vec()
    }
}

/// Reports for every eigenpair of a box operator below `-eps`, lowest first.
///
/// At most `dimension / 4` eigenpairs are computed. An eigenfunction whose
/// decay outruns the fit floor before enough shells are seen is kept with
/// `decay_rate = r2 = 0`, so it counts as a failed fit.
pub fn localize_operator(op: &AssembledOperator, eps: f64, tol: f64, seed: u64) -> Result<Vec<LocalizationReport>> {
    let points = op
        .points()
        .ok_or_else(|| Error::Precondition("localization needs an operator assembled on a box".into()))?;
    let n = op.dimension();
    let k = inertia_count(op, -eps)?.count.min(n / 4);
    if k == 0 {
        return Ok(Vec::new());
    }
    let spec = lanczos_smallest(op, k, tol, seed)?;
    let vectors = spec.eigenvectors.expect("lanczos returns vectors");
    let mut out = Vec::new();
    for (lambda, psi) in spec.eigenvalues.iter().zip(&vectors) {
        if *lambda >= -eps {
            continue;
        }
        let psi = polish(op, *lambda, psi);
        match LocalizationReport::from_eigenpair(*lambda, &psi, points) {
            Ok(rep) => out.push(rep),
            Err(Error::InsufficientRange { .. }) => {
                let ci = (0..psi.len()).fold(0, |b, i| if psi[i].abs() > psi[b].abs() { i } else { b });
                out.push(LocalizationReport {
                    eigenvalue: *lambda,
                    center: points.coords(ci)[..points.dim()].to_vec(),
                    ipr: ipr(&psi)?,
                    decay_rate: 0.0,
                    r2: 0.0,
                    fit_range: (0, 0),
                });
            }
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

fn study_realization(config: &ExperimentConfig, r: usize) -> Result<Vec<LocalizationRow>> {
    let params = config.single_point("localization study")?;
    let bx = config.largest_box()?;
    let seed = config.realization_seed(r);
    let field = realize_field(seed, &params, &bx)?;
    let op = assemble(&field, &bx, &config.grid()?)?;
    Ok(localize_operator(&op, config.eps, config.tol, seed ^ 0x10ca1)?
        .into_iter()
        .map(|rep| LocalizationRow {
            realization: r,
            eigenvalue: rep.eigenvalue,
            center: rep.center,
            ipr: rep.ipr,
            decay_rate: rep.decay_rate,
            r2: rep.r2,
        })
        .collect())
}

/// Lowest eigenpairs below `-ε` at the largest box side, per realization.
pub fn run_localization_study(config: &ExperimentConfig) -> Result<LocalizationStudy> {
    config.validate()?;
    config.single_point("localization study")?;
    let pool = config.pool()?;
    let chunks: Vec<Vec<LocalizationRow>> = pool.install(|| {
        (0..config.realizations)
            .into_par_iter()
            .map(|r| study_realization(config, r))
            .collect::<Result<_>>()
    })?;
    Ok(LocalizationStudy {
        rows: chunks.into_iter().flatten().collect(),
    })
}

impl Persist for LocalizationStudy {
    const KIND: &'static str = "localization";
    const COLUMNS: &'static [&'static str] = &["realization", "eigenvalue", "center", "ipr", "decay_rate", "r2"];

    fn rows(&self) -> Vec<Vec<String>> {
        self.rows
            .iter()
            .map(|r| {
                vec![
                    r.realization.to_string(),
                    r.eigenvalue.to_string(),
                    r.center.iter().map(f64::to_string).collect::<Vec<_>>().join(";"),
                    r.ipr.to_string(),
                    r.decay_rate.to_string(),
                    r.r2.to_string(),
                ]
            })
            .collect()
    }

    fn from_table(file: &str, table: &str, _manifest: &RunManifest) -> Result<Self> {
        let raw = parse_table(file, table, Self::COLUMNS)?;
        let mut rows = Vec::with_capacity(raw.len());
        for (i, c) in raw.iter().enumerate() {
            let center = c[2]
                .split(';')
                .map(|x| parse_cell(file, i + 1, "center", x))
                .collect::<Result<Vec<f64>>>()?;
            rows.push(LocalizationRow {
                realization: parse_cell(file, i + 1, Self::COLUMNS[0], &c[0])?,
                eigenvalue: parse_cell(file, i + 1, Self::COLUMNS[1], &c[1])?,
                center,
                ipr: parse_cell(file, i + 1, Self::COLUMNS[3], &c[3])?,
                decay_rate: parse_cell(file, i + 1, Self::COLUMNS[4], &c[4])?,
                r2: parse_cell(file, i + 1, Self::COLUMNS[5], &c[5])?,
            });
        }
        Ok(LocalizationStudy { rows })
    }
}
