use rayon::prelude::*;

use super::persist::{manifest_number, parse_cell, parse_table, Persist, RunManifest};
use super::ExperimentConfig;
use crate::analysis::linear_fit;
use crate::disorder::realize_field;
use crate::error::{Error, Result};
use crate::operator::assemble;
use crate::spectral::spectral_distance;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WegnerRow {
    pub eta: f64,
    pub frequency: f64,
    /// Binomial 3σ half-width.
    pub halfwidth: f64,
    pub discarded: usize,
}

/// Empirical `P(dist(σ(H_Λ), E) < η | Ω_L)` over the η ladder.
#[derive(Debug, Clone, PartialEq)]
pub struct WegnerTable {
    pub rows: Vec<WegnerRow>,
    /// Realizations inside the conditioning event.
    pub accepted: usize,
}

impl WegnerTable {
    /// Least-squares slope of `log frequency` against `log η` over the nonzero
    /// frequencies; `None` with fewer than two of them.
    pub fn log_slope(&self) -> Option<f64> {
        let data: Vec<(f64, f64)> = self
            .rows
            .iter()
            .filter(|r| r.frequency > 0.0)
            .map(|r| (r.eta.ln(), r.frequency.ln()))
            .collect();
        (data.len() >= 2).then(|| linear_fit(&data).0)
    }

    pub fn is_monotone(&self) -> bool {
        self.rows.windows(2).all(|w| w[0].frequency <= w[1].frequency)
    }
}

/// Spectral distances of the accepted realizations at the largest box side.
pub fn run_wegner_probe(config: &ExperimentConfig) -> Result<WegnerTable> {
    config.validate()?;
    let params = config.single_point("Wegner probe")?;
    let d = config.dim as f64;
    let floor = d / params.delta() - params.alpha();
    if !(config.wegner_exponent > floor) {
        return Err(Error::Config(format!(
            "wegner_exponent must exceed d/delta - alpha = {floor}, got {}",
            config.wegner_exponent
        )));
    }
    if !(config.energy < 0.0) {
        return Err(Error::Config(format!("energy must be negative, got {}", config.energy)));
    }
    let bx = config.largest_box()?;
    let grid = config.grid()?;
    let cap = f64::from(bx.side()).powf(config.wegner_exponent);
    let tol = (config.etas[0] * 1e-3).max(config.tol);
    let pool = config.pool()?;
    let distances: Vec<Option<f64>> = pool.install(|| {
        (0..config.realizations)
            .into_par_iter()
            .map(|r| -> Result<Option<f64>> {
                let field = realize_field(config.realization_seed(r), &params, &bx)?;
                if field.max_abs() >= cap {
                    return Ok(None);
                }
                let op = assemble(&field, &bx, &grid)?;
                spectral_distance(&op, config.energy, tol).map(Some)
            })
            .collect::<Result<_>>()
    })?;
    let accepted: Vec<f64> = distances.iter().flatten().copied().collect();
    let discarded = distances.len() - accepted.len();
    if accepted.is_empty() {
        return Err(Error::Conditioning {
            trials: distances.len(),
        });
    }
    let n = accepted.len() as f64;
    let rows = config
        .etas
        .iter()
        .map(|&eta| {
            let p = accepted.iter().filter(|&&x| x < eta).count() as f64 / n;
            WegnerRow {
                eta,
                frequency: p,
                halfwidth: 3.0 * (p * (1.0 - p) / n).sqrt(),
                discarded,
            }
        })
        .collect();
    Ok(WegnerTable {
        rows,
        accepted: accepted.len(),
    })
}

impl Persist for WegnerTable {
    const KIND: &'static str = "wegner";
    const COLUMNS: &'static [&'static str] = &["eta", "frequency", "halfwidth", "discarded"];

    fn rows(&self) -> Vec<Vec<String>> {
        self.rows
            .iter()
            .map(|r| {
                vec![
                    r.eta.to_string(),
                    r.frequency.to_string(),
                    r.halfwidth.to_string(),
                    r.discarded.to_string(),
                ]
            })
            .collect()
    }

    fn annotate(&self, manifest: &mut RunManifest) {
        manifest.insert("wegner.accepted", self.accepted.to_string());
    }

    fn from_table(file: &str, table: &str, manifest: &RunManifest) -> Result<Self> {
        let raw = parse_table(file, table, Self::COLUMNS)?;
        let mut rows = Vec::with_capacity(raw.len());
        for (i, c) in raw.iter().enumerate() {
            rows.push(WegnerRow {
                eta: parse_cell(file, i + 1, Self::COLUMNS[0], &c[0])?,
                frequency: parse_cell(file, i + 1, Self::COLUMNS[1], &c[1])?,
                halfwidth: parse_cell(file, i + 1, Self::COLUMNS[2], &c[2])?,
                discarded: parse_cell(file, i + 1, Self::COLUMNS[3], &c[3])?,
            });
        }
        Ok(WegnerTable {
            rows,
            accepted: manifest_number(manifest, "wegner.accepted")?,
        })
    }
}
