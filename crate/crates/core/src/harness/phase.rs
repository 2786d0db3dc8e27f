use std::fmt;

use rayon::prelude::*;

use super::persist::{manifest_number, parse_cell, parse_table, Persist, RunManifest};
use super::ExperimentConfig;
use crate::disorder::{realize_field, ModelParams};
use crate::error::{Error, Result};
use crate::operator::{assemble, LatticeBox};
use crate::spectral::inertia_count;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Classification {
    Growing,
    Saturating,
    Indeterminate,
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Classification::Growing => "growing",
            Classification::Saturating => "saturating",
            Classification::Indeterminate => "indeterminate",
        })
    }
}

/// `mean(L_max) / mean(L_min)`; infinite when only the largest box has
/// eigenvalues below the threshold, and 1 when neither has.
pub fn growth_ratio(means: &[f64]) -> f64 {
    let (first, last) = (means[0], means[means.len() - 1]);
    if first > 0.0 {
        last / first
    } else if last > 0.0 {
        f64::INFINITY
    } else {
        1.0
    }
}

pub fn classify(g: f64, tau_grow: f64, tau_sat: f64) -> Classification {
    if g >= tau_grow {
        Classification::Growing
    } else if g <= tau_sat {
        Classification::Saturating
    } else {
        Classification::Indeterminate
    }
}

/// One line of the phase-sweep table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseRow {
    pub alpha: f64,
    pub delta: f64,
    pub side: u32,
    pub realization: usize,
    pub seed: u64,
    pub count: usize,
    pub eps: f64,
}

/// Aggregates of `N(-ε)` at one `(α, δ)` point.
#[derive(Debug, Clone, PartialEq)]
pub struct PhasePoint {
    pub alpha: f64,
    pub delta: f64,
    pub means: Vec<f64>,
    pub variances: Vec<f64>,
    pub growth: f64,
    pub classification: Classification,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseDiagramResult {
    pub ladder: Vec<u32>,
    pub tau_grow: f64,
    pub tau_sat: f64,
    pub points: Vec<PhasePoint>,
    pub rows: Vec<PhaseRow>,
}

impl PhaseDiagramResult {
    /// Aggregates and classifies raw rows; rows of a point keep their order.
    pub fn from_rows(rows: Vec<PhaseRow>, ladder: Vec<u32>, tau_grow: f64, tau_sat: f64) -> Result<Self> {
        let mut keys: Vec<(f64, f64)> = Vec::new();
        for r in &rows {
            if !keys.iter().any(|k| k.0 == r.alpha && k.1 == r.delta) {
                keys.push((r.alpha, r.delta));
            }
        }
        let mut points = Vec::with_capacity(keys.len());
        for (alpha, delta) in keys {
            let mut means = Vec::with_capacity(ladder.len());
            let mut variances = Vec::with_capacity(ladder.len());
            for &side in &ladder {
                let xs: Vec<f64> = rows
                    .iter()
                    .filter(|r| r.alpha == alpha && r.delta == delta && r.side == side)
                    .map(|r| r.count as f64)
                    .collect();
                if xs.is_empty() {
                    return Err(Error::Integrity(format!(
                        "no rows for alpha = {alpha}, delta = {delta}, L = {side}"
                    )));
                }
                let n = xs.len() as f64;
                let mean = xs.iter().sum::<f64>() / n;
                let var = if xs.len() > 1 {
                    xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
                } else {
                    0.0
                };
                means.push(mean);
                variances.push(var);
            }
            let growth = growth_ratio(&means);
            points.push(PhasePoint {
                alpha,
                delta,
                classification: classify(growth, tau_grow, tau_sat),
                means,
                variances,
                growth,
            });
        }
        Ok(PhaseDiagramResult {
            ladder,
            tau_grow,
            tau_sat,
            points,
            rows,
        })
    }

    pub fn point(&self, alpha: f64, delta: f64) -> Option<&PhasePoint> {
        self.points.iter().find(|p| p.alpha == alpha && p.delta == delta)
    }
}

/// Counts `N(-ε)` at every box side for every realization and `(α, δ)` point.
pub fn run_phase_sweep(config: &ExperimentConfig) -> Result<PhaseDiagramResult> {
    config.validate()?;
    let grid = config.grid()?;
    let outer = config.largest_box()?;
    let boxes: Vec<LatticeBox> = config
        .ladder
        .iter()
        .map(|&l| LatticeBox::centered(config.dim, l))
        .collect::<Result<_>>()?;
    let mut params = Vec::new();
    for &alpha in &config.alphas {
        for &delta in &config.deltas {
            params.push(ModelParams::new(config.dim, alpha, delta)?);
        }
    }
    let pool = config.pool()?;
    let per_realization = |r: usize| -> Result<Vec<PhaseRow>> {
        let seed = config.realization_seed(r);
        let mut rows = Vec::with_capacity(params.len() * boxes.len());
        for p in &params {
            let field = realize_field(seed, p, &outer)?;
            for bx in &boxes {
                let count = inertia_count(&assemble(&field, bx, &grid)?, -config.eps)?.count;
                rows.push(PhaseRow {
                    alpha: p.alpha(),
                    delta: p.delta(),
                    side: bx.side(),
                    realization: r,
                    seed,
                    count,
                    eps: config.eps,
                });
            }
        }
        Ok(rows)
    };
    let chunks: Vec<Vec<PhaseRow>> = pool.install(|| {
        (0..config.realizations)
            .into_par_iter()
            .map(per_realization)
            .collect::<Result<_>>()
    })?;
    // canonical order: point, realization, side
    let mut rows = Vec::with_capacity(chunks.len() * params.len() * boxes.len());
    for (pi, _) in params.iter().enumerate() {
        for chunk in &chunks {
            rows.extend_from_slice(&chunk[pi * boxes.len()..(pi + 1) * boxes.len()]);
        }
    }
    PhaseDiagramResult::from_rows(rows, config.ladder.clone(), config.tau_grow, config.tau_sat)
}

impl Persist for PhaseDiagramResult {
    const KIND: &'static str = "phase";
    const COLUMNS: &'static [&'static str] = &["alpha", "delta", "L", "realization", "seed", "count", "eps"];

    fn rows(&self) -> Vec<Vec<String>> {
        self.rows
            .iter()
            .map(|r| {
                vec![
                    r.alpha.to_string(),
                    r.delta.to_string(),
                    r.side.to_string(),
                    r.realization.to_string(),
                    r.seed.to_string(),
                    r.count.to_string(),
                    r.eps.to_string(),
                ]
            })
            .collect()
    }

    fn from_table(file: &str, table: &str, manifest: &RunManifest) -> Result<Self> {
        let raw = parse_table(file, table, Self::COLUMNS)?;
        let mut rows = Vec::with_capacity(raw.len());
        for (i, cells) in raw.iter().enumerate() {
            rows.push(PhaseRow {
                alpha: parse_cell(file, i + 1, Self::COLUMNS[0], &cells[0])?,
                delta: parse_cell(file, i + 1, Self::COLUMNS[1], &cells[1])?,
                side: parse_cell(file, i + 1, Self::COLUMNS[2], &cells[2])?,
                realization: parse_cell(file, i + 1, Self::COLUMNS[3], &cells[3])?,
                seed: parse_cell(file, i + 1, Self::COLUMNS[4], &cells[4])?,
                count: parse_cell(file, i + 1, Self::COLUMNS[5], &cells[5])?,
                eps: parse_cell(file, i + 1, Self::COLUMNS[6], &cells[6])?,
            });
        }
        let mut ladder: Vec<u32> = rows.iter().map(|r| r.side).collect();
        ladder.sort_unstable();
        ladder.dedup();
        if ladder.is_empty() {
            return Err(Error::Integrity(format!("{file} holds no rows")));
        }
        PhaseDiagramResult::from_rows(
            rows,
            ladder,
            manifest_number(manifest, "config.tau_grow")?,
            manifest_number(manifest, "config.tau_sat")?,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classification_rule() {
        assert_eq!(growth_ratio(&[10.0, 20.0, 40.0]), 4.0);
        assert_eq!(classify(4.0, 1.5, 1.2), Classification::Growing);
        assert_eq!(
            classify(growth_ratio(&[5.0, 5.0, 5.0]), 1.5, 1.2),
            Classification::Saturating
        );
        assert_eq!(classify(1.3, 1.5, 1.2), Classification::Indeterminate);
        assert_eq!(growth_ratio(&[0.0, 0.0]), 1.0);
        assert!(growth_ratio(&[0.0, 1.0]).is_infinite());
    }
}
