//! Ensemble drivers and result persistence.
//!
//! Every realization `r` uses the field seed `derive_seed(seed, r)`, shared by
//! all box sides and all `(α, δ)` points, so one realization is the same
//! disorder observed in growing boxes. Realizations run on a private thread
//! pool of `workers` threads and are merged in index order.

mod localization;
mod persist;
mod phase;
mod wegner;

pub use localization::{localize_operator, run_localization_study, LocalizationRow, LocalizationStudy};
pub use persist::{load_run, save_run, Persist, RunManifest, SavedRun, MANIFEST_SUFFIX, TABLE_SUFFIX};
pub use phase::{classify, growth_ratio, run_phase_sweep, Classification, PhaseDiagramResult, PhasePoint, PhaseRow};
pub use wegner::{run_wegner_probe, WegnerRow, WegnerTable};

use crate::disorder::{derive_seed, ModelParams};
use crate::error::{Error, Result};
use crate::operator::{Grid, LatticeBox};

/// Parameters shared by the ensemble drivers.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub dim: usize,
    pub alphas: Vec<f64>,
    pub deltas: Vec<f64>,
    /// Grid points per unit length `M`.
    pub grid: u32,
    /// Ascending even box sides.
    pub ladder: Vec<u32>,
    /// Ensemble size `K`.
    pub realizations: usize,
    pub seed: u64,
    /// Counting threshold: eigenvalues below `-eps` are counted.
    pub eps: f64,
    pub etas: Vec<f64>,
    /// Target energy of the Wegner probe.
    pub energy: f64,
    /// Conditioning exponent `a` in `|V(n)| < L^a`.
    pub wegner_exponent: f64,
    pub tau_grow: f64,
    pub tau_sat: f64,
    /// Solver tolerance (Lanczos residuals, spectral distance).
    pub tol: f64,
    /// Worker threads; does not affect results.
    pub workers: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            dim: 1,
            alphas: vec![0.5],
            deltas: vec![1.0],
            grid: 4,
            ladder: vec![100, 400],
            realizations: 200,
            seed: 0,
            eps: 0.1,
            // quarter-decade steps from 1e-3 to 1e-1
            etas: (0..9).map(|i| 1e-3 * 10f64.powf(f64::from(i) / 4.0)).collect(),
            energy: -0.5,
            wegner_exponent: 1.0,
            tau_grow: 1.5,
            tau_sat: 1.2,
            tol: 1e-10,
            workers: std::thread::available_parallelism().map_or(1, |n| n.get()),
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if !(1..=3).contains(&self.dim) {
            return bad(format!("dim must be 1, 2 or 3, got {}", self.dim));
        }
        if self.alphas.is_empty() || self.alphas.iter().any(|a| !(*a >= 0.0)) {
            return bad("alphas must be a nonempty list of nonnegative numbers".into());
        }
        if self.deltas.is_empty() || self.deltas.iter().any(|d| !(*d > 0.0)) {
            return bad("deltas must be a nonempty list of positive numbers".into());
        }
        if self.grid == 0 {
            return bad("grid must be at least 1".into());
        }
        if self.ladder.is_empty() || self.ladder.iter().any(|l| *l < 2 || l % 2 == 1) {
            return bad(format!("ladder must hold even sides >= 2, got {:?}", self.ladder));
        }
        if self.ladder.windows(2).any(|w| w[0] >= w[1]) {
            return bad(format!("ladder must be strictly ascending, got {:?}", self.ladder));
        }
        if self.realizations == 0 {
            return bad("realizations must be at least 1".into());
        }
        if !(self.eps > 0.0) {
            return bad(format!("eps must be positive, got {}", self.eps));
        }
        if self.etas.is_empty() || self.etas.iter().any(|e| !(*e > 0.0)) || self.etas.windows(2).any(|w| w[0] >= w[1]) {
            return bad("etas must be a strictly ascending list of positive numbers".into());
        }
        if !(self.tau_sat > 0.0 && self.tau_sat <= self.tau_grow) {
            return bad(format!(
                "need 0 < tau_sat <= tau_grow, got {} and {}",
                self.tau_sat, self.tau_grow
            ));
        }
        if !(self.tol > 0.0 && self.tol < 1e-2) {
            return bad(format!("tol must lie in (0, 1e-2), got {}", self.tol));
        }
        if self.workers == 0 {
            return bad("workers must be at least 1".into());
        }
        Ok(())
    }

    /// Key/value echo of every setting that influences results.
    pub fn entries(&self) -> Vec<(String, String)> {
        let list = |v: &[f64]| v.iter().map(f64::to_string).collect::<Vec<_>>().join(", ");
        vec![
            ("alphas".into(), list(&self.alphas)),
            ("deltas".into(), list(&self.deltas)),
            ("dim".into(), self.dim.to_string()),
            ("energy".into(), self.energy.to_string()),
            ("eps".into(), self.eps.to_string()),
            ("etas".into(), list(&self.etas)),
            ("grid".into(), self.grid.to_string()),
            (
                "ladder".into(),
                self.ladder.iter().map(u32::to_string).collect::<Vec<_>>().join(", "),
            ),
            ("realizations".into(), self.realizations.to_string()),
            ("seed".into(), self.seed.to_string()),
            ("tau_grow".into(), self.tau_grow.to_string()),
            ("tau_sat".into(), self.tau_sat.to_string()),
            ("tol".into(), self.tol.to_string()),
            ("wegner_exponent".into(), self.wegner_exponent.to_string()),
        ]
    }

    pub fn realization_seed(&self, r: usize) -> u64 {
        derive_seed(self.seed, r as u64)
    }

    pub fn seeds(&self) -> Vec<u64> {
        (0..self.realizations).map(|r| self.realization_seed(r)).collect()
    }

    pub(crate) fn grid(&self) -> Result<Grid> {
        Grid::new(self.grid)
    }

    pub(crate) fn largest_box(&self) -> Result<LatticeBox> {
        LatticeBox::centered(self.dim, *self.ladder.last().expect("validated"))
    }

    /// The single `(α, δ)` point required by the localization and Wegner drivers.
    pub(crate) fn single_point(&self, driver: &str) -> Result<ModelParams> {
        if self.alphas.len() != 1 || self.deltas.len() != 1 {
            return Err(Error::Config(format!(
                "{driver} runs at one (alpha, delta) point; got {} alphas and {} deltas",
                self.alphas.len(),
                self.deltas.len()
            )));
        }
        ModelParams::new(self.dim, self.alphas[0], self.deltas[0])
    }

    pub(crate) fn pool(&self) -> Result<rayon::ThreadPool> {
        rayon::ThreadPoolBuilder::new()
            .num_threads(self.workers)
            .build()
            .map_err(|e| Error::Config(format!("cannot start {} workers: {e}", self.workers)))
    }

    /// Manifest skeleton: config echo, version, seeds and solver tolerances.
    pub fn manifest(&self, kind: &str) -> RunManifest {
        let mut m = RunManifest::new();
        for (k, v) in self.entries() {
            m.insert(format!("config.{k}"), v);
        }
        m.insert("kind", kind);
        m.insert("version", env!("CARGO_PKG_VERSION"));
        m.insert(
            "seeds",
            self.seeds().iter().map(u64::to_string).collect::<Vec<_>>().join(", "),
        );
        m.insert("solver.pivot_rel", crate::spectral::PIVOT_REL.to_string());
        m.insert("solver.tol", self.tol.to_string());
        m
    }
}
