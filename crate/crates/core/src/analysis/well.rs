use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::operator::{assemble_single_well, AssembledOperator, Grid, LatticeBox};
use crate::spectral::lanczos_smallest;

/// Lanczos tolerance for single-well ground states.
pub const WELL_TOL: f64 = 1e-12;
const WELL_SEED: u64 = 0x3e11;

/// Ground state of `-Δ + λχ_[0,1)^d` on a box.
#[derive(Debug, Clone, PartialEq)]
pub struct WellCurvePoint {
    pub depth: f64,
    pub energy: f64,
    pub ground_state: Vec<f64>,
    /// `⟨φ, χ φ⟩`, the ground-state weight inside the well.
    pub occupation: f64,
    /// True when `λ < E < 0`, i.e. the well carries a bound state on this grid.
    pub binds: bool,
}

fn well_mask(op: &AssembledOperator) -> Vec<bool> {
    let pts = op.points().expect("single-well assembly carries its points");
    let m = i64::from(pts.points_per_unit());
    (0..pts.len())
        .map(|i| {
            let p = pts.numerators(i);
            (0..pts.dim()).all(|a| (0..m).contains(&p[a]))
        })
        .collect()
}

fn occupation(mask: &[bool], psi: &[f64]) -> f64 {
    psi.iter().zip(mask).filter(|(_, &w)| w).map(|(x, _)| x * x).sum()
}

fn ground_point(lambda: f64, bx: &LatticeBox, grid: &Grid) -> Result<WellCurvePoint> {
    if !(lambda < 0.0) {
        return Err(Error::Domain(format!("well depth must be negative, got {lambda}")));
    }
    let op = assemble_single_well(lambda, bx, grid)?;
    let res = lanczos_smallest(&op, 1, WELL_TOL, WELL_SEED)?;
    let energy = res.eigenvalues[0];
    let ground_state = res.eigenvectors.expect("lanczos returns vectors").swap_remove(0);
    let occupation = occupation(&well_mask(&op), &ground_state);
    Ok(WellCurvePoint {
        depth: lambda,
        energy,
        ground_state,
        occupation,
        binds: lambda < energy && energy < 0.0,
    })
}

/// Ground energies along a ladder of well depths, in input order.
pub fn single_well_ground_curve(lambdas: &[f64], bx: &LatticeBox, grid: &Grid) -> Result<Vec<WellCurvePoint>> {
    if let Some(l) = lambdas.iter().find(|l| !(**l < 0.0)) {
        return Err(Error::Domain(format!("well depth must be negative, got {l}")));
    }
    lambdas.par_iter().map(|&l| ground_point(l, bx, grid)).collect()
}

/// Central-difference derivative of `E_λ` against the occupation at `λ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HfCheck {
    pub derivative: f64,
    pub occupation: f64,
    /// `|derivative - occupation| / occupation`.
    pub discrepancy: f64,
}

pub fn hellmann_feynman_check(lambda: f64, dlambda: f64, bx: &LatticeBox, grid: &Grid) -> Result<HfCheck> {
    if !(dlambda > 0.0) {
        return Err(Error::Domain(format!("step must be positive, got {dlambda}")));
    }
    if !(lambda + dlambda < 0.0) {
        return Err(Error::Domain(format!(
            "lambda ± dlambda must stay negative, got {lambda} + {dlambda}"
        )));
    }
    let op = assemble_single_well(lambda, bx, grid)?;
    let pair = lanczos_smallest(&op, 2, WELL_TOL, WELL_SEED)?;
    let gap = pair.eigenvalues[1] - pair.eigenvalues[0];
    let floor = 100.0 * WELL_TOL * op.norm_inf();
    if gap < floor {
        return Err(Error::Precondition(format!(
            "ground state is degenerate: gap {gap:e} below {floor:e}"
        )));
    }
    let psi = &pair.eigenvectors.as_ref().expect("lanczos returns vectors")[0];
    let occ = occupation(&well_mask(&op), psi);
    let up = ground_point(lambda + dlambda, bx, grid)?.energy;
    let down = ground_point(lambda - dlambda, bx, grid)?.energy;
    let derivative = (up - down) / (2.0 * dlambda);
    Ok(HfCheck {
        derivative,
        occupation: occ,
        discrepancy: (derivative - occ).abs() / occ,
    })
}
