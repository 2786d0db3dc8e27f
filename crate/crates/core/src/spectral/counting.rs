use std::f64::consts::PI;

use super::inertia_count;
use crate::disorder::PotentialField;
use crate::error::{Error, Result};
use crate::operator::{assemble, assemble_cell_neumann, Grid, LatticeBox};

/// Closeness to a Neumann level below which a threshold is considered degenerate.
const DEGENERACY_GAP: f64 = 1e-9;

/// `#{k ∈ Z_{≥0}^d : π²‖k‖² + v < -ε}`: the Neumann levels of `-Δ + v` on the
/// unit cube lying below `-ε`.
pub fn neumann_cell_count_closed_form(v: f64, eps: f64, dim: usize) -> Result<usize> {
    if !(eps > 0.0) {
        return Err(Error::Domain(format!("eps must be positive, got {eps}")));
    }
    if !(1..=3).contains(&dim) {
        return Err(Error::Domain(format!("dimension must be 1, 2 or 3, got {dim}")));
    }
    let budget = -eps - v;
    let kmax = if budget > 0.0 {
        (budget.sqrt() / PI) as i64 + 1
    } else {
        0
    };
    let span = |a: usize| if a < dim { 0..=kmax } else { 0..=0 };
    let mut count = 0;
    for k2 in span(2) {
        for k1 in span(1) {
            for k0 in span(0) {
                let level = PI * PI * (k0 * k0 + k1 * k1 + k2 * k2) as f64;
                let gap = level + v + eps;
                if gap.abs() < DEGENERACY_GAP {
                    return Err(Error::ThresholdDegeneracy { v, eps, gap: gap.abs() });
                }
                if gap < 0.0 {
                    count += 1;
                }
            }
        }
    }
    Ok(count)
}

/// Both sides of `N(-ε) ≤ Σ_cells N_cell(-ε)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CountingBound {
    /// `N(-ε)` of the Dirichlet box operator.
    pub lhs: usize,
    /// Sum of the discrete Neumann cell counts.
    pub rhs: usize,
    /// Sum of the continuum closed-form cell counts, for comparison.
    pub continuum_rhs: usize,
}

impl CountingBound {
    pub fn holds(&self) -> bool {
        self.lhs <= self.rhs
    }
}

pub fn counting_upper_bound(field: &PotentialField, bx: &LatticeBox, grid: &Grid, eps: f64) -> Result<CountingBound> {
    if !(eps > 0.0) {
        return Err(Error::Domain(format!("eps must be positive, got {eps}")));
    }
    let op = assemble(field, bx, grid)?;
    let lhs = inertia_count(&op, -eps)?.count;
    let dim = bx.dim();
    let mut rhs = 0;
    let mut continuum_rhs = 0;
    for n in bx.cells() {
        let v = field.value(&n).expect("assemble checked coverage");
        continuum_rhs += neumann_cell_count_closed_form(v, eps, dim)?;
        // graph Laplacian is positive semidefinite: no level below -eps when v >= -eps.
        // Cells cut by the wall hold fewer points per axis; their path-graph levels
        // dominate those of the full block, so the full block still bounds them.
        if v < -eps {
            rhs += inertia_count(&assemble_cell_neumann(v, dim, grid)?, -eps)?.count;
        }
    }
    Ok(CountingBound {
        lhs,
        rhs,
        continuum_rhs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_examples() {
        assert_eq!(neumann_cell_count_closed_form(-10.0, 0.1, 1).unwrap(), 2);
        assert_eq!(neumann_cell_count_closed_form(5.0, 0.1, 1).unwrap(), 0);
        assert_eq!(neumann_cell_count_closed_form(5.0, 0.1, 3).unwrap(), 0);
        assert_eq!(neumann_cell_count_closed_form(-50.0, 0.5, 1).unwrap(), 3);
    }

    #[test]
    fn closed_form_counts_degenerate_levels_in_higher_dimension() {
        // levels 0, π² (x2), 2π² (x1) below 25 in d = 2
        assert_eq!(neumann_cell_count_closed_form(-25.0, 0.5, 2).unwrap(), 4);
    }

    #[test]
    fn threshold_degeneracy_is_reported() {
        let v = -PI * PI - 0.1;
        assert!(matches!(
            neumann_cell_count_closed_form(v, 0.1, 1),
            Err(Error::ThresholdDegeneracy { .. })
        ));
    }
}
