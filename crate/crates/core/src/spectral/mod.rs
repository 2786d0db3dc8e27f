//! Eigenvalue machinery for assembled operators.
//!
//! * [`dense_eig`]: full spectrum oracle (in-repo tridiagonalization + QL).
//! * [`lanczos_smallest`]: extremal eigenpairs for operators past the dense guard.
//! * [`inertia_count`]: `N(E) = #{λ < E}` from a banded LDLᵀ factorization.
//! * [`spectral_distance`], [`greens_boundary_norm`]: resolvent probes.
//! * [`neumann_cell_count_closed_form`], [`counting_upper_bound`]: per-cell
//!   Neumann decoupling bound on `N(-ε)`.

mod counting;
pub mod dense;
mod green;
mod inertia;
pub mod krylov;
mod lanczos;

pub use counting::{counting_upper_bound, neumann_cell_count_closed_form, CountingBound};
pub use green::{greens_boundary_norm, spectral_distance, GreenEstimate};
pub use inertia::{inertia_count, inertia_count_with_guard, BandedLdlt, MAX_JITTER_RETRIES, PIVOT_REL};
pub use lanczos::{lanczos_smallest, lanczos_smallest_with, LanczosOptions};

use crate::error::{Error, Result};
use crate::operator::AssembledOperator;

/// Default dimension limit for dense eigendecompositions.
pub const DENSE_GUARD: usize = 4000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverTag {
    Dense,
    Lanczos,
}

/// Eigenvalues (ascending), optional unit eigenvectors, and their residuals.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralResult {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Option<Vec<Vec<f64>>>,
    pub solver: SolverTag,
    /// `‖Hψ - λψ‖₂` per returned pair; empty when no vectors were computed.
    pub residuals: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CountMethod {
    Inertia,
    Dense,
}

/// `N(E)` together with how it was obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CountingResult {
    pub shift: f64,
    pub count: usize,
    pub method: CountMethod,
    /// Shift perturbation applied to avoid a near-zero pivot (0 if none).
    pub jitter: f64,
}

pub fn dense_eig(op: &AssembledOperator, want_vectors: bool) -> Result<SpectralResult> {
    dense_eig_with_guard(op, want_vectors, DENSE_GUARD)
}

pub fn dense_eig_with_guard(op: &AssembledOperator, want_vectors: bool, guard: usize) -> Result<SpectralResult> {
    let n = op.dimension();
    if n > guard {
        return Err(Error::Size {
            what: "dense eigensolver dimension",
            requested: n,
            limit: guard,
        });
    }
    let (eigenvalues, z) = dense::symmetric_eigen(&op.to_dense(), want_vectors)?;
    let eigenvectors: Option<Vec<Vec<f64>>> = z.map(|z| (0..n).map(|k| (0..n).map(|i| z[i][k]).collect()).collect());
    let residuals = match &eigenvectors {
        Some(vs) => vs
            .iter()
            .zip(&eigenvalues)
            .map(|(v, &l)| residual_norm(op, l, v))
            .collect(),
        None => Vec::new(),
    };
    Ok(SpectralResult {
        eigenvalues,
        eigenvectors,
        solver: SolverTag::Dense,
        residuals,
    })
}

/// `‖H v - λ v‖₂`.
pub fn residual_norm(op: &AssembledOperator, lambda: f64, v: &[f64]) -> f64 {
    let mut hv = vec![0.0; v.len()];
    op.apply_into(v, &mut hv);
    hv.iter()
        .zip(v)
        .map(|(a, b)| (a - lambda * b).powi(2))
        .sum::<f64>()
        .sqrt()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub(crate) fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}
