//! Thick-restart Lanczos with full reorthogonalization for the smallest
//! eigenpairs of a sparse symmetric operator.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::dense::symmetric_eigen;
use super::{axpy, dot, norm2, residual_norm, SolverTag, SpectralResult};
use crate::error::{Error, Result};
use crate::operator::AssembledOperator;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LanczosOptions {
    pub max_restarts: usize,
    /// Krylov subspace size; `None` picks `max(2k + 20, k + 40)` capped at the dimension.
    pub subspace: Option<usize>,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        LanczosOptions {
            max_restarts: 400,
            subspace: None,
        }
    }
}

pub fn lanczos_smallest(op: &AssembledOperator, k: usize, tol: f64, seed: u64) -> Result<SpectralResult> {
    lanczos_smallest_with(op, k, tol, seed, &LanczosOptions::default())
}

/// The `k` smallest eigenpairs, each with `‖Hψ - λψ‖ ≤ tol (|λ| + ‖H‖₁)`.
pub fn lanczos_smallest_with(
    op: &AssembledOperator,
    k: usize,
    tol: f64,
    seed: u64,
    opts: &LanczosOptions,
) -> Result<SpectralResult> {
    let n = op.dimension();
    if k == 0 || k > n / 4 {
        return Err(Error::Precondition(format!(
            "lanczos needs 1 <= k <= dimension/4, got k = {k} for dimension {n}"
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("tolerance must be positive, got {tol}")));
    }
    let norm_est = op.norm_inf().max(f64::MIN_POSITIVE);
    let m = opts.subspace.unwrap_or((2 * k + 20).max(k + 40)).clamp(k + 2, n);
    let keep = ((k + m) / 2).clamp(k, m - 1);
    let breakdown = 1e-12 * norm_est;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut random_unit = |basis: &[Vec<f64>]| -> Vec<f64> {
        loop {
            let mut w: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            for _ in 0..2 {
                for v in basis {
                    let c = dot(v, &w);
                    axpy(-c, v, &mut w);
                }
            }
            let nw = norm2(&w);
            if nw > 1e-8 {
                w.iter_mut().for_each(|x| *x /= nw);
                return w;
            }
        }
    };

    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(m + 1);
    basis.push(random_unit(&[]));
    let mut t = vec![vec![0.0; m]; m];
    let mut kept = 0usize;
    let mut best = vec![f64::INFINITY; k];
    let mut w = vec![0.0; n];

    for restart in 0..=opts.max_restarts {
        let mut beta_last = 0.0;
        let mut next: Option<Vec<f64>> = None;
        for j in kept..m {
            op.apply_into(&basis[j], &mut w);
            let mut coeffs = vec![0.0; j + 1];
            for _ in 0..2 {
                for (i, v) in basis.iter().enumerate().take(j + 1) {
                    let c = dot(v, &w);
                    coeffs[i] += c;
                    axpy(-c, v, &mut w);
                }
            }
            for (i, &c) in coeffs.iter().enumerate() {
                t[i][j] = c;
                t[j][i] = c;
            }
            let beta = norm2(&w);
            if j + 1 < m {
                if beta <= breakdown {
                    // invariant subspace: continue with a fresh direction
                    basis.push(random_unit(&basis));
                } else {
                    basis.push(w.iter().map(|x| x / beta).collect());
                }
            } else {
                beta_last = beta;
                if beta > breakdown {
                    next = Some(w.iter().map(|x| x / beta).collect());
                }
            }
        }

        let (theta, y) = symmetric_eigen(&t, true)?;
        let y = y.expect("vectors requested");
        let scale = |l: f64| tol * (l.abs() + norm_est);
        let estimates: Vec<f64> = (0..k).map(|i| (beta_last * y[m - 1][i]).abs()).collect();
        let converged = (0..k).all(|i| estimates[i] <= scale(theta[i]));
        let last = restart == opts.max_restarts;

        if converged || last || next.is_none() {
            let mut vectors = Vec::with_capacity(k);
            let mut residuals = Vec::with_capacity(k);
            for i in 0..k {
                let mut x = vec![0.0; n];
                for (j, v) in basis.iter().enumerate().take(m) {
                    axpy(y[j][i], v, &mut x);
                }
                let nx = norm2(&x);
                x.iter_mut().for_each(|c| *c /= nx);
                residuals.push(residual_norm(op, theta[i], &x));
                vectors.push(x);
            }
            for i in 0..k {
                best[i] = best[i].min(residuals[i]);
            }
            if (0..k).all(|i| residuals[i] <= scale(theta[i])) {
                return Ok(SpectralResult {
                    eigenvalues: theta[..k].to_vec(),
                    eigenvectors: Some(vectors),
                    solver: SolverTag::Lanczos,
                    residuals,
                });
            }
            if last {
                return Err(Error::Convergence {
                    solver: "lanczos",
                    iterations: restart + 1,
                    residual: best.iter().cloned().fold(0.0, f64::max),
                    best_residuals: best,
                });
            }
        } else {
            for i in 0..k {
                best[i] = best[i].min(estimates[i]);
            }
        }

        // thick restart: keep the `keep` lowest Ritz vectors plus the residual direction
        let mut fresh: Vec<Vec<f64>> = Vec::with_capacity(m + 1);
        for i in 0..keep {
            let mut x = vec![0.0; n];
            for (j, v) in basis.iter().enumerate().take(m) {
                axpy(y[j][i], v, &mut x);
            }
            fresh.push(x);
        }
        // re-orthonormalize the kept block against rounding drift
        for i in 0..fresh.len() {
            let (done, rest) = fresh.split_at_mut(i);
            let x = &mut rest[0];
            for v in done.iter() {
                let c = dot(v, x);
                axpy(-c, v, x);
            }
            let nx = norm2(x);
            x.iter_mut().for_each(|c| *c /= nx);
        }
        let cont = match next {
            Some(mut r) => {
                for _ in 0..2 {
                    for v in &fresh {
                        let c = dot(v, &r);
                        axpy(-c, v, &mut r);
                    }
                }
                let nr = norm2(&r);
                if nr > 1e-8 {
                    r.iter_mut().for_each(|c| *c /= nr);
                    r
                } else {
                    random_unit(&fresh)
                }
            }
            None => random_unit(&fresh),
        };
        fresh.push(cont);
        basis = fresh;
        for row in t.iter_mut() {
            row.iter_mut().for_each(|x| *x = 0.0);
        }
        for i in 0..keep {
            t[i][i] = theta[i];
        }
        kept = keep;
    }
    unreachable!("the final restart always returns")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lowest_of_free_chain() {
        let n = 200;
        let op = AssembledOperator::tridiagonal(n, 2.0, -1.0);
        let r = lanczos_smallest(&op, 3, 1e-12, 7).unwrap();
        for (i, l) in r.eigenvalues.iter().enumerate() {
            let want = 2.0 - 2.0 * (std::f64::consts::PI * (i + 1) as f64 / (n + 1) as f64).cos();
            assert!((l - want).abs() < 1e-10, "{l} vs {want}");
        }
    }

    #[test]
    fn rejects_too_many_eigenpairs() {
        let op = AssembledOperator::tridiagonal(8, 2.0, -1.0);
        assert!(lanczos_smallest(&op, 3, 1e-10, 0).is_err());
        assert!(lanczos_smallest(&op, 0, 1e-10, 0).is_err());
    }
}
