//! Banded LDLᵀ without pivoting and eigenvalue counting by Sylvester inertia.

use crate::error::{Error, Result};
use crate::operator::AssembledOperator;

use super::{dense_eig_with_guard, CountMethod, CountingResult, DENSE_GUARD};

/// Relative pivot threshold: pivots below `PIVOT_REL * ‖H - E‖∞` trigger a jittered retry.
pub const PIVOT_REL: f64 = 1e-10;
/// Number of jittered retries before falling back to the dense oracle.
pub const MAX_JITTER_RETRIES: usize = 5;

/// `A - shift·I = L D Lᵀ` for a symmetric banded `A`, `L` unit lower triangular.
#[derive(Debug, Clone)]
pub struct BandedLdlt {
    n: usize,
    b: usize,
    /// row `i` holds `L[i][i-b..i]` followed by a slot for the diagonal
    l: Vec<f64>,
    d: Vec<f64>,
}

impl BandedLdlt {
    pub fn factor(op: &AssembledOperator, shift: f64) -> Self {
        let n = op.dimension();
        let b = op.bandwidth();
        let w = b + 1;
        let mut l = vec![0.0; n * w];
        for i in 0..n {
            for (j, v) in op.row(i) {
                if j <= i {
                    l[i * w + (j + b - i)] = if j == i { v - shift } else { v };
                }
            }
        }
        let mut d = vec![0.0; n];
        let mut t = vec![0.0; w];
        for i in 0..n {
            let j0 = i.saturating_sub(b);
            // t[k - j0] = L[i][k] * d[k] for the already-final entries of row i
            for j in j0..i {
                let mut s = l[i * w + (j + b - i)];
                let kb = j.saturating_sub(b).max(j0);
                for k in kb..j {
                    s -= t[k - j0] * l[j * w + (k + b - j)];
                }
                t[j - j0] = s;
                l[i * w + (j + b - i)] = s / d[j];
            }
            let mut di = l[i * w + b];
            for j in j0..i {
                di -= t[j - j0] * l[i * w + (j + b - i)];
            }
            d[i] = di;
        }
        BandedLdlt { n, b, l, d }
    }

    pub fn pivots(&self) -> &[f64] {
        &self.d
    }

    pub fn min_abs_pivot(&self) -> f64 {
        self.d.iter().fold(f64::INFINITY, |m, x| m.min(x.abs()))
    }

    pub fn negative_pivots(&self) -> usize {
        self.d.iter().filter(|&&x| x < 0.0).count()
    }

    /// Solves `(A - shift·I) x = rhs`.
    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let (n, b, w) = (self.n, self.b, self.b + 1);
        let mut x = rhs.to_vec();
        for i in 0..n {
            let j0 = i.saturating_sub(b);
            let mut s = x[i];
            for j in j0..i {
                s -= self.l[i * w + (j + b - i)] * x[j];
            }
            x[i] = s;
        }
        for (xi, di) in x.iter_mut().zip(&self.d) {
            *xi /= di;
        }
        for i in (0..n).rev() {
            let s = x[i];
            let j0 = i.saturating_sub(b);
            for j in j0..i {
                x[j] -= self.l[i * w + (j + b - i)] * s;
            }
        }
        x
    }
}

fn shifted_norm_inf(op: &AssembledOperator, shift: f64) -> f64 {
    (0..op.dimension())
        .map(|i| {
            op.row(i)
                .map(|(j, v)| if j == i { (v - shift).abs() } else { v.abs() })
                .sum::<f64>()
        })
        .fold(0.0, f64::max)
}

/// `#{λ ∈ σ(H) : λ < E}` from the negative pivots of `H - E = LDLᵀ`.
pub fn inertia_count(op: &AssembledOperator, e: f64) -> Result<CountingResult> {
    inertia_count_with_guard(op, e, DENSE_GUARD)
}

pub fn inertia_count_with_guard(op: &AssembledOperator, e: f64, dense_guard: usize) -> Result<CountingResult> {
    let n = op.dimension();
    let tau = PIVOT_REL * shifted_norm_inf(op, e).max(f64::MIN_POSITIVE);
    let mut jitter = 0.0;
    for attempt in 0..=MAX_JITTER_RETRIES {
        if attempt > 0 {
            let step = 10.0 * tau * attempt.div_ceil(2) as f64;
            // downward first: an eigenvalue sitting exactly at E stays uncounted
            jitter = if attempt % 2 == 1 { -step } else { step };
        }
        let f = BandedLdlt::factor(op, e + jitter);
        if n == 0 || f.min_abs_pivot() >= tau {
            return Ok(CountingResult {
                shift: e,
                count: f.negative_pivots(),
                method: CountMethod::Inertia,
                jitter,
            });
        }
    }
    if n <= dense_guard {
        let spec = dense_eig_with_guard(op, false, dense_guard)?;
        return Ok(CountingResult {
            shift: e,
            count: spec.eigenvalues.iter().filter(|&&x| x < e).count(),
            method: CountMethod::Dense,
            jitter: 0.0,
        });
    }
    Err(Error::Factorization {
        shift: e,
        reason: format!(
            "pivot below {tau:e} after {MAX_JITTER_RETRIES} jittered retries and dimension {n} exceeds the dense guard {dense_guard}"
        ),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tridiagonal_counts() {
        let op = AssembledOperator::tridiagonal(3, 2.0, -1.0);
        let c = |e| inertia_count(&op, e).unwrap().count;
        assert_eq!(c(2.0), 1);
        assert_eq!(c(0.5), 0);
        assert_eq!(c(4.0), 3);
        assert_eq!(c(-100.0), 0);
    }

    #[test]
    fn exact_eigenvalue_shift_is_jittered() {
        // E = 2 is an eigenvalue of tridiag(-1, 2, -1) of size 3
        let op = AssembledOperator::tridiagonal(3, 2.0, -1.0);
        let r = inertia_count(&op, 2.0).unwrap();
        assert_eq!(r.count, 1);
        assert!(r.jitter != 0.0 || r.method == CountMethod::Dense);
    }

    #[test]
    fn banded_solve_matches_apply() {
        let t = vec![
            (0, 0, 4.0),
            (1, 1, -3.0),
            (2, 2, 5.0),
            (3, 3, 1.5),
            (0, 1, 1.0),
            (0, 2, -0.5),
            (1, 3, 2.0),
            (2, 3, 0.25),
        ];
        let op = AssembledOperator::from_triples(4, &t).unwrap();
        let f = BandedLdlt::factor(&op, 0.3);
        let x = f.solve(&[1.0, -2.0, 0.5, 3.0]);
        let ax = op.apply(&x).unwrap();
        for i in 0..4 {
            let r = ax[i] - 0.3 * x[i] - [1.0, -2.0, 0.5, 3.0][i];
            assert!(r.abs() < 1e-12, "{r}");
        }
    }
}
