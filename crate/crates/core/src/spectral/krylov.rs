//! Krylov solvers for the shifted system `(H - E) x = b`.

use super::{axpy, dot, norm2};
use crate::error::{Error, Result};
use crate::operator::AssembledOperator;

/// Result of an iterative solve.
#[derive(Debug, Clone)]
pub struct Solve {
    pub x: Vec<f64>,
    pub iterations: usize,
    /// `‖b - (H - E) x‖ / ‖b‖`, recomputed from the returned `x`.
    pub relative_residual: f64,
}

fn shifted_apply(op: &AssembledOperator, shift: f64, x: &[f64], y: &mut [f64]) {
    op.apply_into(x, y);
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi -= shift * xi;
    }
}

fn true_residual(op: &AssembledOperator, shift: f64, x: &[f64], b: &[f64]) -> f64 {
    let mut ax = vec![0.0; x.len()];
    shifted_apply(op, shift, x, &mut ax);
    let r: f64 = ax.iter().zip(b).map(|(a, bi)| (bi - a).powi(2)).sum::<f64>().sqrt();
    r / norm2(b).max(f64::MIN_POSITIVE)
}

fn zero_rhs(n: usize) -> Solve {
    Solve {
        x: vec![0.0; n],
        iterations: 0,
        relative_residual: 0.0,
    }
}

/// Conjugate gradients; requires `H - E` positive definite.
pub fn conjugate_gradient(op: &AssembledOperator, shift: f64, b: &[f64], tol: f64, max_iter: usize) -> Result<Solve> {
    let n = b.len();
    let bnorm = norm2(b);
    if bnorm == 0.0 {
        return Ok(zero_rhs(n));
    }
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let mut p = r.clone();
    let mut ap = vec![0.0; n];
    let mut rr = dot(&r, &r);
    for it in 1..=max_iter {
        shifted_apply(op, shift, &p, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            return Err(Error::Precondition(format!(
                "conjugate gradients met nonpositive curvature {pap:e}; shifted operator is not positive definite"
            )));
        }
        let alpha = rr / pap;
        axpy(alpha, &p, &mut x);
        axpy(-alpha, &ap, &mut r);
        let rr_new = dot(&r, &r);
        if rr_new.sqrt() <= tol * bnorm {
            let rel = true_residual(op, shift, &x, b);
            if rel <= 10.0 * tol {
                return Ok(Solve {
                    x,
                    iterations: it,
                    relative_residual: rel,
                });
            }
            // recurrence drifted: restart from the true residual
            shifted_apply(op, shift, &x, &mut ap);
            r = b.iter().zip(&ap).map(|(bi, a)| bi - a).collect();
            p = r.clone();
            rr = dot(&r, &r);
            continue;
        }
        let beta = rr_new / rr;
        rr = rr_new;
        for (pi, ri) in p.iter_mut().zip(&r) {
            *pi = ri + beta * *pi;
        }
    }
    Err(Error::Convergence {
        solver: "conjugate gradients",
        iterations: max_iter,
        residual: rr.sqrt() / bnorm,
        best_residuals: Vec::new(),
    })
}

/// MINRES (Paige–Saunders) for symmetric, possibly indefinite `H - E`.
pub fn minres(op: &AssembledOperator, shift: f64, b: &[f64], tol: f64, max_iter: usize) -> Result<Solve> {
    let n = b.len();
    let beta1 = norm2(b);
    if beta1 == 0.0 {
        return Ok(zero_rhs(n));
    }
    let mut x = vec![0.0; n];
    let mut r1 = b.to_vec();
    let mut r2 = b.to_vec();
    let mut y = b.to_vec();
    let mut v = vec![0.0; n];
    let mut w = vec![0.0; n];
    let mut w1;
    let mut w2 = vec![0.0; n];
    let mut oldb = 0.0;
    let mut beta = beta1;
    let mut dbar = 0.0;
    let mut epsln = 0.0;
    let mut phibar = beta1;
    let mut cs = -1.0;
    let mut sn = 0.0;
    for it in 1..=max_iter {
        let s = 1.0 / beta;
        for (vi, yi) in v.iter_mut().zip(&y) {
            *vi = s * yi;
        }
        shifted_apply(op, shift, &v, &mut y);
        if it >= 2 {
            axpy(-beta / oldb, &r1, &mut y);
        }
        let alfa = dot(&v, &y);
        axpy(-alfa / beta, &r2, &mut y);
        std::mem::swap(&mut r1, &mut r2);
        r2.copy_from_slice(&y);
        oldb = beta;
        beta = norm2(&r2);
        let oldeps = epsln;
        let delta = cs * dbar + sn * alfa;
        let gbar = sn * dbar - cs * alfa;
        epsln = sn * beta;
        dbar = -cs * beta;
        let gamma = gbar.hypot(beta).max(f64::EPSILON);
        cs = gbar / gamma;
        sn = beta / gamma;
        let phi = cs * phibar;
        phibar *= sn;
        w1 = std::mem::replace(&mut w2, w.clone());
        for i in 0..n {
            w[i] = (v[i] - oldeps * w1[i] - delta * w2[i]) / gamma;
        }
        axpy(phi, &w, &mut x);
        if phibar <= tol * beta1 || beta == 0.0 {
            let rel = true_residual(op, shift, &x, b);
            if rel <= 10.0 * tol {
                return Ok(Solve {
                    x,
                    iterations: it,
                    relative_residual: rel,
                });
            }
            return Err(Error::Convergence {
                solver: "minres",
                iterations: it,
                residual: rel,
                best_residuals: Vec::new(),
            });
        }
    }
    Err(Error::Convergence {
        solver: "minres",
        iterations: max_iter,
        residual: phibar / beta1,
        best_residuals: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check(solve: Solve, op: &AssembledOperator, shift: f64, b: &[f64]) {
        assert!(true_residual(op, shift, &solve.x, b) < 1e-9);
    }

    #[test]
    fn cg_on_shifted_chain() {
        let op = AssembledOperator::tridiagonal(50, 2.0, -1.0);
        let b: Vec<f64> = (0..50).map(|i| (i as f64).sin()).collect();
        check(conjugate_gradient(&op, -1.0, &b, 1e-11, 500).unwrap(), &op, -1.0, &b);
        assert!(conjugate_gradient(&op, 1.0, &b, 1e-11, 500).is_err());
    }

    #[test]
    fn minres_on_indefinite_shift() {
        let op = AssembledOperator::tridiagonal(50, 2.0, -1.0);
        let b: Vec<f64> = (0..50).map(|i| (0.3 * i as f64).cos()).collect();
        check(minres(&op, 1.01, &b, 1e-11, 2000).unwrap(), &op, 1.01, &b);
    }
}
