//! Distance from an energy to the spectrum, and the boundary-to-core block of
//! the finite-volume resolvent.

use super::krylov::{conjugate_gradient, minres, Solve};
use super::{inertia_count, lanczos_smallest, norm2, residual_norm, BandedLdlt, PIVOT_REL};
use crate::error::{Error, Result};
use crate::operator::AssembledOperator;

/// `dist(σ(H), E)` to within `tol`.
///
/// Bisects on `η ↦ #{λ ∈ [E-η, E+η)}` using inertia counts, then refines the
/// nearest eigenvalue: by a Lanczos ground-state solve when `E` lies below the
/// whole spectrum, otherwise by inverse iteration at the bisected edge. The
/// refinement matters because jittered counts blur edges on the scale of the
/// pivot threshold.
pub fn spectral_distance(op: &AssembledOperator, e: f64, tol: f64) -> Result<f64> {
    let n = op.dimension();
    if n == 0 {
        return Err(Error::Precondition("empty operator has no spectrum".into()));
    }
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("tolerance must be positive, got {tol}")));
    }
    let below = inertia_count(op, e)?.count;
    if below == 0 && n >= 4 {
        let g = lanczos_smallest(op, 1, 1e-13, 0x5eed)?;
        return Ok((g.eigenvalues[0] - e).max(0.0));
    }
    let window = |eta: f64| -> Result<usize> {
        Ok(inertia_count(op, e + eta)?
            .count
            .saturating_sub(inertia_count(op, e - eta)?.count))
    };
    let (glo, ghi) = op.gershgorin();
    let reach = (ghi - e).abs().max((e - glo).abs()) + 1.0;
    let mut hi = tol;
    let mut lo = 0.0;
    while window(hi)? == 0 {
        lo = hi;
        hi *= 2.0;
        if hi > 2.0 * reach {
            return Err(Error::Factorization {
                shift: e,
                reason: "no eigenvalue found inside the Gershgorin interval".into(),
            });
        }
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if window(mid)? > 0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let eta = 0.5 * (lo + hi);
    let above = inertia_count(op, e + hi)?.count > below;
    let sigma = if above { e + eta } else { e - eta };
    let slack = (hi - lo) + 40.0 * PIVOT_REL * (op.norm_inf() + e.abs() + eta);
    Ok(match refine_near(op, sigma) {
        Some(theta) if (theta - sigma).abs() <= slack => (theta - e).abs(),
        _ => eta,
    })
}

/// Rayleigh quotient after a few inverse-iteration steps at `sigma`, if it
/// converged to an eigenpair.
fn refine_near(op: &AssembledOperator, sigma: f64) -> Option<f64> {
    let n = op.dimension();
    let f = BandedLdlt::factor(op, sigma);
    let mut x: Vec<f64> = (0..n).map(|i| 1.0 + 0.1 * ((i * 7919) % 13) as f64).collect();
    for _ in 0..3 {
        let y = f.solve(&x);
        let ny = norm2(&y);
        if !ny.is_finite() || ny == 0.0 {
            return None;
        }
        x = y.iter().map(|v| v / ny).collect();
    }
    let hx = op.apply(&x).ok()?;
    let theta: f64 = x.iter().zip(&hx).map(|(a, b)| a * b).sum();
    let res = residual_norm(op, theta, &x);
    (theta.is_finite() && res <= 1e-8 * op.norm_inf().max(f64::MIN_POSITIVE)).then_some(theta)
}

/// Power-iteration estimate of `‖χ_∂ (H - E)^{-1} χ_core‖`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GreenEstimate {
    pub norm: f64,
    pub distance: f64,
    pub power_iterations: usize,
    pub boundary_points: usize,
    pub core_points: usize,
}

const MAX_POWER_ITERATIONS: usize = 500;

/// Norm of the resolvent block from the inner third `Λ_{L/3}` of the box to
/// its outermost grid shell.
///
/// Each resolvent application is a Krylov solve to relative residual `tol`:
/// conjugate gradients when `E` lies below the spectrum, MINRES otherwise.
pub fn greens_boundary_norm(op: &AssembledOperator, e: f64, tol: f64) -> Result<GreenEstimate> {
    let (points, bx) = match (op.points(), op.lattice_box()) {
        (Some(p), Some(b)) => (p, b),
        _ => {
            return Err(Error::Precondition(
                "green probe needs an operator assembled on a box".into(),
            ))
        }
    };
    let distance = spectral_distance(op, e, tol)?;
    if distance <= 10.0 * tol {
        return Err(Error::Precondition(format!(
            "E = {e} is within {distance:e} of the spectrum; need more than {:e}",
            10.0 * tol
        )));
    }
    let n = op.dimension();
    let boundary: Vec<bool> = (0..n).map(|i| points.is_boundary_layer(i)).collect();
    let sixth = f64::from(bx.side()) / 6.0;
    let c = bx.center().0;
    let core: Vec<bool> = (0..n)
        .map(|i| {
            let x = points.coords(i);
            (0..points.dim()).all(|a| (x[a] - c[a] as f64).abs() <= sixth)
        })
        .collect();
    let n_core = core.iter().filter(|&&b| b).count();
    let n_bdry = boundary.iter().filter(|&&b| b).count();
    if n_core == 0 || n_bdry == 0 {
        return Err(Error::Precondition("box too small for a core/boundary split".into()));
    }
    let positive = inertia_count(op, e)?.count == 0;
    let max_iter = 20 * n + 100;
    let resolve = |b: &[f64]| -> Result<Solve> {
        if positive {
            conjugate_gradient(op, e, b, tol, max_iter)
        } else {
            minres(op, e, b, tol, max_iter)
        }
    };

    // deterministic start vector supported on the core
    let mut x: Vec<f64> = (0..n)
        .map(|i| {
            if core[i] {
                1.0 + 0.1 * ((i * 7919) % 13) as f64
            } else {
                0.0
            }
        })
        .collect();
    let nx = norm2(&x);
    x.iter_mut().for_each(|v| *v /= nx);
    let mut estimate = 0.0;
    for it in 1..=MAX_POWER_ITERATIONS {
        let mut y = resolve(&x)?.x;
        for (yi, &b) in y.iter_mut().zip(&boundary) {
            if !b {
                *yi = 0.0;
            }
        }
        let ny = norm2(&y);
        if ny == 0.0 {
            return Ok(GreenEstimate {
                norm: 0.0,
                distance,
                power_iterations: it,
                boundary_points: n_bdry,
                core_points: n_core,
            });
        }
        let mut z = resolve(&y)?.x;
        for (zi, &cflag) in z.iter_mut().zip(&core) {
            if !cflag {
                *zi = 0.0;
            }
        }
        let nz = norm2(&z);
        let prev = estimate;
        estimate = ny;
        if it > 1 && (estimate - prev).abs() <= 1e-9 * estimate {
            return Ok(GreenEstimate {
                norm: estimate,
                distance,
                power_iterations: it,
                boundary_points: n_bdry,
                core_points: n_core,
            });
        }
        x = z.iter().map(|v| v / nz).collect();
    }
    Err(Error::Convergence {
        solver: "green power iteration",
        iterations: MAX_POWER_ITERATIONS,
        residual: estimate,
        best_residuals: Vec::new(),
    })
}
