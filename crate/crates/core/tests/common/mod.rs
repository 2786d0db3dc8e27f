#![allow(dead_code)]

use decaylab::disorder::{realize_field, ModelParams};
use decaylab::operator::{assemble, AssembledOperator, Grid, LatticeBox};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A disordered box operator with dimension at most `max_dim`.
pub fn random_operator(seed: u64, max_dim: usize) -> AssembledOperator {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let dim = rng.random_range(1..=2usize);
        let (side, m) = if dim == 1 {
            (2 * rng.random_range(4..=40u32), rng.random_range(2..=8u32))
        } else {
            (2 * rng.random_range(2..=6u32), rng.random_range(2..=4u32))
        };
        let n = ((m * side - 1) as usize).pow(dim as u32);
        if n > max_dim || n < 40 {
            continue;
        }
        let alpha = rng.random_range(0.0..3.0);
        let delta = rng.random_range(0.5..3.0);
        let params = ModelParams::new(dim, alpha, delta).unwrap();
        let bx = LatticeBox::centered(dim, side).unwrap();
        let field = realize_field(rng.random(), &params, &bx).unwrap();
        return assemble(&field, &bx, &Grid::new(m).unwrap()).unwrap();
    }
}

pub fn random_vec(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
}

/// Five shifts spread over the spectrum, two of them exactly at eigenvalues.
pub fn shifts(eigs: &[f64]) -> [f64; 5] {
    let n = eigs.len();
    [
        eigs[0] - 1.0,
        eigs[n / 3],
        0.5 * (eigs[n / 2] + eigs[n / 2 + 1]),
        eigs[2 * n / 3],
        -0.1,
    ]
}

/// `‖G[rows, cols]‖₂` of the dense resolvent `G = (H - E)^{-1}`.
pub fn dense_block_resolvent_norm(eigs: &[f64], vecs: &[Vec<f64>], e: f64, rows: &[usize], cols: &[usize]) -> f64 {
    let block: Vec<Vec<f64>> = rows
        .iter()
        .map(|&i| {
            cols.iter()
                .map(|&j| eigs.iter().zip(vecs).map(|(l, v)| v[i] * v[j] / (l - e)).sum())
                .collect()
        })
        .collect();
    let gram: Vec<Vec<f64>> = (0..cols.len())
        .map(|a| {
            (0..cols.len())
                .map(|b| block.iter().map(|r| r[a] * r[b]).sum())
                .collect()
        })
        .collect();
    let (ev, _) = decaylab::spectral::dense::symmetric_eigen(&gram, false).unwrap();
    ev.last().copied().unwrap_or(0.0).max(0.0).sqrt()
}

/// Ground state decay `κ` of a unit-width well of depth `-λ`: even solution of
/// `√(-λ-κ²) tan(√(-λ-κ²)/2) = κ`, by bisection.
pub fn finite_well_kappa(lambda: f64) -> f64 {
    let depth = -lambda;
    let g = |kappa: f64| {
        let q = (depth - kappa * kappa).sqrt();
        q * (q / 2.0).tan() - kappa
    };
    // ground state has q/2 in (0, π/2)
    let kmax = depth.sqrt();
    let kmin = (depth - std::f64::consts::PI.powi(2)).max(0.0).sqrt() + 1e-12;
    let (mut lo, mut hi) = (kmin, kmax - 1e-15);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}
