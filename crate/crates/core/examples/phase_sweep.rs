//! Counts of eigenvalues below -0.1 in growing boxes, on both sides of αδ = d.

use decaylab::harness::{run_phase_sweep, ExperimentConfig};

fn main() -> decaylab::Result<()> {
    let config = ExperimentConfig {
        alphas: vec![0.5, 3.0, 4.0],
        deltas: vec![1.0],
        ladder: vec![100, 400],
        realizations: 200,
        ..ExperimentConfig::default()
    };
    let result = run_phase_sweep(&config)?;
    for p in &result.points {
        println!(
            "alpha = {:<4} delta = {:<4} means = {:?} g = {:.3} -> {}",
            p.alpha, p.delta, p.means, p.growth, p.classification
        );
    }
    Ok(())
}
