//! Probability that the finite-volume spectrum comes within η of E = -0.5.

use decaylab::harness::{run_wegner_probe, ExperimentConfig};

fn main() -> decaylab::Result<()> {
    let etas = (0..9).map(|i| 1e-3 * 10f64.powf(i as f64 / 4.0)).collect();
    let config = ExperimentConfig {
        alphas: vec![1.0],
        deltas: vec![2.0],
        ladder: vec![40],
        realizations: 500,
        energy: -0.5,
        etas,
        ..ExperimentConfig::default()
    };
    let table = run_wegner_probe(&config)?;
    println!("accepted {} of {}", table.accepted, config.realizations);
    for r in &table.rows {
        println!("eta = {:.4e}  P = {:.4} ± {:.4}", r.eta, r.frequency, r.halfwidth);
    }
    println!("log-log slope: {:?}", table.log_slope());
    Ok(())
}
