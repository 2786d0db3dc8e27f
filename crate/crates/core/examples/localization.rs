//! Decay fits of the negative-energy eigenfunctions in the essential regime.

use decaylab::harness::{run_localization_study, ExperimentConfig};

fn main() -> decaylab::Result<()> {
    let config = ExperimentConfig {
        alphas: vec![0.5],
        deltas: vec![1.0],
        ladder: vec![200],
        realizations: 50,
        ..ExperimentConfig::default()
    };
    let study = run_localization_study(&config)?;
    let fails: Vec<_> = study.rows.iter().filter(|r| !r.is_exponential()).collect();
    println!(
        "{} eigenfunctions, {} fail the exponential criterion",
        study.rows.len(),
        fails.len()
    );
    for r in fails.iter().take(10) {
        println!("  {r:?}");
    }
    println!("exponential fraction: {:?}", study.exponential_fraction());
    Ok(())
}
