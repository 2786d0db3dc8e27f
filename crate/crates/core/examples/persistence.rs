//! Save a run under its content address and load it back.

use decaylab::harness::{load_run, run_phase_sweep, save_run, ExperimentConfig, PhaseDiagramResult};

fn main() -> decaylab::Result<()> {
    let config = ExperimentConfig {
        alphas: vec![0.5, 3.0],
        ladder: vec![50, 100],
        realizations: 20,
        ..ExperimentConfig::default()
    };
    let result = run_phase_sweep(&config)?;
    let dir = std::env::temp_dir().join("decaylab-persistence-example");
    let saved = save_run(&result, &config.manifest("phase"), &dir)?;
    println!("run {} -> {}", saved.run_id, saved.table.display());
    let (back, manifest) = load_run::<PhaseDiagramResult>(&dir, &saved.run_id)?;
    assert_eq!(back, result);
    print!("{}", manifest.to_text());
    Ok(())
}
