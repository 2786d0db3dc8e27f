//! Ground energy of a unit well as its depth varies, and the derivative check.

use decaylab::analysis::{hellmann_feynman_check, single_well_ground_curve};
use decaylab::operator::{Grid, LatticeBox};

fn main() -> decaylab::Result<()> {
    let bx = LatticeBox::centered(1, 40)?;
    let grid = Grid::new(20)?;
    let depths = [-50.0, -20.0, -10.0, -5.0, -2.0, -0.5];
    for p in single_well_ground_curve(&depths, &bx, &grid)? {
        println!(
            "lambda = {:>6}: E = {:>10.5}  occupation {:.4}  binds {}",
            p.depth, p.energy, p.occupation, p.binds
        );
    }
    let hf = hellmann_feynman_check(-5.0, 1e-3, &bx, &grid)?;
    println!(
        "dE/dlambda = {:.8}, occupation {:.8}, discrepancy {:.1e}",
        hf.derivative, hf.occupation, hf.discrepancy
    );
    Ok(())
}
