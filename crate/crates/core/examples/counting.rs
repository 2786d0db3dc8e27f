//! Negative eigenvalue count of a box against the sum of per-cell Neumann counts.

use decaylab::disorder::{realize_field, ModelParams};
use decaylab::operator::{Grid, LatticeBox};
use decaylab::spectral::counting_upper_bound;

fn main() -> decaylab::Result<()> {
    let bx = LatticeBox::centered(1, 20)?;
    let grid = Grid::new(8)?;
    for alpha in [0.5, 3.0] {
        let params = ModelParams::new(1, alpha, 1.0)?;
        println!("alpha = {alpha}");
        for seed in 0..5 {
            let b = counting_upper_bound(&realize_field(seed, &params, &bx)?, &bx, &grid, 0.1)?;
            println!(
                "  seed {seed}: N(-0.1) = {:>2} <= {:>2}  (continuum cells {})",
                b.lhs, b.rhs, b.continuum_rhs
            );
        }
    }
    Ok(())
}
