//! Decay of the resolvent from the core of a box to its boundary.

use decaylab::analysis::linear_fit;
use decaylab::operator::{assemble_free, Grid, LatticeBox};
use decaylab::spectral::greens_boundary_norm;

fn main() -> decaylab::Result<()> {
    let mut pts = Vec::new();
    for side in [12u32, 18, 24, 30] {
        let op = assemble_free(&LatticeBox::centered(1, side)?, &Grid::new(4)?)?;
        let g = greens_boundary_norm(&op, -1.0, 1e-10)?;
        println!(
            "L = {side}: norm {:.4e}  1/dist {:.4}  ({} power steps)",
            g.norm,
            1.0 / g.distance,
            g.power_iterations
        );
        pts.push((f64::from(side), g.norm.ln()));
    }
    println!("slope of log-norm per unit L: {:.4}", linear_fit(&pts).0);
    Ok(())
}
