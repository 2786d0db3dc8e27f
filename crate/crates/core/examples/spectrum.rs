//! Lowest eigenvalues of one realization, by Lanczos and by the dense solver.

use decaylab::disorder::{realize_field, ModelParams};
use decaylab::operator::{assemble, Grid, LatticeBox};
use decaylab::spectral::{dense_eig, inertia_count, lanczos_smallest, spectral_distance};

fn main() -> decaylab::Result<()> {
    let params = ModelParams::new(1, 0.5, 1.0)?;
    let bx = LatticeBox::centered(1, 60)?;
    let op = assemble(&realize_field(4, &params, &bx)?, &bx, &Grid::new(4)?)?;
    let lz = lanczos_smallest(&op, 6, 1e-12, 0)?;
    let dense = dense_eig(&op, false)?;
    println!("dimension {}", op.dimension());
    for (i, (a, b)) in lz.eigenvalues.iter().zip(&dense.eigenvalues).enumerate() {
        println!(
            "  {i}: lanczos {a:>14.8}  dense {b:>14.8}  residual {:.1e}",
            lz.residuals[i]
        );
    }
    println!("N(-0.1) = {}", inertia_count(&op, -0.1)?.count);
    println!("dist(spectrum, -0.5) = {:.6}", spectral_distance(&op, -0.5, 1e-10)?);
    Ok(())
}
