//! Plane waves cut off at growing radii are approximate eigenfunctions.

use decaylab::analysis::{linear_fit, weyl_residual, WeylPacket};
use decaylab::operator::{Grid, LatticeBox};

fn main() -> decaylab::Result<()> {
    let grid = Grid::new(20)?;
    for (e, k) in [(0.0, 0.0), (1.0, 1.0)] {
        let mut pts = Vec::new();
        for r in [4.0f64, 8.0, 16.0, 32.0] {
            let bx = LatticeBox::centered(1, 2 * r as u32 + 2)?;
            let res = weyl_residual(&WeylPacket::new(e, &[k], r)?, &bx, &grid, None)?;
            println!("E = {e} r = {r:>2}: |(H - E)phi| / |phi| = {res:.3e}");
            pts.push((r.ln(), res.ln()));
        }
        println!("  log-log slope {:.3}", linear_fit(&pts).0);
    }
    Ok(())
}
