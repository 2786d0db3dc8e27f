//! Probability that the potential stays small on a block far from the origin.

use decaylab::disorder::*;
use decaylab::operator::Site;

fn main() -> decaylab::Result<()> {
    let params = ModelParams::new(1, 1.0, 1.0)?;
    for (m, k) in [(10, 1), (10, 2), (40, 3), (100, 5)] {
        let spec = EventSpec::new(Site::new(&[m]), k, 0.1);
        let exact = event_probability_exact(&spec, &params)?;
        let mc = event_probability_mc(&spec, &params, 3, 20_000)?;
        println!(
            "m = {m:>3} k = {k}: exact {exact:.5}  mc {:.5} ± {:.5}  product bound {:.5}",
            mc.estimate,
            mc.half_width,
            event_lower_bound_product(&spec, &params)
        );
    }
    // a block whose center sits in a negative window
    let spec = EventSpec::new(Site::new(&[4]), 2, 0.5).with_window(-0.6, -0.4);
    println!("window event: {:.5}", event_probability_exact(&spec, &params)?);
    Ok(())
}
