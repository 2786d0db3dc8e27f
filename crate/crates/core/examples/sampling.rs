//! Site-coupled fat-tailed couplings and the potential they induce.

use decaylab::disorder::{realize_field, sample_site, FatTail, ModelParams};
use decaylab::operator::{LatticeBox, Site};

fn main() -> decaylab::Result<()> {
    let law = FatTail::new(1.0)?;
    let n = 100_000;
    let deep = (0..n)
        .filter(|&i| sample_site(1, &Site::new(&[i]), &law) < -9.0)
        .count();
    println!(
        "P(omega < -9): empirical {:.5}, exact {:.5}",
        deep as f64 / n as f64,
        law.cdf(-9.0)
    );

    // the same seed gives the same couplings on every box containing a site
    let params = ModelParams::new(1, 0.5, 1.0)?;
    let small = realize_field(7, &params, &LatticeBox::centered(1, 10)?)?;
    let large = realize_field(7, &params, &LatticeBox::centered(1, 100)?)?;
    for x in -2..=2 {
        let n = Site::new(&[x]);
        println!(
            "v({x:>2}) = {:>10.5} = {:>10.5}",
            small.value(&n).unwrap(),
            large.value(&n).unwrap()
        );
    }
    println!("max |v| on the large box: {:.3}", large.max_abs());
    Ok(())
}
