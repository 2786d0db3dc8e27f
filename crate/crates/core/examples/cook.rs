//! Weighted square sums of a decaying potential over growing balls.

use decaylab::analysis::{cook_integral_probe, cook_time_integral_probe};
use decaylab::disorder::{realize_field, ModelParams};
use decaylab::operator::LatticeBox;

fn main() -> decaylab::Result<()> {
    let params = ModelParams::new(1, 2.0, 3.0)?;
    let field = realize_field(5, &params, &LatticeBox::centered(1, 802)?)?;
    let radii = [25, 50, 100, 200, 400];
    for (r, s) in radii.iter().zip(cook_integral_probe(&field, 1.0, &radii)?) {
        println!("R = {r:>3}: I(R) = {s:.12}");
    }
    let times: Vec<f64> = (0..=7).map(|i| 1.0 + 25.0 * f64::from(i)).collect();
    let acc = cook_time_integral_probe(&field, 1.0, 2.0, &times)?;
    for (t, a) in times.iter().zip(acc) {
        println!("t = {t:>5}: accumulated {a:.6}");
    }
    Ok(())
}
