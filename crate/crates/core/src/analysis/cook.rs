use crate::disorder::PotentialField;
use crate::error::{Error, Result};

fn check_radius(field: &PotentialField, radius: u64) -> Result<()> {
    if !field.lattice_box().covers_ball(radius) {
        return Err(Error::Precondition(format!(
            "radius {radius} exceeds the field box {:?}",
            field.lattice_box()
        )));
    }
    Ok(())
}

/// Partial sums `I(R) = Σ_{‖n‖∞ ≤ R} (1 + ‖n‖∞)^{-2m} v_n²`, one per radius.
pub fn cook_integral_probe(field: &PotentialField, m: f64, radii: &[u64]) -> Result<Vec<f64>> {
    if !(m > 0.0) {
        return Err(Error::Domain(format!("weight exponent must be positive, got {m}")));
    }
    if radii.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Domain("radii must be strictly increasing".into()));
    }
    let Some(&rmax) = radii.last() else {
        return Ok(Vec::new());
    };
    check_radius(field, rmax)?;
    // shell sums first, then accumulate: shells are disjoint so I(R) is monotone
    let mut shell = vec![0.0; rmax as usize + 1];
    for (n, v) in field.iter() {
        let r = n.sup_norm();
        if r <= rmax {
            shell[r as usize] += (1.0 + r as f64).powf(-2.0 * m) * v * v;
        }
    }
    let mut acc = 0.0;
    let mut sums = Vec::with_capacity(radii.len());
    let mut next = 0;
    for (r, s) in shell.iter().enumerate() {
        acc += s;
        if r as u64 == radii[next] {
            sums.push(acc);
            next += 1;
            if next == radii.len() {
                break;
            }
        }
    }
    Ok(sums)
}

/// Cumulative trapezoid integrals of `t ↦ (t^{-d} Σ_{at < ‖n‖∞ ≤ bt} v_n²)^{1/2}`
/// over the given `t` nodes, starting at zero on the first node.
pub fn cook_time_integral_probe(field: &PotentialField, a: f64, b: f64, times: &[f64]) -> Result<Vec<f64>> {
    if !(0.0 < a && a < b) {
        return Err(Error::Domain(format!("need 0 < a < b, got a = {a}, b = {b}")));
    }
    if times.is_empty() || times[0] < 1.0 || times.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Domain("times must be increasing and start at or after 1".into()));
    }
    let tmax = times[times.len() - 1];
    check_radius(field, (b * tmax).floor() as u64)?;
    let d = field.params().dim() as i32;
    let mut shell = vec![0.0; (b * tmax).floor() as usize + 1];
    for (n, v) in field.iter() {
        let r = n.sup_norm() as usize;
        if r < shell.len() {
            shell[r] += v * v;
        }
    }
    let mut prefix = vec![0.0; shell.len() + 1];
    for (r, s) in shell.iter().enumerate() {
        prefix[r + 1] = prefix[r] + s;
    }
    // Σ over shells r with lo < r <= hi
    let band = |lo: f64, hi: f64| -> f64 {
        let upper = (hi.floor() as usize).min(shell.len() - 1);
        let lower = lo.floor() as usize;
        if upper <= lower {
            0.0
        } else {
            prefix[upper + 1] - prefix[lower + 1]
        }
    };
    let g = |t: f64| (band(a * t, b * t) / t.powi(d)).sqrt();
    let mut out = Vec::with_capacity(times.len());
    let mut acc = 0.0;
    out.push(0.0);
    for w in times.windows(2) {
        acc += 0.5 * (w[1] - w[0]) * (g(w[0]) + g(w[1]));
        out.push(acc);
    }
    Ok(out)
}
