use crate::error::{Error, Result};
use crate::operator::{Grid, LatticeBox, PointLattice};

/// Allowed deviation of `‖ψ‖₂` from one.
pub const NORMALIZATION_TOL: f64 = 1e-8;

/// Shells with a maximum below this are treated as numerically empty.
const SHELL_FLOOR: f64 = 1e-12;
const FIT_START: usize = 2;
const MIN_SHELLS: usize = 4;

fn check_normalized(psi: &[f64]) -> Result<()> {
    let norm = psi.iter().map(|x| x * x).sum::<f64>().sqrt();
    if (norm - 1.0).abs() > NORMALIZATION_TOL {
        return Err(Error::Precondition(format!(
            "vector must be normalized, got norm {norm}"
        )));
    }
    Ok(())
}

/// Inverse participation ratio `Σψ⁴ / (Σψ²)²`.
pub fn ipr(psi: &[f64]) -> Result<f64> {
    check_normalized(psi)?;
    let s2: f64 = psi.iter().map(|x| x * x).sum();
    let s4: f64 = psi.iter().map(|x| x.powi(4)).sum();
    Ok(s4 / (s2 * s2))
}

/// Exponential fit of shell maxima around the localization center.
#[derive(Debug, Clone, PartialEq)]
pub struct DecayFit {
    /// Coordinates of `argmax |ψ|`, lattice units.
    pub center: Vec<f64>,
    pub center_index: usize,
    /// Decay rate `m = max(-slope, 0)`.
    pub rate: f64,
    pub r2: f64,
    /// Inclusive shell range `[first, last]` used by the fit.
    pub range: (usize, usize),
    pub shells_used: usize,
}

pub fn decay_fit(psi: &[f64], bx: &LatticeBox, grid: &Grid) -> Result<DecayFit> {
    let points = PointLattice::for_box(bx, grid)?;
    decay_fit_on(psi, &points)
}

/// Least-squares fit of `log s(r)` against `r` where `s(r)` is the largest
/// `|ψ|` on the sup-norm shell `[r, r+1)` around the center.
pub fn decay_fit_on(psi: &[f64], points: &PointLattice) -> Result<DecayFit> {
    if psi.len() != points.len() {
        return Err(Error::Precondition(format!(
            "vector length {} does not match {} grid points",
            psi.len(),
            points.len()
        )));
    }
    check_normalized(psi)?;
    let dim = points.dim();
    // strict comparison keeps the lowest index on ties
    let mut ci = 0;
    for (i, x) in psi.iter().enumerate() {
        if x.abs() > psi[ci].abs() {
            ci = i;
        }
    }
    let c = points.coords(ci);
    let mut shells: Vec<f64> = Vec::new();
    for (i, x) in psi.iter().enumerate() {
        let p = points.coords(i);
        let dist = (0..dim).map(|a| (p[a] - c[a]).abs()).fold(0.0, f64::max);
        // grid coordinates are exact multiples of 1/M, so floor is safe up to rounding
        let r = (dist + 1e-9).floor() as usize;
        if r >= shells.len() {
            shells.resize(r + 1, 0.0);
        }
        shells[r] = shells[r].max(x.abs());
    }
    let last = shells.iter().rposition(|&s| s > SHELL_FLOOR).unwrap_or(0);
    let data: Vec<(f64, f64)> = (FIT_START..=last.max(FIT_START))
        .filter(|&r| r < shells.len() && shells[r] > SHELL_FLOOR)
        .map(|r| (r as f64, shells[r].ln()))
        .collect();
    if data.len() < MIN_SHELLS {
        return Err(Error::InsufficientRange {
            usable: data.len(),
            needed: MIN_SHELLS,
        });
    }
    let (slope, r2) = linear_fit(&data);
    Ok(DecayFit {
        center: c[..dim].to_vec(),
        center_index: ci,
        rate: (-slope).max(0.0),
        r2,
        range: (FIT_START, last),
        shells_used: data.len(),
    })
}

/// Slope and coefficient of determination of an ordinary least-squares line.
pub fn linear_fit(data: &[(f64, f64)]) -> (f64, f64) {
    let n = data.len() as f64;
    let mx = data.iter().map(|p| p.0).sum::<f64>() / n;
    let my = data.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = data.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = data.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = data.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let ss_res: f64 = data.iter().map(|p| (p.1 - my - slope * (p.0 - mx)).powi(2)).sum();
    let r2 = if syy > 0.0 {
        (1.0 - ss_res / syy).clamp(0.0, 1.0)
    } else {
        1.0
    };
    (slope, r2)
}

/// One eigenpair passed through [`ipr`] and [`decay_fit`].
#[derive(Debug, Clone, PartialEq)]
pub struct LocalizationReport {
    pub eigenvalue: f64,
    pub center: Vec<f64>,
    pub ipr: f64,
    pub decay_rate: f64,
    pub r2: f64,
    pub fit_range: (usize, usize),
}

impl LocalizationReport {
    pub fn from_eigenpair(eigenvalue: f64, psi: &[f64], points: &PointLattice) -> Result<Self> {
        let fit = decay_fit_on(psi, points)?;
        Ok(LocalizationReport {
            eigenvalue,
            center: fit.center,
            ipr: ipr(psi)?,
            decay_rate: fit.rate,
            r2: fit.r2,
            fit_range: fit.range,
        })
    }

    /// The exponential-localization criterion `R² ≥ 0.9` and `m > 0.05`.
    pub fn is_exponential(&self) -> bool {
        self.r2 >= 0.9 && self.decay_rate > 0.05
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(mut v: Vec<f64>) -> Vec<f64> {
        let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        v.iter_mut().for_each(|x| *x /= n);
        v
    }

    #[test]
    fn ipr_limits() {
        assert_eq!(ipr(&[0.0, 1.0, 0.0]).unwrap(), 1.0);
        assert!((ipr(&[0.5; 4]).unwrap() - 0.25).abs() < 1e-15);
        assert!(ipr(&[1.0, 1.0]).is_err());
    }

    #[test]
    fn planted_rate_is_recovered() {
        let bx = LatticeBox::centered(1, 40).unwrap();
        let grid = Grid::new(4).unwrap();
        let pts = PointLattice::for_box(&bx, &grid).unwrap();
        let psi = unit(
            (0..pts.len())
                .map(|i| (-0.7 * (pts.coords(i)[0] - 3.0).abs()).exp())
                .collect(),
        );
        let f = decay_fit_on(&psi, &pts).unwrap();
        assert!((f.rate - 0.7).abs() < 1e-9, "{}", f.rate);
        assert!(f.r2 > 0.999999);
        assert_eq!(f.center, vec![3.0]);
    }

    #[test]
    fn too_few_shells() {
        let bx = LatticeBox::centered(1, 4).unwrap();
        let grid = Grid::new(2).unwrap();
        let pts = PointLattice::for_box(&bx, &grid).unwrap();
        let psi = unit(vec![1.0; pts.len()]);
        assert!(matches!(decay_fit_on(&psi, &pts), Err(Error::InsufficientRange { .. })));
    }
}
