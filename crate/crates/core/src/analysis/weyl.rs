use num_complex::Complex64;

use crate::disorder::PotentialField;
use crate::error::{Error, Result};
use crate::operator::{assemble, assemble_free, Grid, LatticeBox, PointLattice};

/// Upper bound on `h·max(1, √E)` so the grid resolves the packet's oscillation.
pub const WEYL_RESOLUTION: f64 = 0.05;

/// `φ_r(x) = r^{-d/2} e^{ik·x} f(x/r)` with the standard bump `f`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeylPacket {
    energy: f64,
    k: Vec<f64>,
    scale: f64,
}

impl WeylPacket {
    pub fn new(energy: f64, k: &[f64], scale: f64) -> Result<Self> {
        if !(energy >= 0.0) {
            return Err(Error::Domain(format!(
                "packet energy must be nonnegative, got {energy}"
            )));
        }
        if !(1..=3).contains(&k.len()) {
            return Err(Error::Domain(format!(
                "wave vector must have 1 to 3 components, got {}",
                k.len()
            )));
        }
        let k2: f64 = k.iter().map(|x| x * x).sum();
        if (k2 - energy).abs() > 1e-10 {
            return Err(Error::Precondition(format!("|k|^2 = {k2} differs from E = {energy}")));
        }
        if !(scale > 0.0) {
            return Err(Error::Domain(format!("packet scale must be positive, got {scale}")));
        }
        Ok(WeylPacket {
            energy,
            k: k.to_vec(),
            scale,
        })
    }

    pub fn energy(&self) -> f64 {
        self.energy
    }

    pub fn dim(&self) -> usize {
        self.k.len()
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Bump `exp(-1/(1-|y|²))` on the unit ball, zero outside.
    pub fn bump(y2: f64) -> f64 {
        if y2 < 1.0 {
            (-1.0 / (1.0 - y2)).exp()
        } else {
            0.0
        }
    }

    /// Packet value at offset `x` from its center.
    pub fn value(&self, x: &[f64]) -> Complex64 {
        let d = self.dim();
        let y2: f64 = x.iter().map(|v| (v / self.scale).powi(2)).sum();
        let phase: f64 = self.k.iter().zip(x).map(|(k, v)| k * v).sum();
        let amp = self.scale.powf(-(d as f64) / 2.0) * Self::bump(y2);
        Complex64::from_polar(amp, phase)
    }

    /// The packet sampled on the grid points of `bx`, centered at the box center.
    pub fn sample(&self, points: &PointLattice, bx: &LatticeBox) -> Vec<Complex64> {
        let c = bx.center().0;
        let d = self.dim();
        (0..points.len())
            .map(|i| {
                let p = points.coords(i);
                let x: Vec<f64> = (0..d).map(|a| p[a] - c[a] as f64).collect();
                self.value(&x)
            })
            .collect()
    }
}

/// `‖(H - E)φ_r‖₂ / ‖φ_r‖₂` with `H = -Δ_h` or `-Δ_h + V` when a field is given.
pub fn weyl_residual(packet: &WeylPacket, bx: &LatticeBox, grid: &Grid, field: Option<&PotentialField>) -> Result<f64> {
    if bx.dim() != packet.dim() {
        return Err(Error::Precondition(format!(
            "packet dimension {} does not match box dimension {}",
            packet.dim(),
            bx.dim()
        )));
    }
    if f64::from(bx.side()) < 2.0 * packet.scale + 2.0 {
        return Err(Error::Precondition(format!(
            "box side {} cannot hold a packet of radius {} (need >= 2r + 2)",
            bx.side(),
            packet.scale
        )));
    }
    let resolution = grid.h() * packet.energy.sqrt().max(1.0);
    if resolution > WEYL_RESOLUTION {
        return Err(Error::Precondition(format!(
            "grid too coarse: h·max(1, sqrt E) = {resolution} exceeds {WEYL_RESOLUTION}"
        )));
    }
    let op = match field {
        Some(f) => assemble(f, bx, grid)?,
        None => assemble_free(bx, grid)?,
    };
    let points = op.points().expect("box assembly carries its points");
    let phi = packet.sample(points, bx);
    let hphi = op.apply_complex(&phi)?;
    let num: f64 = hphi
        .iter()
        .zip(&phi)
        .map(|(y, x)| (y - packet.energy * x).norm_sqr())
        .sum();
    let den: f64 = phi.iter().map(|x| x.norm_sqr()).sum();
    if den == 0.0 {
        return Err(Error::Precondition("packet vanishes on the grid".into()));
    }
    Ok((num / den).sqrt())
}
