//! Fat-tailed single-site law, decaying envelope, and seed-coupled fields.
//!
//! The single-site density is `f(x) = (δ/2)(1+|x|)^{-(1+δ)}`. It is symmetric,
//! bounded, and has `P(|ω| > R) = (1+R)^{-δ}`, so moments of order `≥ δ`
//! diverge. Its CDF and quantile are closed form.
//!
//! Site randomness is counter based: `ω_n` is a pure function of
//! `(seed, n)`. Fields realized on nested boxes with the same seed therefore
//! agree on their common cells.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::operator::{LatticeBox, Site};

/// Symmetric fat-tailed law with tail exponent `δ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FatTail {
    delta: f64,
}

impl FatTail {
    pub fn new(delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::Domain(format!("tail exponent must be positive, got {delta}")));
        }
        Ok(FatTail { delta })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn density(&self, x: f64) -> f64 {
        0.5 * self.delta * (1.0 + x.abs()).powf(-(1.0 + self.delta))
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x < 0.0 {
            0.5 * (1.0 - x).powf(-self.delta)
        } else {
            1.0 - 0.5 * (1.0 + x).powf(-self.delta)
        }
    }

    /// `P(|ω| > r)` for `r ≥ 0`.
    pub fn two_sided_tail(&self, r: f64) -> f64 {
        (1.0 + r.max(0.0)).powf(-self.delta)
    }

    /// `P(a < ω < b)`, computed from whichever tail keeps precision.
    pub fn interval_probability(&self, a: f64, b: f64) -> f64 {
        if b <= a {
            return 0.0;
        }
        if a >= 0.0 {
            // both in the right tail: difference of upper tails
            0.5 * ((1.0 + a).powf(-self.delta) - (1.0 + b).powf(-self.delta))
        } else if b <= 0.0 {
            0.5 * ((1.0 - b).powf(-self.delta) - (1.0 - a).powf(-self.delta))
        } else {
            1.0 - 0.5 * (1.0 - a).powf(-self.delta) - 0.5 * (1.0 + b).powf(-self.delta)
        }
    }

    pub fn quantile(&self, u: f64) -> Result<f64> {
        if !(u > 0.0 && u < 1.0) {
            return Err(Error::Domain(format!("quantile needs u in (0, 1), got {u}")));
        }
        let inv = -1.0 / self.delta;
        Ok(if u < 0.5 {
            -((2.0 * u).powf(inv) - 1.0)
        } else {
            (2.0 * (1.0 - u)).powf(inv) - 1.0
        })
    }
}

/// `a(n) = ‖n‖∞^{-α}` with `a(0) = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Envelope {
    alpha: f64,
}

impl Envelope {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha >= 0.0 && alpha.is_finite()) {
            return Err(Error::Domain(format!("decay exponent must be >= 0, got {alpha}")));
        }
        Ok(Envelope { alpha })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn at(&self, n: &Site) -> f64 {
        envelope_at(n, self)
    }
}

pub fn envelope_at(n: &Site, env: &Envelope) -> f64 {
    match n.sup_norm() {
        0 => 1.0,
        r => (r as f64).powf(-env.alpha),
    }
}

/// Dimension, decay exponent and tail exponent of the model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    dim: usize,
    envelope: Envelope,
    tail: FatTail,
}

impl ModelParams {
    pub fn new(dim: usize, alpha: f64, delta: f64) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::Domain(format!("dimension must be 1, 2 or 3, got {dim}")));
        }
        Ok(ModelParams {
            dim,
            envelope: Envelope::new(alpha)?,
            tail: FatTail::new(delta)?,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn alpha(&self) -> f64 {
        self.envelope.alpha
    }

    pub fn delta(&self) -> f64 {
        self.tail.delta
    }

    pub fn envelope(&self) -> &Envelope {
        &self.envelope
    }

    pub fn tail(&self) -> &FatTail {
        &self.tail
    }

    /// `(2 + α) δ > d`: the standing hypothesis under which the operator is
    /// essentially self-adjoint.
    pub fn satisfies_hypothesis(&self) -> bool {
        (2.0 + self.alpha()) * self.delta() > self.dim as f64
    }

    /// `αδ ≤ d`: negative spectrum is essential.
    pub fn is_essential_regime(&self) -> bool {
        self.alpha() * self.delta() <= self.dim as f64
    }

    /// `(α - 2) δ > d`: only finitely many negative eigenvalues.
    pub fn is_finite_negative_regime(&self) -> bool {
        (self.alpha() - 2.0) * self.delta() > self.dim as f64
    }
}

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Uniform value in the open interval (0, 1) determined by `(seed, n)`.
pub fn site_uniform(seed: u64, n: &Site) -> f64 {
    let mut h = splitmix64(seed);
    for (axis, &c) in n.0.iter().enumerate() {
        h = splitmix64(h ^ (c as u64).wrapping_add((axis as u64 + 1).wrapping_mul(GOLDEN)));
    }
    ((h >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

/// Derives an independent seed for a trial or realization index.
pub fn derive_seed(seed: u64, index: u64) -> u64 {
    splitmix64(splitmix64(seed) ^ splitmix64(index.wrapping_mul(GOLDEN)))
}

pub fn sample_site(seed: u64, n: &Site, dist: &FatTail) -> f64 {
    dist.quantile(site_uniform(seed, n))
        .expect("site uniforms lie strictly inside (0, 1)")
}

/// The potential `v_n = a_n ω_n` on the cells of a box.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialField {
    params: ModelParams,
    seed: Option<u64>,
    lattice_box: LatticeBox,
    values: Vec<f64>,
}

impl PotentialField {
    /// Field with explicitly given cell values in the box's lexicographic order.
    pub fn from_values(params: ModelParams, lattice_box: LatticeBox, values: Vec<f64>) -> Result<Self> {
        if lattice_box.dim() != params.dim() {
            return Err(Error::Precondition("box and model dimension differ".into()));
        }
        if values.len() != lattice_box.num_cells() {
            return Err(Error::Precondition(format!(
                "expected {} cell values, got {}",
                lattice_box.num_cells(),
                values.len()
            )));
        }
        Ok(PotentialField {
            params,
            seed: None,
            lattice_box,
            values,
        })
    }

    /// Field with values `f(n)` at every cell of the box.
    pub fn from_fn(params: ModelParams, lattice_box: LatticeBox, f: impl Fn(&Site) -> f64) -> Result<Self> {
        let values = lattice_box.cells().map(|n| f(&n)).collect();
        Self::from_values(params, lattice_box, values)
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    /// Seed of a sampled field; `None` for hand-built fields.
    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn lattice_box(&self) -> &LatticeBox {
        &self.lattice_box
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, n: &Site) -> Option<f64> {
        self.lattice_box.cell_index(n).map(|i| self.values[i])
    }

    /// `(site, v_n)` pairs in lexicographic order.
    pub fn iter(&self) -> impl Iterator<Item = (Site, f64)> + '_ {
        self.lattice_box.cells().zip(self.values.iter().copied())
    }

    /// Restriction to a sub-box.
    pub fn restrict(&self, sub: &LatticeBox) -> Result<Self> {
        if !self.lattice_box.contains_box(sub) {
            return Err(Error::Precondition(format!(
                "{sub:?} is not inside {:?}",
                self.lattice_box
            )));
        }
        let values = sub.cells().map(|n| self.value(&n).unwrap()).collect();
        Ok(PotentialField {
            params: self.params,
            seed: self.seed,
            lattice_box: *sub,
            values,
        })
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

pub fn realize_field(seed: u64, params: &ModelParams, lattice_box: &LatticeBox) -> Result<PotentialField> {
    if lattice_box.dim() != params.dim() {
        return Err(Error::Precondition("box and model dimension differ".into()));
    }
    let values = lattice_box
        .cells()
        .map(|n| envelope_at(&n, &params.envelope) * sample_site(seed, &n, &params.tail))
        .collect();
    Ok(PotentialField {
        params: *params,
        seed: Some(seed),
        lattice_box: *lattice_box,
        values,
    })
}

/// Sites with `ω_n < 0` and `|v_n| > ‖n‖∞^e`.
#[derive(Debug, Clone, PartialEq)]
pub struct Exceedances {
    pub count: usize,
    pub sites: Vec<Site>,
}

/// Counts sites `0 < ‖n‖∞ ≤ radius` with a negative coupling whose magnitude
/// exceeds `‖n‖∞^exponent`.
///
/// `exponent = 2 - ε` gives the `o(|x|²)` growth test on the negative part;
/// `exponent = -ε` gives the decay test behind finitely many negative
/// eigenvalues.
pub fn tail_exceedance_count(field: &PotentialField, exponent: f64, radius: u64) -> Result<Exceedances> {
    if radius == 0 {
        return Err(Error::Precondition("radius must be positive".into()));
    }
    if !field.lattice_box.covers_ball(radius) {
        return Err(Error::Precondition(format!(
            "field box {:?} does not contain every site with |n| <= {radius}",
            field.lattice_box
        )));
    }
    let sites: Vec<Site> = field
        .iter()
        .filter(|(n, v)| {
            let r = n.sup_norm();
            // a_n > 0, so sign(v_n) = sign(ω_n)
            r > 0 && r <= radius && *v < 0.0 && v.abs() > (r as f64).powf(exponent)
        })
        .map(|(n, _)| n)
        .collect();
    Ok(Exceedances {
        count: sites.len(),
        sites,
    })
}

/// The event `{|v_j| < ε for ‖j - m‖∞ < k}`, optionally with `v_m` required
/// to lie in a target window instead.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EventSpec {
    pub center: Site,
    pub radius: u32,
    pub eps: f64,
    pub window: Option<(f64, f64)>,
}

impl EventSpec {
    pub fn new(center: Site, radius: u32, eps: f64) -> Self {
        EventSpec {
            center,
            radius,
            eps,
            window: None,
        }
    }

    pub fn with_window(mut self, lo: f64, hi: f64) -> Self {
        self.window = Some((lo, hi));
        self
    }

    fn validate(&self) -> Result<()> {
        if self.radius == 0 {
            return Err(Error::Domain("event radius must be positive".into()));
        }
        if !(self.eps > 0.0) {
            return Err(Error::Domain(format!("eps must be positive, got {}", self.eps)));
        }
        if let Some((lo, hi)) = self.window {
            if !(lo < hi && hi < 0.0) {
                return Err(Error::Domain(format!(
                    "target window ({lo}, {hi}) must be a nonempty interval strictly below 0"
                )));
            }
        }
        Ok(())
    }

    /// Sites `j` with `‖j - m‖∞ < k`.
    pub fn sites(&self, dim: usize) -> Vec<Site> {
        let r = i64::from(self.radius) - 1;
        let mut out = Vec::new();
        let span = |a: usize| if a < dim { -r..=r } else { 0..=0 };
        for z in span(2) {
            for y in span(1) {
                for x in span(0) {
                    let c = self.center.0;
                    out.push(Site([c[0] + x, c[1] + y, c[2] + z]));
                }
            }
        }
        out
    }

    /// Whether a realized field lies in the event.
    pub fn occurs(&self, dim: usize, value: impl Fn(&Site) -> f64) -> bool {
        self.sites(dim).iter().all(|j| {
            let v = value(j);
            match self.window {
                Some((lo, hi)) if *j == self.center => lo < v && v < hi,
                _ => v.abs() < self.eps,
            }
        })
    }
}

/// Exact probability of the event by independence of the sites.
pub fn event_probability_exact(spec: &EventSpec, params: &ModelParams) -> Result<f64> {
    spec.validate()?;
    let tail = params.tail();
    let mut p = 1.0;
    for j in spec.sites(params.dim()) {
        let a = envelope_at(&j, params.envelope());
        let factor = match spec.window {
            Some((lo, hi)) if j == spec.center => tail.interval_probability(lo / a, hi / a),
            _ => 1.0 - tail.two_sided_tail(spec.eps / a),
        };
        p *= factor;
    }
    Ok(p)
}

/// `(1 - C / (ε^δ ‖m‖∞^{αδ}))₊^{k^d}`, the approximate lower bound stated
/// for `‖m‖∞ ≫ k`.
pub fn event_lower_bound_approx(spec: &EventSpec, params: &ModelParams, c: f64) -> f64 {
    let m = spec.center.sup_norm().max(1) as f64;
    let base = 1.0 - c / (spec.eps.powf(params.delta()) * m.powf(params.alpha() * params.delta()));
    base.max(0.0).powi((spec.radius as i32).pow(params.dim() as u32))
}

/// `∏_{‖j-m‖∞<k} (1 - 1/(ε^δ ‖j‖∞^{αδ}))₊`, a rigorous lower bound for the
/// window-free event since `P(|ω| ≥ R) ≤ R^{-δ}`.
pub fn event_lower_bound_product(spec: &EventSpec, params: &ModelParams) -> f64 {
    spec.sites(params.dim())
        .iter()
        .map(|j| {
            let a = envelope_at(j, params.envelope());
            (1.0 - (spec.eps / a).powf(-params.delta())).max(0.0)
        })
        .product()
}

/// Monte Carlo estimate with its binomial 3σ half-width.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub estimate: f64,
    pub half_width: f64,
    pub trials: usize,
}

impl McEstimate {
    pub fn from_hits(hits: usize, trials: usize) -> Self {
        let p = hits as f64 / trials as f64;
        McEstimate {
            estimate: p,
            half_width: 3.0 * (p * (1.0 - p) / trials as f64).sqrt(),
            trials,
        }
    }

    /// True if `value` lies within the 3σ band, widened to the resolution of
    /// one trial so degenerate frequencies (0 or 1) are handled.
    pub fn covers(&self, value: f64) -> bool {
        let floor = 3.0 * (value * (1.0 - value) / self.trials as f64).sqrt();
        (self.estimate - value).abs() <= self.half_width.max(floor) + 1.0 / self.trials as f64
    }
}

/// Frequency of the event over independent realizations.
///
/// Trial `t` draws the field with seed `derive_seed(seed, t)`; only the event
/// sites are sampled.
pub fn event_probability_mc(spec: &EventSpec, params: &ModelParams, seed: u64, trials: usize) -> Result<McEstimate> {
    spec.validate()?;
    if trials < 100 {
        return Err(Error::Precondition(format!("need at least 100 trials, got {trials}")));
    }
    let sites = spec.sites(params.dim());
    let weights: Vec<f64> = sites.iter().map(|j| envelope_at(j, params.envelope())).collect();
    let hits = (0..trials as u64)
        .filter(|&t| {
            let s = derive_seed(seed, t);
            spec.occurs(params.dim(), |j| {
                let k = sites.iter().position(|x| x == j).unwrap();
                weights[k] * sample_site(s, j, params.tail())
            })
        })
        .count();
    Ok(McEstimate::from_hits(hits, trials))
}

/// Independent draws `ω` from a seeded stream, for ensemble statistics that do
/// not need site coupling.
pub fn sample_stream(seed: u64, count: usize, dist: &FatTail) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let u: f64 = rng.random_range(f64::EPSILON..1.0);
            dist.quantile(u).unwrap()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cdf_values() {
        let f = FatTail::new(1.0).unwrap();
        assert_eq!(f.cdf(0.0), 0.5);
        assert!((f.cdf(1.0) - 0.75).abs() < 1e-15);
        assert!((f.cdf(-9.0) - 0.05).abs() < 1e-15);
    }

    #[test]
    fn quantile_values() {
        let f = FatTail::new(1.0).unwrap();
        assert_eq!(f.quantile(0.5).unwrap(), 0.0);
        assert!((f.quantile(0.75).unwrap() - 1.0).abs() < 1e-15);
        assert!((f.quantile(0.1).unwrap() + 4.0).abs() < 1e-14);
        assert!(f.quantile(0.0).is_err());
        assert!(f.quantile(1.0).is_err());
        assert!(f.quantile(f64::NAN).is_err());
    }

    #[test]
    fn bad_parameters_are_rejected() {
        assert!(FatTail::new(0.0).is_err());
        assert!(Envelope::new(-1.0).is_err());
        assert!(ModelParams::new(4, 1.0, 1.0).is_err());
    }

    #[test]
    fn envelope_values() {
        let e2 = Envelope::new(2.0).unwrap();
        assert_eq!(envelope_at(&Site::ORIGIN, &e2), 1.0);
        assert_eq!(envelope_at(&Site::new(&[3, -4]), &e2), 0.0625);
        assert_eq!(envelope_at(&Site::new(&[7]), &Envelope::new(0.0).unwrap()), 1.0);
    }

    #[test]
    fn hypothesis_flag_is_derived() {
        assert!(ModelParams::new(1, 0.0, 0.6).unwrap().satisfies_hypothesis());
        assert!(!ModelParams::new(3, 0.5, 1.0).unwrap().satisfies_hypothesis());
        assert!(ModelParams::new(1, 0.5, 1.0).unwrap().is_essential_regime());
        assert!(ModelParams::new(1, 4.0, 1.0).unwrap().is_finite_negative_regime());
    }

    #[test]
    fn site_sampling_is_deterministic() {
        let f = FatTail::new(1.5).unwrap();
        let n = Site::new(&[3, -7, 2]);
        assert_eq!(sample_site(11, &n, &f), sample_site(11, &n, &f));
        assert_ne!(sample_site(11, &n, &f), sample_site(12, &n, &f));
        assert_ne!(sample_site(11, &n, &f), sample_site(11, &Site::new(&[-7, 3, 2]), &f));
    }

    #[test]
    fn hand_built_exceedance_example() {
        let p = ModelParams::new(1, 1.0, 1.0).unwrap();
        let b = LatticeBox::centered(1, 8).unwrap();
        let field = PotentialField::from_fn(p, b, |n| match n.0[0] {
            1 => -2.0,
            2 => -0.4,
            3 => 5.0,
            _ => 0.0,
        })
        .unwrap();
        let ex = tail_exceedance_count(&field, 0.0, 3).unwrap();
        assert_eq!(ex.count, 1);
        assert_eq!(ex.sites, vec![Site::new(&[1])]);
        assert!(tail_exceedance_count(&field, 0.0, 5).is_err());
    }

    #[test]
    fn positive_field_has_no_exceedances() {
        let p = ModelParams::new(2, 1.0, 1.0).unwrap();
        let b = LatticeBox::centered(2, 10).unwrap();
        let field = PotentialField::from_fn(p, b, |_| 100.0).unwrap();
        assert_eq!(tail_exceedance_count(&field, -1.0, 4).unwrap().count, 0);
    }

    #[test]
    fn event_worked_values() {
        let p = ModelParams::new(1, 1.0, 1.0).unwrap();
        let one = EventSpec::new(Site::new(&[10]), 1, 0.1);
        assert!((event_probability_exact(&one, &p).unwrap() - 0.5).abs() < 1e-15);
        let three = EventSpec::new(Site::new(&[10]), 2, 0.1);
        // independent hand product over j = 9, 10, 11
        let expected: f64 = [9.0f64, 10.0, 11.0]
            .iter()
            .map(|j| 1.0 - 1.0 / (1.0 + 0.1 * j))
            .product();
        assert!((event_probability_exact(&three, &p).unwrap() - expected).abs() < 1e-15);
        assert!((expected - 0.1241).abs() < 5e-5);
    }

    #[test]
    fn window_must_be_negative() {
        let p = ModelParams::new(1, 1.0, 1.0).unwrap();
        let bad = EventSpec::new(Site::new(&[10]), 2, 0.1).with_window(-0.5, 0.1);
        assert!(event_probability_exact(&bad, &p).is_err());
        let good = EventSpec::new(Site::new(&[10]), 2, 0.1).with_window(-0.5, -0.3);
        let pr = event_probability_exact(&good, &p).unwrap();
        // center factor is P(ω ∈ (-5, -3)) = 0.5 (1/4 - 1/6)
        let expected = 0.5 * (0.25 - 1.0 / 6.0) * (1.0 - 1.0 / 1.9) * (1.0 - 1.0 / 2.1);
        assert!((pr - expected).abs() < 1e-15);
    }

    #[test]
    fn mc_requires_enough_trials() {
        let p = ModelParams::new(1, 1.0, 1.0).unwrap();
        let spec = EventSpec::new(Site::new(&[10]), 1, 0.1);
        assert!(event_probability_mc(&spec, &p, 1, 99).is_err());
        let huge = EventSpec::new(Site::new(&[10]), 2, 1e9);
        assert_eq!(event_probability_mc(&huge, &p, 1, 500).unwrap().estimate, 1.0);
    }
}
