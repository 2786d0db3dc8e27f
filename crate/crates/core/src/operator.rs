//! Finite-difference assembly of the finite-volume operator `-Δ + V`.
//!
//! Points live on the lattice `x = p / M` with integer numerators `p`, so the
//! cell lookup `cell(x) = ⌈x⌉ - 1` (the `(0,1]^d` convention) is exact integer
//! arithmetic: `cell = floor((p - 1) / M)`.
//!
//! A box `Λ_L(c) = c + (-L/2, L/2]^d` carries `M·L - 1` interior points per
//! axis for the Dirichlet problem; the wall points at `c ± L/2` are the zero
//! boundary values and are not unknowns.

use std::io::Write;

use num_complex::Complex64;

use crate::disorder::PotentialField;
use crate::error::{Error, Result};

/// Largest number of unknowns `assemble` will allocate.
pub const MAX_DIMENSION: usize = 1 << 24;

/// A lattice site `n ∈ Z^d`, padded with zeros up to three coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Site(pub [i64; 3]);

impl Site {
    pub const ORIGIN: Site = Site([0, 0, 0]);

    /// Builds a site from up to three coordinates; missing ones are zero.
    pub fn new(coords: &[i64]) -> Self {
        assert!(coords.len() <= 3, "at most three coordinates");
        let mut c = [0; 3];
        c[..coords.len()].copy_from_slice(coords);
        Site(c)
    }

    pub fn sup_norm(&self) -> u64 {
        self.0.iter().map(|c| c.unsigned_abs()).max().unwrap_or(0)
    }

    /// `‖self - other‖∞`.
    pub fn sup_dist(&self, other: &Site) -> u64 {
        (0..3)
            .map(|i| (self.0[i] - other.0[i]).unsigned_abs())
            .max()
            .unwrap_or(0)
    }
}

impl std::fmt::Display for Site {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {}, {})", self.0[0], self.0[1], self.0[2])
    }
}

/// The cube `Λ_L(c) = c + (-L/2, L/2]^d` in lattice units.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LatticeBox {
    dim: usize,
    center: Site,
    side: u32,
}

impl LatticeBox {
    pub fn new(dim: usize, center: Site, side: u32) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::Domain(format!("dimension must be 1, 2 or 3, got {dim}")));
        }
        if side < 2 || !side.is_multiple_of(2) {
            return Err(Error::Domain(format!(
                "box side must be an even integer >= 2, got {side}"
            )));
        }
        if center.0[dim..].iter().any(|&c| c != 0) {
            return Err(Error::Domain(format!(
                "center {center} has nonzero coordinates beyond dimension {dim}"
            )));
        }
        Ok(LatticeBox { dim, center, side })
    }

    /// `Λ_L(0)`.
    pub fn centered(dim: usize, side: u32) -> Result<Self> {
        Self::new(dim, Site::ORIGIN, side)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn center(&self) -> Site {
        self.center
    }

    pub fn side(&self) -> u32 {
        self.side
    }

    /// Inclusive range of cell indices `n_axis` whose cell `n + (0,1]` lies in the box.
    pub fn cell_range(&self, axis: usize) -> (i64, i64) {
        if axis >= self.dim {
            return (0, 0);
        }
        let half = i64::from(self.side / 2);
        let c = self.center.0[axis];
        (c - half, c + half - 1)
    }

    pub fn num_cells(&self) -> usize {
        (self.side as usize).pow(self.dim as u32)
    }

    pub fn contains_site(&self, n: &Site) -> bool {
        (0..3).all(|a| {
            let (lo, hi) = self.cell_range(a);
            (lo..=hi).contains(&n.0[a])
        })
    }

    pub fn contains_box(&self, other: &LatticeBox) -> bool {
        other.dim == self.dim
            && (0..self.dim).all(|a| {
                let (lo, hi) = self.cell_range(a);
                let (olo, ohi) = other.cell_range(a);
                lo <= olo && ohi <= hi
            })
    }

    /// Position of `n` in the lexicographic cell order (axis 0 fastest).
    pub fn cell_index(&self, n: &Site) -> Option<usize> {
        if !self.contains_site(n) {
            return None;
        }
        let side = self.side as usize;
        let mut idx = 0usize;
        for a in (0..self.dim).rev() {
            let (lo, _) = self.cell_range(a);
            idx = idx * side + (n.0[a] - lo) as usize;
        }
        Some(idx)
    }

    pub fn cell_at(&self, mut idx: usize) -> Site {
        let side = self.side as usize;
        let mut c = [0i64; 3];
        for (a, slot) in c.iter_mut().enumerate().take(self.dim) {
            let (lo, _) = self.cell_range(a);
            *slot = lo + (idx % side) as i64;
            idx /= side;
        }
        Site(c)
    }

    /// All cells of the box in lexicographic order.
    pub fn cells(&self) -> impl Iterator<Item = Site> + '_ {
        (0..self.num_cells()).map(|i| self.cell_at(i))
    }

    /// True if every site with `‖n‖∞ ≤ radius` lies in the box.
    pub fn covers_ball(&self, radius: u64) -> bool {
        let r = radius as i64;
        (0..self.dim).all(|a| {
            let (lo, hi) = self.cell_range(a);
            lo <= -r && r <= hi
        })
    }
}

/// Uniform grid with `M` points per unit length.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Grid {
    points_per_unit: u32,
}

impl Grid {
    pub fn new(points_per_unit: u32) -> Result<Self> {
        if points_per_unit == 0 {
            return Err(Error::Domain("grid needs at least one point per unit".into()));
        }
        Ok(Grid { points_per_unit })
    }

    pub fn points_per_unit(&self) -> u32 {
        self.points_per_unit
    }

    pub fn h(&self) -> f64 {
        1.0 / f64::from(self.points_per_unit)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryCondition {
    Dirichlet,
    /// Graph-Laplacian restriction to a single unit cell.
    NeumannBlock,
}

/// Where the diagonal potential of an operator came from.
#[derive(Debug, Clone, PartialEq)]
pub enum PotentialSource {
    Field { seed: Option<u64> },
    SingleWell { depth: f64 },
    Constant(f64),
    Explicit,
}

/// Regular point set `x = (origin + i) / M`, `i = 0..per_axis` on each axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PointLattice {
    dim: usize,
    per_axis: usize,
    origin: [i64; 3],
    m: u32,
}

impl PointLattice {
    /// Interior Dirichlet points of a box: `M·L - 1` per axis.
    pub fn for_box(b: &LatticeBox, grid: &Grid) -> Result<Self> {
        let m = i64::from(grid.points_per_unit);
        let per_axis = (grid.points_per_unit as usize)
            .checked_mul(b.side as usize)
            .map(|x| x - 1)
            .ok_or(Error::Size {
                what: "points per axis",
                requested: usize::MAX,
                limit: MAX_DIMENSION,
            })?;
        let mut origin = [0i64; 3];
        for (a, o) in origin.iter_mut().enumerate().take(b.dim) {
            let (lo, _) = b.cell_range(a);
            *o = m * lo + 1;
        }
        let lat = PointLattice {
            dim: b.dim,
            per_axis,
            origin,
            m: grid.points_per_unit,
        };
        lat.checked_len()?;
        Ok(lat)
    }

    /// The `M^d` points of the unit cell `(0, 1]^d`.
    pub fn for_cell(dim: usize, grid: &Grid) -> Result<Self> {
        let lat = PointLattice {
            dim,
            per_axis: grid.points_per_unit as usize,
            origin: std::array::from_fn(|a| i64::from(a < dim)),
            m: grid.points_per_unit,
        };
        lat.checked_len()?;
        Ok(lat)
    }

    fn checked_len(&self) -> Result<usize> {
        let mut n: usize = 1;
        for _ in 0..self.dim {
            n = n
                .checked_mul(self.per_axis)
                .filter(|&n| n <= MAX_DIMENSION)
                .ok_or(Error::Size {
                    what: "operator dimension",
                    requested: self.per_axis.saturating_pow(self.dim as u32),
                    limit: MAX_DIMENSION,
                })?;
        }
        Ok(n)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn per_axis(&self) -> usize {
        self.per_axis
    }

    pub fn len(&self) -> usize {
        self.per_axis.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn points_per_unit(&self) -> u32 {
        self.m
    }

    /// Per-axis offsets of point `idx` (axis 0 fastest).
    pub fn multi_index(&self, mut idx: usize) -> [usize; 3] {
        let mut out = [0usize; 3];
        for o in out.iter_mut().take(self.dim) {
            *o = idx % self.per_axis;
            idx /= self.per_axis;
        }
        out
    }

    pub fn linear_index(&self, mi: &[usize; 3]) -> usize {
        let mut idx = 0;
        for a in (0..self.dim).rev() {
            idx = idx * self.per_axis + mi[a];
        }
        idx
    }

    /// Integer numerators `p` with `x = p / M`.
    pub fn numerators(&self, idx: usize) -> [i64; 3] {
        let mi = self.multi_index(idx);
        let mut p = [0i64; 3];
        for a in 0..self.dim {
            p[a] = self.origin[a] + mi[a] as i64;
        }
        p
    }

    /// Coordinates in lattice units.
    pub fn coords(&self, idx: usize) -> [f64; 3] {
        let p = self.numerators(idx);
        let m = f64::from(self.m);
        [p[0] as f64 / m, p[1] as f64 / m, p[2] as f64 / m]
    }

    /// The cell `⌈x⌉ - 1` containing point `idx`.
    pub fn cell_of(&self, idx: usize) -> Site {
        let p = self.numerators(idx);
        let m = i64::from(self.m);
        let mut c = [0i64; 3];
        for a in 0..self.dim {
            c[a] = (p[a] - 1).div_euclid(m);
        }
        Site(c)
    }

    /// True if the point sits one grid step from the outer wall on some axis.
    pub fn is_boundary_layer(&self, idx: usize) -> bool {
        let mi = self.multi_index(idx);
        (0..self.dim).any(|a| mi[a] == 0 || mi[a] + 1 == self.per_axis)
    }
}

/// Sparse symmetric matrix of a finite-volume operator.
///
/// Entries are kept as full symmetric CSR with sorted column indices. Rows
/// follow the lexicographic point order, so the half-bandwidth is
/// `per_axis^(d-1)` for stencil assemblies.
#[derive(Debug, Clone)]
pub struct AssembledOperator {
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
    bandwidth: usize,
    points: Option<PointLattice>,
    lattice_box: Option<LatticeBox>,
    grid: Option<Grid>,
    boundary: BoundaryCondition,
    potential: PotentialSource,
}

impl AssembledOperator {
    fn stencil(
        points: PointLattice,
        grid: Grid,
        boundary: BoundaryCondition,
        potential: PotentialSource,
        lattice_box: Option<LatticeBox>,
        mut v: impl FnMut(usize) -> f64,
    ) -> Self {
        let n = points.len();
        let d = points.dim;
        let inv_h2 = f64::from(grid.points_per_unit).powi(2);
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::with_capacity(n * (2 * d + 1));
        let mut vals = Vec::with_capacity(n * (2 * d + 1));
        let mut stride = [1usize; 3];
        for a in 1..d {
            stride[a] = stride[a - 1] * points.per_axis;
        }
        row_ptr.push(0);
        let mut row: Vec<(usize, f64)> = Vec::with_capacity(2 * d + 1);
        for i in 0..n {
            let mi = points.multi_index(i);
            row.clear();
            let mut degree = 0usize;
            for a in 0..d {
                if mi[a] > 0 {
                    row.push((i - stride[a], -inv_h2));
                    degree += 1;
                }
                if mi[a] + 1 < points.per_axis {
                    row.push((i + stride[a], -inv_h2));
                    degree += 1;
                }
            }
            let kinetic = match boundary {
                BoundaryCondition::Dirichlet => (2 * d) as f64 * inv_h2,
                BoundaryCondition::NeumannBlock => degree as f64 * inv_h2,
            };
            row.push((i, kinetic + v(i)));
            row.sort_by_key(|e| e.0);
            for &(j, x) in &row {
                cols.push(j);
                vals.push(x);
            }
            row_ptr.push(cols.len());
        }
        let bandwidth = if d > 1 && n > 0 {
            stride[d - 1]
        } else {
            usize::from(n > 1)
        };
        AssembledOperator {
            row_ptr,
            cols,
            vals,
            bandwidth,
            points: Some(points),
            lattice_box,
            grid: Some(grid),
            boundary,
            potential,
        }
    }

    /// Builds a symmetric operator from upper-or-lower triangle triples.
    ///
    /// Duplicate entries are summed. Useful for hand-written test matrices.
    pub fn from_triples(dim: usize, entries: &[(usize, usize, f64)]) -> Result<Self> {
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); dim];
        for &(i, j, v) in entries {
            if i >= dim || j >= dim {
                return Err(Error::Domain(format!("entry ({i}, {j}) outside a {dim}x{dim} matrix")));
            }
            rows[i].push((j, v));
            if i != j {
                rows[j].push((i, v));
            }
        }
        let mut row_ptr = vec![0];
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        let mut bandwidth = 0;
        for (i, mut r) in rows.into_iter().enumerate() {
            r.sort_by_key(|e| e.0);
            let mut last: Option<usize> = None;
            for (j, v) in r {
                if last == Some(j) {
                    *vals.last_mut().unwrap() += v;
                } else {
                    cols.push(j);
                    vals.push(v);
                    last = Some(j);
                    bandwidth = bandwidth.max(i.abs_diff(j));
                }
            }
            row_ptr.push(cols.len());
        }
        Ok(AssembledOperator {
            row_ptr,
            cols,
            vals,
            bandwidth,
            points: None,
            lattice_box: None,
            grid: None,
            boundary: BoundaryCondition::Dirichlet,
            potential: PotentialSource::Explicit,
        })
    }

    /// Symmetric tridiagonal matrix with constant diagonal and off-diagonal.
    pub fn tridiagonal(dim: usize, diag: f64, off: f64) -> Self {
        let mut t = Vec::with_capacity(2 * dim);
        for i in 0..dim {
            t.push((i, i, diag));
            if i + 1 < dim {
                t.push((i, i + 1, off));
            }
        }
        Self::from_triples(dim, &t).expect("indices in range")
    }

    pub fn diagonal_matrix(diag: &[f64]) -> Self {
        let t: Vec<_> = diag.iter().enumerate().map(|(i, &v)| (i, i, v)).collect();
        Self::from_triples(diag.len(), &t).expect("indices in range")
    }

    pub fn dimension(&self) -> usize {
        self.row_ptr.len() - 1
    }

    /// Half-bandwidth: `max |i - j|` over stored entries.
    pub fn bandwidth(&self) -> usize {
        self.bandwidth
    }

    pub fn points(&self) -> Option<&PointLattice> {
        self.points.as_ref()
    }

    pub fn lattice_box(&self) -> Option<&LatticeBox> {
        self.lattice_box.as_ref()
    }

    pub fn grid(&self) -> Option<&Grid> {
        self.grid.as_ref()
    }

    pub fn boundary(&self) -> BoundaryCondition {
        self.boundary
    }

    pub fn potential(&self) -> &PotentialSource {
        &self.potential
    }

    /// Stored entries of row `i` as `(column, value)`.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[r.clone()].iter().copied().zip(self.vals[r].iter().copied())
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.cols[r.clone()].binary_search(&j) {
            Ok(k) => self.vals[r.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dimension()).map(|i| self.entry(i, i)).collect()
    }

    /// Upper-triangle triples `(i, j, value)` with `i <= j`.
    pub fn triples(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.dimension()).flat_map(move |i| self.row(i).filter(move |&(j, _)| j >= i).map(move |(j, v)| (i, j, v)))
    }

    /// Writes one `i j value` line per stored upper-triangle entry.
    pub fn export_triples<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for (i, j, v) in self.triples() {
            writeln!(w, "{i} {j} {v:.16e}")?;
        }
        Ok(())
    }

    /// `max_i Σ_j |a_ij|`; equals the 1-norm by symmetry.
    pub fn norm_inf(&self) -> f64 {
        (0..self.dimension())
            .map(|i| self.row(i).map(|(_, v)| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Gershgorin interval enclosing the spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..self.dimension() {
            let mut d = 0.0;
            let mut r = 0.0;
            for (j, v) in self.row(i) {
                if j == i {
                    d = v;
                } else {
                    r += v.abs();
                }
            }
            lo = lo.min(d - r);
            hi = hi.max(d + r);
        }
        (lo, hi)
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let n = self.dimension();
        let mut a = vec![vec![0.0; n]; n];
        for (i, row) in a.iter_mut().enumerate() {
            for (j, v) in self.row(i) {
                row[j] = v;
            }
        }
        a
    }

    /// `y = H x` into a preallocated buffer.
    pub fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.dimension());
        for (i, yi) in y.iter_mut().enumerate() {
            let r = self.row_ptr[i]..self.row_ptr[i + 1];
            *yi = self.cols[r.clone()]
                .iter()
                .zip(&self.vals[r])
                .map(|(&j, &v)| v * x[j])
                .sum();
        }
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_len(x.len())?;
        let mut y = vec![0.0; x.len()];
        self.apply_into(x, &mut y);
        Ok(y)
    }

    /// Applies the real matrix to real and imaginary parts separately.
    pub fn apply_complex(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        self.check_len(x.len())?;
        let re: Vec<f64> = x.iter().map(|z| z.re).collect();
        let im: Vec<f64> = x.iter().map(|z| z.im).collect();
        let mut yr = vec![0.0; x.len()];
        let mut yi = vec![0.0; x.len()];
        self.apply_into(&re, &mut yr);
        self.apply_into(&im, &mut yi);
        Ok(yr.into_iter().zip(yi).map(|(r, i)| Complex64::new(r, i)).collect())
    }

    /// `⟨u, H u⟩`.
    pub fn quadratic_form(&self, u: &[f64]) -> Result<f64> {
        let hu = self.apply(u)?;
        Ok(u.iter().zip(&hu).map(|(a, b)| a * b).sum())
    }

    /// Sum over unit cells of the decoupled cell forms.
    ///
    /// Each cell contributes the graph-Laplacian form of the edges joining two
    /// of its own points plus `v_cell Σ u_i²`; edges crossing a cell face and
    /// the couplings to the Dirichlet wall are dropped. For a Dirichlet
    /// assembly the result never exceeds [`quadratic_form`](Self::quadratic_form).
    pub fn decoupled_cell_form(&self, u: &[f64]) -> Result<f64> {
        self.check_len(u.len())?;
        let (points, grid) = match (&self.points, &self.grid, self.boundary) {
            (Some(p), Some(g), BoundaryCondition::Dirichlet) => (p, g),
            _ => {
                return Err(Error::Precondition(
                    "cell decomposition needs a Dirichlet grid assembly".into(),
                ))
            }
        };
        let d = points.dim;
        let inv_h2 = f64::from(grid.points_per_unit).powi(2);
        let kinetic = (2 * d) as f64 * inv_h2;
        let mut total = 0.0;
        for i in 0..self.dimension() {
            let ci = points.cell_of(i);
            let v = self.entry(i, i) - kinetic;
            total += v * u[i] * u[i];
            for (j, x) in self.row(i) {
                if j > i && points.cell_of(j) == ci {
                    total += -x * (u[i] - u[j]).powi(2);
                }
            }
        }
        Ok(total)
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.dimension() {
            return Err(Error::Precondition(format!(
                "vector length {len} does not match operator dimension {}",
                self.dimension()
            )));
        }
        Ok(())
    }
}

/// Dirichlet discretization of `-Δ + V^ω` on `bx`.
pub fn assemble(field: &PotentialField, bx: &LatticeBox, grid: &Grid) -> Result<AssembledOperator> {
    if field.params().dim() != bx.dim() || !field.lattice_box().contains_box(bx) {
        return Err(Error::Precondition(format!(
            "field box {:?} does not cover operator box {:?}",
            field.lattice_box(),
            bx
        )));
    }
    let points = PointLattice::for_box(bx, grid)?;
    Ok(AssembledOperator::stencil(
        points,
        *grid,
        BoundaryCondition::Dirichlet,
        PotentialSource::Field { seed: field.seed() },
        Some(*bx),
        |i| field.value(&points.cell_of(i)).expect("cell inside covered box"),
    ))
}

/// Dirichlet discretization of `-Δ` on `bx`.
pub fn assemble_free(bx: &LatticeBox, grid: &Grid) -> Result<AssembledOperator> {
    let points = PointLattice::for_box(bx, grid)?;
    Ok(AssembledOperator::stencil(
        points,
        *grid,
        BoundaryCondition::Dirichlet,
        PotentialSource::Constant(0.0),
        Some(*bx),
        |_| 0.0,
    ))
}

/// Dirichlet discretization of `-Δ + λ χ_[0,1)^d` on `bx`.
pub fn assemble_single_well(lambda: f64, bx: &LatticeBox, grid: &Grid) -> Result<AssembledOperator> {
    let quarter = f64::from(bx.side()) / 4.0;
    for a in 0..bx.dim() {
        let (lo, hi) = bx.cell_range(a);
        // the box spans (lo, hi + 1]; the well spans [0, 1)
        let left = -(lo as f64);
        let right = hi as f64;
        if left < quarter || right < quarter {
            return Err(Error::Precondition(format!(
                "box {bx:?} leaves margin ({left}, {right}) around the unit well on axis {a}; need >= {quarter}"
            )));
        }
    }
    let points = PointLattice::for_box(bx, grid)?;
    let m = i64::from(grid.points_per_unit);
    Ok(AssembledOperator::stencil(
        points,
        *grid,
        BoundaryCondition::Dirichlet,
        PotentialSource::SingleWell { depth: lambda },
        Some(*bx),
        |i| {
            let p = points.numerators(i);
            if (0..points.dim).all(|a| (0..m).contains(&p[a])) {
                lambda
            } else {
                0.0
            }
        },
    ))
}

/// Graph-Laplacian (Neumann) block of one unit cell with constant potential `v`.
pub fn assemble_cell_neumann(v: f64, dim: usize, grid: &Grid) -> Result<AssembledOperator> {
    if !(1..=3).contains(&dim) {
        return Err(Error::Domain(format!("dimension must be 1, 2 or 3, got {dim}")));
    }
    let points = PointLattice::for_cell(dim, grid)?;
    Ok(AssembledOperator::stencil(
        points,
        *grid,
        BoundaryCondition::NeumannBlock,
        PotentialSource::Constant(v),
        None,
        |_| v,
    ))
}
