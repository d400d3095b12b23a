//! Cell-centred uniform grids on the box (−L, L)^N and the discrete operators
//! built on them.
//!
//! The Laplacian is the standard 2N+1-point stencil with the value 0 assumed
//! outside the box. The H¹ form sums squared differences over every face of
//! the grid, including the faces between a boundary cell and its zero ghost,
//! so that `inner_h1(f, g) = Σ f·(−Δ_h g + g)·h^N` holds exactly for all f, g.

use crate::error::{Error, Result};

const PAIRWISE_BLOCK: usize = 64;

/// Sums a sequence of partial sums with a fixed pairwise tree, so the result
/// only depends on the order of `parts`.
pub(crate) fn pairwise_sum(parts: &[f64]) -> f64 {
    if parts.len() <= PAIRWISE_BLOCK {
        return parts.iter().sum();
    }
    let mid = parts.len() / 2;
    pairwise_sum(&parts[..mid]) + pairwise_sum(&parts[mid..])
}

#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    dim: usize,
    half_width: f64,
    n: usize,
}

impl Grid {
    pub fn new(dim: usize, half_width: f64, cells_per_axis: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidGrid("dimension must be positive".into()));
        }
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "half width {half_width} must be positive"
            )));
        }
        if cells_per_axis < 4 {
            return Err(Error::InvalidGrid(format!(
                "need at least 4 cells per axis, got {cells_per_axis}"
            )));
        }
        if cells_per_axis.checked_pow(dim as u32).is_none() {
            return Err(Error::InvalidGrid("grid too large".into()));
        }
        Ok(Grid {
            dim,
            half_width,
            n: cells_per_axis,
        })
    }

    /// Grid whose unit cells are resolved by exactly `cells_per_unit` cells.
    /// `2L` must be an integer so lattice translations are whole-cell shifts.
    pub fn with_cells_per_unit(dim: usize, half_width: f64, cells_per_unit: usize) -> Result<Self> {
        let width = 2.0 * half_width;
        if (width - width.round()).abs() > 1e-12 || width.round() < 1.0 {
            return Err(Error::InvalidGrid(format!(
                "2L = {width} must be a positive integer for lattice-aligned grids"
            )));
        }
        Grid::new(dim, half_width, width.round() as usize * cells_per_unit)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn cells_per_axis(&self) -> usize {
        self.n
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.n as f64
    }

    /// Cell volume h^N.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Cells per unit length when both `2L` and `n/(2L)` are integers.
    pub fn cells_per_unit(&self) -> Option<usize> {
        let width = 2.0 * self.half_width;
        if (width - width.round()).abs() > 1e-12 || width.round() < 1.0 {
            return None;
        }
        let w = width.round() as usize;
        self.n.is_multiple_of(w).then_some(self.n / w)
    }

    /// Flat-index distance between neighbours along `axis` (row-major, axis 0 slowest).
    pub fn stride(&self, axis: usize) -> usize {
        self.n.pow((self.dim - 1 - axis) as u32)
    }

    pub fn coordinate(&self, i: usize) -> f64 {
        -self.half_width + (i as f64 + 0.5) * self.spacing()
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        idx.iter().fold(0, |acc, &i| acc * self.n + i)
    }

    pub fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dim];
        for slot in idx.iter_mut().rev() {
            *slot = flat % self.n;
            flat /= self.n;
        }
        idx
    }

    pub fn center(&self, flat: usize) -> Vec<f64> {
        self.multi_index(flat)
            .into_iter()
            .map(|i| self.coordinate(i))
            .collect()
    }

    /// Visits cells in storage order with their centres.
    pub fn for_each_center(&self, mut f: impl FnMut(usize, &[f64])) {
        let coords: Vec<f64> = (0..self.n).map(|i| self.coordinate(i)).collect();
        let mut idx = vec![0usize; self.dim];
        let mut x: Vec<f64> = vec![coords[0]; self.dim];
        for flat in 0..self.len() {
            f(flat, &x);
            for a in (0..self.dim).rev() {
                idx[a] += 1;
                if idx[a] < self.n {
                    x[a] = coords[idx[a]];
                    break;
                }
                idx[a] = 0;
                x[a] = coords[0];
            }
        }
    }

    /// Distance, in cell widths counted from the wall, of the nearest wall to a cell.
    pub fn layer(&self, flat: usize) -> usize {
        self.multi_index(flat)
            .into_iter()
            .map(|i| i.min(self.n - 1 - i))
            .min()
            .unwrap_or(0)
    }

    pub(crate) fn check_same(&self, other: &Grid) -> Result<()> {
        if self != other {
            return Err(Error::GridMismatch(format!("{self:?} vs {other:?}")));
        }
        Ok(())
    }

    /// Index range `[lo, hi)` of cells whose centres lie in the open interval `(a, b)`.
    pub(crate) fn index_range(&self, a: f64, b: f64) -> (usize, usize) {
        let h = self.spacing();
        let lo = (((a + self.half_width) / h - 0.5).floor() + 1.0).max(0.0) as usize;
        let hi = (((b + self.half_width) / h - 0.5).ceil()).clamp(0.0, self.n as f64) as usize;
        let mut lo = lo.min(self.n);
        while lo > 0 && self.coordinate(lo - 1) > a {
            lo -= 1;
        }
        while lo < self.n && self.coordinate(lo) <= a {
            lo += 1;
        }
        let mut hi = hi.max(lo);
        while hi < self.n && self.coordinate(hi) < b {
            hi += 1;
        }
        while hi > lo && self.coordinate(hi - 1) >= b {
            hi -= 1;
        }
        (lo, hi)
    }
}

/// Real values sampled at the cell centres of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: Grid,
    values: Vec<f64>,
}

impl Field {
    pub fn zeros(grid: &Grid) -> Self {
        Field {
            values: vec![0.0; grid.len()],
            grid: grid.clone(),
        }
    }

    pub fn from_values(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} values for a grid of {} cells",
                values.len(),
                grid.len()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::GridMismatch(format!("non-finite value at cell {i}")));
        }
        Ok(Field { grid, values })
    }

    pub fn from_fn(grid: &Grid, mut f: impl FnMut(&[f64]) -> f64) -> Self {
        let mut values = Vec::with_capacity(grid.len());
        grid.for_each_center(|_, x| values.push(f(x)));
        Field {
            grid: grid.clone(),
            values,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Field {
        Field {
            grid: self.grid.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn scaled(&self, factor: f64) -> Field {
        self.map(|v| factor * v)
    }

    /// `self + alpha * other`.
    pub fn add_scaled(&self, alpha: f64, other: &Field) -> Field {
        debug_assert_eq!(self.grid, other.grid);
        Field {
            grid: self.grid.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + alpha * b)
                .collect(),
        }
    }

    pub fn abs(&self) -> Field {
        self.map(f64::abs)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Largest |value| over the outermost layer of cells.
    pub fn max_abs_on_boundary_layer(&self) -> f64 {
        let n = self.grid.n;
        let mut m: f64 = 0.0;
        let mut idx = vec![0usize; self.grid.dim];
        for &v in &self.values {
            if idx.iter().any(|&i| i == 0 || i == n - 1) {
                m = m.max(v.abs());
            }
            for a in (0..idx.len()).rev() {
                idx[a] += 1;
                if idx[a] < n {
                    break;
                }
                idx[a] = 0;
            }
        }
        m
    }

    /// Multilinear interpolation. The zero ghost cells just outside the box take
    /// part in the interpolation; beyond them the field is 0.
    pub fn interpolate(&self, x: &[f64]) -> f64 {
        let g = &self.grid;
        let h = g.spacing();
        let n = g.n as isize;
        let mut base = vec![0isize; g.dim];
        let mut frac = vec![0.0; g.dim];
        for a in 0..g.dim {
            let s = (x[a] + g.half_width) / h - 0.5;
            if !(s > -1.0 && s < n as f64) {
                return 0.0;
            }
            let b = s.floor();
            base[a] = b as isize;
            frac[a] = s - b;
        }
        let mut acc = 0.0;
        for corner in 0..(1usize << g.dim) {
            let mut weight = 1.0;
            let mut flat = 0usize;
            let mut outside = false;
            for a in 0..g.dim {
                let bit = (corner >> a) & 1;
                let i = base[a] + bit as isize;
                weight *= if bit == 1 { frac[a] } else { 1.0 - frac[a] };
                if i < 0 || i >= n {
                    outside = true;
                } else {
                    flat = flat * g.n + i as usize;
                }
            }
            if !outside && weight != 0.0 {
                acc += weight * self.values[flat];
            }
        }
        acc
    }
}

/// Walks the contiguous rows of one axis: calls `f(c, start, stride)` for every
/// position `c` along `axis` and every row of `stride` contiguous cells that
/// shares it.
fn for_each_axis_row(grid: &Grid, axis: usize, mut f: impl FnMut(usize, usize, usize)) {
    let s = grid.stride(axis);
    let n = grid.n;
    let outer = grid.len() / (n * s);
    for o in 0..outer {
        for c in 0..n {
            f(c, o * n * s + c * s, s);
        }
    }
}

/// Discrete −Δ with homogeneous Dirichlet truncation:
/// `(2N f_i − Σ_neighbours f_j)/h²`, neighbours outside the box being 0.
pub fn laplacian_apply(f: &Field) -> Field {
    let mut out = f.clone();
    laplacian_into(f, &mut out.values);
    out
}

pub(crate) fn laplacian_into(f: &Field, out: &mut [f64]) {
    let g = &f.grid;
    let inv_h2 = 1.0 / (g.spacing() * g.spacing());
    let diag = 2.0 * g.dim as f64;
    let v = &f.values;
    for (o, x) in out.iter_mut().zip(v) {
        *o = diag * x;
    }
    let n = g.n;
    for axis in 0..g.dim {
        for_each_axis_row(g, axis, |c, start, s| {
            if c > 0 {
                let (dst, src) = (start..start + s, start - s..start);
                for (o, x) in out[dst].iter_mut().zip(&v[src]) {
                    *o -= x;
                }
            }
            if c + 1 < n {
                let (dst, src) = (start..start + s, start + s..start + 2 * s);
                for (o, x) in out[dst].iter_mut().zip(&v[src]) {
                    *o -= x;
                }
            }
        });
    }
    for o in out.iter_mut() {
        *o *= inv_h2;
    }
}

/// Σ over all faces of (δf)(δg), without the h^{N−2} factor.
fn face_sum(f: &Field, g: &Field) -> f64 {
    let grid = &f.grid;
    let (fv, gv) = (&f.values, &g.values);
    let n = grid.n;
    let mut parts = Vec::with_capacity(grid.dim * grid.len() / grid.stride(grid.dim - 1).max(1));
    for axis in 0..grid.dim {
        for_each_axis_row(grid, axis, |c, start, s| {
            let row = start..start + s;
            let mut acc = 0.0;
            if c + 1 < n {
                for ((a0, a1), (b0, b1)) in fv[row.clone()]
                    .iter()
                    .zip(&fv[start + s..start + 2 * s])
                    .zip(gv[row.clone()].iter().zip(&gv[start + s..start + 2 * s]))
                {
                    acc += (a1 - a0) * (b1 - b0);
                }
            } else {
                // right wall: difference with the zero ghost
                acc += fv[row.clone()].iter().zip(&gv[row.clone()]).map(|(a, b)| a * b).sum::<f64>();
            }
            if c == 0 {
                acc += fv[row.clone()].iter().zip(&gv[row]).map(|(a, b)| a * b).sum::<f64>();
            }
            parts.push(acc);
        });
    }
    pairwise_sum(&parts)
}

/// Σ_cells term(i), accumulated in fixed row blocks.
pub(crate) fn cell_sum(len: usize, term: impl Fn(usize) -> f64) -> f64 {
    const BLOCK: usize = 256;
    let parts: Vec<f64> = (0..len)
        .step_by(BLOCK)
        .map(|start| (start..(start + BLOCK).min(len)).map(&term).sum())
        .collect();
    pairwise_sum(&parts)
}

/// `Σ_faces (δf)(δg) h^{N−2} + mass · Σ_cells f g h^N`.
pub fn h1_form(f: &Field, g: &Field, mass: f64) -> f64 {
    debug_assert_eq!(f.grid, g.grid);
    let grid = &f.grid;
    let h = grid.spacing();
    let faces = face_sum(f, g) * h.powi(grid.dim as i32 - 2);
    if mass == 0.0 {
        return faces;
    }
    faces + mass * l2_inner(f, g)
}

/// Σ f g h^N.
pub fn l2_inner(f: &Field, g: &Field) -> f64 {
    let (fv, gv) = (&f.values, &g.values);
    cell_sum(fv.len(), |i| fv[i] * gv[i]) * f.grid.cell_volume()
}

/// The H¹ inner product ∫∇f·∇g + fg in its face/cell quadrature.
pub fn inner_h1(f: &Field, g: &Field) -> f64 {
    h1_form(f, g, 1.0)
}

/// Σ q_i |f_i|^p h^N.
pub fn integrate_weighted_power(f: &Field, q: &Field, p: f64) -> f64 {
    debug_assert_eq!(f.grid, q.grid);
    let (fv, qv) = (&f.values, &q.values);
    cell_sum(fv.len(), |i| qv[i] * fv[i].abs().powf(p)) * f.grid.cell_volume()
}

pub fn norm_h1(f: &Field) -> f64 {
    inner_h1(f, f).max(0.0).sqrt()
}

pub fn norm_l2(f: &Field) -> f64 {
    l2_inner(f, f).max(0.0).sqrt()
}

pub fn norm_lp(f: &Field, p: f64) -> f64 {
    let v = &f.values;
    let s = cell_sum(v.len(), |i| v[i].abs().powf(p)) * f.grid.cell_volume();
    s.powf(1.0 / p)
}

/// Gradient seminorm (Σ_faces (δf)² h^{N−2})^{1/2}.
pub fn seminorm_grad(f: &Field) -> f64 {
    h1_form(f, f, 0.0).max(0.0).sqrt()
}

/// A region of R^N over which integrals are restricted. Cells belong to it by
/// their centres.
#[derive(Debug, Clone, PartialEq)]
pub enum Region {
    /// Open ball.
    Ball { center: Vec<f64>, radius: f64 },
    /// Open axis-aligned box `∏ (lo_a, hi_a)`.
    Box { lo: Vec<f64>, hi: Vec<f64> },
    /// The whole computational box.
    Whole,
}

impl Region {
    pub fn ball(center: Vec<f64>, radius: f64) -> Self {
        Region::Ball { center, radius }
    }

    /// The cube `y + (−r, r)^N`.
    pub fn cube(center: &[f64], half_width: f64) -> Self {
        Region::Box {
            lo: center.iter().map(|c| c - half_width).collect(),
            hi: center.iter().map(|c| c + half_width).collect(),
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            Region::Ball { center, radius } => {
                x.iter()
                    .zip(center)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    < radius * radius
            }
            Region::Box { lo, hi } => x
                .iter()
                .zip(lo.iter().zip(hi))
                .all(|(v, (l, u))| *l < *v && *v < *u),
            Region::Whole => true,
        }
    }

    fn bounds(&self, axis: usize) -> (f64, f64) {
        match self {
            Region::Ball { center, radius } => (center[axis] - radius, center[axis] + radius),
            Region::Box { lo, hi } => (lo[axis], hi[axis]),
            Region::Whole => (f64::NEG_INFINITY, f64::INFINITY),
        }
    }
}

/// H¹ and L^p integrals restricted to a region.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionIntegrals {
    /// Σ (δf)² h^{N−2} over faces inside the region + Σ f² h^N over its cells.
    pub h1: f64,
    /// Σ |f|^p h^N over its cells.
    pub lp: f64,
}

/// Restricts the H¹ form and the |f|^p integral to `region`.
///
/// A face counts iff both adjacent centres are in the region; a wall face
/// (between a boundary cell and its zero ghost) counts iff its cell does. Cells
/// are visited in row-major order of the region's bounding index box, so a
/// region and its whole-cell translate sum identical data in identical order.
pub fn restrict_integrals(f: &Field, region: &Region, p: f64) -> RegionIntegrals {
    let g = &f.grid;
    let dim = g.dim;
    let n = g.n;
    let h = g.spacing();
    let ranges: Vec<(usize, usize)> = (0..dim)
        .map(|a| {
            let (lo, hi) = region.bounds(a);
            g.index_range(lo, hi)
        })
        .collect();
    if ranges.iter().any(|(lo, hi)| lo >= hi) {
        return RegionIntegrals { h1: 0.0, lp: 0.0 };
    }
    let coords: Vec<f64> = (0..n).map(|i| g.coordinate(i)).collect();
    let strides: Vec<usize> = (0..dim).map(|a| g.stride(a)).collect();
    let v = &f.values;

    let mut idx: Vec<usize> = ranges.iter().map(|r| r.0).collect();
    let mut x: Vec<f64> = idx.iter().map(|&i| coords[i]).collect();
    let mut nb = x.clone();
    let (mut faces, mut cells, mut powers) = (0.0, 0.0, 0.0);
    loop {
        if region.contains(&x) {
            let flat: usize = idx.iter().zip(&strides).map(|(i, s)| i * s).sum();
            let u = v[flat];
            cells += u * u;
            powers += u.abs().powf(p);
            for a in 0..dim {
                if idx[a] + 1 < n {
                    nb[a] = coords[idx[a] + 1];
                    if region.contains(&nb) {
                        let d = v[flat + strides[a]] - u;
                        faces += d * d;
                    }
                    nb[a] = x[a];
                } else {
                    faces += u * u;
                }
                if idx[a] == 0 {
                    faces += u * u;
                }
            }
        }
        // advance row-major within the bounding box
        let mut a = dim;
        loop {
            if a == 0 {
                let vol = g.cell_volume();
                return RegionIntegrals {
                    h1: faces * h.powi(dim as i32 - 2) + cells * vol,
                    lp: powers * vol,
                };
            }
            a -= 1;
            idx[a] += 1;
            if idx[a] < ranges[a].1 {
                x[a] = coords[idx[a]];
                nb[a] = x[a];
                break;
            }
            idx[a] = ranges[a].0;
            x[a] = coords[idx[a]];
            nb[a] = x[a];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_field(grid: &Grid, seed: u64) -> Field {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Field::from_fn(grid, |_| rng.gen_range(-1.0..1.0))
    }

    fn vanish_on_boundary(f: &Field) -> Field {
        let mut out = f.clone();
        let g = f.grid().clone();
        for (i, v) in out.values_mut().iter_mut().enumerate() {
            if g.layer(i) == 0 {
                *v = 0.0;
            }
        }
        out
    }

    #[test]
    fn centres_and_indices() {
        let g = Grid::new(2, 2.0, 8).unwrap();
        assert_eq!(g.spacing(), 0.5);
        assert_eq!(g.coordinate(0), -1.75);
        assert_eq!(g.coordinate(7), 1.75);
        assert_eq!(g.cells_per_unit(), Some(2));
        let flat = g.flat_index(&[3, 5]);
        assert_eq!(flat, 29);
        assert_eq!(g.multi_index(flat), vec![3, 5]);
        assert_eq!(g.center(flat), vec![-0.25, 0.75]);
        assert_eq!(Grid::new(2, 1.3, 8).unwrap().cells_per_unit(), None);
        assert!(Grid::new(2, 1.0, 3).is_err());
        assert!(Grid::with_cells_per_unit(2, 1.25, 4).is_err());
        assert_eq!(Grid::with_cells_per_unit(3, 1.5, 4).unwrap().cells_per_axis(), 12);
    }

    #[test]
    fn index_range_matches_membership() {
        let g = Grid::new(1, 2.0, 16).unwrap();
        for (a, b) in [(-0.625, 0.625), (-2.5, 2.5), (0.1, 0.2), (-0.25, 0.25), (1.9, 5.0)] {
            let (lo, hi) = g.index_range(a, b);
            for i in 0..16 {
                let x = g.coordinate(i);
                assert_eq!((lo..hi).contains(&i), a < x && x < b, "({a},{b}) i={i}");
            }
        }
    }

    #[test]
    fn laplacian_of_zero_and_linear() {
        let g = Grid::new(2, 2.0, 16).unwrap();
        assert!(laplacian_apply(&Field::zeros(&g)).values().iter().all(|&v| v == 0.0));
        let lin = Field::from_fn(&g, |x| x[0]);
        let lap = laplacian_apply(&lin);
        for i in 0..g.len() {
            if g.layer(i) >= 1 {
                assert!(lap.values()[i].abs() < 1e-12, "cell {i}: {}", lap.values()[i]);
            }
        }
    }

    #[test]
    fn exponential_identity_at_unit_radius() {
        // N = 2: −Δψ + ψ = ψ/|x| for ψ = e^{−|x|}, so the value at x = (1, 0) is e^{−1}.
        // With L = 8.5 and 17k cells (k odd) the point (1, 0) is a cell centre.
        let target = (-1.0f64).exp();
        let mut scaled = Vec::new();
        for k in [5usize, 11, 21] {
            let g = Grid::new(2, 8.5, 17 * k).unwrap();
            let psi = Field::from_fn(&g, |x| (-(x[0] * x[0] + x[1] * x[1]).sqrt()).exp());
            let lhs = laplacian_apply(&psi).add_scaled(1.0, &psi);
            let i = (9.5 * k as f64 - 0.5).round() as usize;
            let j = (8.5 * k as f64 - 0.5).round() as usize;
            assert_eq!(g.center(g.flat_index(&[i, j])), vec![1.0, 0.0]);
            let err = (lhs.values()[g.flat_index(&[i, j])] - target).abs();
            scaled.push(err / (g.spacing() * g.spacing()));
        }
        // error / h² settles to a constant: second order
        assert!((scaled[1] / scaled[2] - 1.0).abs() < 0.1, "{scaled:?}");
        assert!(scaled[2] < 1.0, "{scaled:?}");
    }

    #[test]
    fn inner_product_basics() {
        let g = Grid::new(2, 2.0, 16).unwrap();
        let z = Field::zeros(&g);
        assert_eq!(inner_h1(&z, &z), 0.0);
        let f = random_field(&g, 1);
        let k = random_field(&g, 2);
        let a = inner_h1(&f, &k);
        let b = inner_h1(&k, &f);
        assert!((a - b).abs() <= 1e-13 * a.abs().max(1.0));
        assert!(inner_h1(&f, &f) > 0.0);
        assert!((norm_h1(&f.scaled(-3.0)) - 3.0 * norm_h1(&f)).abs() < 1e-12 * norm_h1(&f));
    }

    #[test]
    fn summation_by_parts() {
        for dim in [2, 3] {
            let g = Grid::new(dim, 2.0, 16).unwrap();
            let f = random_field(&g, 11);
            let k = random_field(&g, 12);
            let lap = laplacian_apply(&k);
            let rhs = lap.add_scaled(1.0, &k);
            let sbp = l2_inner(&f, &rhs);
            let lhs = inner_h1(&f, &k);
            assert!((lhs - sbp).abs() <= 1e-11 * lhs.abs().max(1.0), "N={dim}: {lhs} vs {sbp}");
            // the vanishing-layer case is a special case of the above
            let f0 = vanish_on_boundary(&f);
            let l0 = inner_h1(&f0, &f0);
            let r0 = l2_inner(&f0, &laplacian_apply(&f0).add_scaled(1.0, &f0));
            assert!((l0 - r0).abs() <= 1e-11 * l0);
        }
    }

    #[test]
    fn weighted_power_quadrature() {
        let g = Grid::new(2, 2.0, 16).unwrap();
        let one = Field::from_fn(&g, |_| 1.0);
        let minus = one.scaled(-1.0);
        assert_eq!(integrate_weighted_power(&Field::zeros(&g), &one, 4.0), 0.0);
        assert!((integrate_weighted_power(&one, &one, 4.0) - 16.0).abs() < 1e-12);
        assert!((integrate_weighted_power(&one, &minus, 3.0) + 16.0).abs() < 1e-12);
        assert!((norm_l2(&one) - 4.0).abs() < 1e-12);
        assert!((norm_lp(&one, 4.0) - 2.0).abs() < 1e-12);
        assert_eq!(norm_l2(&Field::zeros(&g)), 0.0);
        assert_eq!(norm_h1(&Field::zeros(&g)), 0.0);
    }

    #[test]
    fn quadrature_exact_on_linear() {
        let g = Grid::new(2, 2.0, 16).unwrap();
        let lin = Field::from_fn(&g, |x| 3.0 * x[0] - x[1]);
        let one = Field::from_fn(&g, |_| 1.0);
        assert!(l2_inner(&lin, &one).abs() < 1e-12);
    }

    #[test]
    fn restriction_to_whole_box_and_support() {
        let g = Grid::new(2, 3.0, 192).unwrap();
        let f = random_field(&g, 5);
        let whole = restrict_integrals(&f, &Region::Whole, 4.0);
        let big = restrict_integrals(&f, &Region::cube(&[0.0, 0.0], 10.0), 4.0);
        let global_h1 = inner_h1(&f, &f);
        let global_lp = norm_lp(&f, 4.0).powi(4);
        for r in [whole, big] {
            assert!((r.h1 - global_h1).abs() < 1e-11 * global_h1);
            assert!((r.lp - global_lp).abs() < 1e-11 * global_lp);
        }
        let bump = Field::from_fn(&g, |x| {
            let r2 = x[0] * x[0] + x[1] * x[1];
            if r2 < 0.16 {
                (0.16 - r2).powi(2)
            } else {
                0.0
            }
        });
        let local = restrict_integrals(&bump, &Region::ball(vec![0.0, 0.0], 0.45), 3.0);
        let gh = inner_h1(&bump, &bump);
        assert!((local.h1 - gh).abs() < 1e-12 * gh);
        assert!((local.lp - norm_lp(&bump, 3.0).powi(3)).abs() < 1e-12 * local.lp);
    }

    #[test]
    fn restriction_is_translation_invariant() {
        // 8 cells per unit: shifting by one lattice vector moves 8 whole cells.
        let g = Grid::with_cells_per_unit(2, 4.0, 8).unwrap();
        let bump = |cx: f64, cy: f64| {
            Field::from_fn(&g, move |x| (-4.0 * ((x[0] - cx).powi(2) + (x[1] - cy).powi(2))).exp())
        };
        let at_origin = bump(0.0, 0.0);
        // translate by whole cells: values at (x + (2,1)) = origin values at x
        let mut shifted = Field::zeros(&g);
        let n = g.cells_per_axis();
        for i in 0..n {
            for j in 0..n {
                if i >= 16 && j >= 8 {
                    shifted.values_mut()[g.flat_index(&[i, j])] =
                        at_origin.values()[g.flat_index(&[i - 16, j - 8])];
                }
            }
        }
        let a = restrict_integrals(&at_origin, &Region::cube(&[0.0, 0.0], 0.625), 4.0);
        let b = restrict_integrals(&shifted, &Region::cube(&[2.0, 1.0], 0.625), 4.0);
        assert!((a.h1 - b.h1).abs() <= 1e-12 * a.h1);
        assert!((a.lp - b.lp).abs() <= 1e-12 * a.lp);
    }

    #[test]
    fn partition_plus_cross_faces_is_global() {
        let g = Grid::new(2, 2.0, 20).unwrap();
        let f = random_field(&g, 9);
        // four quadrant boxes partition the domain (no centre lies on an axis)
        let quads = [
            Region::Box { lo: vec![-3.0, -3.0], hi: vec![0.0, 0.0] },
            Region::Box { lo: vec![-3.0, 0.0], hi: vec![0.0, 3.0] },
            Region::Box { lo: vec![0.0, -3.0], hi: vec![3.0, 0.0] },
            Region::Box { lo: vec![0.0, 0.0], hi: vec![3.0, 3.0] },
        ];
        let parts: f64 = quads.iter().map(|r| restrict_integrals(&f, r, 4.0).h1).sum();
        let lp: f64 = quads.iter().map(|r| restrict_integrals(&f, r, 4.0).lp).sum();
        // brute-force bucket of faces whose two centres lie in different quadrants
        let region_of = |x: &[f64]| quads.iter().position(|r| r.contains(x)).unwrap();
        let mut cross = 0.0;
        let n = g.cells_per_axis();
        for flat in 0..g.len() {
            let idx = g.multi_index(flat);
            for a in 0..2 {
                if idx[a] + 1 < n {
                    let nb = flat + g.stride(a);
                    if region_of(&g.center(flat)) != region_of(&g.center(nb)) {
                        cross += (f.values()[nb] - f.values()[flat]).powi(2);
                    }
                }
            }
        }
        let global = inner_h1(&f, &f);
        assert!((parts + cross - global).abs() < 1e-11 * global);
        assert!((lp - norm_lp(&f, 4.0).powi(4)).abs() < 1e-11 * lp);
    }

    #[test]
    fn interpolation_reproduces_samples_and_linears() {
        let g = Grid::new(2, 2.0, 16).unwrap();
        let lin = Field::from_fn(&g, |x| 2.0 * x[0] + x[1] + 1.0);
        for flat in [0, 17, 100, 255] {
            let x = g.center(flat);
            assert!((lin.interpolate(&x) - lin.values()[flat]).abs() < 1e-12);
        }
        assert!((lin.interpolate(&[0.3, -0.7]) - (0.6 - 0.7 + 1.0)).abs() < 1e-12);
        assert_eq!(lin.interpolate(&[5.0, 0.0]), 0.0);
    }

    #[test]
    fn boundary_layer_max() {
        let g = Grid::new(2, 1.0, 8).unwrap();
        let mut f = Field::zeros(&g);
        f.values_mut()[g.flat_index(&[3, 3])] = 5.0;
        f.values_mut()[g.flat_index(&[0, 4])] = -0.5;
        assert_eq!(f.max_abs_on_boundary_layer(), 0.5);
        assert_eq!(f.max_abs(), 5.0);
    }
}
