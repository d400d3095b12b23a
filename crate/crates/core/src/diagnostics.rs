//! Concentration diagnostics for computed solutions.
//!
//! A solution is first translated by a lattice vector so that the central
//! cell Ω = (−ω, ω)^N carries the largest H¹ mass among all translates y + Ω.
//! The local ratios then compare the mass inside the δ-balls around the
//! lattice points of a box U with the mass in all of U; the global ratios use
//! the single ball B_δ(0) against the whole computational box.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::grid::{
    laplacian_apply, norm_l2, norm_lp, restrict_integrals, seminorm_grad, Field, Grid, Region,
};
use crate::potential::{q_field, ProblemSpec};
use crate::solver::SolveResult;
use crate::variational::euler_residual;

/// Relative slack under which two cell norms count as tied.
const TIE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct CellWindow {
    /// Ω = (−ω, ω)^N.
    pub omega_half_width: f64,
    /// U = ∏ (lo_a, hi_a).
    pub u_lo: Vec<f64>,
    pub u_hi: Vec<f64>,
    pub delta: f64,
}

impl CellWindow {
    /// Symmetric window U = (−r, r)^N.
    pub fn new(dim: usize, omega_half_width: f64, u_half_width: f64, delta: f64) -> Result<Self> {
        CellWindow::with_box(
            omega_half_width,
            vec![-u_half_width; dim],
            vec![u_half_width; dim],
            delta,
        )
    }

    pub fn with_box(omega_half_width: f64, u_lo: Vec<f64>, u_hi: Vec<f64>, delta: f64) -> Result<Self> {
        let w = CellWindow {
            omega_half_width,
            u_lo,
            u_hi,
            delta,
        };
        w.validate()?;
        Ok(w)
    }

    pub fn dim(&self) -> usize {
        self.u_lo.len()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidWindow(m));
        let om = self.omega_half_width;
        if !(om > 0.5 && om <= 0.75) {
            return bad(format!(
                "Ω = (−{om}, {om})^N must contain [−½,½]^N and lie in (−¾,¾)^N"
            ));
        }
        if self.u_lo.len() != self.u_hi.len() || self.u_lo.is_empty() {
            return bad("U needs matching lower and upper corners".into());
        }
        for (&lo, &hi) in self.u_lo.iter().zip(&self.u_hi) {
            if !(lo < -0.5 && hi > 0.5) {
                return bad(format!("U side ({lo}, {hi}) does not contain [−½, ½]"));
            }
            if lo == lo.round() || hi == hi.round() {
                return bad(format!("∂U meets Z^N: side ({lo}, {hi}) has an integer end"));
            }
        }
        let dist = self.z1_boundary_distance();
        let limit = dist.min(0.5);
        if !(self.delta > 0.0 && self.delta < limit) {
            return bad(format!(
                "δ = {} must lie in (0, min{{½, dist(U∩Z^N, ∂U)}}) = (0, {limit})",
                self.delta
            ));
        }
        Ok(())
    }

    /// Z₁ = U ∩ Z^N in lexicographic order.
    pub fn interior_lattice_points(&self) -> Vec<Vec<i64>> {
        let axes: Vec<Vec<i64>> = self
            .u_lo
            .iter()
            .zip(&self.u_hi)
            .map(|(&lo, &hi)| ((lo.floor() as i64 + 1)..=(hi.ceil() as i64 - 1)).collect())
            .collect();
        cartesian(&axes)
    }

    fn z1_boundary_distance(&self) -> f64 {
        self.u_lo
            .iter()
            .zip(&self.u_hi)
            .map(|(&lo, &hi)| {
                let first = lo.floor() + 1.0;
                let last = hi.ceil() - 1.0;
                (first - lo).min(hi - last)
            })
            .fold(f64::INFINITY, f64::min)
    }

    fn u_region(&self) -> Region {
        Region::Box {
            lo: self.u_lo.clone(),
            hi: self.u_hi.clone(),
        }
    }
}

fn cartesian(axes: &[Vec<i64>]) -> Vec<Vec<i64>> {
    axes.iter().fold(vec![Vec::new()], |acc, axis| {
        acc.into_iter()
            .flat_map(|prefix| {
                axis.iter().map(move |&v| {
                    let mut p = prefix.clone();
                    p.push(v);
                    p
                })
            })
            .collect()
    })
}

fn to_point(y: &[i64]) -> Vec<f64> {
    y.iter().map(|&v| v as f64).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConcentrationReport {
    pub epsilon: f64,
    pub delta: f64,
    pub ratio_h1: f64,
    pub ratio_lp: f64,
    /// ‖u‖²_{H¹(Ω)}.
    pub omega_h1_sq: f64,
    /// ‖u‖²_{H¹(y+Ω)} for every translate inside the box.
    pub cell_norms: BTreeMap<Vec<i64>, f64>,
    pub global_ratio_h1: f64,
    pub global_ratio_lp: f64,
    /// Largest amount by which a ratio exceeded 1 before clamping.
    pub overshoot: f64,
}

/// Lattice points y with y + Ω inside the computational box, lexicographically.
fn cell_candidates(grid: &Grid, omega: f64) -> Vec<Vec<i64>> {
    let reach = (grid.half_width() - omega).floor() as i64;
    if reach < 0 {
        return Vec::new();
    }
    let axis: Vec<i64> = (-reach..=reach).collect();
    cartesian(&vec![axis; grid.dim()])
}

/// ‖u‖²_{H¹(y+Ω)} for every lattice translate of Ω inside the box.
pub fn cell_norms(u: &Field, omega_half_width: f64) -> BTreeMap<Vec<i64>, f64> {
    cell_candidates(u.grid(), omega_half_width)
        .into_iter()
        .map(|y| {
            let h1 = restrict_integrals(u, &Region::cube(&to_point(&y), omega_half_width), 2.0).h1;
            (y, h1)
        })
        .collect()
}

/// Shifts `u` by the lattice vector whose cell carries the most H¹ mass, so
/// that afterwards Ω is the heaviest cell. Ties (within 1e-12 relative) go to
/// the lexicographically smallest vector. Vacated cells are filled with 0.
pub fn normalize_translation(u: &Field, window: &CellWindow) -> Result<(Field, Vec<i64>)> {
    let grid = u.grid();
    let cpu = grid.cells_per_unit().ok_or_else(|| {
        Error::InvalidGrid("lattice translations need an integer number of cells per unit".into())
    })?;
    let norms = cell_norms(u, window.omega_half_width);
    let max = norms
        .values()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    let shift = norms
        .iter()
        .find(|(_, &v)| v >= max - TIE_TOLERANCE * max.abs())
        .map(|(y, _)| y.clone())
        .ok_or(Error::WindowOutsideBox)?;
    Ok((shift_by_lattice(u, &shift, cpu), shift))
}

/// `out(x) = u(x + y)` realised as a whole-cell shift.
fn shift_by_lattice(u: &Field, y: &[i64], cells_per_unit: usize) -> Field {
    let grid = u.grid();
    let n = grid.cells_per_axis() as i64;
    let offsets: Vec<i64> = y.iter().map(|&v| v * cells_per_unit as i64).collect();
    if offsets.iter().all(|&o| o == 0) {
        return u.clone();
    }
    let mut out = Field::zeros(grid);
    let src = u.values();
    for (flat, v) in out.values_mut().iter_mut().enumerate() {
        let idx = grid.multi_index(flat);
        let mut from = 0usize;
        let mut inside = true;
        for (i, o) in idx.iter().zip(&offsets) {
            let j = *i as i64 + o;
            if j < 0 || j >= n {
                inside = false;
                break;
            }
            from = from * n as usize + j as usize;
        }
        if inside {
            *v = src[from];
        }
    }
    out
}

fn clamp_ratio(r: f64, overshoot: &mut f64) -> f64 {
    if r > 1.0 {
        *overshoot = overshoot.max(r - 1.0);
    }
    r.clamp(0.0, 1.0)
}

/// Local and global concentration ratios of an already normalised field.
pub fn concentration_ratios(
    u: &Field,
    spec: &ProblemSpec,
    window: &CellWindow,
) -> Result<ConcentrationReport> {
    if window.dim() != u.grid().dim() {
        return Err(Error::InvalidWindow(format!(
            "window is {}-dimensional, field is {}-dimensional",
            window.dim(),
            u.grid().dim()
        )));
    }
    let p = spec.p;
    let denom = restrict_integrals(u, &window.u_region(), p);
    if denom.h1 <= 0.0 || denom.lp <= 0.0 {
        return Err(Error::ZeroDenominator("u vanishes on U"));
    }
    let (mut num_h1, mut num_lp) = (0.0, 0.0);
    for y in window.interior_lattice_points() {
        let r = restrict_integrals(u, &Region::ball(to_point(&y), window.delta), p);
        num_h1 += r.h1;
        num_lp += r.lp;
    }
    let (global_h1, global_lp) = global_ratios(u, window.delta, p)?;
    let mut overshoot = 0.0;
    let cell_norms = cell_norms(u, window.omega_half_width);
    let origin = vec![0i64; window.dim()];
    let omega_h1_sq = cell_norms.get(&origin).copied().unwrap_or_else(|| {
        restrict_integrals(u, &Region::cube(&to_point(&origin), window.omega_half_width), p).h1
    });
    Ok(ConcentrationReport {
        epsilon: spec.epsilon,
        delta: window.delta,
        ratio_h1: clamp_ratio(num_h1 / denom.h1, &mut overshoot),
        ratio_lp: clamp_ratio(num_lp / denom.lp, &mut overshoot),
        omega_h1_sq,
        cell_norms,
        global_ratio_h1: clamp_ratio(global_h1, &mut overshoot),
        global_ratio_lp: clamp_ratio(global_lp, &mut overshoot),
        overshoot,
    })
}

/// Mass in B_δ(0) relative to the whole box, for the H¹ form and for |u|^p.
pub fn global_ratios(u: &Field, delta: f64, p: f64) -> Result<(f64, f64)> {
    let whole = restrict_integrals(u, &Region::Whole, p);
    if whole.h1 <= 0.0 || whole.lp <= 0.0 {
        return Err(Error::ZeroDenominator("u vanishes on the box"));
    }
    let ball = restrict_integrals(u, &Region::ball(vec![0.0; u.grid().dim()], delta), p);
    Ok((ball.h1 / whole.h1, ball.lp / whole.lp))
}

/// Per-cell ratios ∫_{B_δ(y)} / ∫_{y+Ω} around one lattice point.
pub fn cell_concentration(u: &Field, window: &CellWindow, y: &[i64], p: f64) -> Result<(f64, f64)> {
    let c = to_point(y);
    let cell = restrict_integrals(u, &Region::cube(&c, window.omega_half_width), p);
    if cell.h1 <= 0.0 || cell.lp <= 0.0 {
        return Err(Error::ZeroDenominator("u vanishes on the cell"));
    }
    let ball = restrict_integrals(u, &Region::ball(c, window.delta), p);
    Ok((ball.h1 / cell.h1, ball.lp / cell.lp))
}

/// ‖u‖_{H¹(Ω)} of each result after translation normalisation.
pub fn blow_up_indicator(results: &[SolveResult], window: &CellWindow) -> Result<Vec<f64>> {
    results
        .iter()
        .map(|r| {
            let (u, _) = normalize_translation(&r.u, window)?;
            let omega = Region::cube(&vec![0.0; u.grid().dim()], window.omega_half_width);
            Ok(restrict_integrals(&u, &omega, r.spec.p).h1.sqrt())
        })
        .collect()
}

/// Grid of the blow-up variables whose cell centres are exactly the images
/// `x/ε` of the original centres.
pub fn rescaled_grid(grid: &Grid, epsilon: f64) -> Result<Grid> {
    Grid::new(grid.dim(), grid.half_width() / epsilon, grid.cells_per_axis())
}

/// `v(x) = ε^{2/(p−2)} u(εx)`, with `u` interpolated multilinearly.
pub fn rescale(u: &Field, spec: &ProblemSpec, target: &Grid) -> Field {
    let eps = spec.epsilon;
    let factor = eps.powf(2.0 / (spec.p - 2.0));
    let mut y = vec![0.0; target.dim()];
    Field::from_fn(target, |x| {
        for (yi, xi) in y.iter_mut().zip(x) {
            *yi = eps * xi;
        }
        factor * u.interpolate(&y)
    })
}

/// ‖−Δ_h v + m v − Q|v|^{p−2}v‖ / ‖v‖ for the rescaled problem.
pub fn rescaled_residual(v: &Field, rescaled_spec: &ProblemSpec) -> f64 {
    let q = q_field(rescaled_spec, v.grid(), 1);
    norm_l2(&euler_residual(rescaled_spec, v, &q)) / norm_l2(v)
}

/// Relative gradient-seminorm and L^p distances of `v` from a limit profile `w`.
pub fn limit_profile_compare(v: &Field, w: &Field, p: f64) -> Result<(f64, f64)> {
    let dim = w.grid().dim();
    if dim < 3 {
        return Err(Error::DimensionUnsupported(dim));
    }
    v.grid().check_same(w.grid())?;
    let (dw, lw) = (seminorm_grad(w), norm_lp(w, p));
    if dw <= 0.0 || lw <= 0.0 {
        return Err(Error::ZeroDenominator("limit profile vanishes"));
    }
    let diff = v.add_scaled(-1.0, w);
    Ok((seminorm_grad(&diff) / dw, norm_lp(&diff, p) / lw))
}

/// Largest relative deviation of `−Δ_hψ + ψ` from `(N−1)ψ/|x|`, ψ = e^{−|x|},
/// over the cells with `½ ≤ |x| ≤ L − 1`.
pub fn psi_identity_check(grid: &Grid) -> f64 {
    let dim = grid.dim();
    let n = grid.cells_per_axis();
    let h = grid.spacing();
    let inv_h2 = 1.0 / (h * h);
    let outer = grid.half_width() - 1.0;
    let coords: Vec<f64> = (0..n).map(|i| grid.coordinate(i)).collect();
    let (lo, hi) = grid.index_range(-outer - h, outer + h);
    let psi = |r2: f64| (-r2.sqrt()).exp();

    let line = |first: usize| -> f64 {
        let mut worst: f64 = 0.0;
        let mut idx = vec![lo; dim];
        idx[0] = first;
        loop {
            let r2: f64 = idx.iter().map(|&i| coords[i] * coords[i]).sum();
            if (0.25..=outer * outer).contains(&r2) {
                let c = psi(r2);
                let mut lap = 2.0 * dim as f64 * c;
                for a in 0..dim {
                    let x = coords[idx[a]];
                    let base = r2 - x * x;
                    lap -= psi(base + coords[idx[a] - 1].powi(2)) + psi(base + coords[idx[a] + 1].powi(2));
                }
                let lhs = lap * inv_h2 + c;
                let target = (dim as f64 - 1.0) * c / r2.sqrt();
                worst = worst.max(((lhs - target) / target).abs());
            }
            let mut a = dim;
            loop {
                a -= 1;
                if a == 0 {
                    return worst;
                }
                idx[a] += 1;
                if idx[a] < hi {
                    break;
                }
                idx[a] = lo;
            }
        }
    };

    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (lo..hi).into_par_iter().map(line).reduce(|| 0.0, f64::max)
    }
    #[cfg(not(feature = "parallel"))]
    {
        (lo..hi).map(line).fold(0.0, f64::max)
    }
}

/// `(−Δ_h ψ + ψ)` and `(N−1)ψ/|x|` at a single cell, for spot checks.
pub fn psi_identity_at(grid: &Grid, flat: usize) -> (f64, f64) {
    let psi = Field::from_fn(grid, |x| (-x.iter().map(|v| v * v).sum::<f64>().sqrt()).exp());
    let lhs = laplacian_apply(&psi).add_scaled(1.0, &psi);
    let r = grid.center(flat).iter().map(|v| v * v).sum::<f64>().sqrt();
    (lhs.values()[flat], (grid.dim() as f64 - 1.0) * (-r).exp() / r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::PotentialVariant;

    fn spec() -> ProblemSpec {
        ProblemSpec::new(2, 4.0, 0.2, PotentialVariant::LatticeBalls).unwrap()
    }

    fn bump(grid: &Grid, c: [f64; 2], radius: f64) -> Field {
        Field::from_fn(grid, |x| {
            let r2 = (x[0] - c[0]).powi(2) + (x[1] - c[1]).powi(2);
            if r2 < radius * radius {
                (radius * radius - r2).powi(2)
            } else {
                0.0
            }
        })
    }

    fn default_window() -> CellWindow {
        CellWindow::new(2, 0.625, 1.6, 0.45).unwrap()
    }

    #[test]
    fn window_validation() {
        assert!(CellWindow::new(2, 0.5, 1.6, 0.45).is_err());
        assert!(CellWindow::new(2, 0.8, 1.6, 0.45).is_err());
        assert!(CellWindow::new(2, 0.625, 2.0, 0.45).is_err());
        assert!(CellWindow::new(2, 0.625, 0.4, 0.3).is_err());
        // dist(Z₁, ∂U) = 0.6 for U = (−1.6, 1.6)
        assert!(CellWindow::new(2, 0.625, 1.6, 0.5).is_err());
        // dist = 0.3 for U = (−1.3, 1.3)
        assert!(CellWindow::new(2, 0.625, 1.3, 0.35).is_err());
        assert!(CellWindow::new(2, 0.625, 1.3, 0.25).is_ok());
        assert!(CellWindow::new(2, 0.625, 1.6, 0.0).is_err());
        let w = default_window();
        assert_eq!(w.interior_lattice_points().len(), 9);
        assert_eq!(w.interior_lattice_points()[0], vec![-1, -1]);
    }

    #[test]
    fn centred_bump_needs_no_shift() {
        let grid = Grid::with_cells_per_unit(2, 3.0, 16).unwrap();
        let u = bump(&grid, [0.0, 0.0], 0.3);
        let (v, shift) = normalize_translation(&u, &default_window()).unwrap();
        assert_eq!(shift, vec![0, 0]);
        assert_eq!(v, u);
    }

    #[test]
    fn off_centre_bump_is_brought_home() {
        let grid = Grid::with_cells_per_unit(2, 4.0, 16).unwrap();
        let home = bump(&grid, [0.0, 0.0], 0.3);
        let away = shift_by_lattice(&home, &[-2, -1], 16);
        let (v, shift) = normalize_translation(&away, &default_window()).unwrap();
        assert_eq!(shift, vec![2, 1]);
        assert_eq!(v, home);
    }

    #[test]
    fn equal_bumps_tie_to_smallest_shift() {
        let grid = Grid::with_cells_per_unit(2, 4.0, 16).unwrap();
        let a = bump(&grid, [0.0, 0.0], 0.3);
        let b = shift_by_lattice(&a, &[-1, 0], 16);
        let u = a.add_scaled(1.0, &b);
        let (_, shift) = normalize_translation(&u, &default_window()).unwrap();
        assert_eq!(shift, vec![0, 0]);
    }

    #[test]
    fn window_must_fit() {
        let grid = Grid::with_cells_per_unit(2, 0.5, 16).unwrap();
        let u = bump(&grid, [0.0, 0.0], 0.3);
        assert!(matches!(normalize_translation(&u, &default_window()), Err(Error::WindowOutsideBox)));
        let odd = Grid::new(2, 3.0, 50).unwrap();
        assert!(normalize_translation(&bump(&odd, [0.0, 0.0], 0.3), &default_window()).is_err());
    }

    #[test]
    fn ratios_for_supported_fields() {
        let grid = Grid::with_cells_per_unit(2, 3.0, 32).unwrap();
        let inside = bump(&grid, [0.0, 0.0], 0.3);
        let r = concentration_ratios(&inside, &spec(), &default_window()).unwrap();
        assert!((r.ratio_h1 - 1.0).abs() < 1e-12 && (r.ratio_lp - 1.0).abs() < 1e-12);
        assert!((r.global_ratio_h1 - 1.0).abs() < 1e-12);
        assert!(r.overshoot <= 1e-12);
        // a ring between the δ-balls carries no local mass
        let ring = bump(&grid, [0.5, 0.5], 0.04);
        let r = concentration_ratios(&ring, &spec(), &default_window()).unwrap();
        assert_eq!((r.ratio_h1, r.ratio_lp), (0.0, 0.0));
        let zero = Field::zeros(&grid);
        assert!(matches!(
            concentration_ratios(&zero, &spec(), &default_window()),
            Err(Error::ZeroDenominator(_))
        ));
    }

    #[test]
    fn spread_field_has_small_global_ratio() {
        let grid = Grid::with_cells_per_unit(2, 3.0, 16).unwrap();
        let spread = Field::from_fn(&grid, |x| (-(x[0] * x[0] + x[1] * x[1]) / 16.0).exp());
        let (gh, gl) = global_ratios(&spread, 0.45, 4.0).unwrap();
        assert!(gh < 0.1 && gl < 0.1, "{gh} {gl}");
    }

    #[test]
    fn normalisation_dominates_every_cell() {
        let grid = Grid::with_cells_per_unit(2, 4.0, 16).unwrap();
        let u = bump(&grid, [1.0, -2.0], 0.4).add_scaled(0.5, &bump(&grid, [0.0, 1.0], 0.3));
        let (v, _) = normalize_translation(&u, &default_window()).unwrap();
        let r = concentration_ratios(&v, &spec(), &default_window()).unwrap();
        assert!(r.cell_norms.values().all(|&c| r.omega_h1_sq >= c));
    }

    #[test]
    fn rescale_examples() {
        let grid = Grid::new(2, 2.0, 32).unwrap();
        let u = Field::from_fn(&grid, |x| 1.0 + x[0] + 2.0 * x[1]);
        let s4 = ProblemSpec::new(2, 4.0, 0.1, PotentialVariant::LatticeBalls).unwrap();
        let target = Grid::new(2, 3.0, 16).unwrap();
        let v = rescale(&u, &s4, &target);
        let x = target.center(37);
        let expect = 0.1 * u.interpolate(&[0.1 * x[0], 0.1 * x[1]]);
        assert!((v.values()[37] - expect).abs() < 1e-15);
        let s3 = ProblemSpec::new(2, 3.0, 0.25, PotentialVariant::LatticeBalls).unwrap();
        let v = rescale(&u, &s3, &target);
        let expect = 0.0625 * u.interpolate(&[0.25 * x[0], 0.25 * x[1]]);
        assert!((v.values()[37] - expect).abs() < 1e-15);
    }

    #[test]
    fn rescaled_grid_aligns_centres() {
        let grid = Grid::with_cells_per_unit(2, 8.0, 8).unwrap();
        let target = rescaled_grid(&grid, 0.12).unwrap();
        for i in [0, 5, 127] {
            assert!((0.12 * target.coordinate(i) - grid.coordinate(i)).abs() < 1e-13);
        }
    }

    #[test]
    fn limit_compare_conventions() {
        let grid = Grid::new(3, 2.0, 12).unwrap();
        let w = Field::from_fn(&grid, |x| (-x.iter().map(|v| v * v).sum::<f64>()).exp());
        let (a, b) = limit_profile_compare(&w, &w, 4.0).unwrap();
        assert_eq!((a, b), (0.0, 0.0));
        let (a, b) = limit_profile_compare(&Field::zeros(&grid), &w, 4.0).unwrap();
        assert!((a - 1.0).abs() < 1e-14 && (b - 1.0).abs() < 1e-14);
        let (a, b) = limit_profile_compare(&w.scaled(2.0), &w, 4.0).unwrap();
        assert!((a - 1.0).abs() < 1e-14 && (b - 1.0).abs() < 1e-14);
        let flat = Grid::new(2, 2.0, 12).unwrap();
        let w2 = Field::from_fn(&flat, |_| 1.0);
        assert!(matches!(limit_profile_compare(&w2, &w2, 4.0), Err(Error::DimensionUnsupported(2))));
    }

    #[test]
    fn psi_targets() {
        // N = 2, x = (1, 0): target e^{−1}; N = 3, x = (2, 0, 0): target e^{−2}
        let g2 = Grid::new(2, 8.5, 17 * 9).unwrap();
        let flat = g2.flat_index(&[(9.5f64 * 9.0 - 0.5) as usize, (8.5f64 * 9.0 - 0.5) as usize]);
        let (lhs, target) = psi_identity_at(&g2, flat);
        assert!((target - 0.367879441171).abs() < 1e-11);
        assert!((lhs - target).abs() < 2e-2);
        let g3 = Grid::new(3, 3.5, 7).unwrap();
        let flat = g3.flat_index(&[5, 3, 3]);
        assert_eq!(g3.center(flat), vec![2.0, 0.0, 0.0]);
        let (_, target) = psi_identity_at(&g3, flat);
        assert!((target - 0.135335283237).abs() < 1e-11);
    }

    #[test]
    fn psi_check_matches_field_version() {
        let grid = Grid::new(2, 4.0, 64).unwrap();
        let fast = psi_identity_check(&grid);
        let psi = Field::from_fn(&grid, |x| (-(x[0] * x[0] + x[1] * x[1]).sqrt()).exp());
        let lhs = laplacian_apply(&psi).add_scaled(1.0, &psi);
        let mut worst: f64 = 0.0;
        grid.for_each_center(|i, x| {
            let r = (x[0] * x[0] + x[1] * x[1]).sqrt();
            if (0.5..=3.0).contains(&r) {
                let t = (-r).exp() / r;
                worst = worst.max(((lhs.values()[i] - t) / t).abs());
            }
        });
        assert!((fast - worst).abs() <= 1e-9 * worst, "{fast} vs {worst}");
    }
}
