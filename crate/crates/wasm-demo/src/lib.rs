//! Browser bindings for a few small two-dimensional experiments.
//!
//! Every entry point also works natively, which is how the tests drive it.

use lattice_nls::diagnostics::{
    cell_concentration, concentration_ratios, normalize_translation, CellWindow,
};
use lattice_nls::grid::{Field, Grid};
use lattice_nls::potential::{q_field, PotentialVariant, ProblemSpec};
use lattice_nls::solver::{solve_least_energy, InitialGuess, SolverOptions};
use wasm_bindgen::prelude::*;

const OMEGA: f64 = 0.625;
const U_HALF: f64 = 1.6;
const DELTA: f64 = 0.45;

fn text<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn spec_for(variant: &str, p: f64, epsilon: f64) -> Result<ProblemSpec, String> {
    let variant: PotentialVariant = variant.parse().map_err(text)?;
    ProblemSpec::new(2, p, epsilon, variant).map_err(text)
}

/// Q sampled at the cell centres of an `n × n` grid on (−L, L)², row-major
/// with x varying slowest.
#[wasm_bindgen]
pub fn potential_map(variant: &str, epsilon: f64, half_width: f64, n: usize) -> Result<Vec<f64>, String> {
    let spec = spec_for(variant, 3.0, epsilon)?;
    let grid = Grid::new(2, half_width, n).map_err(text)?;
    Ok(q_field(&spec, &grid, 1).into_values())
}

/// A positive least-energy solution together with its concentration numbers.
#[wasm_bindgen]
pub struct GroundState {
    spec: ProblemSpec,
    u: Field,
    energy: f64,
    residual: f64,
    iterations: usize,
    status: String,
    shift: Vec<i64>,
    ratio_h1: Option<f64>,
    ratio_lp: Option<f64>,
}

#[wasm_bindgen]
impl GroundState {
    /// Nodal values after translation normalisation, same layout as [`potential_map`].
    pub fn values(&self) -> Vec<f64> {
        self.u.values().to_vec()
    }

    pub fn cells_per_axis(&self) -> usize {
        self.u.grid().cells_per_axis()
    }

    pub fn half_width(&self) -> f64 {
        self.u.grid().half_width()
    }

    pub fn energy(&self) -> f64 {
        self.energy
    }

    pub fn residual(&self) -> f64 {
        self.residual
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    pub fn status(&self) -> String {
        self.status.clone()
    }

    /// Lattice vector the solution was moved by; empty when the grid does not
    /// admit lattice translations.
    pub fn shift(&self) -> Vec<i32> {
        self.shift.iter().map(|&v| v as i32).collect()
    }

    /// NaN when the box is too small for the concentration window.
    pub fn ratio_h1(&self) -> f64 {
        self.ratio_h1.unwrap_or(f64::NAN)
    }

    pub fn ratio_lp(&self) -> f64 {
        self.ratio_lp.unwrap_or(f64::NAN)
    }

    /// For each δ, the H¹ and L^p share of the cell around the origin held by
    /// the ball B_δ(0); the result interleaves the two values.
    pub fn concentration_profile(&self, deltas: &[f64]) -> Result<Vec<f64>, String> {
        let mut out = Vec::with_capacity(2 * deltas.len());
        for &delta in deltas {
            let window = CellWindow::new(2, OMEGA, U_HALF.min(self.half_width()), delta).map_err(text)?;
            let (h1, lp) = cell_concentration(&self.u, &window, &[0, 0], self.spec.p).map_err(text)?;
            out.push(h1);
            out.push(lp);
        }
        Ok(out)
    }
}

/// Solves on an `n × n` grid of (−L, L)² starting from a bump at `(cx, cy)`.
#[wasm_bindgen]
#[allow(clippy::too_many_arguments)]
pub fn solve_ground_state(
    variant: &str,
    p: f64,
    epsilon: f64,
    half_width: f64,
    n: usize,
    cx: f64,
    cy: f64,
    tolerance: f64,
) -> Result<GroundState, String> {
    let spec = spec_for(variant, p, epsilon)?;
    let grid = Grid::new(2, half_width, n).map_err(text)?;
    let opts = SolverOptions {
        tol_residual: tolerance,
        max_outer: 2000,
        init: InitialGuess::bump_at(vec![cx, cy]),
        ..SolverOptions::default()
    };
    let result = solve_least_energy(&spec, &grid, &opts).map_err(text)?;
    let window = CellWindow::new(2, OMEGA, U_HALF, DELTA).map_err(text)?;
    let lattice = grid.cells_per_unit().is_some() && half_width > U_HALF;
    let (u, shift) = if lattice {
        normalize_translation(&result.u, &window).map_err(text)?
    } else {
        (result.u.clone(), Vec::new())
    };
    let report = if lattice {
        concentration_ratios(&u, &spec, &window).ok()
    } else {
        None
    };
    Ok(GroundState {
        spec,
        energy: result.energy.total,
        residual: result.residual_rel,
        iterations: result.iterations,
        status: result.status.label().to_string(),
        shift,
        ratio_h1: report.as_ref().map(|r| r.ratio_h1),
        ratio_lp: report.as_ref().map(|r| r.ratio_lp),
        u,
    })
}
