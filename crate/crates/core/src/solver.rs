//! Least-energy solutions by projected Sobolev-gradient descent on the Nehari
//! manifold.
//!
//! Each step takes the H¹ Riesz representative `g` of `J′(u)` (one solve with
//! `−Δ_h + 1`), backtracks along `u − τg` until the Nehari-projected trial
//! point satisfies the Armijo condition, and accepts it. After convergence the
//! iterate is replaced by the projection of `|u|` and polished.

use crate::error::{Error, Result};
use crate::grid::{inner_h1, laplacian_apply, norm_h1, norm_l2, Field, Grid};
use crate::potential::{q_field, PotentialVariant, ProblemSpec};
use crate::sine_transform::DirichletInverse;
use crate::variational::{energy, euler_residual, nehari_project, EnergyBreakdown, ProjectedStep};

#[derive(Debug, Clone, PartialEq)]
pub enum InitialGuess {
    /// `A·exp(−|x − c|²/(2σ²))`; `width = None` picks σ = ε/2 (σ = ½ for the unit ball).
    Bump {
        center: Vec<f64>,
        amplitude: f64,
        width: Option<f64>,
    },
    Field(Field),
}

impl InitialGuess {
    pub fn bump_at(center: Vec<f64>) -> Self {
        InitialGuess::Bump {
            center,
            amplitude: 1.0,
            width: None,
        }
    }

    fn sample(&self, spec: &ProblemSpec, grid: &Grid) -> Result<Field> {
        match self {
            InitialGuess::Bump {
                center,
                amplitude,
                width,
            } => {
                if center.len() != grid.dim() {
                    return Err(Error::InvalidSpec(format!(
                        "bump centre has {} coordinates for an {}-dimensional grid",
                        center.len(),
                        grid.dim()
                    )));
                }
                let sigma = width.unwrap_or(match spec.variant {
                    PotentialVariant::LimitSingleBall => 0.5,
                    PotentialVariant::RescaledLattice => 0.5,
                    _ => 0.5 * spec.epsilon,
                });
                let two_s2 = 2.0 * sigma * sigma;
                Ok(Field::from_fn(grid, |x| {
                    let r2: f64 = x.iter().zip(center).map(|(a, b)| (a - b) * (a - b)).sum();
                    amplitude * (-r2 / two_s2).exp()
                }))
            }
            InitialGuess::Field(f) => {
                grid.check_same(f.grid())?;
                Ok(f.clone())
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineSearch {
    pub shrink: f64,
    pub armijo: f64,
    pub initial_step: f64,
}

impl Default for LineSearch {
    fn default() -> Self {
        LineSearch {
            shrink: 0.5,
            armijo: 1e-4,
            initial_step: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    /// Stop when ‖residual‖_l2 ≤ tol·‖u‖_l2.
    pub tol_residual: f64,
    pub max_outer: usize,
    pub cg_tol: f64,
    /// Defaults to 10 × cells per axis.
    pub cg_max: Option<usize>,
    pub init: InitialGuess,
    pub line_search: LineSearch,
    /// Drives randomised extra starts in [`random_starts`].
    pub seed: u64,
    /// Sub-samples per axis when sampling Q.
    pub subsamples: usize,
    pub polish_iterations: usize,
    /// Largest admissible ratio max|u| on the outer cell layer / max|u|.
    pub decay_threshold: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol_residual: 1e-6,
            max_outer: 5000,
            cg_tol: 1e-10,
            cg_max: None,
            init: InitialGuess::Bump {
                center: vec![0.0, 0.0],
                amplitude: 1.0,
                width: None,
            },
            line_search: LineSearch::default(),
            seed: 0,
            subsamples: 1,
            polish_iterations: 50,
            decay_threshold: 1e-6,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Converged,
    /// Residual tolerance not reached (iteration budget, or the line search stalled).
    NotConverged,
    /// Residual converged but the solution does not decay at the truncation wall.
    DomainTooSmall,
}

impl SolveStatus {
    pub fn label(self) -> &'static str {
        match self {
            SolveStatus::Converged => "converged",
            SolveStatus::NotConverged => "not_converged",
            SolveStatus::DomainTooSmall => "domain_too_small",
        }
    }
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub spec: ProblemSpec,
    pub u: Field,
    pub energy: EnergyBreakdown,
    pub h1_norm: f64,
    pub residual_rel: f64,
    pub iterations: usize,
    pub converged: bool,
    pub status: SolveStatus,
    pub energy_trace: Vec<f64>,
    pub min_value: f64,
    /// Minimum over cells at distance ≥ 1 from the wall.
    pub interior_min: f64,
    /// max|u| on the outermost cell layer divided by max|u|.
    pub boundary_ratio: f64,
}

/// Conjugate gradients for a symmetric positive definite operator.
pub fn cg_solve(
    apply_a: impl Fn(&Field) -> Field,
    rhs: &Field,
    tol: f64,
    maxit: usize,
) -> Result<Field> {
    pcg_solve(apply_a, |r: &Field| r.clone(), rhs, tol, maxit, |_, _| {})
}

/// Preconditioned conjugate gradients. `monitor(k, x_k)` sees every iterate.
pub fn pcg_solve(
    apply_a: impl Fn(&Field) -> Field,
    precondition: impl Fn(&Field) -> Field,
    rhs: &Field,
    tol: f64,
    maxit: usize,
    mut monitor: impl FnMut(usize, &Field),
) -> Result<Field> {
    let dot = |a: &Field, b: &Field| -> f64 {
        a.values().iter().zip(b.values()).map(|(x, y)| x * y).sum()
    };
    let mut x = Field::zeros(rhs.grid());
    let rhs_norm = dot(rhs, rhs).sqrt();
    monitor(0, &x);
    if rhs_norm == 0.0 {
        return Ok(x);
    }
    let mut r = rhs.clone();
    let mut z = precondition(&r);
    let mut d = z.clone();
    let mut rz = dot(&r, &z);
    for k in 1..=maxit {
        let ad = apply_a(&d);
        let alpha = rz / dot(&d, &ad);
        x = x.add_scaled(alpha, &d);
        r = r.add_scaled(-alpha, &ad);
        monitor(k, &x);
        let res = dot(&r, &r).sqrt() / rhs_norm;
        if res <= tol {
            return Ok(x);
        }
        z = precondition(&r);
        let rz_new = dot(&r, &z);
        d = z.add_scaled(rz_new / rz, &d);
        rz = rz_new;
    }
    let res = dot(&r, &r).sqrt() / rhs_norm;
    Err(Error::CgStalled {
        iterations: maxit,
        residual: res,
    })
}

/// `−Δ_h f + f`, the Gram operator of [`inner_h1`].
pub fn h1_operator(f: &Field) -> Field {
    laplacian_apply(f).add_scaled(1.0, f)
}

/// Riesz map of the H¹ inner product, preconditioned by the exact sine-transform
/// inverse so CG terminates in one or two steps.
pub struct RieszMap {
    inverse: DirichletInverse,
    grid: Grid,
    tol: f64,
    maxit: usize,
}

impl RieszMap {
    pub fn new(grid: &Grid, tol: f64, maxit: usize) -> Self {
        RieszMap {
            inverse: DirichletInverse::new(grid, 1.0),
            grid: grid.clone(),
            tol,
            maxit,
        }
    }

    /// Solves `(−Δ_h + 1) g = r`.
    pub fn apply(&self, r: &Field) -> Result<Field> {
        let grid = self.grid.clone();
        let precondition = |res: &Field| {
            Field::from_values(grid.clone(), self.inverse.solve(res.values()))
                .expect("transform preserves length")
        };
        pcg_solve(h1_operator, precondition, r, self.tol, self.maxit, |_, _| {})
    }
}

/// The H¹ gradient of the energy at `u`: `(−Δ_h + 1)^{-1}` applied to the Euler–Lagrange residual.
pub fn h1_gradient(
    spec: &ProblemSpec,
    u: &Field,
    q: &Field,
    cg_tol: f64,
    cg_max: usize,
) -> Result<Field> {
    RieszMap::new(u.grid(), cg_tol, cg_max).apply(&euler_residual(spec, u, q))
}

struct Descent<'a> {
    spec: &'a ProblemSpec,
    q: &'a Field,
    riesz: RieszMap,
    opts: &'a SolverOptions,
    u: Field,
    energy: f64,
    trace: Vec<f64>,
    iterations: usize,
    residual_rel: f64,
}

enum StepOutcome {
    Converged,
    Stalled,
    Budget,
}

impl Descent<'_> {
    fn residual(&self) -> f64 {
        let r = euler_residual(self.spec, &self.u, self.q);
        norm_l2(&r) / norm_l2(&self.u)
    }

    fn run(&mut self, budget: usize) -> Result<StepOutcome> {
        let ls = self.opts.line_search;
        for _ in 0..budget {
            let r = euler_residual(self.spec, &self.u, self.q);
            self.residual_rel = norm_l2(&r) / norm_l2(&self.u);
            if self.residual_rel <= self.opts.tol_residual {
                return Ok(StepOutcome::Converged);
            }
            let g = self.riesz.apply(&r)?;
            let gg = inner_h1(&g, &g);
            let step = ProjectedStep::new(self.spec, &self.u, &g, self.q);
            let mut tau = ls.initial_step;
            let accepted = loop {
                if tau < 1e-12 {
                    break None;
                }
                if let Some(change) = step.energy_change(tau) {
                    if change <= -ls.armijo * tau * gg {
                        let trial = self.u.add_scaled(-tau, &g);
                        if let Ok(projected) = nehari_project(self.spec, &trial, self.q) {
                            break Some((projected, self.energy + change));
                        }
                    }
                }
                tau *= ls.shrink;
            };
            let Some((next, e)) = accepted else {
                return Ok(StepOutcome::Stalled);
            };
            self.u = next;
            self.energy = e;
            self.trace.push(e);
            self.iterations += 1;
        }
        self.residual_rel = self.residual();
        Ok(if self.residual_rel <= self.opts.tol_residual {
            StepOutcome::Converged
        } else {
            StepOutcome::Budget
        })
    }
}

/// Computes a positive least-energy solution from one initial guess.
///
/// Non-convergence is not an error: the result comes back with
/// `converged = false` and the reason in `status`.
pub fn solve_least_energy(
    spec: &ProblemSpec,
    grid: &Grid,
    opts: &SolverOptions,
) -> Result<SolveResult> {
    spec.validate()?;
    if grid.dim() != spec.dim {
        return Err(Error::GridMismatch(format!(
            "problem is {}-dimensional but the grid is {}-dimensional",
            spec.dim,
            grid.dim()
        )));
    }
    let q = q_field(spec, grid, opts.subsamples);
    let cg_max = opts.cg_max.unwrap_or(10 * grid.cells_per_axis());
    let u0 = nehari_project(spec, &opts.init.sample(spec, grid)?, &q)?;
    let e0 = energy(spec, &u0, &q).total;
    let mut run = Descent {
        spec,
        q: &q,
        riesz: RieszMap::new(grid, opts.cg_tol, cg_max),
        opts,
        u: u0,
        energy: e0,
        trace: vec![e0],
        iterations: 0,
        residual_rel: f64::INFINITY,
    };
    let mut outcome = run.run(opts.max_outer)?;

    // positivity: |u| has no larger energy after projection
    if run.u.min_value() < 0.0 {
        let positive = nehari_project(spec, &run.u.abs(), &q)?;
        run.energy = energy(spec, &positive, &q).total;
        run.trace.push(run.energy);
        run.u = positive;
        outcome = run.run(opts.polish_iterations)?;
    }

    let u = run.u;
    let e = energy(spec, &u, &q);
    let max_abs = u.max_abs();
    let boundary_ratio = if max_abs > 0.0 {
        u.max_abs_on_boundary_layer() / max_abs
    } else {
        0.0
    };
    let h = grid.spacing();
    let interior_min = u
        .values()
        .iter()
        .enumerate()
        .filter(|(i, _)| (grid.layer(*i) as f64 + 0.5) * h >= 1.0)
        .map(|(_, &v)| v)
        .fold(f64::INFINITY, f64::min);
    let status = match outcome {
        StepOutcome::Converged if boundary_ratio <= opts.decay_threshold => SolveStatus::Converged,
        StepOutcome::Converged => SolveStatus::DomainTooSmall,
        StepOutcome::Stalled | StepOutcome::Budget => SolveStatus::NotConverged,
    };
    Ok(SolveResult {
        spec: *spec,
        h1_norm: norm_h1(&u),
        min_value: u.min_value(),
        interior_min,
        energy: e,
        residual_rel: run.residual_rel,
        iterations: run.iterations,
        converged: status == SolveStatus::Converged,
        status,
        energy_trace: run.trace,
        boundary_ratio,
        u,
    })
}

/// Outcome of one start inside [`multi_start`].
#[derive(Debug, Clone)]
pub struct StartOutcome {
    pub center: Vec<f64>,
    pub energy: Option<f64>,
    pub converged: bool,
    pub error: Option<String>,
}

#[derive(Debug, Clone)]
pub struct MultiStartResult {
    pub best: SolveResult,
    pub outcomes: Vec<StartOutcome>,
}

/// One independent solve per initial guess, concurrently when the `parallel`
/// feature is on. Results come back in the order of `starts`.
pub fn solve_starts(
    spec: &ProblemSpec,
    grid: &Grid,
    opts: &SolverOptions,
    starts: &[InitialGuess],
) -> Vec<Result<SolveResult>> {
    let solve_one = |init: &InitialGuess| {
        let o = SolverOptions {
            init: init.clone(),
            ..opts.clone()
        };
        solve_least_energy(spec, grid, &o)
    };
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        starts.par_iter().map(solve_one).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        starts.iter().map(solve_one).collect()
    }
}

/// Runs one solve per bump centre and keeps the converged result of least energy.
pub fn multi_start(
    spec: &ProblemSpec,
    grid: &Grid,
    opts: &SolverOptions,
    starts: &[InitialGuess],
) -> Result<MultiStartResult> {
    let results = solve_starts(spec, grid, opts, starts);
    let mut outcomes = Vec::with_capacity(starts.len());
    let mut best: Option<SolveResult> = None;
    for (init, res) in starts.iter().zip(results) {
        let center = match init {
            InitialGuess::Bump { center, .. } => center.clone(),
            InitialGuess::Field(_) => Vec::new(),
        };
        match res {
            Ok(r) => {
                outcomes.push(StartOutcome {
                    center,
                    energy: Some(r.energy.total),
                    converged: r.converged,
                    error: None,
                });
                let better = best
                    .as_ref()
                    .is_none_or(|b| r.energy.total < b.energy.total);
                if r.converged && better {
                    best = Some(r);
                }
            }
            Err(e) => outcomes.push(StartOutcome {
                center,
                energy: None,
                converged: false,
                error: Some(e.to_string()),
            }),
        }
    }
    match best {
        Some(best) => Ok(MultiStartResult { best, outcomes }),
        None => Err(Error::AllStartsFailed {
            attempts: starts.len(),
        }),
    }
}

/// `count` extra bump centres jittered within ±½ around `around`, reproducible from `seed`.
pub fn random_starts(around: &[f64], count: usize, seed: u64) -> Vec<Vec<f64>> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| around.iter().map(|c| c + rng.gen_range(-0.5..0.5)).collect())
        .collect()
}
