//! Energy functional, Euler–Lagrange residual and the Nehari manifold.
//!
//! One code path covers the three equations
//! `−Δu + m·u = Q|u|^{p−2}u` with `m ∈ {1, ε², 0}`; the energy is
//! `½(‖∇u‖² + m‖u‖²) − (1/p)∫Q|u|^p` in the face/cell quadrature of [`crate::grid`].

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::grid::{cell_sum, h1_form, integrate_weighted_power, l2_inner, laplacian_into, Field, Grid};
use crate::potential::ProblemSpec;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyBreakdown {
    /// ½(‖∇u‖² + m‖u‖²).
    pub quadratic: f64,
    /// (1/p)∫Q|u|^p.
    pub potential: f64,
    /// `quadratic − potential`.
    pub total: f64,
}

pub fn energy(spec: &ProblemSpec, u: &Field, q: &Field) -> EnergyBreakdown {
    let quadratic = 0.5 * h1_form(u, u, spec.mass);
    let potential = integrate_weighted_power(u, q, spec.p) / spec.p;
    EnergyBreakdown {
        quadratic,
        potential,
        total: quadratic - potential,
    }
}

/// Pointwise `−Δ_h u + m·u − q|u|^{p−2}u`.
pub fn euler_residual(spec: &ProblemSpec, u: &Field, q: &Field) -> Field {
    let mut out = Field::zeros(u.grid());
    laplacian_into(u, out.values_mut());
    let pm2 = spec.p - 2.0;
    for ((r, &ui), &qi) in out.values_mut().iter_mut().zip(u.values()).zip(q.values()) {
        *r += spec.mass * ui - qi * ui.abs().powf(pm2) * ui;
    }
    out
}

/// `J′(u)φ = ⟨u, φ⟩_m − Σ q|u|^{p−2}uφ h^N`.
pub fn directional_derivative(spec: &ProblemSpec, u: &Field, q: &Field, phi: &Field) -> f64 {
    let pm2 = spec.p - 2.0;
    let nonlinear = Field::from_values(
        u.grid().clone(),
        u.values()
            .iter()
            .zip(q.values())
            .map(|(&ui, &qi)| qi * ui.abs().powf(pm2) * ui)
            .collect(),
    )
    .expect("same grid");
    h1_form(u, phi, spec.mass) - l2_inner(&nonlinear, phi)
}

/// The unique `t > 0` with `t·u` on the Nehari manifold:
/// `t = (‖u‖²_m / ∫q|u|^p)^{1/(p−2)}`.
pub fn nehari_scale(spec: &ProblemSpec, u: &Field, q: &Field) -> Result<f64> {
    let norm_sq = h1_form(u, u, spec.mass);
    let weighted_power = integrate_weighted_power(u, q, spec.p);
    nehari_scale_from_parts(spec.p, norm_sq, weighted_power)
}

pub(crate) fn nehari_scale_from_parts(p: f64, norm_sq: f64, weighted_power: f64) -> Result<f64> {
    if !(weighted_power > 0.0) || !(norm_sq > 0.0) {
        return Err(Error::NehariInfeasible { weighted_power });
    }
    Ok((norm_sq / weighted_power).powf(1.0 / (p - 2.0)))
}

pub fn nehari_project(spec: &ProblemSpec, u: &Field, q: &Field) -> Result<Field> {
    let t = nehari_scale(spec, u, q)?;
    Ok(u.scaled(t))
}

/// Energy change `E(P(u − τg)) − E(P(u))` between Nehari projections, computed
/// from differences so that it stays accurate when it is far below the rounding
/// level of the energies themselves. `None` when the trial point is infeasible.
pub(crate) struct ProjectedStep<'a> {
    spec: &'a ProblemSpec,
    u: &'a Field,
    g: &'a Field,
    q: &'a Field,
    norm_sq: f64,
    weighted_power: f64,
    cross: f64,
    g_norm_sq: f64,
    reference: f64,
}

impl<'a> ProjectedStep<'a> {
    pub(crate) fn new(spec: &'a ProblemSpec, u: &'a Field, g: &'a Field, q: &'a Field) -> Self {
        let norm_sq = h1_form(u, u, spec.mass);
        let weighted_power = integrate_weighted_power(u, q, spec.p);
        let p = spec.p;
        let reference = (p - 2.0) / (2.0 * p) * norm_sq.powf(p / (p - 2.0))
            / weighted_power.powf(2.0 / (p - 2.0));
        ProjectedStep {
            spec,
            u,
            g,
            q,
            norm_sq,
            weighted_power,
            cross: h1_form(u, g, spec.mass),
            g_norm_sq: h1_form(g, g, spec.mass),
            reference,
        }
    }

    pub(crate) fn energy_change(&self, tau: f64) -> Option<f64> {
        let p = self.spec.p;
        let (uv, gv, qv) = (self.u.values(), self.g.values(), self.q.values());
        let d_norm = tau * (tau * self.g_norm_sq - 2.0 * self.cross);
        let d_power = cell_sum(uv.len(), |i| {
            let (u, step) = (uv[i], -tau * gv[i]);
            if qv[i] == 0.0 {
                return 0.0;
            }
            let diff = if u != 0.0 && (step / u).abs() < 0.5 {
                u.abs().powf(p) * (p * (step / u).ln_1p()).exp_m1()
            } else {
                (u + step).abs().powf(p) - u.abs().powf(p)
            };
            qv[i] * diff
        }) * self.u.grid().cell_volume();
        let (a, b) = (d_norm / self.norm_sq, d_power / self.weighted_power);
        if !(self.weighted_power > 0.0) || a <= -1.0 || b <= -1.0 {
            return None;
        }
        let log_ratio = (p * a.ln_1p() - 2.0 * b.ln_1p()) / (p - 2.0);
        Some(self.reference * log_ratio.exp_m1())
    }
}

/// Empirical Sobolev-type constant: the largest `Σ|f|^p h^N / ‖f‖^p_{H¹}` seen
/// over `samples` random smooth fields (single and multi-bump Gaussians).
pub fn sobolev_constant_estimate(grid: &Grid, p: f64, samples: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let one = Field::from_fn(grid, |_| 1.0);
    let reach = (grid.half_width() * 0.5).min(2.0);
    let mut best: f64 = 0.0;
    for k in 0..samples {
        let bumps = if k % 2 == 0 { 1 } else { rng.gen_range(2..=4) };
        let params: Vec<(Vec<f64>, f64, f64)> = (0..bumps)
            .map(|_| {
                let c: Vec<f64> = (0..grid.dim()).map(|_| rng.gen_range(-reach..reach)).collect();
                let width = 0.15 * 20f64.powf(rng.gen::<f64>());
                let amp = rng.gen_range(0.2..1.0) * if rng.gen_bool(0.8) { 1.0 } else { -1.0 };
                (c, width, amp)
            })
            .collect();
        let f = Field::from_fn(grid, |x| {
            params
                .iter()
                .map(|(c, w, a)| {
                    let r2: f64 = x.iter().zip(c).map(|(xi, ci)| (xi - ci).powi(2)).sum();
                    a * (-r2 / (w * w)).exp()
                })
                .sum()
        });
        let norm_sq = h1_form(&f, &f, 1.0);
        if norm_sq > 0.0 {
            let ratio = integrate_weighted_power(&f, &one, p) / norm_sq.powf(p / 2.0);
            best = best.max(ratio);
        }
    }
    best
}

/// `C₀ = ((p−2)/(2p))·C^{−2/(p−2)}`: every Nehari point with
/// `∫|u|^p ≤ C‖u‖^p` has energy at least this.
pub fn energy_lower_bound(p: f64, sobolev_constant: f64) -> f64 {
    (p - 2.0) / (2.0 * p) * sobolev_constant.powf(-2.0 / (p - 2.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{laplacian_apply, Grid};
    use crate::potential::{q_field, PotentialVariant};

    fn setup(eps: f64) -> (ProblemSpec, Grid, Field) {
        let spec = ProblemSpec::new(2, 4.0, eps, PotentialVariant::LatticeBalls).unwrap();
        let grid = Grid::with_cells_per_unit(2, 2.0, 16).unwrap();
        let q = q_field(&spec, &grid, 1);
        (spec, grid, q)
    }

    fn bump(grid: &Grid, width: f64) -> Field {
        Field::from_fn(grid, |x| (-(x[0] * x[0] + x[1] * x[1]) / (width * width)).exp())
    }

    #[test]
    fn zero_field() {
        let (spec, grid, q) = setup(0.3);
        let z = Field::zeros(&grid);
        let e = energy(&spec, &z, &q);
        assert_eq!((e.quadratic, e.potential, e.total), (0.0, 0.0, 0.0));
        assert!(euler_residual(&spec, &z, &q).values().iter().all(|&v| v == 0.0));
        assert_eq!(directional_derivative(&spec, &bump(&grid, 0.2), &q, &z), 0.0);
        assert!(matches!(nehari_scale(&spec, &z, &q), Err(Error::NehariInfeasible { .. })));
    }

    #[test]
    fn homogeneity() {
        let (spec, grid, q) = setup(0.3);
        let u = bump(&grid, 0.2);
        let e1 = energy(&spec, &u, &q);
        let e2 = energy(&spec, &u.scaled(2.0), &q);
        assert!((e2.quadratic - 4.0 * e1.quadratic).abs() < 1e-12 * e2.quadratic);
        assert!((e2.potential - 16.0 * e1.potential).abs() < 1e-12 * e2.potential.abs());
        assert_eq!(e1.total, e1.quadratic - e1.potential);
    }

    #[test]
    fn closed_form_scale() {
        // a = ‖u‖² = 8, b = ∫q|u|^4 = 2 → t = 2
        assert_eq!(nehari_scale_from_parts(4.0, 8.0, 2.0).unwrap(), 2.0);
        assert_eq!(nehari_scale_from_parts(3.0, 5.0, 5.0).unwrap(), 1.0);
        assert!(nehari_scale_from_parts(4.0, 8.0, -1.0).is_err());
    }

    #[test]
    fn residual_pairing_identity() {
        // Σ r u h^N = ‖u‖² − ∫q|u|^p, exact because the H¹ form includes the wall faces
        let (spec, grid, q) = setup(0.3);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let u = Field::from_fn(&grid, |_| rng.gen_range(-1.0..1.0));
        let r = euler_residual(&spec, &u, &q);
        let e = energy(&spec, &u, &q);
        let lhs = l2_inner(&r, &u);
        let rhs = 2.0 * e.quadratic - spec.p * e.potential;
        assert!((lhs - rhs).abs() < 1e-11 * lhs.abs().max(rhs.abs()));
        // matches the directional derivative in direction u
        let dd = directional_derivative(&spec, &u, &q, &u);
        assert!((dd - rhs).abs() < 1e-11 * rhs.abs());
    }

    #[test]
    fn residual_uses_the_stencil() {
        let (spec, grid, _) = setup(0.3);
        let q = Field::zeros(&grid);
        let u = bump(&grid, 0.5);
        let r = euler_residual(&spec, &u, &q);
        let expect = laplacian_apply(&u).add_scaled(1.0, &u);
        for (a, b) in r.values().iter().zip(expect.values()) {
            assert!((a - b).abs() < 1e-12 * b.abs().max(1.0));
        }
    }

    #[test]
    fn projection_lands_on_nehari() {
        let (spec, grid, q) = setup(0.3);
        let u = nehari_project(&spec, &bump(&grid, 0.15), &q).unwrap();
        let e = energy(&spec, &u, &q);
        let dd = directional_derivative(&spec, &u, &q, &u);
        assert!(dd.abs() <= 1e-10 * 2.0 * e.quadratic);
        assert!(e.total > 0.0);
        let expect = (spec.p - 2.0) / (2.0 * spec.p) * 2.0 * e.quadratic;
        assert!((e.total - expect).abs() <= 1e-10 * e.total);
        // already on the manifold: t = 1
        let again = nehari_project(&spec, &u, &q).unwrap();
        for (a, b) in again.values().iter().zip(u.values()) {
            assert!((a - b).abs() <= 1e-12 * b.abs().max(1e-300));
        }
    }

    #[test]
    fn wide_bump_is_infeasible() {
        // mostly outside the balls: negative nonlinear mass
        let (spec, grid, q) = setup(0.1);
        let u = bump(&grid, 1.5);
        assert!(matches!(nehari_project(&spec, &u, &q), Err(Error::NehariInfeasible { .. })));
    }

    #[test]
    fn lower_bound_formula() {
        // p = 4: C₀ = ¼ · C^{−1}
        assert!((energy_lower_bound(4.0, 2.0) - 0.125).abs() < 1e-15);
    }

    #[test]
    fn sobolev_estimate_is_deterministic_and_bounds_samples() {
        let grid = Grid::new(2, 4.0, 64).unwrap();
        let a = sobolev_constant_estimate(&grid, 4.0, 20, 7);
        let b = sobolev_constant_estimate(&grid, 4.0, 20, 7);
        assert_eq!(a, b);
        assert!(a > 0.0 && a.is_finite());
    }
}
