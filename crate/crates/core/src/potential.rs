//! The sign-changing coefficient `Q`: +1 on a union of balls, −1 elsewhere.
//!
//! Four geometries are supported. `LatticeBalls` places a ball of radius ε at
//! every point of Z^N; `SingleBall` keeps only the one at the origin.
//! `RescaledLattice` is the lattice seen through the blow-up `x ↦ εx` (unit
//! balls centred on Z^N/ε) and `LimitSingleBall` is its formal ε → 0 limit,
//! a single unit ball. Balls are open: points on a sphere evaluate to −1.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::grid::{Field, Grid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PotentialVariant {
    LatticeBalls,
    SingleBall,
    RescaledLattice,
    LimitSingleBall,
}

impl PotentialVariant {
    pub const ALL: [PotentialVariant; 4] = [
        PotentialVariant::LatticeBalls,
        PotentialVariant::SingleBall,
        PotentialVariant::RescaledLattice,
        PotentialVariant::LimitSingleBall,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            PotentialVariant::LatticeBalls => "LatticeBalls",
            PotentialVariant::SingleBall => "SingleBall",
            PotentialVariant::RescaledLattice => "RescaledLattice",
            PotentialVariant::LimitSingleBall => "LimitSingleBall",
        }
    }

    pub fn uses_epsilon(self) -> bool {
        !matches!(self, PotentialVariant::LimitSingleBall)
    }
}

impl fmt::Display for PotentialVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for PotentialVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PotentialVariant::ALL
            .into_iter()
            .find(|v| v.tag().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::InvalidSpec(format!("unknown potential variant `{s}`")))
    }
}

/// Critical Sobolev exponent 2* = 2N/(N−2), infinite for N = 2.
pub fn critical_exponent(dim: usize) -> f64 {
    if dim <= 2 {
        f64::INFINITY
    } else {
        2.0 * dim as f64 / (dim as f64 - 2.0)
    }
}

/// Which equation is being solved: `−Δu + m·u = Q|u|^{p−2}u` in R^N.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProblemSpec {
    pub dim: usize,
    pub p: f64,
    /// Ball radius (lattice, single ball) or blow-up factor (rescaled).
    /// Ignored by `LimitSingleBall`.
    pub epsilon: f64,
    pub variant: PotentialVariant,
    /// Zeroth-order coefficient, fixed by the variant: 1, ε² or 0.
    pub mass: f64,
}

impl ProblemSpec {
    pub fn new(dim: usize, p: f64, epsilon: f64, variant: PotentialVariant) -> Result<Self> {
        let epsilon = if variant.uses_epsilon() { epsilon } else { 0.0 };
        let mass = match variant {
            PotentialVariant::LatticeBalls | PotentialVariant::SingleBall => 1.0,
            PotentialVariant::RescaledLattice => epsilon * epsilon,
            PotentialVariant::LimitSingleBall => 0.0,
        };
        let spec = ProblemSpec {
            dim,
            p,
            epsilon,
            variant,
            mass,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim < 2 {
            return Err(Error::InvalidSpec(format!(
                "dimension N={} must be at least 2",
                self.dim
            )));
        }
        let crit = critical_exponent(self.dim);
        if !(self.p.is_finite() && self.p > 2.0) {
            return Err(Error::InvalidSpec(format!(
                "p={} must lie in the open interval (2, 2*)",
                self.p
            )));
        }
        if self.p >= crit {
            return Err(Error::InvalidSpec(format!(
                "p={} exceeds 2*={} for N={}",
                self.p, crit, self.dim
            )));
        }
        if self.variant.uses_epsilon() && !(self.epsilon > 0.0 && self.epsilon < 0.5) {
            return Err(Error::InvalidSpec(format!(
                "epsilon={} must lie in (0, 1/2) for {}",
                self.epsilon, self.variant
            )));
        }
        Ok(())
    }

    /// The same problem seen in the blow-up variables `v(x) = ε^{2/(p−2)} u(εx)`.
    pub fn rescaled(&self) -> Result<ProblemSpec> {
        let variant = match self.variant {
            PotentialVariant::LatticeBalls => PotentialVariant::RescaledLattice,
            PotentialVariant::SingleBall => PotentialVariant::LimitSingleBall,
            other => {
                return Err(Error::InvalidSpec(format!(
                    "{other} is already a rescaled problem"
                )))
            }
        };
        let mut spec = ProblemSpec::new(self.dim, self.p, self.epsilon, variant)?;
        if variant == PotentialVariant::LimitSingleBall {
            // The single ball rescales to the unit ball, but keeps its ε² mass term.
            spec.mass = self.epsilon * self.epsilon;
        }
        Ok(spec)
    }
}

/// Coordinate-wise rounding with halves going toward +∞.
pub fn nearest_lattice_point(x: &[f64]) -> Vec<i64> {
    x.iter().map(|&xi| (xi + 0.5).floor() as i64).collect()
}

fn squared_distance_to_lattice(x: impl Iterator<Item = f64>) -> f64 {
    x.map(|xi| {
        let d = xi - (xi + 0.5).floor();
        d * d
    })
    .sum()
}

/// Q at a point: +1 inside one of the (open) balls, −1 otherwise.
pub fn q_eval(spec: &ProblemSpec, x: &[f64]) -> f64 {
    let eps = spec.epsilon;
    let inside = match spec.variant {
        PotentialVariant::LatticeBalls => squared_distance_to_lattice(x.iter().copied()) < eps * eps,
        PotentialVariant::SingleBall => x.iter().map(|v| v * v).sum::<f64>() < eps * eps,
        PotentialVariant::RescaledLattice => {
            squared_distance_to_lattice(x.iter().map(|&v| eps * v)) < eps * eps
        }
        PotentialVariant::LimitSingleBall => x.iter().map(|v| v * v).sum::<f64>() < 1.0,
    };
    if inside {
        1.0
    } else {
        -1.0
    }
}

/// Samples Q on a grid. With `subsamples = s > 1` every cell holds the mean of
/// Q over an `s^N` uniform sub-lattice of the cell.
pub fn q_field(spec: &ProblemSpec, grid: &Grid, subsamples: usize) -> Field {
    let s = subsamples.max(1);
    let h = grid.spacing();
    let offsets: Vec<f64> = (0..s)
        .map(|j| ((j as f64 + 0.5) / s as f64 - 0.5) * h)
        .collect();
    let total = s.pow(grid.dim() as u32);
    let mut point = vec![0.0; grid.dim()];
    let mut sub = vec![0usize; grid.dim()];
    let mut values = Vec::with_capacity(grid.len());
    grid.for_each_center(|_, center| {
        if s == 1 {
            values.push(q_eval(spec, center));
            return;
        }
        let mut acc = 0.0;
        sub.iter_mut().for_each(|k| *k = 0);
        for _ in 0..total {
            for (a, pt) in point.iter_mut().enumerate() {
                *pt = center[a] + offsets[sub[a]];
            }
            acc += q_eval(spec, &point);
            for k in sub.iter_mut().rev() {
                *k += 1;
                if *k < s {
                    break;
                }
                *k = 0;
            }
        }
        values.push(acc / total as f64);
    });
    Field::from_values(grid.clone(), values).expect("q_field length matches grid")
}
