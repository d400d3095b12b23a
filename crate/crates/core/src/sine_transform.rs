//! Exact inverse of `−Δ_h + c` on a cell-centred Dirichlet grid.
//!
//! The 1-D stencil `tridiag(−1, 2, −1)/h²` with zero ghosts is diagonalised by
//! the type-I discrete sine transform, so the N-D operator is inverted by a
//! transform along every axis, a pointwise division, and the transform back.

use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::grid::Grid;

pub(crate) struct DirichletInverse {
    dim: usize,
    n: usize,
    fft: Arc<dyn Fft<f64>>,
    /// Eigenvalues of the 1-D stencil, `(2 − 2cos(πk/(n+1)))/h²`, k = 1..n.
    eig: Vec<f64>,
    shift: f64,
}

impl DirichletInverse {
    pub(crate) fn new(grid: &Grid, shift: f64) -> Self {
        let n = grid.cells_per_axis();
        let h = grid.spacing();
        let fft = FftPlanner::new().plan_fft_forward(2 * (n + 1));
        let eig = (1..=n)
            .map(|k| {
                let theta = std::f64::consts::PI * k as f64 / (n + 1) as f64;
                (2.0 - 2.0 * theta.cos()) / (h * h)
            })
            .collect();
        DirichletInverse {
            dim: grid.dim(),
            n,
            fft,
            eig,
            shift,
        }
    }

    /// Solves `(−Δ_h + shift) x = rhs`.
    pub(crate) fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let mut x = rhs.to_vec();
        for axis in 0..self.dim {
            self.transform_axis(&mut x, axis);
        }
        let n = self.n;
        let norm = (2.0 / (n + 1) as f64).powi(self.dim as i32);
        let mut idx = vec![0usize; self.dim];
        for v in x.iter_mut() {
            let lambda: f64 = idx.iter().map(|&k| self.eig[k]).sum::<f64>() + self.shift;
            *v *= norm / lambda;
            for a in (0..self.dim).rev() {
                idx[a] += 1;
                if idx[a] < n {
                    break;
                }
                idx[a] = 0;
            }
        }
        for axis in 0..self.dim {
            self.transform_axis(&mut x, axis);
        }
        x
    }

    /// Unnormalised DST-I along one axis, two real lines per complex FFT.
    fn transform_axis(&self, data: &mut [f64], axis: usize) {
        let n = self.n;
        let stride = n.pow((self.dim - 1 - axis) as u32);
        let outer = data.len() / (n * stride);
        let m = 2 * (n + 1);
        let mut buf = vec![Complex64::new(0.0, 0.0); m];
        let mut scratch = vec![Complex64::new(0.0, 0.0); self.fft.get_inplace_scratch_len()];
        let starts: Vec<usize> = (0..outer)
            .flat_map(|o| (0..stride).map(move |i| o * n * stride + i))
            .collect();
        for pair in starts.chunks(2) {
            let a = pair[0];
            let b = pair.get(1).copied();
            buf[0] = Complex64::new(0.0, 0.0);
            buf[n + 1] = Complex64::new(0.0, 0.0);
            for j in 0..n {
                let re = data[a + j * stride];
                let im = b.map_or(0.0, |b| data[b + j * stride]);
                buf[j + 1] = Complex64::new(re, im);
                buf[m - 1 - j] = Complex64::new(-re, -im);
            }
            self.fft.process_with_scratch(&mut buf, &mut scratch);
            for k in 0..n {
                let y = buf[k + 1];
                data[a + k * stride] = -0.5 * y.im;
                if let Some(b) = b {
                    data[b + k * stride] = 0.5 * y.re;
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{laplacian_apply, Field};

    #[test]
    fn inverts_the_shifted_stencil() {
        for (dim, n) in [(1, 9), (2, 12), (3, 6)] {
            let grid = Grid::new(dim, 1.5, n).unwrap();
            let f = Field::from_fn(&grid, |x| x.iter().map(|v| (3.0 * v).sin() + v * v).sum());
            let rhs = laplacian_apply(&f).add_scaled(1.0, &f);
            let back = DirichletInverse::new(&grid, 1.0).solve(rhs.values());
            for (a, b) in back.iter().zip(f.values()) {
                assert!((a - b).abs() < 1e-11, "dim {dim}: {a} vs {b}");
            }
        }
    }
}
