//! Solution of `∂u/∂z̄ = k` on the disc by the Cauchy area transform
//!
//! ```text
//! u(z) = -(1/π) ∬ k(ξ) / (ξ - z) dA(ξ)
//! ```
//!
//! discretized with the full cell area `h²` per inside node and the singular
//! cell left out. On the lattice this is a discrete convolution of `k` with
//! `C(d) = (h/π) / (dj + i di)`, evaluated either directly or by FFT.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::grid::{DiscGrid, Field};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CauchyMethod {
    /// Sum over source nodes for every target node.
    Direct,
    /// Zero-padded FFT convolution; agrees with `Direct` to rounding.
    Fft,
    /// `Direct` up to [`AUTO_DIRECT_MAX_N`], `Fft` above.
    #[default]
    Auto,
}

pub const AUTO_DIRECT_MAX_N: usize = 129;

/// Cauchy transform with the method picked from the grid size.
pub fn cauchy_transform(k: &Field) -> Field {
    cauchy_transform_with(k, CauchyMethod::Auto)
}

/// Output is defined on every inside node; undefined nodes of `k` count as 0.
pub fn cauchy_transform_with(k: &Field, method: CauchyMethod) -> Field {
    let grid = k.grid();
    let method = match method {
        CauchyMethod::Auto if grid.n() <= AUTO_DIRECT_MAX_N => CauchyMethod::Direct,
        CauchyMethod::Auto => CauchyMethod::Fft,
        m => m,
    };
    let src: Vec<Complex64> = (0..grid.len())
        .map(|p| if grid.is_inside(p) { k.get(p).unwrap_or(ZERO) } else { ZERO })
        .collect();
    let values = match method {
        CauchyMethod::Direct => direct(grid, &src),
        _ => fft(grid, &src),
    };
    Field::from_parts(grid, values, grid.inside_mask().to_vec())
}

fn kernel(h: f64, di: isize, dj: isize) -> Complex64 {
    if di == 0 && dj == 0 {
        ZERO
    } else {
        Complex64::new(h / PI, 0.0) / Complex64::new(dj as f64, di as f64)
    }
}

fn direct(grid: &DiscGrid, src: &[Complex64]) -> Vec<Complex64> {
    let n = grid.n();
    let w = 2 * n - 1;
    let h = grid.h();
    let table: Vec<Complex64> = (0..w * w)
        .map(|t| kernel(h, (t / w) as isize - (n as isize - 1), (t % w) as isize - (n as isize - 1)))
        .collect();
    // Nonzero column span per source row.
    let spans: Vec<(usize, usize, usize)> = (0..n)
        .filter_map(|i| {
            let row = &src[i * n..(i + 1) * n];
            let lo = row.iter().position(|v| *v != ZERO)?;
            let hi = row.iter().rposition(|v| *v != ZERO)?;
            Some((i, lo, hi))
        })
        .collect();
    (0..grid.len())
        .into_par_iter()
        .map(|a| {
            if !grid.is_inside(a) {
                return ZERO;
            }
            let (ia, ja) = grid.row_col(a);
            let mut acc = ZERO;
            for &(ib, lo, hi) in &spans {
                let trow = &table[(ia + n - 1 - ib) * w..];
                let srow = &src[ib * n..];
                for jb in lo..=hi {
                    acc += srow[jb] * trow[ja + n - 1 - jb];
                }
            }
            acc
        })
        .collect()
}

fn fft(grid: &DiscGrid, src: &[Complex64]) -> Vec<Complex64> {
    let n = grid.n();
    let h = grid.h();
    let size = (2 * n - 1).next_power_of_two();
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(size);
    let inv = planner.plan_fft_inverse(size);

    let mut a = vec![ZERO; size * size];
    for i in 0..n {
        a[i * size..i * size + n].copy_from_slice(&src[i * n..(i + 1) * n]);
    }
    let mut b = vec![ZERO; size * size];
    let m = n as isize - 1;
    for di in -m..=m {
        for dj in -m..=m {
            let r = di.rem_euclid(size as isize) as usize;
            let c = dj.rem_euclid(size as isize) as usize;
            b[r * size + c] = kernel(h, di, dj);
        }
    }
    fft2(&mut a, size, &*fwd);
    fft2(&mut b, size, &*fwd);
    for (x, y) in a.iter_mut().zip(&b) {
        *x *= y;
    }
    fft2(&mut a, size, &*inv);
    let norm = 1.0 / (size * size) as f64;
    (0..grid.len())
        .map(|p| {
            if grid.is_inside(p) {
                let (i, j) = grid.row_col(p);
                a[i * size + j] * norm
            } else {
                ZERO
            }
        })
        .collect()
}

fn fft2(data: &mut [Complex64], size: usize, plan: &dyn rustfft::Fft<f64>) {
    plan.process(data);
    transpose(data, size);
    plan.process(data);
    transpose(data, size);
}

fn transpose(data: &mut [Complex64], size: usize) {
    for i in 0..size {
        for j in i + 1..size {
            data.swap(i * size + j, j * size + i);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{dbar_fd, mirror_defect};
    use std::sync::Arc;

    fn grid(n: usize) -> Arc<DiscGrid> {
        Arc::new(DiscGrid::new(n).unwrap())
    }

    #[test]
    fn zero_in_zero_out() {
        let g = grid(65);
        let u = cauchy_transform(&Field::constant(&g, ZERO));
        assert_eq!(u.sup_norm(), 0.0);
    }

    #[test]
    fn fft_matches_direct() {
        let g = grid(65);
        let k = Field::from_fn(&g, |z| (z * 3.0).sin() + z.conj() * Complex64::new(0.2, -0.7));
        let d = cauchy_transform_with(&k, CauchyMethod::Direct);
        let f = cauchy_transform_with(&k, CauchyMethod::Fft);
        for p in g.inside_nodes() {
            assert!((d.at(p) - f.at(p)).norm() <= 1e-10);
        }
    }

    #[test]
    fn constant_density_gives_conj_z() {
        let g = grid(129);
        let u = cauchy_transform(&Field::constant(&g, Complex64::new(1.0, 0.0)));
        let err = g
            .inside_nodes()
            .filter(|&p| g.z(p).norm() <= 0.8)
            .map(|p| (u.at(p) - g.z(p).conj()).norm())
            .fold(0.0, f64::max);
        assert!(err < 5e-3, "err {err}");
    }

    #[test]
    fn symmetric_density_gives_symmetric_solution() {
        let g = grid(65);
        let k = Field::from_fn(&g, |z| z.conj() * z * z + Complex64::new(0.5, 0.0) * z.exp());
        assert!(mirror_defect(&k) <= 1e-14);
        assert!(mirror_defect(&cauchy_transform(&k)) <= 1e-10);
    }

    #[test]
    fn reconstructs_density() {
        let g = grid(129);
        let k = Field::from_fn(&g, |z| {
            let r2 = z.norm_sqr();
            if r2 < 0.49 { Complex64::new((1.0 - r2 / 0.49).powi(3), 0.0) * z } else { ZERO }
        });
        let d = dbar_fd(&cauchy_transform(&k));
        let interior = crate::grid::interior_of(&g, g.inside_mask(), 2);
        let err = g
            .inside_nodes()
            .filter(|&p| interior[p])
            .map(|p| (d.at(p) - k.at(p)).norm())
            .fold(0.0, f64::max);
        assert!(err <= 0.05 * k.sup_norm(), "err {err}");
    }
}
