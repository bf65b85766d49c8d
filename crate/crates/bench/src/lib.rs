//! Inputs shared by the benchmarks.

use std::sync::Arc;

use num_complex::Complex64;
use realstab_core::{DiscGrid, Field, RealPolynomial};

/// A smooth density on the grid of size `n`.
pub fn smooth_density(n: usize) -> Field {
    let grid = Arc::new(DiscGrid::new(n).expect("valid grid size"));
    Field::from_fn(&grid, |z| (z * Complex64::new(1.3, 0.4)).cos() * (1.0 - z.norm_sqr()))
}

/// `(z^2, z - 1/2)`.
pub fn fixture() -> (RealPolynomial, RealPolynomial) {
    (RealPolynomial::new(vec![0.0, 0.0, 1.0]), RealPolynomial::new(vec![-0.5, 1.0]))
}
