//! Independent check of the Cauchy transform against polar quadrature
//! centred at the target point, where the kernel singularity cancels against
//! the polar Jacobian.

use std::f64::consts::{PI, TAU};
use std::sync::Arc;

use num_complex::Complex64;
use realstab_core::dbar::{cauchy_transform_with, CauchyMethod};
use realstab_core::grid::{DiscGrid, Field};

fn gauss_legendre(m: usize) -> Vec<(f64, f64)> {
    (0..m)
        .map(|i| {
            let mut x = (PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=m {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                let dp = m as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    let w = 2.0 / ((1.0 - x * x) * dp * dp);
                    return (x, w);
                }
            }
            panic!("Legendre node did not converge");
        })
        .collect()
}

/// `-(1/π) ∬_D k(ξ)/(ξ - z) dA` for `|z| < 1`.
fn polar_oracle(k: impl Fn(Complex64) -> Complex64, z: Complex64) -> Complex64 {
    let gl = gauss_legendre(40);
    let m = 1024;
    let mut acc = Complex64::new(0.0, 0.0);
    for t in 0..m {
        let theta = TAU * t as f64 / m as f64;
        let e = Complex64::from_polar(1.0, theta);
        let b = (z * e.conj()).re;
        let r_max = -b + (b * b + 1.0 - z.norm_sqr()).sqrt();
        let mut inner = Complex64::new(0.0, 0.0);
        for &(x, w) in &gl {
            let r = 0.5 * r_max * (x + 1.0);
            inner += k(z + e * r) * (0.5 * r_max * w);
        }
        acc += inner * e.conj();
    }
    -acc * (TAU / m as f64) / PI
}

fn targets() -> Vec<Complex64> {
    vec![
        Complex64::new(0.0, 0.0),
        Complex64::new(0.3, 0.4),
        Complex64::new(-0.55, 0.1),
        Complex64::new(0.7, -0.6),
        Complex64::new(-0.1, -0.9),
    ]
}

#[test]
fn oracle_confirms_closed_forms() {
    for z in targets() {
        let u1 = polar_oracle(|_| Complex64::new(1.0, 0.0), z);
        assert!((u1 - z.conj()).norm() < 1e-12, "k = 1 at {z}: {u1}");
        let u2 = polar_oracle(|x| x.conj(), z);
        assert!((u2 - z.conj() * z.conj() / 2.0).norm() < 1e-12, "k = conj at {z}: {u2}");
    }
}

#[test]
fn grid_transform_matches_oracle_for_smooth_density() {
    let k = |z: Complex64| (z * Complex64::new(1.3, 0.4)).cos() * (1.0 - z.norm_sqr());
    let g = Arc::new(DiscGrid::new(129).unwrap());
    let u = cauchy_transform_with(&Field::from_fn(&g, k), CauchyMethod::Direct);
    for p in g.inside_nodes().step_by(997) {
        let z = g.z(p);
        if z.norm() > 0.95 {
            continue;
        }
        let err = (u.at(p) - polar_oracle(k, z)).norm();
        assert!(err < 5e-3, "at {z}: {err}");
    }
}
