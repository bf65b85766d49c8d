//! Seeded random polynomial pairs for property checks and studies.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

use crate::certify::corona_delta;
use crate::grid::DiscGrid;
use crate::poly::RealPolynomial;

pub const DEFAULT_MAX_DEGREE: usize = 6;

/// Grid used to screen pairs for the corona condition.
const SCREEN_N: usize = 129;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pair {
    pub f1: Vec<f64>,
    pub f2: Vec<f64>,
}

impl Pair {
    pub fn polys(&self) -> (RealPolynomial, RealPolynomial) {
        (RealPolynomial::new(self.f1.clone()), RealPolynomial::new(self.f2.clone()))
    }
}

/// Two independent draws of [`random_poly`].
pub fn random_pair(rng: &mut impl Rng, max_degree: usize) -> Pair {
    let f1 = random_poly(rng, max_degree);
    let f2 = random_poly(rng, max_degree);
    Pair { f1, f2 }
}

/// Degree uniform in `0..=max_degree`, coefficients in `[-1, 1]`.
///
/// Half of the draws have uniform coefficients; the other half are built
/// from roots, a random number of them real in `[-1, 1]`, so that sign
/// patterns on the real interval are well represented. Those are scaled to
/// unit largest coefficient.
pub fn random_poly(rng: &mut impl Rng, max_degree: usize) -> Vec<f64> {
    let d = rng.gen_range(0..=max_degree);
    if d == 0 || rng.gen_bool(0.5) {
        let mut c: Vec<f64> = (0..=d).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        if c[d].abs() < 0.1 {
            c[d] = 0.1f64.copysign(c[d]);
        }
        return c;
    }
    let mut p = RealPolynomial::constant(if rng.gen_bool(0.5) { 1.0 } else { -1.0 });
    let mut left = d;
    let real = rng.gen_range(0..=d);
    for _ in 0..real {
        p = &p * &RealPolynomial::new(vec![-rng.gen_range(-1.0..=1.0), 1.0]);
        left -= 1;
    }
    while left >= 2 {
        let z = Complex64::from_polar(rng.gen_range(0.3..1.5), rng.gen_range(0.0..std::f64::consts::PI));
        p = &p * &RealPolynomial::new(vec![z.norm_sqr(), -2.0 * z.re, 1.0]);
        left -= 2;
    }
    if left == 1 {
        let r = rng.gen_range(1.2..3.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        p = &p * &RealPolynomial::new(vec![-r, 1.0]);
    }
    let m = p.coeffs().iter().fold(0.0f64, |a, c| a.max(c.abs()));
    p.coeffs().iter().map(|c| c / m).collect()
}

/// The first `count` pairs from `seed` that pass `keep`.
pub fn generate(seed: u64, count: usize, max_degree: usize, keep: impl Fn(&Pair) -> bool) -> Vec<Pair> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let pair = random_pair(&mut rng, max_degree);
        if keep(&pair) {
            out.push(pair);
        }
    }
    out
}

/// Certified corona condition on a coarse grid.
pub fn corona_valid(pair: &Pair) -> bool {
    let grid = Arc::new(DiscGrid::new(SCREEN_N).expect("screen grid size is valid"));
    let (f1, f2) = pair.polys();
    corona_delta(&f1, &f2, &grid).is_ok_and(|c| c.is_valid())
}

/// Every complex root of `f1` is at least `min_gap` from every root of `f2`,
/// and all roots have modulus at most `max_modulus`.
///
/// A floating-point Euclid is accurate only on such pairs.
pub fn well_separated(pair: &Pair, min_gap: f64, max_modulus: f64) -> bool {
    let (f1, f2) = pair.polys();
    let roots = |p: &RealPolynomial| if p.degree() >= 1 { p.roots().ok() } else { Some(Vec::new()) };
    let (Some(r1), Some(r2)) = (roots(&f1), roots(&f2)) else {
        return false;
    };
    if f1.is_zero() || f2.is_zero() {
        return false;
    }
    r1.iter().chain(&r2).all(|z| z.norm() <= max_modulus)
        && r1.iter().all(|a| r2.iter().all(|b| (a - b).norm() >= min_gap))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generation_is_reproducible() {
        let a = generate(7, 20, DEFAULT_MAX_DEGREE, |_| true);
        let b = generate(7, 20, DEFAULT_MAX_DEGREE, |_| true);
        assert_eq!(a, b);
        assert_ne!(a, generate(8, 20, DEFAULT_MAX_DEGREE, |_| true));
        for p in &a {
            assert!(p.f1.len() <= 7 && p.f2.len() <= 7);
            assert!(p.f1.iter().chain(&p.f2).all(|c| c.abs() <= 1.0));
        }
    }

    #[test]
    fn screens() {
        assert!(corona_valid(&Pair { f1: vec![1.0], f2: vec![0.0] }));
        assert!(!corona_valid(&Pair { f1: vec![0.0, 1.0], f2: vec![0.0, 1.0] }));
        assert!(well_separated(&Pair { f1: vec![-0.5, 1.0], f2: vec![0.5, 1.0] }, 0.5, 2.0));
        assert!(!well_separated(&Pair { f1: vec![-0.5, 1.0], f2: vec![-0.45, 1.0] }, 0.1, 2.0));
    }
}
