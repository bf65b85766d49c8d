//! Real-coefficient polynomials: the input data `f1`, `f2` of every problem.
//!
//! A polynomial with real Taylor coefficients is automatically real-symmetric,
//! `p(conj z) = conj p(z)`, which is the defining property of the real disc
//! algebra. Roots are found with the Aberth–Ehrlich simultaneous iteration.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Polynomial with real coefficients in ascending degree order.
///
/// Trailing zeros are stripped on construction, so the zero polynomial is the
/// empty coefficient list and has degree `-1`.
#[derive(Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct RealPolynomial {
    coeffs: Vec<f64>,
}

impl RealPolynomial {
    /// Builds a polynomial from ascending coefficients.
    ///
    /// Panics if a coefficient is not finite; use [`RealPolynomial::try_new`]
    /// for untrusted input.
    pub fn new(coeffs: impl Into<Vec<f64>>) -> Self {
        Self::try_new(coeffs).expect("polynomial coefficients must be finite")
    }

    pub fn try_new(coeffs: impl Into<Vec<f64>>) -> Result<Self> {
        let mut coeffs = coeffs.into();
        if let Some(bad) = coeffs.iter().find(|c| !c.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "non-finite polynomial coefficient {bad}"
            )));
        }
        while coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        Ok(Self { coeffs })
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn constant(c: f64) -> Self {
        Self::new(vec![c])
    }

    /// The monomial `z`.
    pub fn z() -> Self {
        Self::new(vec![0.0, 1.0])
    }

    /// Monic polynomial with the given real roots.
    pub fn from_roots(roots: &[f64]) -> Self {
        roots.iter().fold(Self::constant(1.0), |acc, &r| {
            acc * Self::new(vec![-r, 1.0])
        })
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Degree, with `-1` for the zero polynomial.
    pub fn degree(&self) -> isize {
        self.coeffs.len() as isize - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn leading(&self) -> f64 {
        self.coeffs.last().copied().unwrap_or(0.0)
    }

    /// `Σ|a_k|`, an upper bound for `|p|` on the closed disc.
    pub fn abs_sum(&self) -> f64 {
        self.coeffs.iter().map(|c| c.abs()).sum()
    }

    /// Horner evaluation at a complex point.
    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    pub fn eval_real(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    /// Value and first derivative in one Horner pass.
    pub fn eval_with_derivative(&self, z: Complex64) -> (Complex64, Complex64) {
        let mut p = Complex64::new(0.0, 0.0);
        let mut dp = Complex64::new(0.0, 0.0);
        for &c in self.coeffs.iter().rev() {
            dp = dp * z + p;
            p = p * z + c;
        }
        (p, dp)
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| k as f64 * c)
                .collect::<Vec<_>>(),
        )
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::new(self.coeffs.iter().map(|c| c * s).collect::<Vec<_>>())
    }

    /// Euclidean division `self = q * divisor + r` with `deg r < deg divisor`.
    ///
    /// Panics when dividing by the zero polynomial.
    pub fn div_rem(&self, divisor: &Self) -> (Self, Self) {
        assert!(!divisor.is_zero(), "division by the zero polynomial");
        let dd = divisor.coeffs.len() - 1;
        if self.coeffs.len() <= dd {
            return (Self::zero(), self.clone());
        }
        let lead = divisor.leading();
        let mut rem = self.coeffs.clone();
        let mut quot = vec![0.0; rem.len() - dd];
        for k in (0..quot.len()).rev() {
            let c = rem[k + dd] / lead;
            quot[k] = c;
            for (j, &d) in divisor.coeffs.iter().enumerate() {
                rem[k + j] -= c * d;
            }
            rem[k + dd] = 0.0;
        }
        rem.truncate(dd);
        (Self::new(quot), Self::new(rem))
    }

    /// All complex roots with multiplicity (Aberth–Ehrlich).
    pub fn roots(&self) -> Result<Vec<Complex64>> {
        self.roots_with(&AberthOptions::default())
    }

    pub fn roots_with(&self, opts: &AberthOptions) -> Result<Vec<Complex64>> {
        if self.degree() < 1 {
            return Err(Error::InvalidInput(
                "roots() needs a polynomial of degree at least 1".into(),
            ));
        }
        // Exact zero roots are split off so that z^m factors come out exact.
        let zeros = self.coeffs.iter().take_while(|&&c| c == 0.0).count();
        let reduced = &self.coeffs[zeros..];
        let mut roots = vec![Complex64::new(0.0, 0.0); zeros];
        if reduced.len() > 1 {
            roots.extend(aberth(reduced, opts)?);
        }
        Ok(roots)
    }

    /// Real zeros in `[-1 - tol, 1 + tol]`, sorted, with clustered multiplicities.
    pub fn real_roots_in_closed_disc(&self, tol: f64) -> Result<Vec<RealRoot>> {
        if self.degree() < 1 {
            return Ok(Vec::new());
        }
        let mut xs: Vec<f64> = self
            .roots()?
            .into_iter()
            .filter(|r| r.im.abs() <= tol && r.re.abs() <= 1.0 + tol)
            .map(|r| r.re)
            .collect();
        xs.sort_by(f64::total_cmp);

        let mut out: Vec<RealRoot> = Vec::new();
        let mut cluster: Vec<f64> = Vec::new();
        for x in xs {
            if let Some(&last) = cluster.last() {
                if x - last > tol {
                    out.push(RealRoot::from_cluster(&cluster));
                    cluster.clear();
                }
            }
            cluster.push(x);
        }
        if !cluster.is_empty() {
            out.push(RealRoot::from_cluster(&cluster));
        }
        Ok(out)
    }

    /// Maximum of `|p|` over `m` equispaced points of the unit circle.
    ///
    /// By the maximum principle this is a lower estimate of the sup norm over
    /// the closed disc; `abs_sum` is the certified upper bound.
    pub fn sup_norm_disc(&self, m: usize) -> SupNorm {
        assert!(m >= 64, "sup_norm_disc needs at least 64 boundary samples");
        let sampled = (0..m)
            .map(|k| {
                let theta = std::f64::consts::TAU * k as f64 / m as f64;
                self.eval(Complex64::from_polar(1.0, theta)).norm()
            })
            .fold(0.0, f64::max);
        SupNorm {
            sampled,
            upper_bound: self.abs_sum(),
        }
    }
}

impl fmt::Debug for RealPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RealPolynomial({:?})", self.coeffs)
    }
}

impl TryFrom<Vec<f64>> for RealPolynomial {
    type Error = Error;

    fn try_from(coeffs: Vec<f64>) -> Result<Self> {
        Self::try_new(coeffs)
    }
}

impl From<RealPolynomial> for Vec<f64> {
    fn from(p: RealPolynomial) -> Self {
        p.coeffs
    }
}

fn zip_coeffs(a: &[f64], b: &[f64], op: impl Fn(f64, f64) -> f64) -> Vec<f64> {
    (0..a.len().max(b.len()))
        .map(|k| op(a.get(k).copied().unwrap_or(0.0), b.get(k).copied().unwrap_or(0.0)))
        .collect()
}

impl Add for &RealPolynomial {
    type Output = RealPolynomial;
    fn add(self, rhs: Self) -> RealPolynomial {
        RealPolynomial::new(zip_coeffs(&self.coeffs, &rhs.coeffs, |x, y| x + y))
    }
}

impl Sub for &RealPolynomial {
    type Output = RealPolynomial;
    fn sub(self, rhs: Self) -> RealPolynomial {
        RealPolynomial::new(zip_coeffs(&self.coeffs, &rhs.coeffs, |x, y| x - y))
    }
}

impl Mul for &RealPolynomial {
    type Output = RealPolynomial;
    fn mul(self, rhs: Self) -> RealPolynomial {
        if self.is_zero() || rhs.is_zero() {
            return RealPolynomial::zero();
        }
        let mut out = vec![0.0; self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        RealPolynomial::new(out)
    }
}

impl Neg for &RealPolynomial {
    type Output = RealPolynomial;
    fn neg(self) -> RealPolynomial {
        self.scale(-1.0)
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for RealPolynomial {
            type Output = RealPolynomial;
            fn $m(self, rhs: Self) -> RealPolynomial {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for RealPolynomial {
    type Output = RealPolynomial;
    fn neg(self) -> RealPolynomial {
        -&self
    }
}

/// Polynomial with complex coefficients; only used for solutions that have
/// not been symmetrized yet.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ComplexPolynomial {
    pub coeffs: Vec<Complex64>,
}

impl ComplexPolynomial {
    pub fn new(coeffs: Vec<Complex64>) -> Self {
        Self { coeffs }
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    pub fn mul_real(&self, p: &RealPolynomial) -> Self {
        if self.coeffs.is_empty() || p.is_zero() {
            return Self::default();
        }
        let mut out = vec![Complex64::new(0.0, 0.0); self.coeffs.len() + p.coeffs().len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, &b) in p.coeffs().iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self::new(out)
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let zero = Complex64::new(0.0, 0.0);
        Self::new(
            (0..n)
                .map(|k| {
                    self.coeffs.get(k).copied().unwrap_or(zero)
                        + other.coeffs.get(k).copied().unwrap_or(zero)
                })
                .collect(),
        )
    }
}

impl From<&RealPolynomial> for ComplexPolynomial {
    fn from(p: &RealPolynomial) -> Self {
        Self::new(p.coeffs().iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }
}

/// A real zero and its (clustered) multiplicity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RealRoot {
    pub value: f64,
    pub multiplicity: usize,
}

impl RealRoot {
    fn from_cluster(xs: &[f64]) -> Self {
        Self {
            value: xs.iter().sum::<f64>() / xs.len() as f64,
            multiplicity: xs.len(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupNorm {
    /// Max over the boundary samples (a lower estimate).
    pub sampled: f64,
    /// Coefficient sum (a certified upper bound).
    pub upper_bound: f64,
}

#[derive(Debug, Clone)]
pub struct AberthOptions {
    pub max_iterations: usize,
    /// Roots closer than this (relative to `1 + |r|`) are treated as one
    /// multiple root and averaged.
    pub cluster_tol: f64,
}

impl Default for AberthOptions {
    fn default() -> Self {
        Self {
            max_iterations: 200,
            cluster_tol: 1e-5,
        }
    }
}

fn horner(c: &[f64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &a in c.iter().rev() {
        dp = dp * z + p;
        p = p * z + a;
    }
    (p, dp)
}

fn abs_horner(c: &[f64], r: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &a| acc * r + a.abs())
}

/// Cauchy's root radius: the positive root of `|a_d| x^d - Σ_{k<d} |a_k| x^k`.
fn cauchy_radius(c: &[f64]) -> f64 {
    let d = c.len() - 1;
    let lead = c[d].abs();
    // Fujiwara's bound sits above the Cauchy radius; Newton descends monotonically.
    let mut x = (0..d)
        .map(|k| (c[k].abs() / lead).powf(1.0 / (d - k) as f64))
        .fold(0.0, f64::max)
        * 2.0;
    if x == 0.0 {
        return 0.0;
    }
    for _ in 0..100 {
        let (mut f, mut df) = (0.0, 0.0);
        for (k, &a) in c.iter().enumerate().rev() {
            let a = if k == d { lead } else { -a.abs() };
            df = df * x + f;
            f = f * x + a;
        }
        if df <= 0.0 {
            break;
        }
        let next = x - f / df;
        if !(next > 0.0) || (x - next).abs() <= 1e-12 * x {
            x = next.max(x * 0.5);
            break;
        }
        x = next;
    }
    x
}

fn aberth(c: &[f64], opts: &AberthOptions) -> Result<Vec<Complex64>> {
    let d = c.len() - 1;
    let eps = f64::EPSILON;
    let radius = cauchy_radius(c).max(f64::MIN_POSITIVE);
    // Offset angle keeps the start off the real axis and off any symmetry line.
    let mut z: Vec<Complex64> = (0..d)
        .map(|k| {
            let theta = std::f64::consts::TAU * k as f64 / d as f64 + 0.4 / d as f64 + 0.25;
            Complex64::from_polar(radius, theta)
        })
        .collect();
    let mut done = vec![false; d];

    let mut iterations = 0;
    while iterations < opts.max_iterations && done.iter().any(|&x| !x) {
        iterations += 1;
        for i in 0..d {
            if done[i] {
                continue;
            }
            let (p, dp) = horner(c, z[i]);
            let backward = 4.0 * d as f64 * eps * abs_horner(c, z[i].norm());
            if p.norm() <= backward {
                done[i] = true;
                continue;
            }
            let ratio = p / dp;
            let repulsion: Complex64 = (0..d)
                .filter(|&j| j != i)
                .map(|j| (z[i] - z[j]).inv())
                .sum();
            let step = ratio / (Complex64::new(1.0, 0.0) - ratio * repulsion);
            if !step.re.is_finite() || !step.im.is_finite() {
                continue;
            }
            z[i] -= step;
            if step.norm() <= eps * z[i].norm() {
                done[i] = true;
            }
        }
    }

    let accepted = |r: Complex64| horner(c, r).0.norm() <= 1e-10 * (1.0 + abs_horner(c, r.norm()));
    if !z.iter().all(|&r| accepted(r)) {
        return Err(Error::NonConvergence { iterations });
    }

    // Newton polish for simple roots.
    for r in z.iter_mut() {
        for _ in 0..2 {
            let (p, dp) = horner(c, *r);
            if dp.norm() <= 1e-8 * abs_horner(c, r.norm()) {
                break;
            }
            let next = *r - p / dp;
            if horner(c, next).0.norm() < p.norm() {
                *r = next;
            } else {
                break;
            }
        }
    }

    merge_clusters(&mut z, opts.cluster_tol);
    pair_conjugates(&mut z);
    Ok(z)
}

/// Single-linkage clusters of nearly equal roots are replaced by their mean.
fn merge_clusters(z: &mut [Complex64], tol: f64) {
    let n = z.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], i: usize) -> usize {
        let mut i = i;
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for i in 0..n {
        for j in i + 1..n {
            if (z[i] - z[j]).norm() <= tol * (1.0 + z[i].norm()) {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                parent[a] = b;
            }
        }
    }
    let mut sums = vec![(Complex64::new(0.0, 0.0), 0usize); n];
    for i in 0..n {
        let r = find(&mut parent, i);
        sums[r].0 += z[i];
        sums[r].1 += 1;
    }
    for i in 0..n {
        let r = find(&mut parent, i);
        if sums[r].1 > 1 {
            z[i] = sums[r].0 / sums[r].1 as f64;
        }
    }
}

/// Forces the root set of a real polynomial to be closed under conjugation.
fn pair_conjugates(z: &mut [Complex64]) {
    let n = z.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| z[b].im.total_cmp(&z[a].im));
    let mut used = vec![false; n];
    for &i in &order {
        if used[i] {
            continue;
        }
        used[i] = true;
        let tiny = 1e-12 * (1.0 + z[i].norm());
        if z[i].im <= tiny {
            if z[i].im.abs() <= tiny {
                z[i].im = 0.0;
            }
            continue;
        }
        let partner = (0..n)
            .filter(|&j| !used[j])
            .min_by(|&a, &b| {
                (z[i] - z[a].conj())
                    .norm()
                    .total_cmp(&(z[i] - z[b].conj()).norm())
            });
        if let Some(j) = partner {
            if (z[i] - z[j].conj()).norm() <= 1e-6 * (1.0 + z[i].norm()) {
                used[j] = true;
                let mid = (z[i] + z[j].conj()) * 0.5;
                z[i] = mid;
                z[j] = mid.conj();
            }
        }
    }
}
