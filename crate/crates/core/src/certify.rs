//! Corona certification, the POZ and parity-interlacing tests, symmetrization
//! of Bezout solutions, a polynomial Bezout oracle and the half-plane transfer.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{DiscGrid, Field, NodeId};
use crate::poly::{ComplexPolynomial, RealPolynomial, RealRoot};

/// Default tolerance for locating real zeros.
pub const ZERO_TOL: f64 = 1e-8;

/// Certified lower bound for `|f1| + |f2|` on the closed disc.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoronaCertificate {
    pub grid_min: f64,
    pub lipschitz_bound: f64,
    pub delta_lower: f64,
    pub argmin_node: NodeId,
    /// Resolution the bound was certified at (may exceed the requested one).
    pub grid_n: usize,
}

impl CoronaCertificate {
    pub fn is_valid(&self) -> bool {
        self.delta_lower > 0.0
    }
}

/// Lower bound for `|f1| + |f2|` from a grid scan plus Lipschitz slack.
///
/// Retries once at `2n - 1` before giving up.
pub fn corona_delta(f1: &RealPolynomial, f2: &RealPolynomial, grid: &DiscGrid) -> Result<CoronaCertificate> {
    if f1.is_zero() && f2.is_zero() {
        return Err(Error::InvalidInput("f1 and f2 are both zero".into()));
    }
    let cert = corona_scan(f1, f2, grid);
    if cert.is_valid() {
        return Ok(cert);
    }
    let fine = DiscGrid::new(2 * grid.n() - 1)?;
    let cert = corona_scan(f1, f2, &fine);
    if cert.is_valid() {
        Ok(cert)
    } else {
        Err(Error::NotUnimodular {
            delta_lower: cert.delta_lower,
        })
    }
}

/// One scan without refinement; the bound may be non-positive.
pub fn corona_scan(f1: &RealPolynomial, f2: &RealPolynomial, grid: &DiscGrid) -> CoronaCertificate {
    let h = grid.h();
    let reach = h * std::f64::consts::FRAC_1_SQRT_2;
    // Every point of the closed disc is within `reach` of some node in this
    // slightly larger set, which is what the Lipschitz slack needs.
    let radius = 1.0 + reach;
    let (grid_min, argmin_node) = (0..grid.len())
        .into_par_iter()
        .filter_map(|p| {
            let z = grid.z(p);
            (z.norm() <= radius).then(|| (f1.eval(z).norm() + f2.eval(z).norm(), p))
        })
        .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)))
        .expect("grid has nodes");
    let lipschitz_bound = f1.derivative().abs_sum() + f2.derivative().abs_sum();
    CoronaCertificate {
        grid_min,
        lipschitz_bound,
        delta_lower: grid_min - lipschitz_bound * reach,
        argmin_node,
        grid_n: grid.n(),
    }
}

/// Signs of `f1` at the real zeros of `f2` in `[-1, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PozReport {
    pub zeros: Vec<RealRoot>,
    pub f1_values: Vec<f64>,
    /// `Some(+1)` or `Some(-1)` when all values share a sign, `None` otherwise.
    pub common_sign: Option<i8>,
    /// `-1` when synthesis has to run on `-f1`.
    pub normalization: i8,
}

impl PozReport {
    pub fn is_poz(&self) -> bool {
        self.common_sign.is_some()
    }
}

/// POZ test: does `f1` keep one sign at the real zeros of `f2`?
///
/// When `f2` is identically zero every real point is a zero; corona then
/// forces `f1` to be zero-free on `[-1, 1]` and its sign at `0` decides.
pub fn poz_check(f1: &RealPolynomial, f2: &RealPolynomial, tol: f64) -> Result<PozReport> {
    let (zeros, points) = if f2.is_zero() {
        (Vec::new(), vec![0.0])
    } else {
        let zeros = f2.real_roots_in_closed_disc(tol)?;
        let points = zeros.iter().map(|r| r.value).collect();
        (zeros, points)
    };
    let mut f1_values = Vec::with_capacity(points.len());
    for &lambda in &points {
        let value = f1.eval_real(lambda);
        if value.abs() <= tol {
            return Err(Error::ZeroOnZero { lambda, value });
        }
        f1_values.push(value);
    }
    let common_sign = if f1_values.iter().all(|&v| v > 0.0) {
        Some(1)
    } else if f1_values.iter().all(|&v| v < 0.0) {
        Some(-1)
    } else {
        None
    };
    Ok(PozReport {
        zeros,
        f1_values,
        common_sign,
        normalization: if common_sign == Some(-1) { -1 } else { 1 },
    })
}

/// Parity interlacing: an even number of real zeros of `f1` (with
/// multiplicity) strictly between each pair of consecutive real zeros of `f2`.
pub fn parity_interlacing(f1: &RealPolynomial, f2: &RealPolynomial, tol: f64) -> Result<bool> {
    let f1_real: Vec<RealRoot> = if f1.degree() >= 1 {
        f1.real_roots_in_closed_disc(tol)?
    } else {
        Vec::new()
    };
    if f2.is_zero() {
        return Ok(f1_real.is_empty());
    }
    let zeros = f2.real_roots_in_closed_disc(tol)?;
    for z in &zeros {
        let value = f1.eval_real(z.value);
        if value.abs() <= tol {
            return Err(Error::ZeroOnZero { lambda: z.value, value });
        }
    }
    Ok(zeros.windows(2).all(|w| {
        let between: usize = f1_real
            .iter()
            .filter(|r| r.value > w[0].value && r.value < w[1].value)
            .map(|r| r.multiplicity)
            .sum();
        between % 2 == 0
    }))
}

/// Averaging with the conjugate mirror image, `(g(z) + conj g(conj z)) / 2`.
pub trait Symmetrize {
    fn symmetrize(&self) -> Self;
}

impl Symmetrize for ComplexPolynomial {
    fn symmetrize(&self) -> Self {
        ComplexPolynomial::new(self.coeffs.iter().map(|c| Complex64::new(c.re, 0.0)).collect())
    }
}

impl Symmetrize for Field {
    /// Nodes whose mirror is undefined keep their value.
    fn symmetrize(&self) -> Self {
        let grid = self.grid();
        let mut out = self.clone();
        for p in self.defined_nodes() {
            if let Some(w) = self.get(grid.mirror(p)) {
                out.set(p, (self.at(p) + w.conj()) * 0.5);
            }
        }
        out
    }
}

pub fn symmetrize<T: Symmetrize>(x: &T) -> T {
    x.symmetrize()
}

/// Polynomial Bezout partners `f1 g1 + f2 g2 = 1` with `deg g1 < deg f2`.
///
/// Extended Euclid in floating point followed by residual refinement. Only
/// meaningful when the two polynomials are coprime over the complex plane,
/// which is stronger than the corona condition on the disc.
pub fn bezout_euclid(f1: &RealPolynomial, f2: &RealPolynomial) -> Result<(RealPolynomial, RealPolynomial)> {
    if f1.degree() == 0 {
        return Ok((RealPolynomial::constant(1.0 / f1.leading()), RealPolynomial::zero()));
    }
    if f2.degree() == 0 {
        return Ok((RealPolynomial::zero(), RealPolynomial::constant(1.0 / f2.leading())));
    }
    if f1.is_zero() || f2.is_zero() {
        let gcd_degree = f1.degree().max(f2.degree()).max(0) as usize;
        return Err(Error::NotCoprime { gcd_degree });
    }

    let scale = f1.abs_sum().max(f2.abs_sum());
    let chop_tol = 1e-9 * scale;
    let (mut r0, mut r1) = (f1.clone(), f2.clone());
    let (mut s0, mut s1) = (RealPolynomial::constant(1.0), RealPolynomial::zero());
    let (mut t0, mut t1) = (RealPolynomial::zero(), RealPolynomial::constant(1.0));
    while r1.degree() > 0 {
        let (q, r) = r0.div_rem(&r1);
        let r = chop(&r, chop_tol);
        if r.is_zero() {
            return Err(Error::NotCoprime {
                gcd_degree: r1.degree() as usize,
            });
        }
        let s = &s0 - &(&q * &s1);
        let t = &t0 - &(&q * &t1);
        (r0, r1) = (r1, r);
        (s0, s1) = (s1, s);
        (t0, t1) = (t1, t);
    }
    let c = r1.leading();
    let mut g1 = s1.scale(1.0 / c);
    let mut g2 = t1.scale(1.0 / c);
    (g1, g2) = reduce(f1, f2, &g1, &g2);

    let one = RealPolynomial::constant(1.0);
    for _ in 0..3 {
        let r = &one - &(&(f1 * &g1) + &(f2 * &g2));
        if r.coeffs().iter().all(|c| c.abs() <= 1e-15) {
            break;
        }
        // (1 - r)(1 + r) = 1 - r^2: one step squares the residual.
        let (a, b) = (&g1 + &(&g1 * &r), &g2 + &(&g2 * &r));
        (g1, g2) = reduce(f1, f2, &a, &b);
    }
    Ok((g1, g2))
}

/// Replaces `g1` by `g1 mod f2` and moves the quotient into `g2`.
fn reduce(
    f1: &RealPolynomial,
    f2: &RealPolynomial,
    g1: &RealPolynomial,
    g2: &RealPolynomial,
) -> (RealPolynomial, RealPolynomial) {
    let (q, r1) = g1.div_rem(f2);
    let g2 = g2 + &(&q * f1);
    // Solutions with deg g1 < deg f2 have deg g2 < deg f1; drop the noise.
    let keep = f1.degree().max(0) as usize;
    let g2 = RealPolynomial::new(g2.coeffs().iter().take(keep).copied().collect::<Vec<_>>());
    (r1, g2)
}

fn chop(p: &RealPolynomial, tol: f64) -> RealPolynomial {
    let mut c = p.coeffs().to_vec();
    while c.last().is_some_and(|x| x.abs() <= tol) {
        c.pop();
    }
    RealPolynomial::new(c)
}

/// Pulls `num(s) / den(s)` back through `s = (1 - z) / (1 + z)`.
///
/// Both are multiplied by `(1 + z)^d`, `d = max(deg num, deg den)`, so the
/// quotient is unchanged and the outputs are polynomials in `z`.
pub fn cayley_pullback(num: &RealPolynomial, den: &RealPolynomial) -> Result<(RealPolynomial, RealPolynomial)> {
    if den.is_zero() {
        return Err(Error::InvalidInput("denominator is the zero polynomial".into()));
    }
    let d = num.degree().max(den.degree()).max(0) as usize;
    Ok((pullback(num, d), pullback(den, d)))
}

fn pullback(p: &RealPolynomial, d: usize) -> RealPolynomial {
    let one_minus = RealPolynomial::new(vec![1.0, -1.0]);
    let one_plus = RealPolynomial::new(vec![1.0, 1.0]);
    let pow = |base: &RealPolynomial, k: usize| {
        (0..k).fold(RealPolynomial::constant(1.0), |acc, _| &acc * base)
    };
    p.coeffs()
        .iter()
        .enumerate()
        .fold(RealPolynomial::zero(), |acc, (k, &a)| {
            let term = (&pow(&one_minus, k) * &pow(&one_plus, d - k)).scale(a);
            &acc + &term
        })
}
