//! Assembly of `Φ`, `k`, `u`, `g1`, `g2` and the end-to-end pipeline.
//!
//! With `Φ` equal to `f1` near the zeros of `f1`, equal to `1` near the zeros
//! of `f2` and `Φ/f1` zero-free elsewhere,
//!
//! ```text
//! g1 = (Φ / f1) exp(u f2),   g2 = (1 - f1 g1) / f2
//! ```
//!
//! is analytic as soon as `∂̄u = -k` with `k = ∂̄Φ / (Φ f2)`. That `u` is
//! `+(1/π) ∬ k(ξ) / (ξ - z) dA`, the negative of [`cauchy_transform`]; the
//! sign is recorded as `sign_convention = +1` and can be flipped for testing
//! with [`SynthesisResult::reassemble`].
//!
//! On the grid, the central-difference `∂̄` of the lattice transform is a
//! blurred copy of the density, so [`solve_dbar`] corrects the density a few
//! times against the measured `∂̄g1` before the final transform.

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::certify::{corona_delta, poz_check, CoronaCertificate, PozReport, ZERO_TOL};
use crate::dbar::{cauchy_transform_with, CauchyMethod};
use crate::error::{Error, Result};
use crate::grid::{dbar_fd, interior_of, sample, DiscGrid, Field, RegionMask};
use crate::logbranch::log_branch;
use crate::poly::RealPolynomial;
use crate::regions::{build_s, cutoff_q, level_mask, select_threshold_with, RegionConfig};
use crate::verify::{verify, Thresholds, VerifyReport};

const ONE: Complex64 = Complex64::new(1.0, 0.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// User-facing knobs of [`synthesize`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub n: usize,
    /// `g2` switches to the series form where `|f2| < eps`.
    pub eps: f64,
    /// Smallest admissible `delta'`; defaults to `delta_lower / 64`.
    pub delta_floor: Option<f64>,
    pub separation_cells: usize,
    /// Preferred distance between the `2 delta'` sublevel sets.
    pub min_separation: f64,
    pub corridor_halfwidth: usize,
    pub mollifier_fraction: f64,
    pub cauchy: CauchyMethod,
    /// Defect-correction sweeps applied to the density before the final
    /// transform; `0` uses `k` as is.
    pub dbar_corrections: usize,
    pub zero_tol: f64,
    pub thresholds: Thresholds,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            n: 129,
            eps: 1e-4,
            delta_floor: None,
            separation_cells: RegionConfig::DEFAULT_SEPARATION,
            min_separation: 0.25,
            corridor_halfwidth: RegionConfig::DEFAULT_HALFWIDTH,
            mollifier_fraction: RegionConfig::DEFAULT_MOLLIFIER,
            cauchy: CauchyMethod::Auto,
            dbar_corrections: 10,
            zero_tol: ZERO_TOL,
            thresholds: Thresholds::default(),
        }
    }
}

/// Everything the pipeline decided, for reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthesisRecord {
    pub grid_n: usize,
    pub region: RegionConfig,
    /// `+1`: `u = +(1/π) ∬ k/(ξ - z)`, i.e. `∂̄u = -k`.
    pub sign_convention: i8,
    /// `-1` when `f1` had to be negated to be positive at the zeros of `f2`.
    pub normalization: i8,
    /// `f_j` were divided by these to have sup norm at most one.
    pub scale: [f64; 2],
    pub eps: f64,
    pub gap: f64,
    pub cutoff_margin: f64,
    pub mollifier_radius: f64,
    pub cauchy: CauchyMethod,
}

/// Output of [`synthesize`].
///
/// `phi`, `q`, `log_f1`, `k` and `u` belong to the normalized pair
/// `(normalization f1 / s1, f2 / s2)`; `g1`, `g2` solve the original one.
#[derive(Debug, Clone)]
pub struct SynthesisResult {
    pub grid: Arc<DiscGrid>,
    pub f1: RealPolynomial,
    pub f2: RealPolynomial,
    pub certificate: CoronaCertificate,
    pub poz: PozReport,
    pub e1: RegionMask,
    pub e2: RegionMask,
    pub s: RegionMask,
    pub q: Field,
    pub log_f1: Field,
    pub phi: Field,
    pub k: Field,
    pub u: Field,
    pub g1: Field,
    pub g2: Field,
    pub record: SynthesisRecord,
    pub report: VerifyReport,
    pub thresholds: Thresholds,
}

impl SynthesisResult {
    pub fn normalized_f1(&self) -> RealPolynomial {
        self.f1.scale(self.record.normalization as f64 / self.record.scale[0])
    }

    pub fn normalized_f2(&self) -> RealPolynomial {
        self.f2.scale(1.0 / self.record.scale[1])
    }

    /// Rebuilds `g1`, `g2` from the stored `Φ` and `u` under the given sign
    /// convention and re-verifies.
    pub fn reassemble(&self, sign_convention: i8) -> Result<SynthesisResult> {
        let f1s = sample(&self.normalized_f1(), &self.grid);
        let f2s = sample(&self.normalized_f2(), &self.grid);
        let u = if sign_convention == self.record.sign_convention {
            self.u.clone()
        } else {
            self.u.map(|v| -v)
        };
        let (g1, g2) = solve(&self.phi, &f1s, &f2s, &u, &self.q, &self.record)?;
        let mut out = self.clone();
        out.u = u;
        out.g1 = g1;
        out.g2 = g2;
        out.record.sign_convention = sign_convention;
        out.report = verify(&out, &self.f1, &self.f2, &self.thresholds);
        Ok(out)
    }
}

/// `Φ = f1` on `S` and where `q = 1`, `1` where `q = 0`, `exp(q L)` between.
pub fn build_phi(f1s: &Field, q: &Field, log_f1: &Field, s: &RegionMask) -> Field {
    let grid = f1s.grid();
    let values = (0..grid.len())
        .map(|p| {
            if !grid.is_inside(p) {
                return ZERO;
            }
            let t = q.at(p).re;
            if s.contains(p) || t == 1.0 {
                f1s.at(p)
            } else if t == 0.0 {
                ONE
            } else {
                (log_f1.at(p) * t).exp()
            }
        })
        .collect();
    Field::from_parts(grid, values, grid.inside_mask().to_vec())
}

/// `k = ∂̄Φ / (Φ f2) = (∂̄q) L / f2` where `0 < q < 1`, zero elsewhere.
pub fn build_k(q: &Field, log_f1: &Field, f2s: &Field, delta_prime: f64) -> Result<Field> {
    let grid = q.grid();
    let dq = dbar_fd(q);
    let mut values = vec![ZERO; grid.len()];
    for p in grid.inside_nodes() {
        let t = q.at(p).re;
        if t <= 0.0 || t >= 1.0 {
            continue;
        }
        let f2 = f2s.at(p);
        if f2.norm() < 0.5 * delta_prime {
            return Err(Error::UnboundedK { node: p, value: f2.norm() });
        }
        values[p] = dq.at(p) * log_f1.at(p) / f2;
    }
    Ok(Field::from_parts(grid, values, grid.inside_mask().to_vec()))
}

/// `Φ / f1`, taken as exactly `1` where `q = 1`.
pub fn quotient(phi: &Field, f1s: &Field, q: &Field) -> Result<Field> {
    let grid = phi.grid();
    let mut values = vec![ZERO; grid.len()];
    for p in grid.inside_nodes() {
        values[p] = if q.at(p).re == 1.0 {
            ONE
        } else {
            let f1 = f1s.at(p);
            if f1.norm() < 1e-12 {
                return Err(Error::DivisionNearZero { node: p, value: f1.norm() });
            }
            phi.at(p) / f1
        };
    }
    Ok(Field::from_parts(grid, values, grid.inside_mask().to_vec()))
}

/// `g1 = (Φ / f1) exp(u f2)`.
pub fn assemble_g1(phi: &Field, f1s: &Field, u: &Field, f2s: &Field, q: &Field) -> Result<Field> {
    let a = quotient(phi, f1s, q)?;
    let grid = a.grid();
    let values = (0..grid.len())
        .map(|p| if grid.is_inside(p) { a.at(p) * (u.at(p) * f2s.at(p)).exp() } else { ZERO })
        .collect();
    Ok(Field::from_parts(grid, values, grid.inside_mask().to_vec()))
}

/// `(e^w - 1) / w`, by its Taylor series near zero.
pub fn exprel(w: Complex64) -> Complex64 {
    if w.norm() < 1e-4 {
        ONE + w * (0.5 + w * (1.0 / 6.0 + w / 24.0))
    } else {
        (w.exp() - ONE) / w
    }
}

const SEAM_TOL: f64 = 1e-6;

/// `g2 = (1 - f1 g1) / f2` where `|f2| >= eps`, `-u (e^{u f2} - 1)/(u f2)`
/// below; the latter is the same function when `Φ = 1`.
pub fn assemble_g2(f1s: &Field, g1: &Field, f2s: &Field, u: &Field, phi: &Field, eps: f64) -> Result<Field> {
    let grid = f1s.grid();
    let small = |p: usize| f2s.at(p).norm() < eps;
    let mut values = vec![ZERO; grid.len()];
    for p in grid.inside_nodes() {
        let f2 = f2s.at(p);
        if small(p) {
            let gap = (phi.at(p) - ONE).norm();
            if gap > 0.0 {
                return Err(Error::SeamMismatch { node: p, gap });
            }
            let w = u.at(p) * f2;
            values[p] = -u.at(p) * exprel(w);
        } else {
            values[p] = (ONE - f1s.at(p) * g1.at(p)) / f2;
            let on_seam = grid.neighbors4(p).any(|q| grid.is_inside(q) && small(q));
            if on_seam {
                let series = -u.at(p) * exprel(u.at(p) * f2);
                let gap = (series - values[p]).norm();
                if gap > SEAM_TOL {
                    return Err(Error::SeamMismatch { node: p, gap });
                }
            }
        }
    }
    Ok(Field::from_parts(grid, values, grid.inside_mask().to_vec()))
}

fn solve(
    phi: &Field,
    f1s: &Field,
    f2s: &Field,
    u: &Field,
    q: &Field,
    record: &SynthesisRecord,
) -> Result<(Field, Field)> {
    let g1 = assemble_g1(phi, f1s, u, f2s, q).map_err(|e| e.at("assemble_g1"))?;
    let g2 = assemble_g2(f1s, &g1, f2s, u, phi, record.eps).map_err(|e| e.at("assemble_g2"))?;
    let c1 = record.normalization as f64 / record.scale[0];
    let c2 = 1.0 / record.scale[1];
    Ok((g1.map(|v| v * c1), g2.map(|v| v * c2)))
}

/// `u = -T(k~)`, where `k~` starts at `k` and is corrected by defect sweeps.
///
/// Each sweep measures the central-difference `∂̄` of `g1 = a exp(u f2)` and
/// moves the density by the amount that cancels it to first order,
/// `∂̄g1 / (g1 f2)`, with `1/f2` damped below `delta'/2`. Zero sweeps is the
/// plain transform. The corrections vanish with the grid spacing, so the
/// continuum equation `∂̄u = -k` is unchanged.
pub fn solve_dbar(
    k: &Field,
    a: &Field,
    f2s: &Field,
    delta_prime: f64,
    method: CauchyMethod,
    sweeps: usize,
) -> Field {
    let grid = k.grid();
    let central = interior_of(grid, grid.inside_mask(), 1);
    let tau2 = (0.5 * delta_prime).powi(2);
    let mut density = k.clone();
    let mut u = cauchy_transform_with(&density, method).map(|v| -v);
    for _ in 0..sweeps {
        let g: Vec<Complex64> = (0..grid.len())
            .map(|p| if grid.is_inside(p) { a.at(p) * (u.at(p) * f2s.at(p)).exp() } else { ZERO })
            .collect();
        let g = Field::from_parts(grid, g, grid.inside_mask().to_vec());
        let d = dbar_fd(&g);
        for p in grid.inside_nodes() {
            if central[p] {
                let f2 = f2s.at(p);
                let w = f2.conj() / (f2.norm_sqr() + tau2);
                density.set(p, density.at(p) + d.at(p) / g.at(p) * w);
            }
        }
        u = cauchy_transform_with(&density, method).map(|v| -v);
    }
    u
}

/// Sup norm on the closed disc, estimated on the circle.
const SUP_SAMPLES: usize = 4096;

/// Full pipeline from certification to verification.
pub fn synthesize(f1: &RealPolynomial, f2: &RealPolynomial, cfg: &SynthConfig) -> Result<SynthesisResult> {
    let grid = Arc::new(DiscGrid::new(cfg.n).map_err(|e| e.at("build_grid"))?);
    let s1 = f1.sup_norm_disc(SUP_SAMPLES).sampled.max(1.0);
    let s2 = f2.sup_norm_disc(SUP_SAMPLES).sampled.max(1.0);

    let certificate = corona_delta(&f1.scale(1.0 / s1), &f2.scale(1.0 / s2), &grid)
        .map_err(|e| e.at("corona_delta"))?;
    let poz = poz_check(f1, f2, cfg.zero_tol).map_err(|e| e.at("poz_check"))?;
    if !poz.is_poz() {
        return Err(Error::PozViolation {
            values: poz.f1_values.clone(),
        }
        .at("poz_check"));
    }
    let normalization = poz.normalization;
    let f1n = f1.scale(normalization as f64 / s1);
    let f2n = f2.scale(1.0 / s2);

    let floor = cfg.delta_floor.unwrap_or(certificate.delta_lower / 64.0);
    let mut region = select_threshold_with(&f1n, &f2n, &certificate, &grid, cfg.separation_cells, cfg.min_separation, floor)
        .map_err(|e| e.at("select_threshold"))?;
    region.corridor_halfwidth = cfg.corridor_halfwidth;
    region.mollifier_fraction = cfg.mollifier_fraction;

    let e1 = level_mask(&f1n, &grid, region.delta_prime);
    let e2 = level_mask(&f2n, &grid, region.delta_prime);
    let s = build_s(&e1, &e2, &f1n, &region).map_err(|e| e.at("build_s"))?;
    let cutoff = cutoff_q(&s, &e2, region.mollifier_fraction).map_err(|e| e.at("cutoff_q"))?;
    let log_f1 = log_branch(&f1n, &s).map_err(|e| e.at("log_branch"))?;

    let f1s = sample(&f1n, &grid);
    let f2s = sample(&f2n, &grid);
    let phi = build_phi(&f1s, &cutoff.q, &log_f1, &s);
    let k = build_k(&cutoff.q, &log_f1, &f2s, region.delta_prime).map_err(|e| e.at("build_k"))?;
    let a = quotient(&phi, &f1s, &cutoff.q).map_err(|e| e.at("assemble_g1"))?;
    let u = solve_dbar(&k, &a, &f2s, region.delta_prime, cfg.cauchy, cfg.dbar_corrections);

    let record = SynthesisRecord {
        grid_n: cfg.n,
        region,
        sign_convention: 1,
        normalization,
        scale: [s1, s2],
        eps: cfg.eps,
        gap: cutoff.gap,
        cutoff_margin: cutoff.margin,
        mollifier_radius: cutoff.mollifier_radius,
        cauchy: cfg.cauchy,
    };
    let (g1, g2) = solve(&phi, &f1s, &f2s, &u, &cutoff.q, &record)?;

    let mut result = SynthesisResult {
        grid,
        f1: f1.clone(),
        f2: f2.clone(),
        certificate,
        poz,
        e1,
        e2,
        s,
        q: cutoff.q,
        log_f1,
        phi,
        k,
        u,
        g1,
        g2,
        record,
        report: VerifyReport::default(),
        thresholds: cfg.thresholds.clone(),
    };
    result.report = verify(&result, f1, f2, &cfg.thresholds);
    Ok(result)
}
