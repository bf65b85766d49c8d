//! Direct grid measurement of every property a synthesis result claims.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::grid::{dbar_fd, interior_of, mirror_defect, sample, Field};
use crate::poly::RealPolynomial;
use crate::synth::SynthesisResult;

/// Pass criteria. Kept out of the code paths so studies can tighten them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Thresholds {
    pub residual_sup: f64,
    /// `min |g1|` must exceed this.
    pub g1_min_abs: f64,
    /// `sup |∂̄g1|` relative to `sup |g1|`.
    pub g1_dbar_rel: f64,
    pub symmetry: f64,
    /// Nodes closer than this many cells to the disc edge are skipped when
    /// measuring finite-difference derivatives.
    pub dbar_margin: usize,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            residual_sup: 5e-2,
            g1_min_abs: 0.0,
            g1_dbar_rel: 0.1,
            symmetry: 1e-9,
            dbar_margin: 2,
        }
    }
}

/// One of the five conditions on `Φ`, with the measured quantity behind it.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Condition {
    pub holds: bool,
    pub slack: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PhiConditions {
    /// `Φ = f1` exactly where `|f1| < delta'`; slack is the largest deviation.
    pub equals_f1: Condition,
    /// `Φ = 1` exactly where `|f2| < delta'`; slack is the largest deviation.
    pub equals_one: Condition,
    /// `|Φ| >= min(delta', exp(-sup |L|))` where `|f1| >= delta'`; slack is
    /// the smallest margin.
    pub bounded_below: Condition,
    /// `sup |∂̄Φ|` is finite; slack is its value.
    pub dbar_bounded: Condition,
    /// Mirror defect of `Φ`.
    pub symmetric: Condition,
}

impl PhiConditions {
    pub fn all(&self) -> bool {
        [&self.equals_f1, &self.equals_one, &self.bounded_below, &self.dbar_bounded, &self.symmetric]
            .iter()
            .all(|c| c.holds)
    }
}

/// Measured defects of a synthesis result.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub residual_sup: f64,
    /// Residual over the nodes where `g2` uses the series form.
    pub residual_seam_sup: f64,
    pub g1_min_abs: f64,
    pub g1_sup: f64,
    pub g1_dbar_sup: f64,
    /// `sup |∂̄g1|` over `|z| <= CORE_RADIUS`, clear of the boundary layer of
    /// the quadrature.
    pub g1_dbar_sup_core: f64,
    pub g2_dbar_sup: f64,
    pub symmetry_defects: BTreeMap<String, f64>,
    pub phi_conditions: PhiConditions,
    pub sup_u: f64,
    pub sup_k: f64,
    pub sup_l: f64,
    /// Range of `Im L`; the branch is only determined up to this spread.
    pub im_l_range: [f64; 2],
    pub sup_dbar_q: f64,
    /// Largest jump of `u` between 4-neighbours, a discrete modulus of
    /// continuity.
    pub u_modulus: f64,
    pub delta_prime: f64,
    pub delta_lower: f64,
    pub grid_n: usize,
    pub sign_convention: i8,
    pub normalization: i8,
    pub all_finite: bool,
    pub pass: bool,
    pub thresholds: Thresholds,
}

pub const CORE_RADIUS: f64 = 0.9;

/// Measures `r` against the original data `f1`, `f2`, resampled here.
pub fn verify(r: &SynthesisResult, f1: &RealPolynomial, f2: &RealPolynomial, thresholds: &Thresholds) -> VerifyReport {
    let grid = &r.grid;
    let f1s = sample(f1, grid);
    let f2s = sample(f2, grid);
    let f1n = sample(&r.normalized_f1(), grid);
    let f2n = sample(&r.normalized_f2(), grid);
    let delta = r.record.region.delta_prime;

    let mut residual_sup: f64 = 0.0;
    let mut residual_seam_sup: f64 = 0.0;
    for p in grid.inside_nodes() {
        let res = (f1s.at(p) * r.g1.at(p) + f2s.at(p) * r.g2.at(p) - 1.0).norm();
        residual_sup = residual_sup.max(res);
        if f2n.at(p).norm() < r.record.eps {
            residual_seam_sup = residual_seam_sup.max(res);
        }
    }
    let residual_sup = nan_max(residual_sup, &r.g1, &r.g2);

    let interior = interior_of(grid, grid.inside_mask(), thresholds.dbar_margin);
    let dbar_sup_within = |f: &Field, radius: f64| {
        let d = dbar_fd(f);
        (0..grid.len())
            .filter(|&p| interior[p] && d.is_defined(p) && grid.z(p).norm() <= radius)
            .map(|p| d.at(p).norm())
            .fold(0.0, f64::max)
    };
    let dbar_sup = |f: &Field| dbar_sup_within(f, f64::INFINITY);

    let fields: [(&str, &Field); 7] = [
        ("phi", &r.phi),
        ("q", &r.q),
        ("log_f1", &r.log_f1),
        ("k", &r.k),
        ("u", &r.u),
        ("g1", &r.g1),
        ("g2", &r.g2),
    ];
    let symmetry_defects: BTreeMap<String, f64> =
        fields.iter().map(|(name, f)| (name.to_string(), mirror_defect(f))).collect();
    let all_finite = fields
        .iter()
        .all(|(_, f)| f.defined_nodes().all(|p| f.at(p).re.is_finite() && f.at(p).im.is_finite()));

    let sup_l = r.log_f1.sup_norm();
    let im_l_range = r
        .log_f1
        .defined_nodes()
        .map(|p| r.log_f1.at(p).im)
        .fold([0.0f64, 0.0f64], |[lo, hi], v| [lo.min(v), hi.max(v)]);

    let phi_conditions = phi_conditions(r, &f1n, &f2n, delta, sup_l, &dbar_sup(&r.phi));

    let mut u_modulus: f64 = 0.0;
    for p in grid.inside_nodes() {
        for q in grid.neighbors4(p) {
            if grid.is_inside(q) {
                u_modulus = u_modulus.max((r.u.at(p) - r.u.at(q)).norm());
            }
        }
    }

    let g1_min_abs = r.g1.defined_nodes().map(|p| r.g1.at(p).norm()).fold(f64::INFINITY, f64::min);
    let g1_sup = r.g1.sup_norm();
    let mut report = VerifyReport {
        residual_sup,
        residual_seam_sup,
        g1_min_abs,
        g1_sup,
        g1_dbar_sup: dbar_sup(&r.g1),
        g1_dbar_sup_core: dbar_sup_within(&r.g1, CORE_RADIUS),
        g2_dbar_sup: dbar_sup(&r.g2),
        symmetry_defects,
        phi_conditions,
        sup_u: r.u.sup_norm(),
        sup_k: r.k.sup_norm(),
        sup_l,
        im_l_range,
        sup_dbar_q: dbar_sup(&r.q),
        u_modulus,
        delta_prime: delta,
        delta_lower: r.certificate.delta_lower,
        grid_n: grid.n(),
        sign_convention: r.record.sign_convention,
        normalization: r.record.normalization,
        all_finite,
        pass: false,
        thresholds: thresholds.clone(),
    };
    report.pass = passes(&report, thresholds);
    report
}

/// A NaN anywhere in `g1` or `g2` must not hide behind `f64::max`.
fn nan_max(sup: f64, g1: &Field, g2: &Field) -> f64 {
    let nan = |f: &Field| f.defined_nodes().any(|p| f.at(p).re.is_nan() || f.at(p).im.is_nan());
    if nan(g1) || nan(g2) { f64::NAN } else { sup }
}

fn phi_conditions(
    r: &SynthesisResult,
    f1n: &Field,
    f2n: &Field,
    delta: f64,
    sup_l: f64,
    phi_dbar_sup: &f64,
) -> PhiConditions {
    let grid = &r.grid;
    let phi = &r.phi;
    let mut dev1: f64 = 0.0;
    let mut dev2: f64 = 0.0;
    let mut low = f64::INFINITY;
    let bound = delta.min((-sup_l).exp());
    for p in grid.inside_nodes() {
        if f1n.at(p).norm() < delta {
            dev1 = dev1.max((phi.at(p) - f1n.at(p)).norm());
        } else {
            low = low.min(phi.at(p).norm() - bound);
        }
        if f2n.at(p).norm() < delta {
            dev2 = dev2.max((phi.at(p) - Complex64::new(1.0, 0.0)).norm());
        }
    }
    let defect = mirror_defect(phi);
    PhiConditions {
        equals_f1: Condition { holds: dev1 == 0.0, slack: dev1 },
        equals_one: Condition { holds: dev2 == 0.0, slack: dev2 },
        bounded_below: Condition {
            holds: low >= 0.0,
            slack: if low.is_finite() { low } else { 0.0 },
        },
        dbar_bounded: Condition {
            holds: phi_dbar_sup.is_finite(),
            slack: *phi_dbar_sup,
        },
        symmetric: Condition { holds: defect <= 1e-9, slack: defect },
    }
}

fn passes(r: &VerifyReport, t: &Thresholds) -> bool {
    r.all_finite
        && r.residual_sup <= t.residual_sup
        && r.g1_min_abs > t.g1_min_abs
        && r.g1_dbar_sup <= t.g1_dbar_rel * r.g1_sup
        && r.symmetry_defects.values().all(|&d| d <= t.symmetry)
        && r.phi_conditions.all()
}

/// Deliberate corruptions used to check that [`verify`] is not vacuous.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fault {
    /// Negate `g1` at the node where `|f1 g1|` is largest.
    NegateNode,
    /// Multiply `g1` by `1 + 0.1i`.
    BreakSymmetry,
    /// Rebuild `g1`, `g2` with the opposite sign of `u`.
    FlipSign,
}

pub fn inject(r: &SynthesisResult, fault: Fault) -> Result<SynthesisResult> {
    let mut out = match fault {
        Fault::FlipSign => return r.reassemble(-r.record.sign_convention),
        _ => r.clone(),
    };
    match fault {
        Fault::NegateNode => {
            let f1s = sample(&r.f1, &r.grid);
            let p = r
                .grid
                .inside_nodes()
                .max_by(|&a, &b| {
                    (f1s.at(a) * r.g1.at(a)).norm().total_cmp(&(f1s.at(b) * r.g1.at(b)).norm())
                })
                .expect("grid has inside nodes");
            out.g1.set(p, -r.g1.at(p));
        }
        Fault::BreakSymmetry => out.g1 = r.g1.map(|v| v * Complex64::new(1.0, 0.1)),
        Fault::FlipSign => unreachable!(),
    }
    out.report = verify(&out, &r.f1, &r.f2, &r.thresholds);
    Ok(out)
}
