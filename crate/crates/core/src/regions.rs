//! The sets `E1`, `E2`, `S` and the cutoff `q` that interpolates between
//! `f1` near `S` and `1` near `E2`.
//!
//! `E_j` is a closed sublevel set of `|f_j|`. `S` is `E1` plus symmetric
//! corridors that connect each of its components to the unit circle while
//! keeping away from `E2`, plus thin tubes over the real intervals where `f1`
//! is negative. `q` is a smoothstep of relative distances to `S` and `E2`,
//! mollified so that its finite differences converge.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::certify::CoronaCertificate;
use crate::error::{Error, Result};
use crate::grid::{dilate_set, dist_transform, euclidean_dist_transform, DiscGrid, DistanceField, Field, NodeId, RegionMask};
use crate::poly::RealPolynomial;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionConfig {
    /// Level-set threshold; `E_j = {|f_j| <= 1.5 delta_prime}`.
    pub delta_prime: f64,
    pub delta_lower: f64,
    pub separation_cells: usize,
    pub corridor_halfwidth: usize,
    /// Mollifier radius as a fraction of the free part of the `S`–`E2` gap.
    pub mollifier_fraction: f64,
}

impl RegionConfig {
    pub const DEFAULT_SEPARATION: usize = 2;
    pub const DEFAULT_HALFWIDTH: usize = 2;
    pub const DEFAULT_MOLLIFIER: f64 = 0.25;
    pub const LEVEL_FACTOR: f64 = 1.5;
}

/// Largest `delta_lower / 2^k`, `k >= 2`, whose `2 delta'` sublevel sets are
/// at least `separation_cells` apart on the grid.
pub fn select_threshold(
    f1: &RealPolynomial,
    f2: &RealPolynomial,
    cert: &CoronaCertificate,
    grid: &Arc<DiscGrid>,
    separation_cells: usize,
) -> Result<RegionConfig> {
    select_threshold_with(f1, f2, cert, grid, separation_cells, 0.0, cert.delta_lower / 64.0)
}

/// [`select_threshold`] with an explicit lower limit for `delta'` and a
/// preferred physical separation `min_gap`.
///
/// Among the candidates that meet `separation_cells`, the largest one that
/// also meets `min_gap` wins; if none does, the one with the widest
/// separation (largest on ties). Wide separation leaves room for the
/// transition of the cutoff, which is what the finite-difference `∂̄` of the
/// result is most sensitive to.
pub fn select_threshold_with(
    f1: &RealPolynomial,
    f2: &RealPolynomial,
    cert: &CoronaCertificate,
    grid: &Arc<DiscGrid>,
    separation_cells: usize,
    min_gap: f64,
    floor: f64,
) -> Result<RegionConfig> {
    assert!(cert.delta_lower > 0.0, "select_threshold needs a valid certificate");
    let a1 = abs_field(f1, grid);
    let a2 = abs_field(f2, grid);
    let required = separation_cells as f64 * grid.h() * (1.0 - 1e-12);
    let mut best: Option<(f64, f64)> = None;
    let mut delta = cert.delta_lower / 4.0;
    while delta >= floor {
        let m1 = RegionMask::new(grid, a1.iter().map(|&v| v < 2.0 * delta).collect());
        let m2 = RegionMask::new(grid, a2.iter().map(|&v| v < 2.0 * delta).collect());
        let sep = separation(&m1, &m2)?;
        if sep >= required {
            if sep >= min_gap {
                best = Some((delta, sep));
                break;
            }
            if best.is_none_or(|(_, b)| sep > b) {
                best = Some((delta, sep));
            }
        }
        delta /= 2.0;
    }
    let (delta_prime, _) = best.ok_or(Error::ResolutionTooCoarse { floor })?;
    Ok(RegionConfig {
        delta_prime,
        delta_lower: cert.delta_lower,
        separation_cells,
        corridor_halfwidth: RegionConfig::DEFAULT_HALFWIDTH,
        mollifier_fraction: RegionConfig::DEFAULT_MOLLIFIER,
    })
}

fn abs_field(f: &RealPolynomial, grid: &DiscGrid) -> Vec<f64> {
    (0..grid.len())
        .map(|p| if grid.is_inside(p) { f.eval(grid.z(p)).norm() } else { f64::INFINITY })
        .collect()
}

/// Chamfer distance between two masks; infinite if either is empty.
fn separation(a: &RegionMask, b: &RegionMask) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Ok(f64::INFINITY);
    }
    Ok(dist_transform(a)?.min_over(b))
}

/// `{|f| <= 1.5 t}` on the inside nodes.
pub fn level_mask(f: &RealPolynomial, grid: &Arc<DiscGrid>, t: f64) -> RegionMask {
    assert!(t > 0.0, "level_mask needs a positive threshold");
    let bound = RegionConfig::LEVEL_FACTOR * t;
    RegionMask::new(
        grid,
        (0..grid.len())
            .map(|p| grid.is_inside(p) && f.eval(grid.z(p)).norm() <= bound)
            .collect(),
    )
}

/// Corridor cost: cells within this distance of `E2` are penalized.
const PENALTY_RANGE: f64 = 0.25;
const PENALTY_WEIGHT: f64 = 50.0;
const MAX_CORRIDOR_ROUNDS: usize = 8;

/// Builds `S` from `E1`; `f1` must already carry the POZ normalization.
pub fn build_s(
    e1: &RegionMask,
    e2: &RegionMask,
    f1: &RealPolynomial,
    cfg: &RegionConfig,
) -> Result<RegionMask> {
    let grid = Arc::clone(e1.grid());
    let hw = cfg.corridor_halfwidth;
    let keep_out = dilate_set(&grid, e2.members(), 1);

    let mut member = e1.members().to_vec();
    for (p, t) in negative_axis_tubes(&grid, e1, f1, hw).into_iter().enumerate() {
        if t && !keep_out[p] {
            member[p] = true;
        }
    }

    let d2 = if e2.is_empty() { None } else { Some(dist_transform(e2)?) };
    let forbidden = (hw as f64 + 2.0) * std::f64::consts::SQRT_2 * grid.h();
    let mut s = RegionMask::new(&grid, member);
    for _ in 0..MAX_CORRIDOR_ROUNDS {
        let stranded: Vec<usize> = s
            .components()
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.touches_boundary)
            .map(|(i, _)| i)
            .collect();
        if stranded.is_empty() {
            break;
        }
        let mut member = s.members().to_vec();
        for &c in &stranded {
            let path = corridor(&s, c, d2.as_ref(), forbidden)
                .ok_or(Error::NoCorridor { component: c })?;
            let mut line = vec![false; grid.len()];
            for p in path {
                line[p] = true;
                line[grid.mirror(p)] = true;
            }
            for (p, t) in dilate_set(&grid, &line, hw).into_iter().enumerate() {
                if t && !keep_out[p] {
                    member[p] = true;
                }
            }
        }
        s = RegionMask::new(&grid, member);
    }

    if let Some((c, _)) = s.components().iter().enumerate().find(|(_, c)| !c.touches_boundary) {
        return Err(Error::NoCorridor { component: c });
    }
    if (0..grid.len()).any(|p| s.contains(p) && keep_out[p]) {
        return Err(Error::EmptyGap);
    }
    debug_assert!((0..grid.len()).all(|p| !e1.contains(p) || s.contains(p)));
    debug_assert!(s.is_mirror_symmetric());
    Ok(s)
}

/// Tubes around the real-axis nodes outside `E1` where `f1 < 0`.
fn negative_axis_tubes(grid: &DiscGrid, e1: &RegionMask, f1: &RealPolynomial, hw: usize) -> Vec<bool> {
    let row = grid.real_axis_row();
    let mut line = vec![false; grid.len()];
    for j in 0..grid.n() {
        let p = grid.index(row, j);
        if grid.is_inside(p) && !e1.contains(p) && f1.eval_real(grid.z(p).re) < 0.0 {
            line[p] = true;
        }
    }
    dilate_set(grid, &line, hw)
}

#[derive(PartialEq)]
struct Entry(f64, NodeId);

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then_with(|| other.1.cmp(&self.1))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Cheapest path from component `c` of `s` to the boundary ring.
fn corridor(s: &RegionMask, c: usize, d2: Option<&DistanceField>, forbidden: f64) -> Option<Vec<NodeId>> {
    let grid = s.grid();
    let h = grid.h();
    let dist_e2 = |p: NodeId| d2.map_or(f64::INFINITY, |d| d.at(p));
    let mut cost = vec![f64::INFINITY; grid.len()];
    let mut prev = vec![usize::MAX; grid.len()];
    let mut heap = BinaryHeap::new();
    for p in 0..grid.len() {
        if s.label(p) == Some(c) {
            cost[p] = 0.0;
            heap.push(Entry(0.0, p));
        }
    }
    while let Some(Entry(d, p)) = heap.pop() {
        if d > cost[p] {
            continue;
        }
        if grid.is_ring(p) {
            let mut path = vec![p];
            let mut q = p;
            while prev[q] != usize::MAX {
                q = prev[q];
                path.push(q);
            }
            return Some(path);
        }
        for (q, step) in grid.neighbors8(p) {
            if !grid.is_inside(q) || dist_e2(q) <= forbidden {
                continue;
            }
            let near = (1.0 - dist_e2(q) / PENALTY_RANGE).max(0.0);
            let nd = d + step * h * (1.0 + PENALTY_WEIGHT * near * near);
            if nd < cost[q] {
                cost[q] = nd;
                prev[q] = p;
                heap.push(Entry(nd, q));
            }
        }
    }
    None
}

/// The cutoff and the geometry it was built from.
#[derive(Debug, Clone)]
pub struct Cutoff {
    pub q: Field,
    /// Distance between `S` and `E2` (infinite if either is empty).
    pub gap: f64,
    /// `q = 1` within this distance of `S` and `0` within it of `E2`.
    pub margin: f64,
    pub mollifier_radius: f64,
}

/// Infinitely flat step on `[0, 1]`: `φ(t) / (φ(t) + φ(1 - t))`, `φ(t) = exp(-1/t)`.
pub fn smoothstep(t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    if t >= 1.0 {
        return 1.0;
    }
    let a = (-1.0 / t).exp();
    let b = (-1.0 / (1.0 - t)).exp();
    a / (a + b)
}

/// Real symmetric cutoff, `1` near `S` and `0` near `E2`.
///
/// `σ((d2 - m) / (d1 + d2 - 2m))` with Euclidean distances `d1`, `d2`, smoothed
/// by a compactly supported bump whose radius is folded into the margin `m`,
/// so `q` is exactly `1` on the `2h`-neighbourhood of `S` and exactly `0` on
/// that of `E2`.
pub fn cutoff_q(s: &RegionMask, e2: &RegionMask, mollifier_fraction: f64) -> Result<Cutoff> {
    let grid = Arc::clone(s.grid());
    let h = grid.h();
    let constant = |c: f64| Cutoff {
        q: Field::constant(&grid, Complex64::new(c, 0.0)),
        gap: f64::INFINITY,
        margin: h,
        mollifier_radius: 0.0,
    };
    if s.is_empty() {
        return Ok(constant(0.0));
    }
    if e2.is_empty() {
        return Ok(constant(1.0));
    }
    let d1 = euclidean_dist_transform(s)?;
    let d2 = euclidean_dist_transform(e2)?;
    let gap = d2.min_over(s);
    // Two cells of flat margin keep the finite-difference stencil of every
    // node in the h-neighbourhoods on constant values.
    let flat = 2.0 * h;
    if gap <= 2.0 * flat {
        return Err(Error::EmptyGap);
    }
    let radius = mollifier_fraction * (gap - 2.0 * flat) / std::f64::consts::SQRT_2;
    let margin = flat + std::f64::consts::SQRT_2 * radius;
    let raw: Vec<f64> = (0..grid.len())
        .map(|p| {
            let (a, b) = (d1.at(p), d2.at(p));
            let t = ((b - margin) / (a + b - 2.0 * margin)).clamp(0.0, 1.0);
            smoothstep(t)
        })
        .collect();
    let smooth = mollify(&grid, &raw, radius);
    let mut values = vec![Complex64::new(0.0, 0.0); grid.len()];
    for p in grid.inside_nodes() {
        let mut v = 0.5 * (smooth[p] + smooth[grid.mirror(p)]);
        if v < 1e-12 {
            v = 0.0;
        } else if v > 1.0 - 1e-12 {
            v = 1.0;
        }
        values[p] = Complex64::new(v, 0.0);
    }
    Ok(Cutoff {
        q: Field::from_parts(&grid, values, grid.inside_mask().to_vec()),
        gap,
        margin,
        mollifier_radius: radius,
    })
}

/// Separable convolution with the bump `exp(-1 / (1 - t^2))` of the given
/// radius, replicating edge values.
fn mollify(grid: &DiscGrid, data: &[f64], radius: f64) -> Vec<f64> {
    let h = grid.h();
    let taps = (radius / h).floor() as isize;
    if taps < 1 {
        return data.to_vec();
    }
    let mut w: Vec<f64> = (-taps..=taps)
        .map(|k| {
            let t = k as f64 * h / radius;
            if t.abs() < 1.0 { (-1.0 / (1.0 - t * t)).exp() } else { 0.0 }
        })
        .collect();
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= total);

    let n = grid.n() as isize;
    let clamp = |x: isize| x.clamp(0, n - 1) as usize;
    let nu = grid.n();
    let mut rows = vec![0.0; data.len()];
    for i in 0..nu {
        for j in 0..n {
            rows[i * nu + j as usize] = (-taps..=taps)
                .map(|k| w[(k + taps) as usize] * data[i * nu + clamp(j + k)])
                .sum();
        }
    }
    let mut out = vec![0.0; data.len()];
    for i in 0..n {
        for j in 0..nu {
            out[i as usize * nu + j] = (-taps..=taps)
                .map(|k| w[(k + taps) as usize] * rows[clamp(i + k) * nu + j])
                .sum();
        }
    }
    out
}
