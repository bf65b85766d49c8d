//! Uniform discretization of the closed unit disc.
//!
//! Nodes live on an `n x n` lattice over `[-1, 1]^2` with `n` odd, so the real
//! axis is a grid row and conjugation `(i, j) -> (n - 1 - i, j)` maps nodes to
//! nodes. Row index `i` is the imaginary coordinate, column `j` the real one.

use std::collections::VecDeque;
use std::io::{self, Write};
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::poly::RealPolynomial;

pub type NodeId = usize;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, PartialEq)]
pub struct DiscGrid {
    n: usize,
    h: f64,
    inside: Vec<bool>,
    ring: Vec<bool>,
}

impl DiscGrid {
    pub const MIN_N: usize = 65;

    pub fn new(n: usize) -> Result<Self> {
        if n % 2 == 0 || n < Self::MIN_N {
            return Err(Error::BadResolution { n });
        }
        let h = 2.0 / (n - 1) as f64;
        let radius = 1.0 + h / 2.0;
        let mut inside = vec![false; n * n];
        for i in 0..n {
            for j in 0..n {
                let z = node_z(n, h, i, j);
                inside[i * n + j] = z.norm() <= radius;
            }
        }
        let mut ring = vec![false; n * n];
        for i in 0..n {
            for j in 0..n {
                let p = i * n + j;
                if !inside[p] {
                    continue;
                }
                let edge = i == 0 || j == 0 || i == n - 1 || j == n - 1;
                ring[p] = edge
                    || !inside[p - 1]
                    || !inside[p + 1]
                    || !inside[p - n]
                    || !inside[p + n];
            }
        }
        Ok(Self { n, h, inside, ring })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn real_axis_row(&self) -> usize {
        (self.n - 1) / 2
    }

    pub fn index(&self, i: usize, j: usize) -> NodeId {
        i * self.n + j
    }

    pub fn row_col(&self, p: NodeId) -> (usize, usize) {
        (p / self.n, p % self.n)
    }

    pub fn z(&self, p: NodeId) -> Complex64 {
        let (i, j) = self.row_col(p);
        node_z(self.n, self.h, i, j)
    }

    pub fn mirror(&self, p: NodeId) -> NodeId {
        let (i, j) = self.row_col(p);
        self.index(self.n - 1 - i, j)
    }

    pub fn is_inside(&self, p: NodeId) -> bool {
        self.inside[p]
    }

    pub fn inside_mask(&self) -> &[bool] {
        &self.inside
    }

    /// Inside nodes with a 4-neighbour outside the disc.
    pub fn is_ring(&self, p: NodeId) -> bool {
        self.ring[p]
    }

    pub fn inside_nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.len()).filter(move |&p| self.inside[p])
    }

    pub fn inside_count(&self) -> usize {
        self.inside.iter().filter(|&&b| b).count()
    }

    /// 4-neighbours inside the square.
    pub fn neighbors4(&self, p: NodeId) -> impl Iterator<Item = NodeId> {
        let n = self.n;
        let (i, j) = (p / n, p % n);
        let mut out = [usize::MAX; 4];
        if j > 0 {
            out[0] = p - 1;
        }
        if j + 1 < n {
            out[1] = p + 1;
        }
        if i > 0 {
            out[2] = p - n;
        }
        if i + 1 < n {
            out[3] = p + n;
        }
        out.into_iter().filter(|&q| q != usize::MAX)
    }

    /// 8-neighbours inside the square, with their step length in cells.
    pub fn neighbors8(&self, p: NodeId) -> impl Iterator<Item = (NodeId, f64)> {
        let n = self.n as isize;
        let (i, j) = ((p / self.n) as isize, (p % self.n) as isize);
        let mut out = [(usize::MAX, 0.0); 8];
        let mut k = 0;
        for di in -1..=1isize {
            for dj in -1..=1isize {
                if di == 0 && dj == 0 {
                    continue;
                }
                let (a, b) = (i + di, j + dj);
                if a >= 0 && b >= 0 && a < n && b < n {
                    let w = if di != 0 && dj != 0 { std::f64::consts::SQRT_2 } else { 1.0 };
                    out[k] = ((a * n + b) as usize, w);
                }
                k += 1;
            }
        }
        out.into_iter().filter(|&(q, _)| q != usize::MAX)
    }
}

fn node_z(n: usize, h: f64, i: usize, j: usize) -> Complex64 {
    let mid = (n - 1) / 2;
    // Offsets from the centre keep the real axis row at exactly zero.
    Complex64::new(
        (j as isize - mid as isize) as f64 * h,
        (i as isize - mid as isize) as f64 * h,
    )
}

/// Complex samples on a subset of grid nodes.
#[derive(Debug, Clone)]
pub struct Field {
    grid: Arc<DiscGrid>,
    values: Vec<Complex64>,
    defined: Vec<bool>,
}

impl Field {
    /// Field on every inside node.
    pub fn from_fn(grid: &Arc<DiscGrid>, f: impl Fn(Complex64) -> Complex64 + Sync) -> Self {
        let values = (0..grid.len())
            .into_par_iter()
            .map(|p| if grid.is_inside(p) { f(grid.z(p)) } else { ZERO })
            .collect();
        Self {
            grid: Arc::clone(grid),
            values,
            defined: grid.inside_mask().to_vec(),
        }
    }

    pub fn constant(grid: &Arc<DiscGrid>, c: Complex64) -> Self {
        Self::from_fn(grid, |_| c)
    }

    /// Field defined on the nodes where `defined` is set.
    pub fn from_parts(grid: &Arc<DiscGrid>, values: Vec<Complex64>, defined: Vec<bool>) -> Self {
        assert_eq!(values.len(), grid.len());
        assert_eq!(defined.len(), grid.len());
        let mut values = values;
        for (v, &d) in values.iter_mut().zip(&defined) {
            if !d {
                *v = ZERO;
            }
        }
        Self {
            grid: Arc::clone(grid),
            values,
            defined,
        }
    }

    pub fn grid(&self) -> &Arc<DiscGrid> {
        &self.grid
    }

    pub fn get(&self, p: NodeId) -> Option<Complex64> {
        self.defined[p].then(|| self.values[p])
    }

    /// Raw value; zero on undefined nodes.
    pub fn at(&self, p: NodeId) -> Complex64 {
        self.values[p]
    }

    pub fn set(&mut self, p: NodeId, v: Complex64) {
        self.values[p] = v;
        self.defined[p] = true;
    }

    pub fn is_defined(&self, p: NodeId) -> bool {
        self.defined[p]
    }

    pub fn defined_mask(&self) -> &[bool] {
        &self.defined
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn defined_nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.values.len()).filter(move |&p| self.defined[p])
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Self {
        Self {
            grid: Arc::clone(&self.grid),
            values: self
                .values
                .iter()
                .zip(&self.defined)
                .map(|(&v, &d)| if d { f(v) } else { ZERO })
                .collect(),
            defined: self.defined.clone(),
        }
    }

    pub fn sup_norm(&self) -> f64 {
        self.defined_nodes()
            .map(|p| self.values[p].norm())
            .fold(0.0, f64::max)
    }

    pub fn sup_norm_on(&self, nodes: &[bool]) -> f64 {
        self.defined_nodes()
            .filter(|&p| nodes[p])
            .map(|p| self.values[p].norm())
            .fold(0.0, f64::max)
    }

    /// Nodes whose whole `(2 margin + 1)^2` neighbourhood is defined.
    pub fn interior(&self, margin: usize) -> Vec<bool> {
        interior_of(&self.grid, &self.defined, margin)
    }

    /// Writes `x,y,re,im` rows for the defined nodes.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        writeln!(w, "x,y,re,im")?;
        for p in self.defined_nodes() {
            let z = self.grid.z(p);
            let v = self.values[p];
            writeln!(w, "{},{},{:e},{:e}", z.re, z.im, v.re, v.im)?;
        }
        Ok(())
    }
}

/// Nodes of `set` whose whole `(2 margin + 1)^2` neighbourhood lies in `set`.
pub fn interior_of(grid: &DiscGrid, set: &[bool], margin: usize) -> Vec<bool> {
    let n = grid.n();
    let m = margin as isize;
    (0..grid.len())
        .map(|p| {
            if !set[p] {
                return false;
            }
            let (i, j) = (grid.row_col(p).0 as isize, grid.row_col(p).1 as isize);
            for di in -m..=m {
                for dj in -m..=m {
                    let (a, b) = (i + di, j + dj);
                    if a < 0 || b < 0 || a >= n as isize || b >= n as isize {
                        return false;
                    }
                    if !set[(a as usize) * n + b as usize] {
                        return false;
                    }
                }
            }
            true
        })
        .collect()
}

/// Samples a real polynomial on every inside node.
pub fn sample(p: &RealPolynomial, grid: &Arc<DiscGrid>) -> Field {
    Field::from_fn(grid, |z| p.eval(z))
}

/// Finite-difference Wirtinger derivative `½(∂x + i ∂y)`.
///
/// Central differences where both axis neighbours are defined, one-sided
/// where only one is; nodes lacking a neighbour on some axis are left
/// undefined.
pub fn dbar_fd(f: &Field) -> Field {
    let grid = f.grid();
    let n = grid.n();
    let h = grid.h();
    let partial = |p: NodeId, lo: Option<NodeId>, hi: Option<NodeId>| -> Option<Complex64> {
        let lo = lo.filter(|&q| f.is_defined(q));
        let hi = hi.filter(|&q| f.is_defined(q));
        match (lo, hi) {
            (Some(a), Some(b)) => Some((f.at(b) - f.at(a)) / (2.0 * h)),
            (None, Some(b)) => Some((f.at(b) - f.at(p)) / h),
            (Some(a), None) => Some((f.at(p) - f.at(a)) / h),
            (None, None) => None,
        }
    };
    let results: Vec<Option<Complex64>> = (0..grid.len())
        .into_par_iter()
        .map(|p| {
            if !f.is_defined(p) {
                return None;
            }
            let (i, j) = grid.row_col(p);
            let dx = partial(p, (j > 0).then(|| p - 1), (j + 1 < n).then(|| p + 1))?;
            let dy = partial(p, (i > 0).then(|| p - n), (i + 1 < n).then(|| p + n))?;
            Some((dx + Complex64::i() * dy) * 0.5)
        })
        .collect();
    let defined = results.iter().map(Option::is_some).collect();
    let values = results.into_iter().map(|v| v.unwrap_or(ZERO)).collect();
    Field::from_parts(grid, values, defined)
}

/// `max |F(mirror p) - conj F(p)|` over nodes where both values are defined.
pub fn mirror_defect(f: &Field) -> f64 {
    let grid = f.grid();
    f.defined_nodes()
        .filter_map(|p| {
            let q = grid.mirror(p);
            f.get(q).map(|w| (w - f.at(p).conj()).norm())
        })
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Connectivity {
    Four,
    Eight,
}

/// Labels the connected components of `set`; returns per-node labels and the
/// component count.
pub fn label_components(grid: &DiscGrid, set: &[bool], conn: Connectivity) -> (Vec<Option<usize>>, usize) {
    let mut labels = vec![None; grid.len()];
    let mut count = 0;
    let mut queue = VecDeque::new();
    for start in 0..grid.len() {
        if !set[start] || labels[start].is_some() {
            continue;
        }
        labels[start] = Some(count);
        queue.push_back(start);
        while let Some(p) = queue.pop_front() {
            let mut visit = |q: NodeId| {
                if set[q] && labels[q].is_none() {
                    labels[q] = Some(count);
                    queue.push_back(q);
                }
            };
            match conn {
                Connectivity::Four => grid.neighbors4(p).for_each(&mut visit),
                Connectivity::Eight => grid.neighbors8(p).for_each(|(q, _)| visit(q)),
            }
        }
        count += 1;
    }
    (labels, count)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Component {
    pub size: usize,
    pub touches_boundary: bool,
}

/// Closed grid set with 8-connected component labels.
#[derive(Debug, Clone)]
pub struct RegionMask {
    grid: Arc<DiscGrid>,
    member: Vec<bool>,
    labels: Vec<Option<usize>>,
    components: Vec<Component>,
}

impl RegionMask {
    /// Builds a mask; members outside the disc are dropped.
    pub fn new(grid: &Arc<DiscGrid>, member: Vec<bool>) -> Self {
        assert_eq!(member.len(), grid.len());
        let member: Vec<bool> = member
            .into_iter()
            .enumerate()
            .map(|(p, m)| m && grid.is_inside(p))
            .collect();
        let (labels, count) = label_components(grid, &member, Connectivity::Eight);
        let mut components = vec![
            Component {
                size: 0,
                touches_boundary: false,
            };
            count
        ];
        for (p, l) in labels.iter().enumerate() {
            if let Some(l) = *l {
                components[l].size += 1;
                components[l].touches_boundary |= grid.is_ring(p);
            }
        }
        Self {
            grid: Arc::clone(grid),
            member,
            labels,
            components,
        }
    }

    pub fn empty(grid: &Arc<DiscGrid>) -> Self {
        Self::new(grid, vec![false; grid.len()])
    }

    pub fn grid(&self) -> &Arc<DiscGrid> {
        &self.grid
    }

    pub fn contains(&self, p: NodeId) -> bool {
        self.member[p]
    }

    pub fn members(&self) -> &[bool] {
        &self.member
    }

    pub fn label(&self, p: NodeId) -> Option<usize> {
        self.labels[p]
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn is_empty(&self) -> bool {
        !self.member.iter().any(|&m| m)
    }

    pub fn count(&self) -> usize {
        self.member.iter().filter(|&&m| m).count()
    }

    pub fn is_mirror_symmetric(&self) -> bool {
        (0..self.grid.len()).all(|p| self.member[p] == self.member[self.grid.mirror(p)])
    }

    pub fn union(&self, other: &RegionMask) -> RegionMask {
        RegionMask::new(
            &self.grid,
            self.member.iter().zip(&other.member).map(|(a, b)| *a || *b).collect(),
        )
    }

    pub fn intersects(&self, other: &RegionMask) -> bool {
        self.member.iter().zip(&other.member).any(|(a, b)| *a && *b)
    }

    /// Square (Chebyshev) dilation by `cells`, clipped to the disc.
    pub fn dilate(&self, cells: usize) -> RegionMask {
        RegionMask::new(&self.grid, dilate_set(&self.grid, &self.member, cells))
    }

    pub fn to_field(&self) -> Field {
        Field::from_fn(&self.grid, |_| ZERO).map_nodes(|p, _| {
            Complex64::new(if self.member[p] { 1.0 } else { 0.0 }, 0.0)
        })
    }
}

impl Field {
    fn map_nodes(mut self, f: impl Fn(NodeId, Complex64) -> Complex64) -> Self {
        for p in 0..self.values.len() {
            if self.defined[p] {
                self.values[p] = f(p, self.values[p]);
            }
        }
        self
    }
}

pub(crate) fn dilate_set(grid: &DiscGrid, set: &[bool], cells: usize) -> Vec<bool> {
    let n = grid.n();
    let r = cells as isize;
    // Separable square dilation: rows then columns.
    let mut rows = vec![false; grid.len()];
    for i in 0..n {
        for j in 0..n {
            if set[i * n + j] {
                let lo = (j as isize - r).max(0) as usize;
                let hi = (j as isize + r).min(n as isize - 1) as usize;
                for b in lo..=hi {
                    rows[i * n + b] = true;
                }
            }
        }
    }
    let mut out = vec![false; grid.len()];
    for i in 0..n {
        for j in 0..n {
            if rows[i * n + j] {
                let lo = (i as isize - r).max(0) as usize;
                let hi = (i as isize + r).min(n as isize - 1) as usize;
                for a in lo..=hi {
                    out[a * n + j] = true;
                }
            }
        }
    }
    out
}

/// Real-valued samples on every node of the square lattice.
#[derive(Debug, Clone)]
pub struct DistanceField {
    grid: Arc<DiscGrid>,
    values: Vec<f64>,
}

impl DistanceField {
    pub fn at(&self, p: NodeId) -> f64 {
        self.values[p]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn grid(&self) -> &Arc<DiscGrid> {
        &self.grid
    }

    /// Smallest distance over the members of `mask`.
    pub fn min_over(&self, mask: &RegionMask) -> f64 {
        (0..self.values.len())
            .filter(|&p| mask.contains(p))
            .map(|p| self.values[p])
            .fold(f64::INFINITY, f64::min)
    }
}

/// Two-pass (1, √2) chamfer distance to the nearest member, scaled by `h`.
///
/// Computed on the whole square lattice so that cutoffs built from it can be
/// smoothed across the disc edge.
pub fn dist_transform(mask: &RegionMask) -> Result<DistanceField> {
    if mask.is_empty() {
        return Err(Error::EmptyMask);
    }
    let grid = mask.grid();
    let n = grid.n();
    let h = grid.h();
    let diag = std::f64::consts::SQRT_2 * h;
    let mut d: Vec<f64> = mask
        .members()
        .iter()
        .map(|&m| if m { 0.0 } else { f64::INFINITY })
        .collect();
    for i in 0..n {
        for j in 0..n {
            let p = i * n + j;
            let mut v = d[p];
            if j > 0 {
                v = v.min(d[p - 1] + h);
            }
            if i > 0 {
                v = v.min(d[p - n] + h);
                if j > 0 {
                    v = v.min(d[p - n - 1] + diag);
                }
                if j + 1 < n {
                    v = v.min(d[p - n + 1] + diag);
                }
            }
            d[p] = v;
        }
    }
    for i in (0..n).rev() {
        for j in (0..n).rev() {
            let p = i * n + j;
            let mut v = d[p];
            if j + 1 < n {
                v = v.min(d[p + 1] + h);
            }
            if i + 1 < n {
                v = v.min(d[p + n] + h);
                if j + 1 < n {
                    v = v.min(d[p + n + 1] + diag);
                }
                if j > 0 {
                    v = v.min(d[p + n - 1] + diag);
                }
            }
            d[p] = v;
        }
    }
    Ok(DistanceField {
        grid: Arc::clone(grid),
        values: d,
    })
}

/// Exact Euclidean distance to the nearest member, scaled by `h`.
///
/// Separable lower-envelope algorithm of Felzenszwalb and Huttenlocher. Level
/// sets are unions of circular arcs rather than octagons, so the field is free
/// of the directional kinks of the chamfer metric.
pub fn euclidean_dist_transform(mask: &RegionMask) -> Result<DistanceField> {
    if mask.is_empty() {
        return Err(Error::EmptyMask);
    }
    let grid = mask.grid();
    let n = grid.n();
    let far = 1e20;
    let mut sq: Vec<f64> = mask.members().iter().map(|&m| if m { 0.0 } else { far }).collect();
    let mut line = vec![0.0; n];
    let mut out = vec![0.0; n];
    for i in 0..n {
        line.copy_from_slice(&sq[i * n..(i + 1) * n]);
        lower_envelope(&line, &mut out);
        sq[i * n..(i + 1) * n].copy_from_slice(&out);
    }
    for j in 0..n {
        for i in 0..n {
            line[i] = sq[i * n + j];
        }
        lower_envelope(&line, &mut out);
        for i in 0..n {
            sq[i * n + j] = out[i];
        }
    }
    let h = grid.h();
    Ok(DistanceField {
        grid: Arc::clone(grid),
        values: sq.into_iter().map(|d| d.sqrt() * h).collect(),
    })
}

/// `out[q] = min_p (q - p)^2 + f[p]`.
fn lower_envelope(f: &[f64], out: &mut [f64]) {
    let n = f.len();
    let mut v = vec![0usize; n];
    let mut z = vec![0.0f64; n + 1];
    let mut k = 0;
    z[0] = f64::NEG_INFINITY;
    z[1] = f64::INFINITY;
    let key = |q: usize| f[q] + (q * q) as f64;
    for q in 1..n {
        let mut s;
        loop {
            let p = v[k];
            s = (key(q) - key(p)) / (2.0 * (q - p) as f64);
            if s <= z[k] && k > 0 {
                k -= 1;
            } else {
                break;
            }
        }
        if s <= z[k] {
            v[0] = q;
            z[1] = f64::INFINITY;
            continue;
        }
        k += 1;
        v[k] = q;
        z[k] = s;
        z[k + 1] = f64::INFINITY;
    }
    k = 0;
    for (q, o) in out.iter_mut().enumerate() {
        while z[k + 1] < q as f64 {
            k += 1;
        }
        let d = q as f64 - v[k] as f64;
        *o = d * d + f[v[k]];
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize) -> Arc<DiscGrid> {
        Arc::new(DiscGrid::new(n).unwrap())
    }

    #[test]
    fn build_grid_examples() {
        assert_eq!(DiscGrid::new(129).unwrap().h(), 0.015625);
        assert_eq!(DiscGrid::new(65).unwrap().real_axis_row(), 32);
        assert_eq!(DiscGrid::new(64), Err(Error::BadResolution { n: 64 }));
        assert_eq!(DiscGrid::new(63), Err(Error::BadResolution { n: 63 }));
    }

    #[test]
    fn inside_count_close_to_area() {
        let g = DiscGrid::new(129).unwrap();
        let expect = std::f64::consts::FRAC_PI_4 * (g.n() as f64).powi(2);
        let ratio = g.inside_count() as f64 / expect;
        assert!((ratio - 1.0).abs() < 0.03, "ratio {ratio}");
    }

    #[test]
    fn mirror_is_involution_and_inside_symmetric() {
        let g = DiscGrid::new(65).unwrap();
        for p in 0..g.len() {
            assert_eq!(g.mirror(g.mirror(p)), p);
            assert_eq!(g.is_inside(p), g.is_inside(g.mirror(p)));
            assert_eq!(g.z(g.mirror(p)), g.z(p).conj());
        }
        let axis = g.real_axis_row();
        assert_eq!(g.z(g.index(axis, 10)).im, 0.0);
    }

    #[test]
    fn sample_examples() {
        let g = grid(129);
        let one = sample(&RealPolynomial::constant(1.0), &g);
        assert!(one.defined_nodes().all(|p| one.at(p) == Complex64::new(1.0, 0.0)));
        let zf = sample(&RealPolynomial::z(), &g);
        let c = g.index(64, 64);
        assert_eq!(zf.at(c), ZERO);
        let p = RealPolynomial::new(vec![-0.25, 0.0, 1.0]);
        let f = sample(&p, &g);
        // nodes at ±0.5 lie exactly on the grid for n = 129
        for j in [32, 96] {
            let node = g.index(64, j);
            assert!(f.at(node).norm() <= 1.0 * g.h());
        }
    }

    #[test]
    fn dbar_of_analytic_vanishes() {
        let g = grid(129);
        let f = Field::from_fn(&g, |z| z * z);
        let d = dbar_fd(&f);
        let interior = f.interior(1);
        let sup = d.sup_norm_on(&interior);
        assert!(sup <= 1e-10, "sup {sup}");
    }

    #[test]
    fn dbar_of_conj_is_one() {
        let g = grid(129);
        let d = dbar_fd(&Field::from_fn(&g, |z| z.conj()));
        let interior = d.interior(0);
        for p in d.defined_nodes().filter(|&p| interior[p]) {
            assert!((d.at(p) - Complex64::new(1.0, 0.0)).norm() <= 1e-10);
        }
    }

    #[test]
    fn dbar_of_abs_squared_is_z() {
        let g = grid(129);
        let f = Field::from_fn(&g, |z| Complex64::new(z.norm_sqr(), 0.0));
        let d = dbar_fd(&f);
        let interior = f.interior(1);
        for p in (0..g.len()).filter(|&p| interior[p]) {
            assert!((d.at(p) - g.z(p)).norm() <= 1e-10);
        }
    }

    #[test]
    fn mirror_defect_examples() {
        let g = grid(65);
        let p = RealPolynomial::new(vec![0.3, -1.2, 0.7, 2.0]);
        assert!(mirror_defect(&sample(&p, &g)) <= 1e-14);
        let i = Field::constant(&g, Complex64::i());
        assert!((mirror_defect(&i) - 2.0).abs() < 1e-15);
        // conj(i * conj z) = -i z: defect |(-i z) - (i z)|... computed at the
        // mirror node: F(mirror p) = i conj(z), conj F(p) = -i conj(z).
        // The defect is 2|z|, maximal on the outermost inside node.
        let iz = Field::from_fn(&g, |z| Complex64::i() * z);
        let rmax = g.inside_nodes().map(|p| g.z(p).norm()).fold(0.0, f64::max);
        assert!((mirror_defect(&iz) - 2.0 * rmax).abs() < 1e-14);
    }

    #[test]
    fn dist_transform_examples() {
        let g = grid(65);
        let centre = g.index(32, 32);
        let mut m = vec![false; g.len()];
        m[centre] = true;
        let d = dist_transform(&RegionMask::new(&g, m)).unwrap();
        assert!((d.at(centre + 1) - g.h()).abs() < 1e-15);
        assert_eq!(d.at(centre), 0.0);

        let all = RegionMask::new(&g, g.inside_mask().to_vec());
        let d = dist_transform(&all).unwrap();
        assert!(g.inside_nodes().all(|p| d.at(p) == 0.0));

        let left: Vec<bool> = (0..g.len()).map(|p| g.z(p).re <= 0.0).collect();
        let d = dist_transform(&RegionMask::new(&g, left)).unwrap();
        for j in 33..64 {
            let p = g.index(g.real_axis_row(), j);
            let x = g.z(p).re;
            assert!((d.at(p) - x).abs() <= 0.1 * x);
        }

        assert_eq!(dist_transform(&RegionMask::empty(&g)).unwrap_err(), Error::EmptyMask);
    }

    #[test]
    fn dist_transform_is_lipschitz() {
        let g = grid(65);
        let m: Vec<bool> = (0..g.len())
            .map(|p| (g.z(p) - Complex64::new(0.3, 0.2)).norm() < 0.15 || g.z(p).re < -0.6)
            .collect();
        let d = dist_transform(&RegionMask::new(&g, m)).unwrap();
        for p in 0..g.len() {
            for (q, w) in g.neighbors8(p) {
                assert!((d.at(p) - d.at(q)).abs() <= w * g.h() + 1e-12);
            }
        }
    }

    #[test]
    fn euclidean_transform_matches_brute_force() {
        let g = grid(65);
        let m: Vec<bool> = (0..g.len())
            .map(|p| (g.z(p) - Complex64::new(0.3, 0.2)).norm() < 0.15 || g.z(p).re < -0.6 || p % 977 == 0)
            .collect();
        let mask = RegionMask::new(&g, m);
        let d = euclidean_dist_transform(&mask).unwrap();
        let members: Vec<NodeId> = (0..g.len()).filter(|&p| mask.contains(p)).collect();
        for p in 0..g.len() {
            let exact = members.iter().map(|&q| (g.z(p) - g.z(q)).norm()).fold(f64::INFINITY, f64::min);
            assert!((d.at(p) - exact).abs() < 1e-12, "{p}: {} vs {exact}", d.at(p));
        }
    }

    #[test]
    fn labels_use_requested_connectivity() {
        let g = grid(65);
        let mut m = vec![false; g.len()];
        m[g.index(30, 30)] = true;
        m[g.index(31, 31)] = true;
        assert_eq!(label_components(&g, &m, Connectivity::Eight).1, 1);
        assert_eq!(label_components(&g, &m, Connectivity::Four).1, 2);
    }

    #[test]
    fn csv_has_header_and_inside_rows() {
        let g = grid(65);
        let f = Field::constant(&g, Complex64::new(1.0, 0.5));
        let mut buf = Vec::new();
        f.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("x,y,re,im"));
        assert_eq!(lines.count(), g.inside_count());
    }
}
