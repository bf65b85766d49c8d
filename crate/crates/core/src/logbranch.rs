//! A real-symmetric branch of `log f1` on the grid complement of `S`.

use std::collections::VecDeque;
use std::f64::consts::FRAC_PI_2;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{label_components, Connectivity, DiscGrid, Field, NodeId, RegionMask};
use crate::poly::RealPolynomial;

/// Branch of `log f1` on the inside nodes outside `S`.
///
/// Each 4-connected piece of the complement is handled separately. Pieces
/// that meet the real axis are integrated over their upper half from a real
/// anchor and reflected; the others come in mirror pairs, and only the upper
/// one is integrated. Steps use the midpoint rule for `f1'/f1` followed by one
/// Newton step on `exp(L) = f1`.
///
/// `f1` must be the POZ-normalized datum, positive on the real complement
/// nodes.
pub fn log_branch(f1: &RealPolynomial, s: &RegionMask) -> Result<Field> {
    let grid = Arc::clone(s.grid());
    let mid = grid.real_axis_row();
    let free: Vec<bool> = (0..grid.len()).map(|p| grid.is_inside(p) && !s.contains(p)).collect();

    for j in 0..grid.n() {
        let p = grid.index(mid, j);
        if free[p] {
            let value = f1.eval_real(grid.z(p).re);
            if !(value > 0.0) {
                return Err(Error::NegativeOnAxis { node: p, value });
            }
        }
    }

    let (labels, count) = label_components(&grid, &free, Connectivity::Four);
    let mut anchors: Vec<Option<NodeId>> = vec![None; count];
    for p in 0..grid.len() {
        let Some(l) = labels[p] else { continue };
        let (i, _) = grid.row_col(p);
        let better = match anchors[l] {
            None => i >= mid,
            Some(a) => grid.row_col(a).0 != mid && i == mid,
        };
        if better {
            anchors[l] = Some(p);
        }
    }

    let mut values = vec![Complex64::new(0.0, 0.0); grid.len()];
    let mut done = vec![false; grid.len()];
    for anchor in anchors.into_iter().flatten() {
        let z = grid.z(anchor);
        let start = if z.im == 0.0 {
            Complex64::new(f1.eval_real(z.re).ln(), 0.0)
        } else {
            f1.eval(z).ln()
        };
        let label = labels[anchor];
        let upper = |p: NodeId| labels[p] == label && grid.row_col(p).0 >= mid;
        values[anchor] = start;
        done[anchor] = true;
        let mut queue = VecDeque::from([anchor]);
        while let Some(p) = queue.pop_front() {
            for q in grid.neighbors4(p) {
                if done[q] || !upper(q) {
                    continue;
                }
                let mut l = step(f1, &grid, p, q, values[p]);
                if grid.row_col(q).0 == mid {
                    if l.im.abs() >= FRAC_PI_2 {
                        return Err(Error::BranchInconsistency { node: q, jump: l.im.abs() });
                    }
                    l = Complex64::new(f1.eval_real(grid.z(q).re).ln(), 0.0);
                }
                values[q] = l;
                done[q] = true;
                queue.push_back(q);
            }
        }
    }

    for p in 0..grid.len() {
        if free[p] && grid.row_col(p).0 > mid {
            let m = grid.mirror(p);
            values[m] = values[p].conj();
            done[m] = true;
        }
    }
    debug_assert!((0..grid.len()).all(|p| done[p] == free[p]));

    check_consistency(f1, &grid, &free, &values)?;
    Ok(Field::from_parts(&grid, values, free))
}

fn step(f1: &RealPolynomial, grid: &DiscGrid, p: NodeId, q: NodeId, lp: Complex64) -> Complex64 {
    let (zp, zq) = (grid.z(p), grid.z(q));
    let (f, df) = f1.eval_with_derivative((zp + zq) * 0.5);
    let l = lp + df / f * (zq - zp);
    l + (f1.eval(zq) * (-l).exp() - 1.0)
}

/// Every pair of adjacent free nodes must agree with the local integral.
fn check_consistency(f1: &RealPolynomial, grid: &DiscGrid, free: &[bool], values: &[Complex64]) -> Result<()> {
    for p in 0..grid.len() {
        if !free[p] {
            continue;
        }
        for q in grid.neighbors4(p) {
            if q < p || !free[q] {
                continue;
            }
            let (zp, zq) = (grid.z(p), grid.z(q));
            let (f, df) = f1.eval_with_derivative((zp + zq) * 0.5);
            let jump = (values[q] - values[p] - df / f * (zq - zp)).norm();
            if jump >= FRAC_PI_2 {
                return Err(Error::BranchInconsistency { node: q, jump });
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{dbar_fd, interior_of, mirror_defect};

    fn grid(n: usize) -> Arc<DiscGrid> {
        Arc::new(DiscGrid::new(n).unwrap())
    }

    fn poly(c: &[f64]) -> RealPolynomial {
        RealPolynomial::new(c.to_vec())
    }

    #[test]
    fn constants() {
        let g = grid(65);
        let l = log_branch(&poly(&[1.0]), &RegionMask::empty(&g)).unwrap();
        assert_eq!(l.sup_norm(), 0.0);
        let l = log_branch(&poly(&[2.0]), &RegionMask::empty(&g)).unwrap();
        for p in l.defined_nodes() {
            assert!((l.at(p) - Complex64::new(2f64.ln(), 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn matches_principal_log_of_zero_free_data() {
        let g = grid(129);
        let f = -poly(&[-2.0, 1.0]);
        let l = log_branch(&f, &RegionMask::empty(&g)).unwrap();
        assert!((l.at(g.index(64, 64)).re - 2f64.ln()).abs() < 1e-15);
        for p in l.defined_nodes() {
            assert!((l.at(p) - f.eval(g.z(p)).ln()).norm() < 1e-12);
        }
    }

    #[test]
    fn negative_axis_is_rejected() {
        let g = grid(65);
        let e = log_branch(&poly(&[-2.0, 1.0]), &RegionMask::empty(&g)).unwrap_err();
        assert!(matches!(e, Error::NegativeOnAxis { .. }));
    }

    #[test]
    fn slit_complement_of_square() {
        // f1 = z^2 with S a vertical slit through the origin: the winding of
        // z^2 around 0 is absorbed by the slit, so the branch exists.
        let g = grid(129);
        let slit: Vec<bool> = (0..g.len())
            .map(|p| {
                let z = g.z(p);
                g.is_inside(p) && (z.norm() <= 0.2 || z.re.abs() <= 2.0 * g.h())
            })
            .collect();
        let s = RegionMask::new(&g, slit);
        let f = poly(&[0.0, 0.0, 1.0]);
        let l = log_branch(&f, &s).unwrap();
        assert!(mirror_defect(&l) <= 1e-10);
        for p in l.defined_nodes() {
            let e = l.at(p).exp();
            assert!((e - f.eval(g.z(p))).norm() <= 1e-8 * f.eval(g.z(p)).norm());
            if g.z(p).im == 0.0 {
                assert_eq!(l.at(p).im, 0.0);
            }
        }
        let d = dbar_fd(&l);
        let interior = interior_of(&g, l.defined_mask(), 2);
        let sup = (0..g.len()).filter(|&p| interior[p]).map(|p| d.at(p).norm()).fold(0.0, f64::max);
        // Central differences err by at most h^2/6 sup|L'''| with L''' = 4/z^3
        // and |z| >= 0.2 on the stencils.
        let bound = g.h().powi(2) / 6.0 * 4.0 / 0.2f64.powi(3);
        assert!(sup <= 1.05 * bound, "sup {sup} bound {bound}");
    }

    #[test]
    fn winding_is_detected() {
        // Without the slit the complement of a small disc around the zero of
        // z is an annulus, on which no branch exists.
        let g = grid(65);
        let hole: Vec<bool> = (0..g.len()).map(|p| g.z(p).norm() <= 0.2).collect();
        let e = log_branch(&poly(&[0.0, 1.0]), &RegionMask::new(&g, hole)).unwrap_err();
        assert!(matches!(e, Error::BranchInconsistency { .. } | Error::NegativeOnAxis { .. }));
        let e = log_branch(&poly(&[0.0, 0.0, 1.0]), &RegionMask::new(&g, (0..g.len()).map(|p| g.z(p).norm() <= 0.2).collect())).unwrap_err();
        assert!(matches!(e, Error::BranchInconsistency { .. }));
    }
}
