use std::sync::{Arc, OnceLock};

use num_complex::Complex64;
use proptest::prelude::*;
use realstab_core::corpus::{well_separated, Pair};
use realstab_core::*;

fn grid(n: usize) -> Arc<DiscGrid> {
    Arc::new(DiscGrid::new(n).unwrap())
}

fn grid65() -> Arc<DiscGrid> {
    static G: OnceLock<Arc<DiscGrid>> = OnceLock::new();
    Arc::clone(G.get_or_init(|| grid(65)))
}

fn coeffs(max_degree: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, 1..=max_degree + 1)
}

fn point() -> impl Strategy<Value = Complex64> {
    (0.0f64..1.0, 0.0f64..std::f64::consts::TAU).prop_map(|(r, t)| Complex64::from_polar(r, t))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn real_coefficients_commute_with_conjugation(c in coeffs(8), z in point()) {
        let p = RealPolynomial::new(c);
        let lhs = p.eval(z.conj());
        let rhs = p.eval(z).conj();
        prop_assert!((lhs - rhs).norm() <= 1e-14 * (1.0 + lhs.norm()));
    }

    #[test]
    fn derivative_is_linear(a in coeffs(6), b in coeffs(6), s in -2.0f64..2.0, t in -2.0f64..2.0) {
        let (p, q) = (RealPolynomial::new(a), RealPolynomial::new(b));
        let lhs = (&p.scale(s) + &q.scale(t)).derivative();
        let rhs = &p.derivative().scale(s) + &q.derivative().scale(t);
        for x in [-1.0, -0.3, 0.0, 0.6, 1.0] {
            prop_assert!((lhs.eval_real(x) - rhs.eval_real(x)).abs() <= 1e-12);
        }
    }

    #[test]
    fn roots_round_trip(mut roots in prop::collection::vec(-2.0f64..2.0, 1..=6)) {
        roots.sort_by(f64::total_cmp);
        prop_assume!(roots.windows(2).all(|w| w[1] - w[0] > 0.05));
        let p = RealPolynomial::from_roots(&roots);
        let mut found: Vec<f64> = p.roots().unwrap().iter().map(|z| {
            assert!(z.im.abs() < 1e-6, "spurious complex root {z}");
            z.re
        }).collect();
        found.sort_by(f64::total_cmp);
        prop_assert_eq!(found.len(), roots.len());
        for (a, b) in found.iter().zip(&roots) {
            prop_assert!((a - b).abs() <= 1e-8, "{} vs {}", a, b);
        }
    }

    #[test]
    fn samples_are_mirror_symmetric(c in coeffs(8)) {
        let f = sample(&RealPolynomial::new(c), &grid65());
        prop_assert!(mirror_defect(&f) <= 1e-13);
    }

    #[test]
    fn central_differences_are_exact_up_to_cubic_term(c in coeffs(3)) {
        // For a cubic the central ∂̄ is exactly h² times the cubic coefficient.
        let g = grid65();
        let p = RealPolynomial::new(c.clone());
        let d = dbar_fd(&sample(&p, &g));
        let c3 = if c.len() == 4 { c[3] } else { 0.0 };
        let interior = realstab_core::grid::interior_of(&g, g.inside_mask(), 1);
        for q in g.inside_nodes().filter(|&q| interior[q]) {
            prop_assert!((d.at(q) - c3 * g.h() * g.h()).norm() <= 1e-12);
        }
    }

    #[test]
    fn distances_are_lipschitz(cx in -0.8f64..0.8, cy in -0.8f64..0.8, r in 0.02f64..0.3) {
        let g = grid65();
        let centre = Complex64::new(cx, cy);
        let mask = RegionMask::new(&g, (0..g.len()).map(|q| (g.z(q) - centre).norm() <= r).collect());
        prop_assume!(!mask.is_empty());
        for d in [dist_transform(&mask).unwrap(), euclidean_dist_transform(&mask).unwrap()] {
            for q in 0..g.len() {
                if mask.contains(q) {
                    prop_assert_eq!(d.at(q), 0.0);
                }
                for (nb, cells) in g.neighbors8(q) {
                    prop_assert!((d.at(q) - d.at(nb)).abs() <= cells * g.h() * (1.0 + 1e-12));
                }
            }
        }
    }

    #[test]
    fn symmetrization_preserves_bezout(
        a in coeffs(4), b in coeffs(4), w in prop::collection::vec(-1.0f64..1.0, 1..4)
    ) {
        let pair = Pair { f1: a, f2: b };
        prop_assume!(well_separated(&pair, 0.2, 5.0));
        let (f1, f2) = pair.polys();
        let (g1, g2) = bezout_euclid(&f1, &f2).unwrap();
        // Any (g1 + i f2 w, g2 - i f1 w) is another, non-real, solution.
        let w = ComplexPolynomial::new(w.iter().map(|&x| Complex64::new(0.0, x)).collect());
        let h1 = ComplexPolynomial::from(&g1).add(&w.mul_real(&f2));
        let h2 = ComplexPolynomial::from(&g2).add(&w.mul_real(&f1).mul_real(&RealPolynomial::constant(-1.0)));
        for h in [h1.clone(), symmetrize(&h1)].iter().zip([h2.clone(), symmetrize(&h2)].iter()) {
            let total = h.0.mul_real(&f1).add(&h.1.mul_real(&f2));
            for (k, c) in total.coeffs.iter().enumerate() {
                let want = if k == 0 { 1.0 } else { 0.0 };
                prop_assert!((c - want).norm() <= 1e-11, "coefficient {} is {}", k, c);
            }
        }
        prop_assert!(symmetrize(&h1).coeffs.iter().all(|c| c.im == 0.0));
    }

    #[test]
    fn corona_bound_is_a_lower_bound(a in coeffs(5), b in coeffs(5)) {
        let (f1, f2) = (RealPolynomial::new(a), RealPolynomial::new(b));
        let Ok(cert) = corona_delta(&f1, &f2, &grid65()) else { return Ok(()) };
        // Dense polar sampling of the closed disc.
        let mut dense = f64::INFINITY;
        for i in 0..=200 {
            let r = i as f64 / 200.0;
            for j in 0..720 {
                let z = Complex64::from_polar(r, j as f64 * std::f64::consts::TAU / 720.0);
                dense = dense.min(f1.eval(z).norm() + f2.eval(z).norm());
            }
        }
        prop_assert!(cert.delta_lower <= dense, "{} > {}", cert.delta_lower, dense);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn cauchy_transform_is_linear(
        a in (-1.0f64..1.0, -1.0f64..1.0), b in (-1.0f64..1.0, -1.0f64..1.0), s in -2.0f64..2.0
    ) {
        let g = grid65();
        let (a, b) = (Complex64::new(a.0, a.1), Complex64::new(b.0, b.1));
        let k1 = Field::from_fn(&g, |z| a * z * z.conj() + 1.0);
        let k2 = Field::from_fn(&g, |z| b * (z * 2.0).sin());
        let sum = Field::from_fn(&g, |z| (a * z * z.conj() + 1.0) * s + b * (z * 2.0).sin());
        let t1 = cauchy_transform(&k1);
        let t2 = cauchy_transform(&k2);
        let ts = cauchy_transform(&sum);
        for q in g.inside_nodes() {
            prop_assert!((ts.at(q) - (t1.at(q) * s + t2.at(q))).norm() <= 1e-12);
        }
    }

    #[test]
    fn symmetric_density_gives_symmetric_transform(c in coeffs(4), d in coeffs(4)) {
        let g = grid65();
        let (p, q) = (RealPolynomial::new(c), RealPolynomial::new(d));
        // p(z) + conj(z) q(z) has the real symmetry.
        let k = Field::from_fn(&g, |z| p.eval(z) + z.conj() * q.eval(z));
        prop_assert!(mirror_defect(&k) <= 1e-13);
        prop_assert!(mirror_defect(&cauchy_transform(&k)) <= 1e-10);
    }
}
