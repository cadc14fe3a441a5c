//! Randomized invariants that cut across modules.

use num_complex::Complex64;
use proptest::prelude::*;

use crsing::complex::{wirtinger_fd_total, CircleGrid, Disc};
use crsing::hull::{graph_samples, hull_probe};
use crsing::kallin::{rotation_average, symmetrize};
use crsing::minimax::{lawson, BasisMatrix, LawsonConfig};
use crsing::poly::{BiPoly, BihomPoly};
use crsing::surface::{certify, tau_sup, CRSurface};

fn cplx() -> impl Strategy<Value = Complex64> {
    (-1.0f64..1.0, -1.0f64..1.0).prop_map(|(re, im)| Complex64::new(re, im))
}

fn bihom_terms(max_deg: u32) -> impl Strategy<Value = Vec<((u32, u32), Complex64)>> {
    prop::collection::vec(((0..=max_deg, 0..=max_deg), cplx()), 0..6)
}

fn bihom(terms: &[((u32, u32), Complex64)]) -> BihomPoly {
    BihomPoly::from_terms(terms.iter().copied())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn bihom_eval_matches_term_sum(terms in bihom_terms(5), z in cplx()) {
        let p = bihom(&terms);
        let direct: Complex64 = terms.iter().map(|&((a, b), c)| c * z.powu(a) * z.conj().powu(b)).sum();
        prop_assert!((p.eval(z) - direct).norm() <= 1e-12 * (1.0 + direct.norm()));
        prop_assert!(p.terms().all(|(_, c)| c != Complex64::new(0.0, 0.0)));
    }

    #[test]
    fn bihom_wirtinger_matches_differences(terms in bihom_terms(4), z in cplx()) {
        let p = bihom(&terms);
        let (dz, dzb) = wirtinger_fd_total(|x| p.eval(x), z, 1e-5);
        let scale = 1.0 + terms.iter().map(|(_, c)| c.norm()).sum::<f64>() * 16.0;
        prop_assert!((p.d_dz().eval(z) - dz).norm() <= 1e-6 * scale);
        prop_assert!((p.d_dzbar().eval(z) - dzb).norm() <= 1e-6 * scale);
    }

    #[test]
    fn bihom_product_rule(t1 in bihom_terms(3), t2 in bihom_terms(3), z in cplx()) {
        let (p, q) = (bihom(&t1), bihom(&t2));
        let pq = &p * &q;
        prop_assert!((pq.eval(z) - p.eval(z) * q.eval(z)).norm() <= 1e-11);
        let lhs = pq.d_dzbar().eval(z);
        let rhs = p.d_dzbar().eval(z) * q.eval(z) + p.eval(z) * q.d_dzbar().eval(z);
        prop_assert!((lhs - rhs).norm() <= 1e-10);
    }

    #[test]
    fn symmetrize_is_a_linear_projection(
        t1 in prop::collection::vec(((0u32..4, 0u32..9), cplx()), 0..6),
        t2 in prop::collection::vec(((0u32..4, 0u32..9), cplx()), 0..6),
        delta in 1usize..5,
        z in cplx(),
        w in cplx(),
    ) {
        let g = BiPoly::from_terms(t1.iter().copied());
        let h = BiPoly::from_terms(t2.iter().copied());
        let sum = symmetrize(&(&g + &h), delta).unwrap();
        let parts = &symmetrize(&g, delta).unwrap() + &symmetrize(&h, delta).unwrap();
        let u = w.powu(delta as u32);
        prop_assert!((sum.eval(z, u) - parts.eval(z, u)).norm() <= 1e-12);
        // a polynomial already in (z, w^Δ) is returned unchanged
        let p = symmetrize(&g, delta).unwrap();
        let lifted = BiPoly::from_terms(p.terms().map(|((mu, nu), c)| ((mu, nu * delta as u32), c)));
        prop_assert_eq!(symmetrize(&lifted, delta).unwrap(), p.clone());
        prop_assert!((p.eval(z, u) - rotation_average(&g, delta, z, w)).norm() <= 1e-12 * (1.0 + g.terms().map(|(_, c)| c.norm()).sum::<f64>()));
    }

    #[test]
    fn lawson_brackets_the_minimax_value(
        rows in prop::collection::vec(prop::collection::vec(cplx(), 3), 8..40),
        b in prop::collection::vec(cplx(), 40),
    ) {
        let n = rows.len();
        let a = BasisMatrix::from_fn(n, 3, |i, l| rows[i][l]);
        let fit = lawson(&a, &b[..n], &LawsonConfig::default()).unwrap();
        let resid = a.apply(&fit.coefficients);
        let sup = (0..n).map(|i| (b[i] - resid[i]).norm()).fold(0.0, f64::max);
        prop_assert!((sup - fit.sup_error).abs() <= 1e-12);
        prop_assert!(fit.lower_bound <= fit.sup_error * (1.0 + 1e-9));
        // never worse than the zero fit
        let zero = b[..n].iter().map(|v| v.norm()).fold(0.0, f64::max);
        prop_assert!(fit.sup_error <= zero + 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn hull_values_are_feasible_and_monotone(
        c1 in cplx(),
        c2 in cplx(),
        pz in cplx(),
        pw in cplx(),
    ) {
        let samples = graph_samples(|z| z.conj() + c1 * z * z + c2 * z.conj() * z.conj(), &Disc::unit(), 5, 20);
        let probe = (pz * 0.5, pw * 0.5 + Complex64::new(0.0, 1e-3));
        let res = hull_probe(&samples, probe, 4, &LawsonConfig::default()).unwrap();
        for m in &res.m_values {
            prop_assert!(*m <= 1.0 && *m >= 0.0);
        }
        for p in res.m_values.windows(2) {
            prop_assert!(p[1] <= p[0] + 1e-9);
        }
    }

    #[test]
    fn tau_sup_scales_with_lower_coefficients(c3 in cplx(), c2 in cplx(), g in cplx(), s in 0.0f64..1.0) {
        let one = Complex64::new(1.0, 0.0);
        let build = |t: f64| {
            CRSurface::from_leading(4, &[(4, one), (3, c3 * t), (2, c2 * t)], 1.0)
                .and_then(|x| x.with_residual(BihomPoly::monomial(1, 4, g * t)))
                .unwrap()
        };
        let grid = CircleGrid::new(1024).unwrap();
        let base = tau_sup(&build(1.0), 4, &grid).unwrap();
        let scaled = tau_sup(&build(s), 4, &grid).unwrap();
        prop_assert!((scaled - s * base).abs() <= 1e-9 * (1.0 + base));
    }

    #[test]
    fn certificate_is_rotation_invariant(c3 in cplx(), rot in -3.0f64..3.0) {
        // w = Σ(z) and w = Σ(e^{it} z) have the same sup and gradient bounds
        let one = Complex64::new(1.0, 0.0);
        let s = CRSurface::from_leading(4, &[(4, one), (3, c3 * 0.4)], 1.0).unwrap();
        let e = Complex64::from_polar(1.0, rot);
        let coeffs: Vec<(usize, Complex64)> = (0..=4)
            .filter(|&j| s.coefficient(j) != Complex64::new(0.0, 0.0))
            .map(|j| (j, s.coefficient(j) * e.powi(4 - j as i32) * e.conj().powi(j as i32)))
            .collect();
        let r = CRSurface::from_leading(4, &coeffs, 1.0).unwrap();
        let grid = CircleGrid::new(8192).unwrap();
        let (a, b) = (certify(&s, &grid), certify(&r, &grid));
        prop_assert_eq!(a.passed, b.passed);
        let (da, db) = (a.selected.unwrap(), b.selected.unwrap());
        prop_assert!((da.a - db.a).abs() <= 2e-3);
        prop_assert!((da.deriv_lhs - db.deriv_lhs).abs() <= 1e-2);
    }
}
