//! Property suites checked against brute-force oracles.

use crate::chamber::{endpoint_classify, ray_scan, toric_curve_intersection, Side};
use crate::corpus::Corpus;
use crate::exactmath::{det2, int, parse_rational, rat, IntMatrix2xN, Mat2, Rational};
use crate::fano::normalize_quotient;
use crate::format::{common_zero_check, CommonZero};
use crate::polyring::{groebner_basis, pfaffian4, pfaffians5, Budget, Ideal, MonomialOrder, Polynomial, Ring};
use crate::Error;
use proptest::prelude::*;
use std::sync::Arc;

fn constant(ring: &Arc<Ring>, c: i64) -> Polynomial {
    Polynomial::constant(ring, int(c))
}

fn skew(ring: &Arc<Ring>, n: usize, upper: &[i64]) -> Vec<Vec<Polynomial>> {
    let mut m = vec![vec![constant(ring, 0); n]; n];
    let mut k = 0;
    for i in 0..n {
        for j in i + 1..n {
            m[i][j] = constant(ring, upper[k]);
            m[j][i] = constant(ring, -upper[k]);
            k += 1;
        }
    }
    m
}

fn leibniz(m: &[[i64; 4]; 4]) -> i64 {
    let mut total = 0;
    let mut perm = [0usize, 1, 2, 3];
    fn heap(k: usize, p: &mut [usize; 4], m: &[[i64; 4]; 4], total: &mut i64) {
        if k == 1 {
            let mut inv = 0;
            for i in 0..4 {
                for j in i + 1..4 {
                    if p[i] > p[j] {
                        inv += 1;
                    }
                }
            }
            let prod: i64 = (0..4).map(|i| m[i][p[i]]).product();
            *total += if inv % 2 == 0 { prod } else { -prod };
            return;
        }
        for i in 0..k {
            heap(k - 1, p, m, total);
            let j = if k % 2 == 0 { i } else { 0 };
            p.swap(j, k - 1);
        }
    }
    heap(4, &mut perm, m, &mut total);
    total
}

/// v in the cone spanned by `gens`, decided pairwise by Cramer's rule.
fn in_cone(v: (i64, i64), gens: &[(i64, i64)]) -> bool {
    if v == (0, 0) {
        return true;
    }
    for &u in gens {
        if det2(u, v) == 0 && u.0 * v.0 + u.1 * v.1 > 0 {
            return true;
        }
        for &w in gens {
            let d = det2(u, w);
            if d == 0 {
                continue;
            }
            let (a, b) = (det2(v, w) * d.signum(), det2(u, v) * d.signum());
            if a >= 0 && b >= 0 {
                return true;
            }
        }
    }
    false
}

fn poly_strategy() -> impl Strategy<Value = Vec<(u32, u32, u32, i64)>> {
    prop::collection::vec((0u32..3, 0u32..3, 0u32..2, -3i64..=3), 1..4)
}

fn build(ring: &Arc<Ring>, terms: &[(u32, u32, u32, i64)]) -> Polynomial {
    Polynomial::from_terms(ring, terms.iter().map(|&(a, b, c, k)| (vec![a, b, c], int(k))))
}

fn unimodular() -> impl Strategy<Value = [[i64; 2]; 2]> {
    prop::collection::vec((0usize..4, -2i64..=2), 0..6).prop_map(|ops| {
        let mut a = [[1i64, 0], [0, 1]];
        for (op, k) in ops {
            a = match op {
                0 => [[a[0][0] + k * a[1][0], a[0][1] + k * a[1][1]], a[1]],
                1 => [a[0], [a[1][0] + k * a[0][0], a[1][1] + k * a[0][1]]],
                2 => [a[1], a[0]],
                _ => [a[0], [-a[1][0], -a[1][1]]],
            };
        }
        a
    })
}

fn corpus_gradings() -> Vec<IntMatrix2xN> {
    let c = Corpus::embedded().unwrap();
    c.families.values().filter_map(|r| r.family().ok()?.grading).collect()
}

#[test]
fn mov_inside_eff_on_corpus() {
    let gs = corpus_gradings();
    assert!(gs.len() >= 24);
    for g in gs {
        let fan = ray_scan(&g).unwrap();
        let cols: Vec<(i64, i64)> = (0..g.len()).map(|i| g.col(i)).collect();
        let (lo, hi) = fan.mov();
        for r in [lo, hi] {
            let v = fan.rays()[r].direction;
            assert!(in_cone(v, &cols), "{v:?} outside Eff");
            for skip in 0..cols.len() {
                let rest: Vec<_> = cols.iter().enumerate().filter(|(i, _)| *i != skip).map(|(_, c)| *c).collect();
                assert!(in_cone(v, &rest), "{v:?} not movable without column {skip}");
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn pfaffian_syzygy(upper in prop::collection::vec(-9i64..=9, 10)) {
        let ring = Ring::new(&["u"]);
        let m = skew(&ring, 5, &upper);
        let pf = pfaffians5(&m).unwrap();
        for i in 0..5 {
            let mut acc = constant(&ring, 0);
            for (j, p) in pf.iter().enumerate() {
                let t = &m[i][j] * p;
                acc = if j % 2 == 0 { &acc + &t } else { &acc - &t };
            }
            prop_assert!(acc.is_zero());
        }
    }

    #[test]
    fn pfaffian_squared_is_det(upper in prop::collection::vec(-9i64..=9, 6)) {
        let ring = Ring::new(&["u"]);
        let m = skew(&ring, 4, &upper);
        let pf = pfaffian4(&m, [0, 1, 2, 3]).as_constant().unwrap_or_else(|| int(0));
        let mut ints = [[0i64; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                ints[i][j] = crate::exactmath::to_i64(&m[i][j].as_constant().unwrap_or_else(|| int(0))).unwrap();
            }
        }
        prop_assert_eq!(&pf * &pf, int(leibniz(&ints)));
    }

    #[test]
    fn rational_round_trip(n in -10_000i64..10_000, d in 1i64..500) {
        let q = rat(n, d);
        prop_assert_eq!(parse_rational(&q.to_string()).unwrap(), q);
    }

    #[test]
    fn mat2_inverse(a in -20i64..20, b in -20i64..20, c in -20i64..20, d in -20i64..20) {
        let m = Mat2::from_columns(&[int(a), int(c)], &[int(b), int(d)]);
        match m.inverse() {
            Some(inv) => prop_assert_eq!(inv.mul(&m), Mat2::identity()),
            None => prop_assert_eq!(m.det(), int(0)),
        }
    }

    #[test]
    fn quotient_normalization_idempotent(r in (1i64..16).prop_map(|k| 2 * k + 1), a in 1i64..40, b in 0i64..40) {
        match normalize_quotient(r, [a, b, r - b.rem_euclid(r)]) {
            Ok(q) => {
                prop_assert_eq!(q.weights[0], 1);
                prop_assert_eq!(normalize_quotient(q.r, q.weights).unwrap(), q.clone());
                prop_assert_eq!((q.weights[1] + q.weights[2]) % r, 0);
            }
            Err(_) => prop_assert_ne!(num_integer::gcd(a, r), 1),
        }
    }

    #[test]
    fn intersection_changes_sign_across_wall(
        delta in (-9i64..9, -9i64..9), w in (-5i64..5, -5i64..5),
        va in (-5i64..5, -5i64..5), vb in (-5i64..5, -5i64..5), a in unimodular(),
    ) {
        let c = toric_curve_intersection(delta, w, va, vb, Side::Contracted);
        let e = toric_curve_intersection(delta, w, va, vb, Side::Extracted);
        match (c, e) {
            (Ok(c), Ok(e)) => {
                prop_assert_eq!(c.clone(), -e);
                let t = |v: (i64, i64)| (a[0][0] * v.0 + a[0][1] * v.1, a[1][0] * v.0 + a[1][1] * v.1);
                let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
                let moved = toric_curve_intersection(t(delta), t(w), t(va), t(vb), Side::Contracted).unwrap();
                prop_assert_eq!(moved, c * Rational::from_integer(det.into()));
            }
            (Err(_), Err(_)) => {}
            _ => prop_assert!(false, "sides disagree on validity"),
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn groebner_idempotent_and_members(
        gens in prop::collection::vec(poly_strategy(), 1..4),
        mult in prop::collection::vec(poly_strategy(), 3),
    ) {
        let ring = Ring::new(&["x", "y", "z"]);
        let polys: Vec<Polynomial> = gens.iter().map(|t| build(&ring, t)).filter(|p| !p.is_zero()).collect();
        prop_assume!(!polys.is_empty());
        let order = MonomialOrder::grevlex_unit(3);
        let mut budget = Budget::new(200_000);
        let gb = match groebner_basis(&polys, &order, &mut budget) {
            Err(Error::BudgetExceeded(_)) => return Err(TestCaseError::reject("budget")),
            r => r.unwrap(),
        };
        let again = groebner_basis(&gb, &order, &mut Budget::new(200_000)).unwrap();
        prop_assert_eq!(&again, &gb);
        let ideal = Ideal::new(&ring, polys.clone());
        let mut b = Budget::new(200_000);
        let mut combo = constant(&ring, 0);
        for (p, h) in polys.iter().zip(&mult) {
            prop_assert!(ideal.contains(p, &mut b).unwrap());
            combo = &combo + &(p * &build(&ring, h));
        }
        prop_assert!(ideal.contains(&combo, &mut b).unwrap());
        if gb.iter().all(|g| g.as_constant().is_none()) {
            prop_assert!(!ideal.contains(&constant(&ring, 1), &mut b).unwrap());
        }
    }

    #[test]
    fn classify_invariant_under_row_ops_and_permutation(
        idx in 0usize..64, a in unimodular(), seed in any::<u64>(),
    ) {
        let gs = corpus_gradings();
        let g = &gs[idx % gs.len()];
        let base = endpoint_classify(&ray_scan(g).unwrap());
        let mut order: Vec<usize> = (0..g.len()).collect();
        let mut s = seed;
        for i in (1..order.len()).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            order.swap(i, (s >> 33) as usize % (i + 1));
        }
        let h = g.transform(&a);
        let labels = order.iter().map(|&i| h.labels()[i].clone()).collect();
        let top = order.iter().map(|&i| h.col(i).0).collect();
        let bottom = order.iter().map(|&i| h.col(i).1).collect();
        let p = IntMatrix2xN::new(labels, top, bottom).unwrap();
        prop_assert_eq!(endpoint_classify(&ray_scan(&p).unwrap()), base);
    }

    #[test]
    fn common_zero_matches_dimension(
        forms in prop::collection::vec(prop::collection::vec(-3i64..=3, 4), 1..4),
        root in prop::option::of((-3i64..=3, 1i64..3)),
    ) {
        // cubic binary forms, optionally sharing the linear factor (d x - n y)
        let ring = Ring::new(&["x", "y"]);
        let mut fs = Vec::new();
        for c in &forms {
            let mut f = Polynomial::from_terms(&ring, (0..4u32).map(|i| (vec![i, 3 - i], int(c[i as usize]))));
            if let Some((n, d)) = root {
                let l = Polynomial::from_terms(&ring, [(vec![1, 0], int(d)), (vec![0, 1], int(-n))]);
                f = &f * &l;
            }
            if !f.is_zero() {
                fs.push(f);
            }
        }
        prop_assume!(!fs.is_empty());
        let mut b = Budget::new(200_000);
        let dim = Ideal::new(&ring, fs.clone()).dimension(&mut b).unwrap();
        let cz = common_zero_check(&fs, 0, 1, (1, 1)).unwrap();
        prop_assert_eq!(cz != CommonZero::Empty, dim >= 1);
        if root.is_some() {
            prop_assert!(cz != CommonZero::Empty);
        }
    }
}
