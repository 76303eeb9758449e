//! Property tests against independent oracles: nalgebra for eigenvalues and
//! matrix products, direct integration for moments, hand-built polynomials
//! with known roots.

use monotone_gap::cli::parse::parse_function;
use monotone_gap::dobsch::hankel_at_zero;
use monotone_gap::exactpoly::rational::{int, rat};
use monotone_gap::exactpoly::{isolate_roots_in, poly_nonneg_on, refine_root, Poly, Rational};
use monotone_gap::loewner::{divided_difference_matrix, loewner_matrix, newton_basis};
use monotone_gap::numfalsify::{matrix_apply, Orthogonal, SymMatrixF};
use monotone_gap::psdcert::{det_exact, is_psd, Definiteness, SymMatrix};
use monotone_gap::transport::{bendat_sherman, Mobius};
use monotone_gap::{FunctionExpr, Interval};
use nalgebra::{DMatrix, SymmetricEigen};
use proptest::prelude::*;

fn small_rational() -> impl Strategy<Value = Rational> {
    (-12i64..=12, 1i64..=6).prop_map(|(n, d)| rat(n, d))
}

fn poly_strategy(max_deg: usize) -> impl Strategy<Value = Poly> {
    prop::collection::vec(small_rational(), 1..=max_deg + 1).prop_map(Poly::new)
}

fn sym_int_matrix(n: usize) -> impl Strategy<Value = SymMatrix<Rational>> {
    prop::collection::vec(-4i64..=4, n * n)
        .prop_map(move |v| SymMatrix::from_fn(n, |i, j| int(v[i * n + j])))
}

/// `B^T B` with `B` of size `rank x n`: PSD, singular when `rank < n`.
fn gram(n: usize, rank: usize) -> impl Strategy<Value = SymMatrix<Rational>> {
    prop::collection::vec(-3i64..=3, rank * n).prop_map(move |b| {
        SymMatrix::from_fn(n, |i, j| {
            int((0..rank).map(|k| b[k * n + i] * b[k * n + j]).sum())
        })
    })
}

fn to_nalgebra(m: &SymMatrix<Rational>) -> DMatrix<f64> {
    let f = m.to_f64();
    DMatrix::from_fn(m.order(), m.order(), |i, j| f.get(i, j))
}

fn min_eig(m: &DMatrix<f64>) -> f64 {
    SymmetricEigen::new(m.clone())
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min)
}

fn expr_strategy() -> impl Strategy<Value = FunctionExpr> {
    let nonzero = (1i64..=9, 1i64..=5).prop_map(|(n, d)| rat(n, d));
    let leaf = prop_oneof![
        (1usize..=5).prop_map(|n| FunctionExpr::gn(n).unwrap()),
        (0usize..=6).prop_map(FunctionExpr::pow),
        prop::collection::vec(small_rational(), 1..=4)
            .prop_map(|cs| FunctionExpr::Poly(Poly::new(cs))),
        (nonzero.clone(), small_rational()).prop_map(|(s, o)| FunctionExpr::affine(s, o)),
        (
            small_rational(),
            small_rational(),
            small_rational(),
            small_rational()
        )
            .prop_filter_map("singular", |(a, b, c, d)| FunctionExpr::mobius(a, b, c, d)
                .ok()),
    ];
    leaf.prop_recursive(4, 16, 2, move |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(f, g)| FunctionExpr::compose(f, g)),
            (inner.clone(), inner.clone()).prop_map(|(f, g)| FunctionExpr::mul(f, g)),
            (inner, small_rational()).prop_map(|(f, t0)| FunctionExpr::bendat(f, t0)),
        ]
    })
}

fn depth(e: &FunctionExpr) -> usize {
    match e {
        FunctionExpr::Compose(a, b) | FunctionExpr::Mul(a, b) => 1 + depth(a).max(depth(b)),
        FunctionExpr::BendatSherman(a, _) => 1 + depth(a),
        _ => 0,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn derivatives_compose(p in poly_strategy(8), j in 0usize..4, k in 0usize..4) {
        prop_assert_eq!(p.derivative(j).derivative(k), p.derivative(j + k));
    }

    #[test]
    fn integral_inverts_derivative(p in poly_strategy(8)) {
        prop_assert_eq!(p.integral().derivative(1), p);
    }

    #[test]
    fn root_isolation_matches_known_roots(roots in prop::collection::btree_set(-20i64..=20, 1..6), scale in 1i64..=4) {
        // distinct rational roots k / scale, some squared to create multiplicity
        let rs: Vec<Rational> = roots.iter().map(|&k| rat(k, scale)).collect();
        let mut p = Poly::one();
        for (i, r) in rs.iter().enumerate() {
            let lin = Poly::new(vec![-r.clone(), int(1)]);
            p = &p * &lin;
            if i % 2 == 1 {
                p = &p * &lin;
            }
        }
        let lo = rat(-1, 7);
        let found = isolate_roots_in(&p, &lo, None).unwrap();
        let expected: Vec<&Rational> = rs.iter().filter(|r| **r > lo).collect();
        prop_assert_eq!(found.len(), expected.len());
        for (b, r) in found.iter().zip(expected) {
            prop_assert!(b.lo < *r && *r < b.hi);
            let x = refine_root(&p, b, 1e-9).unwrap();
            prop_assert!((x - monotone_gap::exactpoly::rational::to_f64(r)).abs() <= 1e-9);
        }
    }

    #[test]
    fn nonneg_agrees_with_sampling(p in poly_strategy(5)) {
        let i = Interval::closed_open(int(-2), int(3)).unwrap();
        let check = poly_nonneg_on(&p, &i).unwrap();
        let dense_negative = (0..=5000).map(|k| rat(-2, 1) + rat(k, 1000)).filter(|t| *t < int(3)).any(|t| p.sign_at(&t) < 0);
        if dense_negative {
            prop_assert!(!check.nonneg);
        }
        if let Some(w) = &check.witness {
            prop_assert!(i.contains(w) && p.sign_at(w) < 0);
        }
    }

    #[test]
    fn psd_verdict_matches_nalgebra(m in prop_oneof![sym_int_matrix(3), sym_int_matrix(4), gram(4, 2), gram(4, 4)]) {
        let v = is_psd(&m).unwrap();
        let lam = min_eig(&to_nalgebra(&m));
        let scale = 1.0 + to_nalgebra(&m).abs().max();
        if lam < -1e-9 * scale {
            prop_assert_eq!(v.kind, Definiteness::NotPsd);
        } else if lam > 1e-9 * scale {
            prop_assert_eq!(v.kind, Definiteness::PositiveDefinite);
        } else {
            prop_assert!(v.kind != Definiteness::PositiveDefinite);
        }
        if let Some(w) = &v.witness {
            prop_assert!(w.verify(&m));
        }
    }

    #[test]
    fn gram_matrices_are_psd(m in gram(4, 2)) {
        prop_assert!(is_psd(&m).unwrap().kind.is_psd());
        prop_assert_eq!(det_exact(&m), int(0));
    }

    #[test]
    fn principal_submatrices_of_psd_are_psd(m in gram(5, 3), mask in 1u32..32) {
        let idx: Vec<usize> = (0..5).filter(|k| mask >> k & 1 == 1).collect();
        prop_assert!(is_psd(&m.principal(&idx)).unwrap().kind.is_psd());
    }

    #[test]
    fn determinant_matches_nalgebra(m in sym_int_matrix(4)) {
        let d = monotone_gap::exactpoly::rational::to_f64(&det_exact(&m));
        let o = to_nalgebra(&m).determinant();
        prop_assert!((d - o).abs() <= 1e-8 * (1.0 + o.abs()));
    }

    #[test]
    fn hankel_form_is_a_moment_integral(v in prop::collection::vec(small_rational(), 1..6)) {
        let h = hankel_at_zero(v.len()).unwrap();
        let p = Poly::new(v.clone());
        let sq = &p * &p;
        let prim = sq.integral();
        let integral = (prim.eval(&int(1)) - prim.eval(&int(-1))) / int(2);
        prop_assert_eq!(h.quadratic_form(&v), integral);
    }

    #[test]
    fn parse_inverts_print(e in expr_strategy()) {
        prop_assume!(depth(&e) <= 4);
        let printed = e.to_string();
        let back = parse_function(&printed).unwrap();
        prop_assert_eq!(back, e);
    }

    #[test]
    fn bendat_sherman_identity(p in poly_strategy(6), t0 in small_rational(), t in small_rational()) {
        prop_assume!(t != t0);
        let f = FunctionExpr::Poly(p);
        let big = bendat_sherman(&f, &t0).unwrap();
        let lhs = big.eval(&t).unwrap() * (&t - &t0) + f.eval(&t0).unwrap();
        prop_assert_eq!(lhs, f.eval(&t).unwrap());
    }

    #[test]
    fn loewner_is_congruent_to_divided_differences(nodes in prop::collection::btree_set(-30i64..=30, 1..5)) {
        let nodes: Vec<Rational> = nodes.into_iter().map(|k| rat(k, 7)).collect();
        let f = FunctionExpr::gn(3).unwrap();
        let l = loewner_matrix(&f, &nodes).unwrap();
        let k = divided_difference_matrix(&f, &nodes).unwrap();
        let w = newton_basis(&nodes);
        let n = nodes.len();
        let congruent = SymMatrix::from_fn(n, |i, j| {
            let mut s = Rational::from_integer(0.into());
            for a in 0..n {
                for b in 0..n {
                    s += &w[a][i] * k.get(a, b) * &w[b][j];
                }
            }
            s
        });
        prop_assert_eq!(l.entries, congruent);
    }

    #[test]
    fn mobius_composition_law(a in small_rational(), b in small_rational(), c in small_rational(), d in small_rational(),
                              xs in prop::collection::btree_set(-25i64..=25, 1..5)) {
        let Ok(m) = Mobius::new(a, b, c, d) else { return Ok(()) };
        let h = FunctionExpr::Mobius(m.clone());
        let nodes: Vec<Rational> = xs.into_iter().map(|k| rat(k, 3)).filter(|x| m.eval(x).is_ok()).collect();
        prop_assume!(!nodes.is_empty());
        let g = FunctionExpr::gn(2).unwrap();
        let image: Vec<Rational> = nodes.iter().map(|x| m.eval(x).unwrap()).collect();
        let lhs = loewner_matrix(&FunctionExpr::compose(g.clone(), h.clone()), &nodes).unwrap().entries;
        let outer = loewner_matrix(&g, &image).unwrap().entries;
        let inner = loewner_matrix(&h, &nodes).unwrap().entries;
        prop_assert_eq!(lhs, SymMatrix::from_fn(nodes.len(), |i, j| outer.get(i, j) * inner.get(i, j)));
    }

    #[test]
    fn matrix_polynomial_matches_horner(v in prop::collection::vec(-2.0f64..2.0, 9), cs in prop::collection::vec(-3i64..=3, 1..5)) {
        let x = DMatrix::from_fn(3, 3, |i, j| v[i.min(j) * 3 + i.max(j)]);
        let xs = SymMatrixF::from_rows(&(0..3).map(|i| (0..3).map(|j| x[(i, j)]).collect()).collect::<Vec<_>>()).unwrap();
        let p = Poly::new(cs.iter().map(|&c| int(c)).collect());
        let got = matrix_apply(&FunctionExpr::Poly(p), &xs).unwrap();
        let mut horner = DMatrix::<f64>::zeros(3, 3);
        for &c in cs.iter().rev() {
            horner = &horner * &x + DMatrix::<f64>::identity(3, 3) * c as f64;
        }
        for i in 0..3 {
            for j in 0..3 {
                prop_assert!((got.get(i, j) - horner[(i, j)]).abs() <= 1e-9 * (1.0 + horner.abs().max()));
            }
        }
    }

    #[test]
    fn functional_calculus_commutes_with_conjugation(lams in prop::collection::vec(0.1f64..5.0, 3), angle in 0.0f64..6.28) {
        let (s, c) = angle.sin_cos();
        let q = Orthogonal::from_columns(&[vec![c, s, 0.0], vec![-s, c, 0.0], vec![0.0, 0.0, 1.0]]);
        let x = SymMatrixF::from_spectral(&q, &lams);
        let f = FunctionExpr::mobius(int(1), int(0), int(1), int(1)).unwrap();
        let fx = matrix_apply(&f, &x).unwrap();
        let expected = SymMatrixF::from_spectral(&q, &lams.iter().map(|l| l / (1.0 + l)).collect::<Vec<_>>());
        for i in 0..3 {
            for j in 0..3 {
                prop_assert!((fx.get(i, j) - expected.get(i, j)).abs() <= 1e-12);
            }
        }
    }
}
