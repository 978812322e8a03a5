mod common;

use std::collections::BTreeSet;

use lpv_symbolic::{Expression, Indeterminate, Role};
use lpvident_core::elimination::{left_nullspace, left_nullspace_ordered, rank, NullspaceBasis};
use lpvident_core::matrix::{dot, ExprMatrix};
use lpvident_core::model::{parse_model, LpvModel};
use lpvident_core::stacking::build_stack;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn th() -> Expression {
    Expression::var(Indeterminate::parameter(1))
}

fn int(c: i64) -> Expression {
    Expression::integer(c)
}

fn column(o: &ExprMatrix, c: usize) -> Vec<Expression> {
    (0..o.rows()).map(|r| o.get(r, c).clone()).collect()
}

fn annihilates(o: &ExprMatrix, ns: &NullspaceBasis) -> bool {
    ns.rows.iter().all(|w| (0..o.cols()).all(|c| dot(w, &column(o, c)).is_zero()))
}

fn variables(m: &ExprMatrix) -> Vec<Indeterminate> {
    m.entries().flat_map(|e| e.variables()).collect::<BTreeSet<_>>().into_iter().collect()
}

/// Numeric rank of the basis rows and of `ω O` at random points; the first
/// must equal the dimension, the second must vanish.
fn numeric_checks(o: &ExprMatrix, ns: &NullspaceBasis, seed: u64) {
    let basis = ExprMatrix::from_rows(ns.rows.clone());
    let mut vars = variables(o);
    vars.extend(variables(&basis));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = 0;
    for _ in 0..4 {
        let point = common::random_point(&vars, &mut rng);
        let (Ok(ov), Ok(bv)) = (o.evaluate(&point), basis.evaluate(&point)) else { continue };
        for w in &bv {
            for c in 0..o.cols() {
                let s: lpv_symbolic::Rational = w.iter().zip(&ov).map(|(a, row)| a * &row[c]).sum();
                assert!(num_traits::Zero::is_zero(&s));
            }
        }
        best = best.max(common::numeric_rank(&bv));
        assert!(common::numeric_rank(&ov) <= ns.rank_of_o);
    }
    assert_eq!(best, ns.dim());
}

fn check_stack(model: &LpvModel, seed: u64) {
    for w in 0..=model.n() as u32 {
        let s = build_stack(model, w).unwrap();
        let ns = left_nullspace_ordered(&s.o, &s.elimination_order());
        assert!(annihilates(&s.o, &ns), "w = {w}\n{model}");
        assert_eq!(ns.dim() + ns.rank_of_o, s.o.rows());
        assert_eq!(rank(&s.o), ns.rank_of_o);
        if !ns.is_empty() {
            numeric_checks(&s.o, &ns, seed + w as u64);
        }
    }
}

#[test]
fn three_by_two() {
    let o = ExprMatrix::from_rows(vec![vec![int(1), int(0)], vec![int(0), int(1)], vec![-&th(), int(1)]]);
    let ns = left_nullspace(&o);
    assert_eq!(ns.dim(), 1);
    assert_eq!(ns.rank_of_o, 2);
    let w = &ns.rows[0];
    // proportional to [-θ, 1, -1]
    let target = [-&th(), int(1), int(-1)];
    let k = &w[1] / &target[1];
    assert!(!k.is_zero());
    for (a, b) in w.iter().zip(&target) {
        assert_eq!(a, &(&k * b));
    }
}

#[test]
fn zero_row_is_free() {
    let o = ExprMatrix::from_rows(vec![vec![int(1), th()], vec![int(0), int(0)], vec![th(), int(3)]]);
    let ns = left_nullspace(&o);
    assert_eq!(ns.dim(), 1);
    assert_eq!(ns.rows[0], vec![int(0), int(1), int(0)]);
}

#[test]
fn ranks() {
    assert_eq!(rank(&ExprMatrix::identity(3)), 3);
    let u = |k| Expression::var(Indeterminate::signal("u", Role::Input, k));
    let m = ExprMatrix::from_rows(vec![vec![u(0), &int(2) * &u(0)], vec![u(1), &int(2) * &u(1)]]);
    assert_eq!(rank(&m), 1);
    assert_eq!(rank(&ExprMatrix::zeros(2, 3)), 0);
}

#[test]
fn nonidentifiable_rank() {
    let m = common::load("nonidentifiable");
    let s = build_stack(&m, 2).unwrap();
    assert_eq!(rank(&s.o), 6);
    // numeric rank at random points agrees
    let vars = variables(&s.o);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let best = (0..5)
        .map(|_| common::numeric_rank(&s.o.evaluate(&common::random_point(&vars, &mut rng)).unwrap()))
        .max()
        .unwrap();
    assert_eq!(best, 6);
    let ns = left_nullspace_ordered(&s.o, &s.elimination_order());
    assert_eq!(ns.dim(), 1);
}

#[test]
fn golden_nullspaces() {
    for (k, (_, m)) in common::golden().into_iter().enumerate() {
        check_stack(&m, k as u64);
    }
}

#[test]
fn corpus_nullspaces() {
    let corpus = common::random_corpus();
    assert!(corpus.len() >= 50);
    for (seed, m) in corpus {
        check_stack(&m, seed);
    }
}

#[test]
fn basis_rows_are_primitive_polynomials() {
    for (_, m) in common::golden() {
        let s = build_stack(&m, m.n() as u32).unwrap();
        for row in left_nullspace_ordered(&s.o, &s.elimination_order()).rows {
            assert!(row.iter().all(Expression::is_polynomial));
            let g = lpv_symbolic::gcd::gcd_all(row.iter().map(|e| e.numerator()).filter(|p| !p.is_zero()));
            assert!(g.is_one(), "{g}");
        }
    }
}

/// Span equality: each basis lies in the span of the other.
fn same_span(a: &NullspaceBasis, b: &NullspaceBasis) -> bool {
    let joint = ExprMatrix::from_rows(a.rows.iter().chain(&b.rows).cloned().collect());
    a.dim() == b.dim() && rank(&joint) == a.dim()
}

fn permuted(o: &ExprMatrix, perm: &[usize]) -> ExprMatrix {
    ExprMatrix::from_rows(perm.iter().map(|&r| o.row(r).to_vec()).collect())
}

#[test]
fn row_permutation_keeps_the_span() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for (_, m) in common::golden() {
        let s = build_stack(&m, m.n() as u32).unwrap();
        let base = left_nullspace(&s.o);
        let mut perm: Vec<usize> = (0..s.o.rows()).collect();
        perm.shuffle(&mut rng);
        let other = left_nullspace(&permuted(&s.o, &perm));
        // undo the permutation on the basis columns
        let mut back = NullspaceBasis { rows: Vec::new(), rank_of_o: other.rank_of_o, free_rows: Vec::new() };
        for row in &other.rows {
            let mut r = vec![Expression::zero(); row.len()];
            for (k, &p) in perm.iter().enumerate() {
                r[p] = row[k].clone();
            }
            back.rows.push(r);
        }
        assert!(same_span(&base, &back));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]
    #[test]
    fn random_models(seed in 2000u64..6000) {
        let m = parse_model(&common::random_model_source(seed)).unwrap();
        check_stack(&m, seed);
    }

    #[test]
    fn permuted_rows(seed in 0u64..1000, shuffle in 0u64..1000) {
        let m = parse_model(&common::random_model_source(seed)).unwrap();
        let s = build_stack(&m, m.n() as u32).unwrap();
        let mut perm: Vec<usize> = (0..s.o.rows()).collect();
        perm.shuffle(&mut ChaCha8Rng::seed_from_u64(shuffle));
        let a = left_nullspace(&s.o);
        let b = left_nullspace(&permuted(&s.o, &perm));
        prop_assert_eq!(a.dim(), b.dim());
        let mut back = Vec::new();
        for row in &b.rows {
            let mut r = vec![Expression::zero(); row.len()];
            for (k, &p) in perm.iter().enumerate() {
                r[p] = row[k].clone();
            }
            back.push(r);
        }
        let joint = ExprMatrix::from_rows(a.rows.iter().chain(&back).cloned().collect());
        prop_assert_eq!(rank(&joint), a.dim());
    }
}
