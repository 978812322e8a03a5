mod common;

use std::collections::BTreeSet;

use common::{int, th};
use lpv_symbolic::{Expression, Indeterminate, Polynomial, Role};
use lpvident_core::elimination::left_nullspace_ordered;
use lpvident_core::iop::{extract_summary, form_iop, primitive_positive, ExhaustiveSummary, IopSet};
use lpvident_core::model::{parse_model, LpvModel};
use lpvident_core::stacking::build_stack;
use lpvident_core::verifier::backsubstitute_check;
use lpvident_core::CoreError;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn sig(name: &str, role: Role, k: u32) -> Polynomial {
    Polynomial::var(Indeterminate::signal(name, role, k))
}
fn y(k: u32) -> Polynomial {
    sig("y", Role::Output, k)
}
fn u(k: u32) -> Polynomial {
    sig("u", Role::Input, k)
}
fn prod(fs: &[&Polynomial]) -> Polynomial {
    fs.iter().fold(Polynomial::one(), |acc, f| &acc * *f)
}

/// `a = c·b` for a nonzero rational constant `c`.
fn constant_multiple(a: &Polynomial, b: &Polynomial) -> bool {
    let r = &Expression::from(a.clone()) / &Expression::from(b.clone());
    r.is_constant() && !r.is_zero()
}

/// Π compared up to per-element primitive normalization.
fn normalized(values: impl IntoIterator<Item = Expression>) -> BTreeSet<(Polynomial, Polynomial)> {
    values
        .into_iter()
        .map(|e| (primitive_positive(e.numerator()), e.denominator().monic()))
        .collect()
}

fn poly_set(ps: &[Polynomial]) -> BTreeSet<(Polynomial, Polynomial)> {
    normalized(ps.iter().cloned().map(Expression::from))
}

fn first_order() -> LpvModel {
    parse_model("time: continuous\nstates: x1\noutputs: y\nparams: theta1\nA: [theta1]\nC: [1]\n").unwrap()
}

fn assert_invariants(iop: &IopSet, summary: &ExhaustiveSummary) {
    for eq in &iop.equations {
        assert!(!eq.poly.variables().iter().any(|v| v.has_role(Role::State)));
        assert_eq!(eq.poly.content(), lpv_symbolic::rat(1));
    }
    let mut seen = BTreeSet::new();
    for e in summary.values() {
        assert!(e.contains_variable(Indeterminate::is_parameter));
        assert!(!e.contains_variable(Indeterminate::is_signal));
        assert!(seen.insert(e.clone()), "duplicate element {e}");
        assert_eq!(e.numerator().content(), lpv_symbolic::rat(1));
    }
}

#[test]
fn first_order_equation() {
    let iop = common::iop_at(&first_order(), 1);
    assert_eq!(iop.len(), 1);
    assert!(constant_multiple(&iop.equations[0].poly, &(&y(1) - &(&th(1) * &y(0)))));
    let s = extract_summary(&iop).unwrap();
    assert_eq!(s.values(), vec![Expression::from(th(1))]);
}

#[test]
fn nonidentifiable_equation() {
    let m = common::load("nonidentifiable");
    let iop = common::iop_at(&m, 2);
    assert_eq!(iop.len(), 1);
    let (t1, t2, t3) = (th(1), th(2), th(3));
    let printed = [
        prod(&[&t1, &u(0), &u(0), &y(0)]),
        -&prod(&[&int(3), &u(1), &u(1), &y(0)]),
        -&prod(&[&u(0), &u(0), &y(2)]),
        -&prod(&[&u(0), &u(0), &y(1)]),
        prod(&[&t1, &u(0), &u(0), &y(1)]),
        prod(&[&u(0), &u(1), &y(0)]),
        prod(&[&int(3), &u(0), &u(1), &y(1)]),
        prod(&[&u(0), &u(2), &y(0)]),
        -&prod(&[&int(2), &t1, &u(0), &u(1), &y(0)]),
        prod(&[&t2, &t3, &u(0), &u(0), &u(0), &y(0)]),
    ]
    .iter()
    .fold(Polynomial::zero(), |acc, t| &acc + t);
    assert!(constant_multiple(&iop.equations[0].poly, &printed), "{}", m.render_poly(&iop.equations[0].poly));
    let s = extract_summary(&iop).unwrap();
    let one = Polynomial::one();
    let want = [&one - &(&int(2) * &t1), &t1 - &one, t1.clone(), &t2 * &t3];
    assert_eq!(normalized(s.values()), poly_set(&want));
    assert_invariants(&iop, &s);
}

#[test]
fn local_model_summary() {
    let m = common::load("local");
    let s = common::summary_at(&m, 2);
    let (t1, t2, t3) = (th(1), th(2), th(3));
    let want = [&t3 - &(&int(2) * &t1), &t1 - &t3, &t1 * &t3, &t2 * &t2];
    assert_eq!(normalized(s.values()), poly_set(&want));
}

/// y_{k+2} - θ1 y_{k+1}^2 - θ2θ3 y_k - θ2θ4 u_k - u_{k+1}: the map iterated
/// twice. The printed relation carries `y_k^2` in the θ2θ3 term.
fn henon_relation(yk_power: u32) -> Polynomial {
    let (t1, t2, t3, t4) = (th(1), th(2), th(3), th(4));
    let yk = (0..yk_power).fold(Polynomial::one(), |acc, _| &acc * &y(0));
    let terms = [
        -&prod(&[&t2, &t3, &yk]),
        -&u(1),
        y(2),
        -&(&u(0) * &(&(&t2 * &t4) + &(&t1 * &y(1)))),
        prod(&[&t1, &y(1), &(&u(0) - &y(1))]),
    ];
    terms.iter().fold(Polynomial::zero(), |acc, t| &acc + t)
}

#[test]
fn henon_equation() {
    let m = common::load("henon");
    let iop = common::iop_at(&m, 2);
    assert_eq!(iop.len(), 1);
    assert!(constant_multiple(&iop.equations[0].poly, &henon_relation(1)));
    // the literal printed relation does not vanish on the model
    let literal = IopSet::from_polynomials(vec![henon_relation(2)], 2).unwrap();
    assert!(!backsubstitute_check(&m, &literal).unwrap().passed);
    let s = extract_summary(&iop).unwrap();
    let want = [th(1), &th(2) * &th(4), &th(2) * &th(3)];
    assert_eq!(normalized(s.values()), poly_set(&want));
}

#[test]
fn golden_invariants() {
    for (name, m) in common::golden() {
        let iop = common::first_iop(&m);
        let s = extract_summary(&iop).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert_invariants(&iop, &s);
    }
}

#[test]
fn empty_nullspace_is_an_error() {
    let m = common::load("nonidentifiable");
    let s = build_stack(&m, 1).unwrap();
    let ns = left_nullspace_ordered(&s.o, &s.elimination_order());
    assert!(ns.is_empty());
    assert_eq!(form_iop(&s, &ns).unwrap_err(), CoreError::EmptyNullspace);
}

#[test]
fn parameter_free_equations_have_no_summary() {
    let iop = IopSet::from_polynomials(vec![&y(1) - &u(0)], 1).unwrap();
    assert_eq!(extract_summary(&iop).unwrap_err(), CoreError::NoParameterDependence);
}

#[test]
fn surviving_states_are_reported() {
    let x = sig("x1", Role::State, 0);
    let err = IopSet::from_polynomials(vec![&y(0) - &(&th(1) * &x)], 0).unwrap_err();
    assert!(matches!(err, CoreError::StateNotEliminated(_)));
}

#[test]
fn vacuous_rows_are_dropped() {
    let iop = IopSet::from_polynomials(vec![Polynomial::zero(), &th(1) - &int(2), &y(1) - &(&th(1) * &y(0))], 1).unwrap();
    assert_eq!(iop.len(), 1);
}

/// Random nonzero rational function in the parameters and signals of `vars`.
fn random_scale(vars: &[Indeterminate], rng: &mut ChaCha8Rng) -> Expression {
    let mut part = || {
        let mut p = Polynomial::integer(rng.gen_range(1..=5));
        for v in vars {
            if rng.gen_bool(0.4) {
                p = &p + &(&Polynomial::integer(rng.gen_range(-3..=3)) * &Polynomial::var(v.clone()));
            }
        }
        p
    };
    let (n, d) = (part(), part());
    if n.is_zero() || d.is_zero() {
        return Expression::one();
    }
    Expression::new(n, d).unwrap()
}

fn rescaled_summary(model: &LpvModel, w: u32, seed: u64) -> Option<(Vec<Expression>, Vec<Expression>)> {
    let s = build_stack(model, w).unwrap();
    let ns = left_nullspace_ordered(&s.o, &s.elimination_order());
    if ns.is_empty() {
        return None;
    }
    let base = extract_summary(&form_iop(&s, &ns).unwrap()).ok()?;
    let mut vars: Vec<Indeterminate> = model.parameters();
    vars.extend(s.y.iter().cloned());
    vars.extend(s.u.iter().cloned());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut scaled = ns.clone();
    for row in &mut scaled.rows {
        let k = random_scale(&vars, &mut rng);
        for e in row.iter_mut() {
            *e = &*e * &k;
        }
    }
    let again = extract_summary(&form_iop(&s, &scaled).unwrap()).unwrap();
    Some((base.values(), again.values()))
}

#[test]
fn rescaled_rows_give_the_same_summary() {
    for (k, (_, m)) in common::golden().into_iter().enumerate() {
        let (a, b) = rescaled_summary(&m, 2, k as u64).unwrap();
        assert_eq!(a, b);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]
    #[test]
    fn rescaling_is_harmless(model_seed in 0u64..200, scale_seed in 0u64..1000) {
        let m = parse_model(&common::random_model_source(model_seed)).unwrap();
        for w in 1..=m.n() as u32 {
            if let Some((a, b)) = rescaled_summary(&m, w, scale_seed) {
                prop_assert_eq!(a, b);
            }
        }
    }
}
