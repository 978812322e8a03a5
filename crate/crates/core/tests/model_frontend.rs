mod common;

use common::{ex, th};
use lpv_symbolic::{Expression, Indeterminate, Role};
use lpvident_core::matrix::ExprMatrix;
use lpvident_core::model::{
    affine_decompose, parse_model, parse_model_with_diagnostics, validate_model, LpvModel, ModelError, Severity, Which,
};
use proptest::prelude::*;

fn u() -> Expression {
    Expression::var(Indeterminate::signal("u", Role::Input, 0))
}

fn reconstruct(model: &LpvModel, which: Which) -> ExprMatrix {
    let (x0, bars) = affine_decompose(model, which);
    let mut acc = x0;
    for (j, bar) in bars.iter().enumerate() {
        let scaled = bar.scale(&ex(th(j as u32 + 1)));
        acc = ExprMatrix::from_fn(acc.rows(), acc.cols(), |r, c| acc.get(r, c) + scaled.get(r, c));
    }
    acc
}

fn assert_affine(model: &LpvModel) {
    for which in Which::ALL {
        let (x0, bars) = affine_decompose(model, which);
        assert!(x0.entries().chain(bars.iter().flat_map(|b| b.entries())).all(|e| !e.contains_variable(Indeterminate::is_parameter)));
        assert_eq!(&reconstruct(model, which), model.matrix(which), "{}", which.as_str());
    }
}

#[test]
fn nonidentifiable_shape() {
    let m = common::load("nonidentifiable");
    assert_eq!((m.n(), m.m(), m.p(), m.q()), (2, 1, 1, 3));
    assert!(validate_model(&m).is_empty());
}

#[test]
fn minimal_model() {
    let m = parse_model("time: continuous\nstates: x1\noutputs: y1\nparams: theta1\nA: [theta1]\nC: [1]\n").unwrap();
    assert_eq!((m.n(), m.m(), m.p(), m.q()), (1, 0, 1, 1));
    assert_eq!(m.b.shape(), (1, 0));
    assert_eq!(m.d.shape(), (1, 0));
}

#[test]
fn products_of_parameters_are_rejected() {
    let err = parse_model("time: continuous\nstates: x1\noutputs: y1\nparams: theta1, theta2\nA: [theta1*theta2]\nC: [1]\n")
        .unwrap_err();
    assert!(matches!(err, ModelError::NotAffineInParameters(_)), "{err:?}");
    assert_eq!(err.diagnostic().line, 5);
}

#[test]
fn nonidentifiable_decomposition() {
    let m = common::load("nonidentifiable");
    let (a0, bars) = affine_decompose(&m, Which::A);
    let z = Expression::zero;
    let one = Expression::one;
    assert_eq!(a0, ExprMatrix::from_rows(vec![vec![z(), z()], vec![z(), Expression::integer(-1)]]));
    assert_eq!(bars[0], ExprMatrix::from_rows(vec![vec![one(), z()], vec![z(), z()]]));
    assert_eq!(bars[1], ExprMatrix::from_rows(vec![vec![z(), u()], vec![z(), z()]]));
    assert_eq!(bars[2], ExprMatrix::from_rows(vec![vec![z(), z()], vec![one(), z()]]));
}

#[test]
fn ahu_input_matrix_decomposition() {
    let m = common::load("ahu");
    let (b0, bars) = affine_decompose(&m, Which::B);
    let z = Expression::zero;
    assert!(b0.is_zero());
    assert_eq!(bars[0], ExprMatrix::from_rows(vec![vec![Expression::one(), z()], vec![z(), z()]]));
    assert!(bars[1].is_zero());
    assert_eq!(bars[2], ExprMatrix::from_rows(vec![vec![z(), z()], vec![z(), Expression::integer(5)]]));
    assert!(bars[3].is_zero());
}

#[test]
fn parameter_free_matrix() {
    let m = common::load("nonidentifiable");
    let (c0, bars) = affine_decompose(&m, Which::C);
    assert_eq!(&c0, m.matrix(Which::C));
    assert!(bars.iter().all(ExprMatrix::is_zero));
}

#[test]
fn decomposition_reconstructs_every_model() {
    for (_, m) in common::golden() {
        assert_affine(&m);
    }
    for (_, m) in common::random_corpus() {
        assert_affine(&m);
    }
}

#[test]
fn proportional_output_rows_warn() {
    let src = "time: continuous\nstates: x1, x2\ninputs: u\noutputs: y1, y2\nparams: theta1\nA: [theta1, 0; 0, -1]\nC: [u, 0; 2*u, 0]\n";
    let (_, diags) = parse_model_with_diagnostics(src).unwrap();
    assert!(diags.iter().any(|d| d.severity == Severity::Warning && d.message.contains("rank")), "{diags:?}");
}

#[test]
fn input_matrix_without_inputs() {
    // undeclared inputs are inferred from `B`, so m = 0 needs an empty list
    let src = "time: continuous\nstates: x1\ninputs:\noutputs: y1\nparams: theta1\nA: [theta1]\nB: [1]\nC: [1]\n";
    let err = parse_model(src).unwrap_err();
    assert!(matches!(err, ModelError::DimensionMismatch(_)), "{err:?}");
    assert_eq!((err.diagnostic().line, err.diagnostic().column), (7, 4));
}

#[test]
fn states_may_not_appear_in_entries() {
    let src = "time: continuous\nstates: x1\noutputs: y1\nparams: theta1\nA: [theta1*x1]\nC: [1]\n";
    assert!(matches!(parse_model(src).unwrap_err(), ModelError::StateInMatrixEntry(_)));
}

#[test]
fn diagnostics_point_into_the_source() {
    let bad = [
        "time: continuous\nstates: x1\noutputs: y1\nparams: theta1\nA: [theta1 +]\nC: [1]\n",
        "time: continuous\nstates: x1\noutputs: y1\nparams: theta1\nA: [theta9]\nC: [1]\n",
        "time: sideways\nstates: x1\noutputs: y1\nparams: theta1\nA: [theta1]\nC: [1]\n",
        "time: continuous\nstates: x1\noutputs: y1\nparams: theta1\nA: [theta1, 1]\nC: [1]\n",
        "time: continuous\nstates: x1\noutputs: y1\nparams: theta1\nA: [theta1 $ 2]\nC: [1]\n",
        "time: continuous\nstates: x1\noutputs: y1\nparams: theta1\nA: [theta1^theta1]\nC: [1]\n",
        "time: discrete\nstates: x1\noutputs: y1\nparams: theta1\nA: [theta1]\nC: [1/0]\n",
    ];
    for src in bad {
        let err = parse_model(src).unwrap_err();
        let d = err.diagnostic();
        let lines: Vec<&str> = src.lines().collect();
        assert!(d.line >= 1 && d.line <= lines.len(), "{src}: {d:?}");
        assert!(d.column >= 1 && d.column <= lines[d.line - 1].chars().count() + 1, "{src}: {d:?}");
    }
}

#[test]
fn golden_models_round_trip() {
    for (name, m) in common::golden() {
        let again = parse_model(&m.to_string()).unwrap_or_else(|e| panic!("{name}: {e}"));
        assert_eq!(again, m, "{name}");
    }
}

proptest! {
    #[test]
    fn printing_round_trips(seed in 0u64..400) {
        let m = parse_model(&common::random_model_source(seed)).unwrap();
        let again = parse_model(&m.to_string()).unwrap();
        prop_assert_eq!(again, m);
    }
}
