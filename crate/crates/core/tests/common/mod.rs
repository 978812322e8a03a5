//! Shared fixtures: the golden model files and a seeded random-model corpus.
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::PathBuf;

use lpv_symbolic::{Expression, Indeterminate, Polynomial};
use lpvident_core::analysis::{self, AnalysisConfig};
use lpvident_core::elimination::left_nullspace_ordered;
use lpvident_core::identifiability::EngineRegistry;
use lpvident_core::iop::{extract_summary, form_iop, ExhaustiveSummary, IopSet};
use lpvident_core::model::{parse_model, LpvModel};
use lpvident_core::stacking::build_stack;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const GOLDEN: [&str; 5] = ["nonidentifiable", "local", "ahu", "henon", "burgers"];

pub fn models_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../models")
}

pub fn load(name: &str) -> LpvModel {
    let path = models_dir().join(format!("{name}.lpv"));
    let src = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    parse_model(&src).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub fn golden() -> Vec<(String, LpvModel)> {
    GOLDEN.iter().map(|n| (n.to_string(), load(n))).collect()
}

pub fn th(i: u32) -> Polynomial {
    Polynomial::var(Indeterminate::parameter(i))
}

pub fn ref_th(i: u32) -> Polynomial {
    Polynomial::var(Indeterminate::ref_parameter(i))
}

pub fn ex(p: Polynomial) -> Expression {
    Expression::from(p)
}

pub fn int(c: i64) -> Polynomial {
    Polynomial::integer(c)
}

/// First order whose null-space is nonempty, with its equations.
pub fn first_iop(model: &LpvModel) -> IopSet {
    for w in 0..=model.n() as u32 + 1 {
        let s = build_stack(model, w).unwrap();
        let ns = left_nullspace_ordered(&s.o, &s.elimination_order());
        if !ns.is_empty() {
            return form_iop(&s, &ns).unwrap();
        }
    }
    panic!("no nonempty null-space up to n + 1");
}

pub fn iop_at(model: &LpvModel, w: u32) -> IopSet {
    let s = build_stack(model, w).unwrap();
    let ns = left_nullspace_ordered(&s.o, &s.elimination_order());
    form_iop(&s, &ns).unwrap()
}

pub fn summary_at(model: &LpvModel, w: u32) -> ExhaustiveSummary {
    extract_summary(&iop_at(model, w)).unwrap()
}

pub fn analyze(model: &LpvModel, config: &AnalysisConfig) -> analysis::Report {
    analysis::analyze(model, config, &EngineRegistry::builtin()).unwrap()
}

fn rational_text(rng: &mut ChaCha8Rng) -> String {
    let n: i64 = rng.gen_range(-4..=4);
    let d: i64 = *[1, 1, 1, 2, 3].get(rng.gen_range(0..5)).unwrap();
    match (n, d) {
        (0, _) => "0".into(),
        (n, 1) => format!("({n})"),
        (n, d) => format!("({n}/{d})"),
    }
}

/// Entry affine in the parameters, optionally scheduled by the first input.
fn entry(rng: &mut ChaCha8Rng, q: usize, scheduling: Option<&str>, force: Option<usize>) -> String {
    if force.is_none() && rng.gen_bool(0.35) {
        return "0".into();
    }
    let mut terms = vec![rational_text(rng)];
    for j in 0..q {
        if force == Some(j) || rng.gen_bool(0.3) {
            let mut c = rational_text(rng);
            if c == "0" {
                c = "1".into();
            }
            let mut t = format!("{c}*theta{}", j + 1);
            if let Some(s) = scheduling {
                if rng.gen_bool(0.2) {
                    t = format!("{t}*{s}");
                }
            }
            terms.push(t);
        }
    }
    terms.join(" + ")
}

fn matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize, q: usize, scheduling: Option<&str>, force_first: bool) -> String {
    let body: Vec<String> = (0..rows)
        .map(|i| {
            (0..cols)
                .map(|j| entry(rng, q, scheduling, (force_first && i == 0 && j == 0).then_some(0)))
                .collect::<Vec<_>>()
                .join(", ")
        })
        .collect();
    format!("[{}]", body.join("; "))
}

/// Model DSL text for corpus member `seed`: n ≤ 2, m ≤ 2, p ≤ 2, q ≤ 3,
/// both domains.
pub fn random_model_source(seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(1..=2);
    let m = rng.gen_range(0..=2);
    let p = rng.gen_range(1..=2);
    let q = rng.gen_range(1..=3);
    let names = |prefix: &str, k: usize| (1..=k).map(|i| format!("{prefix}{i}")).collect::<Vec<_>>().join(", ");
    let mut s = format!(
        "time: {}\nstates: {}\noutputs: {}\nparams: {}\n",
        if seed.is_multiple_of(2) { "continuous" } else { "discrete" },
        names("x", n),
        names("y", p),
        names("theta", q)
    );
    if m > 0 {
        s.push_str(&format!("inputs: {}\n", names("u", m)));
    }
    let sched = (m > 0).then_some("u1");
    s.push_str(&format!("A: {}\n", matrix(&mut rng, n, n, q, sched, true)));
    if m > 0 {
        s.push_str(&format!("B: {}\n", matrix(&mut rng, n, m, q, None, false)));
    }
    s.push_str(&format!("C: {}\n", matrix(&mut rng, p, n, q, None, false)));
    if m > 0 && rng.gen_bool(0.3) {
        s.push_str(&format!("D: {}\n", matrix(&mut rng, p, m, q, None, false)));
    }
    s
}

pub const CORPUS_SIZE: u64 = 60;

pub fn random_corpus() -> Vec<(u64, LpvModel)> {
    (0..CORPUS_SIZE)
        .map(|seed| {
            let src = random_model_source(seed);
            let m = parse_model(&src).unwrap_or_else(|e| panic!("corpus {seed}: {e}\n{src}"));
            (seed, m)
        })
        .collect()
}

fn advance(model: &LpvModel, e: &Expression) -> Expression {
    match model.domain {
        lpvident_core::model::Domain::Continuous => e.differentiate(),
        lpvident_core::model::Domain::Discrete => e.shift(),
    }
}

/// Model-implied expansions of `x^(j)` and `y^(j)` (or their shifts) in
/// order-0 states and inputs of any order, for `j = 0..=w`.
pub fn trajectory_expansions(model: &LpvModel, w: u32) -> (Vec<Vec<Expression>>, Vec<Vec<Expression>>) {
    let x: Vec<Expression> = (0..model.n()).map(|i| Expression::var(model.state(i))).collect();
    let u: Vec<Expression> = (0..model.m()).map(|i| Expression::var(model.input(i))).collect();
    let out: Vec<Expression> = (0..model.p())
        .map(|i| {
            let mut acc = Expression::zero();
            for j in 0..model.n() {
                acc = &acc + &(model.c.get(i, j) * &x[j]);
            }
            for j in 0..model.m() {
                acc = &acc + &(model.d.get(i, j) * &u[j]);
            }
            acc
        })
        .collect();
    let ysub: BTreeMap<Indeterminate, Expression> = (0..model.p()).map(|i| (model.output(i), out[i].clone())).collect();
    let f: Vec<Expression> = (0..model.n())
        .map(|i| {
            let mut acc = Expression::zero();
            for j in 0..model.n() {
                acc = &acc + &(&model.a.get(i, j).substitute(&ysub).unwrap() * &x[j]);
            }
            for j in 0..model.m() {
                acc = &acc + &(&model.b.get(i, j).substitute(&ysub).unwrap() * &u[j]);
            }
            acc
        })
        .collect();
    let step: BTreeMap<Indeterminate, Expression> =
        (0..model.n()).map(|i| (model.state(i).advanced(), f[i].clone())).collect();
    let mut xs = vec![x];
    let mut ys = vec![out];
    for _ in 0..w {
        let nx = xs.last().unwrap().iter().map(|e| advance(model, e).substitute(&step).unwrap()).collect();
        let ny = ys.last().unwrap().iter().map(|e| advance(model, e).substitute(&step).unwrap()).collect();
        xs.push(nx);
        ys.push(ny);
    }
    (xs, ys)
}

/// Substitution replacing every `x^(j)` and `y^(j)` up to `w` by its
/// expansion.
pub fn trajectory_substitution(model: &LpvModel, w: u32) -> BTreeMap<Indeterminate, Expression> {
    let (xs, ys) = trajectory_expansions(model, w);
    let mut sub = BTreeMap::new();
    for j in 0..=w as usize {
        for i in 0..model.n() {
            sub.insert(model.state(i).advanced_by(j as u32), xs[j][i].clone());
        }
        for i in 0..model.p() {
            sub.insert(model.output(i).advanced_by(j as u32), ys[j][i].clone());
        }
    }
    sub
}

/// Rank of a rational matrix, by fraction-free row reduction over the
/// integers after clearing denominators row by row.
pub fn numeric_rank(m: &[Vec<lpv_symbolic::Rational>]) -> usize {
    use num_bigint::BigInt;
    use num_traits::Zero;
    let mut a: Vec<Vec<BigInt>> = m
        .iter()
        .map(|row| {
            let l = row.iter().fold(BigInt::from(1), |acc, r| num_integer::lcm(acc, r.denom().clone()));
            row.iter().map(|r| r.numer() * (&l / r.denom())).collect()
        })
        .collect();
    let cols = a.first().map_or(0, Vec::len);
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..a.len()).find(|&r| !a[r][c].is_zero()) else { continue };
        a.swap(rank, p);
        for r in rank + 1..a.len() {
            let (x, y) = (a[rank][c].clone(), a[r][c].clone());
            for k in 0..cols {
                a[r][k] = &a[r][k] * &x - &a[rank][k] * &y;
            }
        }
        rank += 1;
    }
    rank
}

/// Random point with small nonzero rationals for every listed variable.
pub fn random_point(vars: &[Indeterminate], rng: &mut ChaCha8Rng) -> BTreeMap<Indeterminate, lpv_symbolic::Rational> {
    vars.iter()
        .map(|v| {
            let mut n = 0i64;
            while n == 0 {
                n = rng.gen_range(-30..=30);
            }
            (v.clone(), lpv_symbolic::ratio(n, rng.gen_range(1..=7)))
        })
        .collect()
}
