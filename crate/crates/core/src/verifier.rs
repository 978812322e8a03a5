//! Independent checks of pipeline outputs.

use std::collections::BTreeMap;

use lpv_symbolic::{Expression, Indeterminate, MonomialOrder, Polynomial, Rational, Role};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{CoreError, Result};
use crate::identifiability::{draw_primes, evaluate_at, groebner, parameter_point, GroebnerBudget, Ring, ThetaPoint};
use crate::iop::{ExhaustiveSummary, IopSet};
use crate::model::{Domain, LpvModel};

/// Outcome of substituting model-implied output derivatives (or shifts)
/// into every I-O-P equation.
#[derive(Clone, Debug, PartialEq)]
pub struct BacksubstitutionResult {
    pub passed: bool,
    /// Residual of each equation, in states, inputs and parameters.
    pub residuals: Vec<Expression>,
}

fn advance(domain: Domain, e: &Expression) -> Expression {
    match domain {
        Domain::Continuous => e.differentiate(),
        Domain::Discrete => e.shift(),
    }
}

/// Output expressions `Y_j` (components of `y^(j)` or `y_{k+j}`) in states,
/// inputs and scheduling signals, for `j = 0..=order`.
pub fn output_expansions(model: &LpvModel, order: u32) -> Result<Vec<Vec<Expression>>> {
    let x: Vec<Expression> = (0..model.n()).map(|i| Expression::var(model.state(i))).collect();
    let u: Vec<Expression> = (0..model.m()).map(|i| Expression::var(model.input(i))).collect();
    let y0: Vec<Expression> = model
        .c
        .mul_vec(&x)
        .iter()
        .zip(model.d.mul_vec(&u))
        .map(|(a, b)| a + &b)
        .collect();
    let mut out_sub = BTreeMap::new();
    for (i, e) in y0.iter().enumerate() {
        out_sub.insert(model.output(i), e.clone());
    }
    let a = model.a.try_map(|e| e.substitute(&out_sub))?;
    let b = model.b.try_map(|e| e.substitute(&out_sub))?;
    let f: Vec<Expression> = a.mul_vec(&x).iter().zip(b.mul_vec(&u)).map(|(p, q)| p + &q).collect();
    let next: BTreeMap<Indeterminate, Expression> =
        (0..model.n()).map(|i| (model.state(i).advanced(), f[i].clone())).collect();
    let mut levels = vec![y0];
    for _ in 0..order {
        let last = levels.last().expect("nonempty");
        let lvl = last
            .iter()
            .map(|e| advance(model.domain, e).substitute(&next))
            .collect::<lpv_symbolic::Result<Vec<_>>>()?;
        levels.push(lvl);
    }
    Ok(levels)
}

/// True iff every equation vanishes identically once outputs are replaced by
/// their model-implied expansions.
pub fn backsubstitute_check(model: &LpvModel, iop: &IopSet) -> Result<BacksubstitutionResult> {
    let max_order = iop
        .polynomials()
        .iter()
        .flat_map(|p| p.variables())
        .filter(|v| v.has_role(Role::Output))
        .map(|v| v.order())
        .max()
        .unwrap_or(0);
    let levels = output_expansions(model, max_order)?;
    let mut sub = BTreeMap::new();
    for (j, lvl) in levels.iter().enumerate() {
        for (i, e) in lvl.iter().enumerate() {
            sub.insert(model.output(i).advanced_by(j as u32), e.clone());
        }
    }
    let residuals = iop
        .polynomials()
        .iter()
        .map(|p| Expression::from(p.clone()).substitute(&sub))
        .collect::<lpv_symbolic::Result<Vec<_>>>()?;
    Ok(BacksubstitutionResult { passed: residuals.iter().all(Expression::is_zero), residuals })
}

/// Exact arithmetic used by trajectory iteration.
trait Arith {
    type T: Clone;
    fn lift(&self, r: &Rational) -> Self::T;
    fn lower(&self, v: &Self::T) -> Rational;
    fn add(&self, a: &Self::T, b: &Self::T) -> Self::T;
    fn mul(&self, a: &Self::T, b: &Self::T) -> Self::T;
    fn div(&self, a: &Self::T, b: &Self::T) -> Option<Self::T>;
    fn is_zero(&self, v: &Self::T) -> bool;
}

struct Plain;

impl Arith for Plain {
    type T = Rational;
    fn lift(&self, r: &Rational) -> Rational {
        r.clone()
    }
    fn lower(&self, v: &Rational) -> Rational {
        v.clone()
    }
    fn add(&self, a: &Rational, b: &Rational) -> Rational {
        a + b
    }
    fn mul(&self, a: &Rational, b: &Rational) -> Rational {
        a * b
    }
    fn div(&self, a: &Rational, b: &Rational) -> Option<Rational> {
        (!b.is_zero()).then(|| a / b)
    }
    fn is_zero(&self, v: &Rational) -> bool {
        v.is_zero()
    }
}

/// Values `num / L^exp` for a fixed base `L`. Closed under the ring
/// operations and needs no big gcds, which dominate reduced rationals when
/// trajectory bit sizes double each step.
struct Scaled {
    base: BigInt,
}

#[derive(Clone, Debug)]
struct ScaledValue {
    num: BigInt,
    exp: u32,
}

impl Scaled {
    fn pow(&self, e: u32) -> BigInt {
        num_traits::pow(self.base.clone(), e as usize)
    }

    fn normalize(&self, mut v: ScaledValue) -> ScaledValue {
        if v.num.is_zero() {
            v.exp = 0;
        }
        while v.exp > 0 {
            let (q, r) = v.num.div_rem(&self.base);
            if !r.is_zero() {
                break;
            }
            v.num = q;
            v.exp -= 1;
        }
        v
    }

    fn align(&self, a: &ScaledValue, b: &ScaledValue) -> (BigInt, BigInt, u32) {
        match a.exp.cmp(&b.exp) {
            std::cmp::Ordering::Equal => (a.num.clone(), b.num.clone(), a.exp),
            std::cmp::Ordering::Less => (&a.num * self.pow(b.exp - a.exp), b.num.clone(), b.exp),
            std::cmp::Ordering::Greater => (a.num.clone(), &b.num * self.pow(a.exp - b.exp), a.exp),
        }
    }
}

impl Arith for Scaled {
    type T = ScaledValue;
    fn lift(&self, r: &Rational) -> ScaledValue {
        let mut exp = 0;
        let mut p = BigInt::one();
        while !(&p % r.denom()).is_zero() {
            p *= &self.base;
            exp += 1;
        }
        self.normalize(ScaledValue { num: r.numer() * (p / r.denom()), exp })
    }
    fn lower(&self, v: &ScaledValue) -> Rational {
        let d = self.pow(v.exp);
        let g = d.gcd(&(&v.num % &d));
        Rational::new_raw(&v.num / &g, d / g)
    }
    fn add(&self, a: &ScaledValue, b: &ScaledValue) -> ScaledValue {
        let (x, y, exp) = self.align(a, b);
        self.normalize(ScaledValue { num: x + y, exp })
    }
    fn mul(&self, a: &ScaledValue, b: &ScaledValue) -> ScaledValue {
        self.normalize(ScaledValue { num: &a.num * &b.num, exp: a.exp + b.exp })
    }
    fn div(&self, _: &ScaledValue, _: &ScaledValue) -> Option<ScaledValue> {
        None
    }
    fn is_zero(&self, v: &ScaledValue) -> bool {
        v.num.is_zero()
    }
}

fn eval_poly<A: Arith>(a: &A, p: &Polynomial, at: &BTreeMap<Indeterminate, A::T>) -> Result<A::T> {
    let mut acc = a.lift(&Rational::zero());
    for (m, c) in p.terms() {
        let mut t = a.lift(c);
        for (v, e) in m.factors() {
            let val = at.get(v).ok_or_else(|| CoreError::Precondition(format!("no value for `{v}`")))?;
            for _ in 0..*e {
                t = a.mul(&t, val);
            }
        }
        acc = a.add(&acc, &t);
    }
    Ok(acc)
}

fn eval_expr<A: Arith>(a: &A, e: &Expression, at: &BTreeMap<Indeterminate, A::T>) -> Result<A::T> {
    let n = eval_poly(a, e.numerator(), at)?;
    if e.denominator().is_one() {
        return Ok(n);
    }
    let d = eval_poly(a, e.denominator(), at)?;
    if a.is_zero(&d) {
        return Err(lpv_symbolic::SymbolicError::DenominatorVanishes.into());
    }
    a.div(&n, &d).ok_or_else(|| CoreError::Precondition("division outside the scaled domain".into()))
}

/// Parameter values, initial state and signal samples for one trajectory.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrajectoryData {
    #[serde(serialize_with = "ser_rationals")]
    pub theta: Vec<Rational>,
    #[serde(serialize_with = "ser_rationals")]
    pub x0: Vec<Rational>,
    /// One row per sample: input values.
    #[serde(serialize_with = "ser_rows")]
    pub inputs: Vec<Vec<Rational>>,
    /// One row per sample: scheduling values (empty rows if none).
    #[serde(serialize_with = "ser_rows")]
    pub scheduling: Vec<Vec<Rational>>,
}

fn ser_rationals<S: serde::Serializer>(v: &[Rational], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(ToString::to_string))
}

fn ser_rows<S: serde::Serializer>(v: &[Vec<Rational>], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|r| r.iter().map(ToString::to_string).collect::<Vec<_>>()))
}

fn small_rational(rng: &mut ChaCha8Rng) -> Rational {
    let mut n: i64 = 0;
    while n == 0 {
        n = rng.gen_range(-5..=5);
    }
    Rational::new(BigInt::from(n), BigInt::from(rng.gen_range(1..=4i64)))
}

impl TrajectoryData {
    /// Small random rationals for everything, `samples` input rows.
    pub fn random(model: &LpvModel, samples: usize, seed: u64) -> TrajectoryData {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut row = |k: usize| (0..k).map(|_| small_rational(&mut rng)).collect::<Vec<_>>();
        let theta = row(model.q());
        let x0 = row(model.n());
        let inputs = (0..samples).map(|_| row(model.m())).collect();
        let scheduling = (0..samples).map(|_| row(model.scheduling.len())).collect();
        TrajectoryData { theta, x0, inputs, scheduling }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrajectoryCheckReport {
    pub samples: usize,
    /// Windows `k` at which every equation was evaluated.
    pub steps_checked: usize,
    #[serde(serialize_with = "ser_rational")]
    pub max_residual: Rational,
    pub first_nonzero: Option<usize>,
    pub data: TrajectoryData,
}

fn ser_rational<S: serde::Serializer>(v: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    let shown = v.to_string();
    if shown.len() > 64 {
        s.serialize_str(&format!("nonzero ({} bits)", v.numer().bits() + v.denom().bits()))
    } else {
        s.serialize_str(&shown)
    }
}

impl TrajectoryCheckReport {
    pub fn passed(&self) -> bool {
        self.max_residual.is_zero()
    }
}

/// Iterates the discrete model exactly over the given samples and evaluates
/// every equation on each admissible window.
pub fn discrete_trajectory_check(model: &LpvModel, iop: &IopSet, data: &TrajectoryData) -> Result<TrajectoryCheckReport> {
    if model.domain != Domain::Discrete {
        return Err(CoreError::Precondition("trajectory check needs a discrete-time model".into()));
    }
    let samples = data.inputs.len();
    if data.theta.len() != model.q() || data.x0.len() != model.n() || data.scheduling.len() != samples {
        return Err(CoreError::Precondition("trajectory data does not match the model".into()));
    }
    let window = iop
        .polynomials()
        .iter()
        .flat_map(|p| p.variables())
        .map(|v| v.order() as usize)
        .max()
        .unwrap_or(0);
    if samples < window + 1 {
        return Err(CoreError::Precondition(format!("need at least {} samples", window + 1)));
    }
    let polynomial_model = [&model.a, &model.b, &model.c, &model.d]
        .iter()
        .all(|m| m.entries().all(|e| e.denominator().is_constant()));
    if polynomial_model {
        let base = scaled_base(model, iop, data);
        run_trajectory(&Scaled { base }, model, iop, data, window)
    } else {
        run_trajectory(&Plain, model, iop, data, window)
    }
}

/// lcm of every denominator that can enter the iteration.
fn scaled_base(model: &LpvModel, iop: &IopSet, data: &TrajectoryData) -> BigInt {
    let mut l = BigInt::one();
    let mut take = |r: &Rational| l = l.lcm(r.denom());
    for r in data.theta.iter().chain(&data.x0).chain(data.inputs.iter().flatten()).chain(data.scheduling.iter().flatten()) {
        take(r);
    }
    for m in [&model.a, &model.b, &model.c, &model.d] {
        for e in m.entries() {
            let inv = e.denominator().constant_value().expect("constant denominator").recip();
            take(&inv);
            for (_, c) in e.numerator().terms() {
                take(&(c * &inv));
            }
        }
    }
    for p in iop.polynomials() {
        for (_, c) in p.terms() {
            take(c);
        }
    }
    if l.is_one() {
        BigInt::from(2)
    } else {
        l
    }
}

fn run_trajectory<A: Arith>(
    a: &A,
    model: &LpvModel,
    iop: &IopSet,
    data: &TrajectoryData,
    window: usize,
) -> Result<TrajectoryCheckReport> {
    let samples = data.inputs.len();
    let theta: Vec<A::T> = data.theta.iter().map(|r| a.lift(r)).collect();
    let mut x: Vec<A::T> = data.x0.iter().map(|r| a.lift(r)).collect();
    let mut ys: Vec<Vec<A::T>> = Vec::with_capacity(samples);
    for k in 0..samples {
        let u: Vec<A::T> = data.inputs[k].iter().map(|r| a.lift(r)).collect();
        let mut at: BTreeMap<Indeterminate, A::T> = BTreeMap::new();
        for (i, t) in theta.iter().enumerate() {
            at.insert(model.parameter(i), t.clone());
        }
        for (i, v) in u.iter().enumerate() {
            at.insert(model.input(i), v.clone());
        }
        for (i, r) in data.scheduling[k].iter().enumerate() {
            at.insert(Indeterminate::signal(&model.scheduling[i], Role::Scheduling, 0), a.lift(r));
        }
        let y = affine(a, &model.c, &x, &model.d, &u, &at)?;
        for (i, v) in y.iter().enumerate() {
            at.insert(model.output(i), v.clone());
        }
        if k + 1 < samples {
            x = affine(a, &model.a, &x, &model.b, &u, &at)?;
        }
        ys.push(y);
    }
    let mut max_residual = Rational::zero();
    let mut first_nonzero = None;
    let steps_checked = samples - window;
    for k in 0..steps_checked {
        let mut at: BTreeMap<Indeterminate, A::T> = BTreeMap::new();
        for (i, t) in theta.iter().enumerate() {
            at.insert(model.parameter(i), t.clone());
        }
        for j in 0..=window {
            for (i, v) in ys[k + j].iter().enumerate() {
                at.insert(model.output(i).advanced_by(j as u32), v.clone());
            }
            for (i, r) in data.inputs[k + j].iter().enumerate() {
                at.insert(model.input(i).advanced_by(j as u32), a.lift(r));
            }
            for (i, r) in data.scheduling[k + j].iter().enumerate() {
                let s = Indeterminate::signal(&model.scheduling[i], Role::Scheduling, j as u32);
                at.insert(s, a.lift(r));
            }
        }
        for p in iop.polynomials() {
            let r = eval_poly(a, &p, &at)?;
            if !a.is_zero(&r) {
                first_nonzero.get_or_insert(k);
                let r = a.lower(&r).abs();
                if r > max_residual {
                    max_residual = r;
                }
            }
        }
    }
    Ok(TrajectoryCheckReport { samples, steps_checked, max_residual, first_nonzero, data: data.clone() })
}

/// `M·x + N·u` with matrix entries evaluated at `at`.
fn affine<A: Arith>(
    a: &A,
    m: &crate::matrix::ExprMatrix,
    x: &[A::T],
    n: &crate::matrix::ExprMatrix,
    u: &[A::T],
    at: &BTreeMap<Indeterminate, A::T>,
) -> Result<Vec<A::T>> {
    let mut out = Vec::with_capacity(m.rows());
    for i in 0..m.rows() {
        let mut acc = a.lift(&Rational::zero());
        for (j, xv) in x.iter().enumerate() {
            let e = m.get(i, j);
            if !e.is_zero() {
                acc = a.add(&acc, &a.mul(&eval_expr(a, e, at)?, xv));
            }
        }
        for (j, uv) in u.iter().enumerate() {
            let e = n.get(i, j);
            if !e.is_zero() {
                acc = a.add(&acc, &a.mul(&eval_expr(a, e, at)?, uv));
            }
        }
        out.push(acc);
    }
    Ok(out)
}

/// True iff the two parameter points give the same summary.
pub fn indistinguishability_witness(summary: &ExhaustiveSummary, a: &[Rational], b: &[Rational]) -> Result<bool> {
    if a == b {
        return Err(CoreError::Precondition("witness points must differ".into()));
    }
    let (pa, pb) = (parameter_point(a), parameter_point(b));
    for e in &summary.elements {
        if e.value.evaluate(&pa)? != e.value.evaluate(&pb)? {
            return Ok(false);
        }
    }
    Ok(true)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Witness {
    pub parameter: String,
    #[serde(serialize_with = "ser_rationals")]
    pub theta_a: Vec<Rational>,
    #[serde(serialize_with = "ser_rationals")]
    pub theta_b: Vec<Rational>,
}

fn grid() -> Vec<Rational> {
    let mut g = Vec::new();
    for (n, d) in [(1, 1), (2, 1), (3, 1), (5, 1), (7, 1), (1, 2), (-1, 1), (4, 1), (1, 3), (-2, 1), (3, 2), (6, 1)] {
        g.push(Rational::new(BigInt::from(n), BigInt::from(d)));
    }
    g
}

const DIVISOR_CAP: u64 = 1 << 40;

fn divisors(n: &BigInt) -> Option<Vec<BigInt>> {
    let n: u64 = u64::try_from(n.abs()).ok().filter(|v| *v <= DIVISOR_CAP)?;
    let mut out = Vec::new();
    let mut k = 1u64;
    while k * k <= n {
        if n.is_multiple_of(k) {
            out.push(BigInt::from(k));
            if k * k != n {
                out.push(BigInt::from(n / k));
            }
        }
        k += 1;
    }
    Some(out)
}

/// Rational roots of a dense univariate polynomial (lowest degree first);
/// `None` when coefficients are too large for the divisor test.
pub fn rational_roots(p: &[Rational]) -> Option<Vec<Rational>> {
    let lcm = p.iter().fold(BigInt::one(), |l, c| l.lcm(c.denom()));
    let mut ints: Vec<BigInt> = p.iter().map(|c| (c * Rational::from_integer(lcm.clone())).to_integer()).collect();
    while ints.last().is_some_and(Zero::is_zero) {
        ints.pop();
    }
    if ints.len() <= 1 {
        return Some(Vec::new());
    }
    let mut roots = Vec::new();
    let lead = ints.iter().position(|c| !c.is_zero()).expect("nonzero");
    if lead > 0 {
        roots.push(Rational::zero());
        ints.drain(..lead);
    }
    if ints.len() <= 1 {
        return Some(roots);
    }
    let den_divs = divisors(ints.last().expect("nonempty"))?;
    let num_divs = divisors(&ints[0])?;
    for a in &num_divs {
        for b in &den_divs {
            for s in [1, -1] {
                let r = Rational::new(a * s, b.clone());
                if roots.contains(&r) {
                    continue;
                }
                let v = ints.iter().rev().fold(Rational::zero(), |acc, c| acc * &r + Rational::from_integer(c.clone()));
                if v.is_zero() {
                    roots.push(r);
                }
            }
        }
    }
    roots.sort();
    Some(roots)
}

const SEARCH_NODES: usize = 4096;

/// Looks for `θ″` with the same summary as a random prime point `θ′` but a
/// different value of parameter `target`. Solves the lex basis of
/// `Π(θ) = Π(θ′)` from the last variable up, taking grid values for free
/// variables and rational roots for constrained ones; falls back to
/// brute-force grid points when the basis route fails.
pub fn search_witness(
    summary: &ExhaustiveSummary,
    q: usize,
    target: usize,
    seed: u64,
    namer: &dyn Fn(&Indeterminate) -> String,
) -> Result<Option<Witness>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ev = loop {
        match evaluate_at(summary, &ThetaPoint::Values(draw_primes(q, &mut rng))) {
            Err(CoreError::DenominatorVanishesAtTheta) => continue,
            r => break r?,
        }
    };
    let theta_a = match &ev.point {
        ThetaPoint::Values(v) => v.clone(),
        ThetaPoint::Symbolic => unreachable!(),
    };
    let parameter = namer(&Indeterminate::parameter(target as u32 + 1));
    let vars: Vec<Indeterminate> = (1..=q as u32).map(Indeterminate::parameter).collect();
    let ring = Ring::new(MonomialOrder::Lex(vars.clone()), vars.iter().map(namer).collect());
    let gens: Vec<_> = ev
        .generators
        .iter()
        .map(|g| ring.poly_from(g, &|c: &Polynomial| c.constant_value().expect("rational")))
        .collect();
    let accept = |cand: &[Rational]| -> bool {
        cand[target] != theta_a[target] && indistinguishability_witness(summary, &theta_a, cand).unwrap_or(false)
    };
    if let Ok(gb) = groebner(&ring, &gens, GroebnerBudget::default()) {
        let polys: Vec<Polynomial> = gb.generators.iter().map(|g| to_polynomial(g.terms(), &vars)).collect();
        let mut assigned: Vec<Option<Rational>> = vec![None; q];
        let mut nodes = 0;
        if let Some(b) = backsolve(&polys, &vars, q, target, &theta_a, &mut assigned, &mut nodes, &accept) {
            return Ok(Some(Witness { parameter, theta_a, theta_b: b }));
        }
    }
    let g = grid();
    let mut idx = vec![0usize; q];
    'outer: for _ in 0..SEARCH_NODES {
        let cand: Vec<Rational> = idx.iter().map(|&i| g[i].clone()).collect();
        if accept(&cand) {
            return Ok(Some(Witness { parameter, theta_a, theta_b: cand }));
        }
        for d in idx.iter_mut() {
            *d += 1;
            if *d < g.len() {
                continue 'outer;
            }
            *d = 0;
        }
        break;
    }
    Ok(None)
}

fn to_polynomial(terms: &[(Vec<u32>, Rational)], vars: &[Indeterminate]) -> Polynomial {
    Polynomial::from_terms(terms.iter().map(|(e, c)| {
        let m = lpv_symbolic::Monomial::from_factors(vars.iter().cloned().zip(e.iter().copied()));
        (m, c.clone())
    }))
}

#[allow(clippy::too_many_arguments)]
fn backsolve(
    polys: &[Polynomial],
    vars: &[Indeterminate],
    q: usize,
    target: usize,
    theta_a: &[Rational],
    assigned: &mut Vec<Option<Rational>>,
    nodes: &mut usize,
    accept: &dyn Fn(&[Rational]) -> bool,
) -> Option<Vec<Rational>> {
    *nodes += 1;
    if *nodes > SEARCH_NODES {
        return None;
    }
    // lex with the first parameter greatest: solve from the last
    let Some(i) = (0..q).rev().find(|&i| assigned[i].is_none()) else {
        let cand: Vec<Rational> = assigned.iter().map(|v| v.clone().expect("assigned")).collect();
        return accept(&cand).then_some(cand);
    };
    let point: BTreeMap<Indeterminate, Rational> = assigned
        .iter()
        .enumerate()
        .filter_map(|(k, v)| v.clone().map(|v| (vars[k].clone(), v)))
        .collect();
    let mut constraint: Option<Vec<Rational>> = None;
    for p in polys {
        if p.variables().iter().any(|v| *v != vars[i] && !point.contains_key(v)) {
            continue;
        }
        let r = p.evaluate_partial(&point);
        if r.is_zero() {
            continue;
        }
        if r.is_constant() {
            return None;
        }
        constraint = Some(r.coefficients_in(&vars[i]).iter().map(|c| c.constant_value().expect("univariate")).collect());
        break;
    }
    let candidates: Vec<Rational> = match constraint {
        Some(c) => rational_roots(&c)?,
        None => {
            let mut g = grid();
            // prefer moving off the reference point
            if i == target {
                g.retain(|v| *v != theta_a[i]);
            } else {
                g.insert(0, theta_a[i].clone());
            }
            g
        }
    };
    for c in candidates {
        assigned[i] = Some(c);
        if let Some(found) = backsolve(polys, vars, q, target, theta_a, assigned, nodes, accept) {
            return Some(found);
        }
    }
    assigned[i] = None;
    None
}
