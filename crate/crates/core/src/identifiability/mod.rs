//! Identifiability classification of an exhaustive summary.
//!
//! The Gröbner engine solves `Π(θ) = Π(θ̃)` one parameter at a time: the
//! elimination ideal in `θᵢ` under a lex order with `θᵢ` last counts that
//! coordinate's solutions. The Jacobian engine is a one-sided local test.

pub mod engine;
pub mod groebner;
pub mod jacobian;

use std::collections::BTreeMap;

use lpv_symbolic::{Expression, Indeterminate, MonomialOrder, Polynomial, Rational, Role};
use num_bigint::BigInt;
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{CoreError, Result};
use crate::iop::ExhaustiveSummary;
pub use engine::{EngineInput, EngineRegistry, GroebnerEngine, IdentifiabilityEngine, JacobianEngine};
pub use groebner::{groebner, squarefree_degree, Field, GPoly, GroebnerBasis, GroebnerBudget, Ring};
pub use jacobian::{jacobian_local_test, summary_jacobian_rank, JacobianEvidence};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Status {
    Global,
    /// `degree` is the number of solutions of the coordinate; unknown when
    /// only the local test ran.
    Local { degree: Option<u32> },
    NonIdentifiable,
    Undetermined,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelStatus {
    Global,
    Local,
    NonIdentifiable,
    Undetermined,
}

impl ModelStatus {
    pub fn from_parameters(statuses: &[Status]) -> ModelStatus {
        if statuses.contains(&Status::NonIdentifiable) {
            ModelStatus::NonIdentifiable
        } else if statuses.contains(&Status::Undetermined) || statuses.is_empty() {
            ModelStatus::Undetermined
        } else if statuses.iter().all(|s| *s == Status::Global) {
            ModelStatus::Global
        } else {
            ModelStatus::Local
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ModelStatus::Global => "global",
            ModelStatus::Local => "local",
            ModelStatus::NonIdentifiable => "non-identifiable",
            ModelStatus::Undetermined => "undetermined",
        }
    }
}

impl Status {
    pub fn label(&self) -> String {
        match self {
            Status::Global => "global".into(),
            Status::Local { degree: Some(d) } => format!("local({d})"),
            Status::Local { degree: None } => "local".into(),
            Status::NonIdentifiable => "non-identifiable".into(),
            Status::Undetermined => "undetermined".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ParameterVerdict {
    pub name: String,
    #[serde(flatten)]
    pub status: Status,
}

/// One evaluation of the summary at a reference point.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TrialRecord {
    /// Seed that reproduces the point; absent for symbolic or fixed points.
    pub seed: Option<u64>,
    pub theta: Vec<String>,
    pub generators: Vec<String>,
    /// Reduced basis under lex with the first parameter greatest.
    pub basis: Vec<String>,
    /// Univariate generator of each parameter's elimination ideal.
    pub eliminations: Vec<Option<String>>,
    pub statuses: Vec<Status>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Evidence {
    pub trials: Vec<TrialRecord>,
    pub jacobian: Option<JacobianEvidence>,
    pub notes: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Verdict {
    pub method: String,
    pub model: ModelStatus,
    pub parameters: Vec<ParameterVerdict>,
    pub evidence: Evidence,
    /// Set when a size budget was hit so the verdict could not be decided.
    pub budget_exceeded: bool,
}

impl Verdict {
    pub fn statuses(&self) -> Vec<Status> {
        self.parameters.iter().map(|p| p.status.clone()).collect()
    }

    pub fn status_of(&self, i: usize) -> &Status {
        &self.parameters[i].status
    }
}

/// How reference values `θ̃` are chosen.
#[derive(Clone, Debug, PartialEq)]
pub enum Mode {
    /// Distinct random primes drawn from the seed, one draw per trial.
    Numeric { seed: u64 },
    /// Reference values stay symbolic; a single exact trial.
    Symbolic,
    /// A fixed rational point; a single trial.
    Fixed(Vec<Rational>),
}

#[derive(Clone, Debug, PartialEq)]
pub enum ThetaPoint {
    Symbolic,
    Values(Vec<Rational>),
}

impl ThetaPoint {
    pub fn render(&self, q: usize, namer: &dyn Fn(&Indeterminate) -> String) -> Vec<String> {
        match self {
            ThetaPoint::Symbolic => (1..=q as u32).map(|i| namer(&Indeterminate::ref_parameter(i))).collect(),
            ThetaPoint::Values(v) => v.iter().map(ToString::to_string).collect(),
        }
    }
}

/// Generators of `Π(θ) = Π(θ̃)` with denominators cleared, plus the
/// nonconstant summary denominators that must not vanish.
#[derive(Clone, Debug, PartialEq)]
pub struct EvaluatedSummary {
    pub point: ThetaPoint,
    pub generators: Vec<Polynomial>,
    pub denominators: Vec<Polynomial>,
}

pub fn parameter_point(values: &[Rational]) -> BTreeMap<Indeterminate, Rational> {
    values
        .iter()
        .enumerate()
        .map(|(i, v)| (Indeterminate::parameter(i as u32 + 1), v.clone()))
        .collect()
}

fn to_refs(p: &Polynomial) -> Polynomial {
    p.map_variables(|v| match v {
        Indeterminate::Parameter(i) => Indeterminate::ref_parameter(*i),
        other => other.clone(),
    })
}

/// `n(θ)·d(θ̃) − n(θ̃)·d(θ)` for each element `n/d`.
pub fn evaluate_at(summary: &ExhaustiveSummary, point: &ThetaPoint) -> Result<EvaluatedSummary> {
    if summary.is_empty() {
        return Err(CoreError::NoParameterDependence);
    }
    let mut generators = Vec::new();
    let mut denominators: Vec<Polynomial> = Vec::new();
    for e in &summary.elements {
        let (n, d) = (e.value.numerator(), e.value.denominator());
        let g = match point {
            ThetaPoint::Symbolic => &(n * &to_refs(d)) - &(&to_refs(n) * d),
            ThetaPoint::Values(v) => {
                let at = parameter_point(v);
                let dv = d.evaluate(&at)?;
                if num_traits::Zero::is_zero(&dv) {
                    return Err(CoreError::DenominatorVanishesAtTheta);
                }
                &n.scale(&dv) - &d.scale(&n.evaluate(&at)?)
            }
        };
        if !d.is_constant() && !denominators.contains(d) {
            denominators.push(d.clone());
        }
        generators.push(g);
    }
    Ok(EvaluatedSummary { point: point.clone(), generators, denominators })
}

const PRIME_POOL: usize = 168;

fn primes_below_1000() -> Vec<u32> {
    let mut out = Vec::with_capacity(PRIME_POOL);
    'n: for k in 2u32..1000 {
        for p in &out {
            if p * p > k {
                break;
            }
            if k % p == 0 {
                continue 'n;
            }
        }
        out.push(k);
    }
    out
}

/// `q` distinct primes below 1000.
pub fn draw_primes(q: usize, rng: &mut ChaCha8Rng) -> Vec<Rational> {
    let pool = primes_below_1000();
    assert!(q <= pool.len(), "too many parameters for the prime pool");
    sample(rng, pool.len(), q)
        .into_iter()
        .map(|i| Rational::from_integer(BigInt::from(pool[i])))
        .collect()
}

const REDRAWS: usize = 16;

/// Evaluates the summary at a point chosen by `mode`; numeric mode redraws
/// until no summary denominator vanishes.
pub fn evaluate_summary(summary: &ExhaustiveSummary, q: usize, mode: &Mode) -> Result<EvaluatedSummary> {
    match mode {
        Mode::Symbolic => evaluate_at(summary, &ThetaPoint::Symbolic),
        Mode::Fixed(v) => evaluate_at(summary, &ThetaPoint::Values(v.clone())),
        Mode::Numeric { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            for _ in 0..REDRAWS {
                match evaluate_at(summary, &ThetaPoint::Values(draw_primes(q, &mut rng))) {
                    Err(CoreError::DenominatorVanishesAtTheta) => continue,
                    r => return r,
                }
            }
            Err(CoreError::DenominatorVanishesAtTheta)
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ClassifyOptions {
    pub trials: u32,
    pub mode: Mode,
    pub budget: GroebnerBudget,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions { trials: 5, mode: Mode::Numeric { seed: 0 }, budget: GroebnerBudget::default() }
    }
}

/// Auxiliary ring variable for `t·∏d − 1`; states never survive
/// elimination, so this cannot collide with a summary variable.
fn saturation_variable() -> Indeterminate {
    Indeterminate::signal("t_sat", Role::State, 0)
}

fn ring_for(
    q: usize,
    last: Option<usize>,
    saturate: bool,
    namer: &dyn Fn(&Indeterminate) -> String,
) -> Ring {
    let mut vars = Vec::new();
    if saturate {
        vars.push(saturation_variable());
    }
    vars.extend((0..q).filter(|i| Some(*i) != last).map(|i| Indeterminate::parameter(i as u32 + 1)));
    if let Some(i) = last {
        vars.push(Indeterminate::parameter(i as u32 + 1));
    }
    let names = vars.iter().map(namer).collect();
    Ring::new(MonomialOrder::Lex(vars), names)
}

fn ring_generators<F: Field>(ring: &Ring, ev: &EvaluatedSummary, coeff: &dyn Fn(&Polynomial) -> F) -> Vec<GPoly<F>> {
    let mut gens: Vec<GPoly<F>> = ev.generators.iter().map(|g| ring.poly_from(g, coeff)).collect();
    if !ev.denominators.is_empty() {
        let mut prod = Polynomial::var(saturation_variable());
        for d in &ev.denominators {
            prod = &prod * d;
        }
        gens.push(ring.poly_from(&(&prod - &Polynomial::one()), coeff));
    }
    gens
}

/// Reduced basis of the evaluated generators under lex, first parameter
/// greatest (saturation variable above all when present).
pub fn summary_basis<F: Field>(
    ev: &EvaluatedSummary,
    q: usize,
    coeff: &dyn Fn(&Polynomial) -> F,
    budget: GroebnerBudget,
    namer: &dyn Fn(&Indeterminate) -> String,
) -> Result<(GroebnerBasis<F>, Vec<GPoly<F>>)> {
    let ring = ring_for(q, None, !ev.denominators.is_empty(), namer);
    let gens = ring_generators(&ring, ev, coeff);
    let gb = groebner(&ring, &gens, budget)?;
    Ok((strip_saturation(gb), gens))
}

/// Reduced basis under lex with parameter `i` least, so its elimination
/// ideal is generated by the basis elements in `θᵢ` alone. Returned with the
/// ring generators it was computed from.
pub fn parameter_basis<F: Field>(
    ev: &EvaluatedSummary,
    q: usize,
    i: usize,
    coeff: &dyn Fn(&Polynomial) -> F,
    budget: GroebnerBudget,
    namer: &dyn Fn(&Indeterminate) -> String,
) -> Result<(GroebnerBasis<F>, Vec<GPoly<F>>)> {
    let ring = ring_for(q, Some(i), !ev.denominators.is_empty(), namer);
    let gens = ring_generators(&ring, ev, coeff);
    let gb = groebner(&ring, &gens, budget)?;
    Ok((gb, gens))
}

/// Drops generators that involve the saturation variable.
fn strip_saturation<F: Field>(mut gb: GroebnerBasis<F>) -> GroebnerBasis<F> {
    if gb.ring.order.variables().first() == Some(&saturation_variable()) {
        gb.generators.retain(|g| !g.support().contains(&0));
    }
    gb
}

/// Status of parameter `i` from the evaluated generators.
fn classify_parameter<F: Field>(
    ev: &EvaluatedSummary,
    q: usize,
    i: usize,
    coeff: &dyn Fn(&Polynomial) -> F,
    budget: GroebnerBudget,
    namer: &dyn Fn(&Indeterminate) -> String,
) -> Result<(Status, Option<String>)> {
    let (gb, _) = parameter_basis(ev, q, i, coeff, budget, namer)?;
    let ring = &gb.ring;
    if gb.is_unit() {
        return Ok((Status::Undetermined, Some("1".into())));
    }
    let last = ring.nvars() - 1;
    let uni = gb
        .generators
        .iter()
        .find(|g| g.support() == [last])
        .map(|g| (g.as_univariate(last).expect("univariate"), ring.render(g, namer)));
    Ok(match uni {
        None => (Status::NonIdentifiable, None),
        Some((dense, shown)) => match squarefree_degree(&dense) {
            1 => (Status::Global, Some(shown)),
            d => (Status::Local { degree: Some(d as u32) }, Some(shown)),
        },
    })
}

fn run_trial<F: Field>(
    ev: &EvaluatedSummary,
    q: usize,
    seed: Option<u64>,
    coeff: &dyn Fn(&Polynomial) -> F,
    budget: GroebnerBudget,
    namer: &dyn Fn(&Indeterminate) -> String,
) -> (TrialRecord, bool) {
    let mut rec = TrialRecord {
        seed,
        theta: ev.point.render(q, namer),
        generators: ev.generators.iter().map(|g| g.render_with(namer)).collect(),
        basis: Vec::new(),
        eliminations: Vec::new(),
        statuses: Vec::new(),
        error: None,
    };
    let mut over_budget = false;
    match summary_basis(ev, q, coeff, budget, namer) {
        Ok((gb, _)) => rec.basis = gb.render(namer),
        Err(e) => {
            over_budget |= matches!(e, CoreError::BudgetExceeded(_));
            rec.error = Some(e.to_string());
        }
    }
    for i in 0..q {
        match classify_parameter(ev, q, i, coeff, budget, namer) {
            Ok((s, shown)) => {
                rec.statuses.push(s);
                rec.eliminations.push(shown);
            }
            Err(e) => {
                over_budget |= matches!(e, CoreError::BudgetExceeded(_));
                rec.error.get_or_insert_with(|| e.to_string());
                rec.statuses.push(Status::Undetermined);
                rec.eliminations.push(None);
            }
        }
    }
    (rec, over_budget)
}

pub fn rational_coefficient(p: &Polynomial) -> Rational {
    p.constant_value().expect("numeric generators have rational coefficients")
}

pub fn expression_coefficient(p: &Polynomial) -> Expression {
    Expression::from(p.clone())
}

/// Seed of trial `t` in numeric mode.
pub fn trial_seed(seed: u64, t: u32) -> u64 {
    seed.wrapping_add(u64::from(t))
}

/// Classifies every parameter, aggregating numeric trials by strict
/// majority; ties and scattered outcomes give `Undetermined`.
pub fn classify(
    summary: &ExhaustiveSummary,
    q: usize,
    opts: &ClassifyOptions,
    namer: &(dyn Fn(&Indeterminate) -> String + Sync),
) -> Result<Verdict> {
    if opts.trials == 0 {
        return Err(CoreError::Precondition("trials must be at least 1".into()));
    }
    if summary.is_empty() {
        return Err(CoreError::NoParameterDependence);
    }
    let outcomes: Vec<(TrialRecord, bool)> = match &opts.mode {
        Mode::Symbolic => {
            let ev = evaluate_summary(summary, q, &opts.mode)?;
            vec![run_trial(&ev, q, None, &expression_coefficient, opts.budget, namer)]
        }
        Mode::Fixed(_) => {
            let ev = evaluate_summary(summary, q, &opts.mode)?;
            vec![run_trial(&ev, q, None, &rational_coefficient, opts.budget, namer)]
        }
        Mode::Numeric { seed } => {
            let seeds: Vec<u64> = (0..opts.trials).map(|t| trial_seed(*seed, t)).collect();
            let evaluated: Vec<EvaluatedSummary> = seeds
                .iter()
                .map(|s| evaluate_summary(summary, q, &Mode::Numeric { seed: *s }))
                .collect::<Result<_>>()?;
            std::thread::scope(|scope| {
                let handles: Vec<_> = evaluated
                    .iter()
                    .zip(&seeds)
                    .map(|(ev, s)| scope.spawn(move || run_trial(ev, q, Some(*s), &rational_coefficient, opts.budget, namer)))
                    .collect();
                handles.into_iter().map(|h| h.join().expect("trial panicked")).collect()
            })
        }
    };
    let over_budget = outcomes.iter().any(|(_, b)| *b);
    let trials: Vec<TrialRecord> = outcomes.into_iter().map(|(r, _)| r).collect();
    let mut notes = Vec::new();
    let mut parameters = Vec::with_capacity(q);
    for i in 0..q {
        let name = namer(&Indeterminate::parameter(i as u32 + 1));
        let status = majority(trials.iter().map(|t| &t.statuses[i]));
        let distinct: Vec<String> = {
            let mut v: Vec<String> = trials.iter().map(|t| t.statuses[i].label()).collect();
            v.sort();
            v.dedup();
            v
        };
        if distinct.len() > 1 {
            notes.push(format!("{name}: trials disagree ({})", distinct.join(", ")));
        }
        parameters.push(ParameterVerdict { name, status });
    }
    let statuses: Vec<Status> = parameters.iter().map(|p| p.status.clone()).collect();
    Ok(Verdict {
        method: "groebner".into(),
        model: ModelStatus::from_parameters(&statuses),
        parameters,
        evidence: Evidence { trials, jacobian: None, notes },
        budget_exceeded: over_budget,
    })
}

fn majority<'a, I: Iterator<Item = &'a Status>>(it: I) -> Status {
    let all: Vec<&Status> = it.collect();
    for s in &all {
        if all.iter().filter(|t| **t == *s).count() * 2 > all.len() {
            return (*s).clone();
        }
    }
    Status::Undetermined
}
