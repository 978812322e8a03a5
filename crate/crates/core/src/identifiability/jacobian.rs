//! Rank of `∂Ψ/∂θ` at random rational points.
//!
//! Full rank certifies local identifiability only; a deficient rank at
//! random points is reported, never promoted to a negative verdict.

use std::collections::BTreeMap;

use lpv_symbolic::{Expression, Indeterminate, Rational};
use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{trial_seed, Evidence, ModelStatus, ParameterVerdict, Status, Verdict};
use crate::error::{CoreError, Result};
use crate::iop::{ExhaustiveSummary, IopSet};
use crate::matrix::rational_rank;
use crate::model::Domain;

pub const POINTS_PER_TRIAL: usize = 5;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct JacobianEvidence {
    pub q: usize,
    pub equations: usize,
    /// Equations were added by differentiating or shifting `Ψ`.
    pub augmented: bool,
    pub max_rank: usize,
    /// Rank at each evaluation point, in draw order.
    pub ranks: Vec<usize>,
}

fn advance(domain: Domain, e: &Expression) -> Expression {
    match domain {
        Domain::Continuous => e.differentiate(),
        Domain::Discrete => e.shift(),
    }
}

/// Each equation divided by the coefficient of its normalizer monomial.
/// `Ψ` is only defined up to a parameter-dependent factor `λ(θ)`, and
/// `∂(λΨ)/∂θ = λ ∂Ψ/∂θ + Ψ ∂λ/∂θ` differs from `λ ∂Ψ/∂θ` at points off the
/// relation; fixing the normalizer coefficient to 1 removes that freedom.
pub fn normalized_equations(iop: &IopSet) -> Vec<Expression> {
    iop.equations
        .iter()
        .map(|eq| {
            let coeffs = eq.poly.collect(Indeterminate::is_signal);
            let c = Expression::from(coeffs[&eq.normalizer].clone());
            &Expression::from(eq.poly.clone()) / &c
        })
        .collect()
}

fn depends_on_parameters(e: &Expression) -> bool {
    e.contains_variable(Indeterminate::is_parameter)
}

/// Parameter-dependent normalized equations, followed by derivatives (or
/// shifts) of increasing order, round-robin, until there are at least `q`.
/// Parameter-free equations carry no rank and are not counted.
pub fn augment(iop: &IopSet, domain: Domain, q: usize) -> (Vec<Expression>, bool) {
    let base: Vec<Expression> = normalized_equations(iop).into_iter().filter(depends_on_parameters).collect();
    let mut out = base.clone();
    let mut level = base.clone();
    while out.len() < q && !base.is_empty() {
        level = level.iter().map(|e| advance(domain, e)).collect();
        for e in &level {
            if out.len() >= q {
                break;
            }
            out.push(e.clone());
        }
    }
    let augmented = out.len() > base.len();
    (out, augmented)
}

fn random_rational(rng: &mut ChaCha8Rng) -> Rational {
    let mut n: i64 = 0;
    while n == 0 {
        n = rng.gen_range(-40..=40);
    }
    Rational::new(BigInt::from(n), BigInt::from(rng.gen_range(1..=9i64)))
}

const REDRAWS: usize = 16;

/// Rank at a random point, redrawing when a denominator vanishes there.
fn rank_at(jac: &[Vec<Expression>], vars: &[Indeterminate], rng: &mut ChaCha8Rng) -> Result<usize> {
    for _ in 0..REDRAWS {
        let point: BTreeMap<Indeterminate, Rational> = vars.iter().map(|v| (v.clone(), random_rational(rng))).collect();
        let m: lpv_symbolic::Result<Vec<Vec<Rational>>> =
            jac.iter().map(|row| row.iter().map(|e| e.evaluate(&point)).collect()).collect();
        match m {
            Ok(m) => return Ok(rational_rank(&m)),
            Err(lpv_symbolic::SymbolicError::DenominatorVanishes) => continue,
            Err(e) => return Err(e.into()),
        }
    }
    Err(lpv_symbolic::SymbolicError::DenominatorVanishes.into())
}

fn sampled_ranks(eqs: &[Expression], params: &[Indeterminate], trials: u32, seed: u64) -> Result<Vec<usize>> {
    let jac: Vec<Vec<Expression>> = eqs
        .iter()
        .map(|e| params.iter().map(|t| e.partial_derivative(t)).collect())
        .collect();
    let mut vars: Vec<Indeterminate> = eqs.iter().flat_map(|e| e.variables()).collect();
    vars.extend(params.iter().cloned());
    vars.sort();
    vars.dedup();
    let mut ranks = Vec::new();
    for t in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(seed, t));
        for _ in 0..POINTS_PER_TRIAL {
            ranks.push(if jac.is_empty() { 0 } else { rank_at(&jac, &vars, &mut rng)? });
        }
    }
    Ok(ranks)
}

/// Local test on the I-O-P equations: model Local when the maximum rank over
/// `trials × 5` random points equals `q`, Undetermined otherwise. When the
/// first `q` rows fall short, whole derivative levels are appended while the
/// rank is deficient, up to the number of signal monomials of an equation.
pub fn jacobian_local_test(
    iop: &IopSet,
    domain: Domain,
    q: usize,
    trials: u32,
    seed: u64,
    namer: &dyn Fn(&Indeterminate) -> String,
) -> Result<Verdict> {
    if iop.is_empty() {
        return Err(CoreError::EmptyNullspace);
    }
    if trials == 0 {
        return Err(CoreError::Precondition("trials must be at least 1".into()));
    }
    let params: Vec<Indeterminate> = (1..=q as u32).map(Indeterminate::parameter).collect();
    let (mut eqs, mut augmented) = augment(iop, domain, q);
    let mut ranks = sampled_ranks(&eqs, &params, trials, seed)?;
    // An equation with k signal monomials has k coefficient functions but a
    // single row; its first k - 1 derivatives can be needed to expose them
    // before the rank settles.
    let base: Vec<Expression> = normalized_equations(iop).into_iter().filter(depends_on_parameters).collect();
    let depth = iop
        .equations
        .iter()
        .map(|eq| eq.poly.collect(Indeterminate::is_signal).len().saturating_sub(1))
        .max()
        .unwrap_or(0);
    let mut level = base.clone();
    let mut all = base.clone();
    for _ in 0..depth {
        if ranks.iter().copied().max().unwrap_or(0) >= q {
            break;
        }
        level = level.iter().map(|e| advance(domain, e)).collect();
        all.extend(level.iter().cloned());
        if all.len() <= eqs.len() {
            continue;
        }
        eqs = all.clone();
        augmented = true;
        ranks = sampled_ranks(&eqs, &params, trials, seed)?;
    }
    let max_rank = ranks.iter().copied().max().unwrap_or(0);
    let status = if max_rank == q { Status::Local { degree: None } } else { Status::Undetermined };
    let mut notes = Vec::new();
    if augmented {
        notes.push(format!("{} of {} equations obtained by augmentation", eqs.len() - base.len(), eqs.len()));
    }
    if max_rank < q {
        notes.push(format!("jacobian rank {max_rank} < {q}"));
    }
    let parameters: Vec<ParameterVerdict> = params
        .iter()
        .map(|p| ParameterVerdict { name: namer(p), status: status.clone() })
        .collect();
    Ok(Verdict {
        method: "jacobian".into(),
        model: if max_rank == q { ModelStatus::Local } else { ModelStatus::Undetermined },
        parameters,
        evidence: Evidence {
            trials: Vec::new(),
            jacobian: Some(JacobianEvidence { q, equations: eqs.len(), augmented, max_rank, ranks }),
            notes,
        },
        budget_exceeded: false,
    })
}

/// Maximum rank of `∂Π/∂θ` over random parameter points avoiding the
/// summary denominators.
pub fn summary_jacobian_rank(summary: &ExhaustiveSummary, q: usize, seed: u64, points: usize) -> Result<usize> {
    let params: Vec<Indeterminate> = (1..=q as u32).map(Indeterminate::parameter).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = 0;
    let mut drawn = 0;
    let mut attempts = 0;
    while drawn < points {
        attempts += 1;
        if attempts > points * 8 {
            return Err(CoreError::DenominatorVanishesAtTheta);
        }
        let at: BTreeMap<Indeterminate, Rational> = params.iter().map(|v| (v.clone(), random_rational(&mut rng))).collect();
        let rows: std::result::Result<Vec<Vec<Rational>>, _> = summary
            .elements
            .iter()
            .map(|e| params.iter().map(|t| e.value.partial_derivative(t).evaluate(&at)).collect())
            .collect();
        match rows {
            Ok(m) => {
                best = best.max(rational_rank(&m));
                drawn += 1;
            }
            Err(_) => continue,
        }
    }
    Ok(best)
}
