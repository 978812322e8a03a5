//! Input-output-parameter equations `Ψ = ω (Y0 + G U)` and the exhaustive
//! summary extracted from their coefficients.

use lpv_symbolic::gcd::{gcd_all, lcm};
use lpv_symbolic::{Expression, Indeterminate, Monomial, Polynomial, Role};
use num_traits::Signed;

use crate::elimination::NullspaceBasis;
use crate::error::{CoreError, Result};
use crate::stacking::{RowLabel, StackedSystem};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IopEquation {
    /// Denominator-free, primitive, positive leading coefficient.
    pub poly: Polynomial,
    /// Output whose dependency this equation expresses, when known.
    pub output: Option<usize>,
    /// Coefficient of this signal monomial normalizes the summary.
    pub normalizer: Monomial,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IopSet {
    pub equations: Vec<IopEquation>,
    pub order: u32,
}

impl IopSet {
    /// Builds a set from given polynomials, canonicalizing each.
    pub fn from_polynomials(polys: Vec<Polynomial>, order: u32) -> Result<IopSet> {
        let mut equations = Vec::new();
        for p in polys {
            if let Some(eq) = make_equation(p, None)? {
                equations.push(eq);
            }
        }
        Ok(IopSet { equations, order })
    }

    pub fn polynomials(&self) -> Vec<Polynomial> {
        self.equations.iter().map(|e| e.poly.clone()).collect()
    }

    pub fn len(&self) -> usize {
        self.equations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.equations.is_empty()
    }

    /// Outputs with at least one attributed equation.
    pub fn covered_outputs(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self.equations.iter().filter_map(|e| e.output).collect();
        v.sort_unstable();
        v.dedup();
        v
    }
}

/// Where a summary element was found.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Provenance {
    pub equation: usize,
    pub monomial: Monomial,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SummaryElement {
    /// Rational function of the parameters only.
    pub value: Expression,
    pub provenance: Vec<Provenance>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExhaustiveSummary {
    pub elements: Vec<SummaryElement>,
}

impl ExhaustiveSummary {
    pub fn from_expressions(values: Vec<Expression>) -> Result<ExhaustiveSummary> {
        let mut s = ExhaustiveSummary { elements: Vec::new() };
        for (i, v) in values.into_iter().enumerate() {
            s.push(v, Provenance { equation: i, monomial: Monomial::one() });
        }
        if s.elements.is_empty() {
            return Err(CoreError::NoParameterDependence);
        }
        Ok(s)
    }

    pub fn values(&self) -> Vec<Expression> {
        self.elements.iter().map(|e| e.value.clone()).collect()
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    fn push(&mut self, value: Expression, prov: Provenance) {
        if !value.contains_variable(Indeterminate::is_parameter) {
            return;
        }
        let value = normalize_element(&value);
        match self.elements.iter_mut().find(|e| e.value == value) {
            Some(e) => e.provenance.push(prov),
            None => self.elements.push(SummaryElement { value, provenance: vec![prov] }),
        }
    }
}

/// Scales a rational function so its numerator is primitive with a positive
/// leading coefficient (the denominator is already monic).
pub fn normalize_element(e: &Expression) -> Expression {
    if e.is_zero() {
        return e.clone();
    }
    let c = e.numerator().content();
    e.scale(&c.recip())
}

fn is_state(v: &Indeterminate) -> bool {
    v.has_role(Role::State)
}

fn normalizer_key(m: &Monomial) -> (Option<u32>, u32, Monomial) {
    let max_out = m.variables().filter(|v| v.has_role(Role::Output)).map(Indeterminate::order).max();
    (max_out, m.degree(), m.clone())
}

/// Highest-ranked signal monomial: greatest output order, then total degree,
/// then canonical order.
pub fn normalizer_monomial(p: &Polynomial) -> Option<Monomial> {
    p.collect(Indeterminate::is_signal).into_keys().max_by_key(normalizer_key)
}

/// Canonical representative of `p` up to factors free of one variable class:
/// primitive, parameter-only and signal-only contents removed, positive
/// leading coefficient.
pub fn canonical_equation(p: &Polynomial) -> Polynomial {
    if p.is_zero() {
        return Polynomial::zero();
    }
    let mut p = p.primitive();
    let by_signal = p.collect(Indeterminate::is_signal);
    let g = gcd_all(by_signal.values());
    if !g.is_constant() {
        p = p.exact_div(&g).expect("content divides");
    }
    let by_param = p.collect(Indeterminate::is_parameter);
    if by_param.len() >= 2 {
        let g = gcd_all(by_param.values());
        if !g.is_constant() {
            p = p.exact_div(&g).expect("content divides");
        }
    }
    p.primitive()
}

fn make_equation(p: Polynomial, output: Option<usize>) -> Result<Option<IopEquation>> {
    if p.is_zero() {
        return Ok(None);
    }
    if let Some(v) = p.variables().into_iter().find(is_state) {
        return Err(CoreError::StateNotEliminated(v.to_string()));
    }
    let poly = canonical_equation(&p);
    if !poly.contains_variable(Indeterminate::is_signal) {
        return Ok(None);
    }
    let normalizer = normalizer_monomial(&poly).expect("equation has signal monomials");
    Ok(Some(IopEquation { poly, output, normalizer }))
}

/// Clears denominators and content of a null-space row.
fn canonical_row(row: &[Expression]) -> Vec<Polynomial> {
    let mut l = Polynomial::one();
    for e in row {
        if !e.is_polynomial() {
            l = lcm(&l, e.denominator());
        }
    }
    let polys: Vec<Polynomial> = row
        .iter()
        .map(|e| {
            if e.is_zero() {
                Polynomial::zero()
            } else {
                e.numerator() * &l.exact_div(e.denominator()).expect("lcm multiple")
            }
        })
        .collect();
    let g = gcd_all(polys.iter().filter(|p| !p.is_zero()));
    if g.is_one() || g.is_zero() {
        polys
    } else {
        polys.iter().map(|p| p.exact_div(&g).expect("gcd divides")).collect()
    }
}

pub fn form_iop(stack: &StackedSystem, ns: &NullspaceBasis) -> Result<IopSet> {
    if ns.is_empty() {
        return Err(CoreError::EmptyNullspace);
    }
    let known = stack.known_side();
    let mut equations = Vec::new();
    for (row, &free) in ns.rows.iter().zip(&ns.free_rows) {
        let omega = canonical_row(row);
        let mut psi = Expression::zero();
        for (w, k) in omega.iter().zip(&known) {
            if !w.is_zero() && !k.is_zero() {
                psi = &psi + &(&Expression::from(w.clone()) * k);
            }
        }
        let output = match stack.labels[free] {
            RowLabel::Output { output, .. } => Some(output),
            RowLabel::State { .. } => None,
        };
        if let Some(eq) = make_equation(psi.numerator().clone(), output)? {
            equations.push(eq);
        }
    }
    Ok(IopSet { equations, order: stack.order })
}

pub fn extract_summary(iop: &IopSet) -> Result<ExhaustiveSummary> {
    let mut s = ExhaustiveSummary { elements: Vec::new() };
    for (i, eq) in iop.equations.iter().enumerate() {
        let coeffs = eq.poly.collect(Indeterminate::is_signal);
        let norm = Expression::from(coeffs[&eq.normalizer].clone());
        for (m, c) in coeffs.iter().rev() {
            if *m == eq.normalizer {
                continue;
            }
            let value = &Expression::from(c.clone()) / &norm;
            s.push(value, Provenance { equation: i, monomial: m.clone() });
        }
    }
    if s.elements.is_empty() {
        return Err(CoreError::NoParameterDependence);
    }
    Ok(s)
}

/// Primitive form of a parameter polynomial with positive leading
/// coefficient; used to compare summaries up to per-element scale.
pub fn primitive_positive(p: &Polynomial) -> Polynomial {
    let q = p.primitive();
    if q.leading_coefficient().is_negative() {
        -q
    } else {
        q
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elimination::left_nullspace_ordered;
    use crate::model::parse_model;
    use crate::stacking::build_stack;

    #[test]
    fn decay_model() {
        let m = parse_model("time: continuous\nparams: theta1\nA: [theta1]\nC: [1]").unwrap();
        let s = build_stack(&m, 1).unwrap();
        let ns = left_nullspace_ordered(&s.o, &s.elimination_order());
        let iop = form_iop(&s, &ns).unwrap();
        let th = Polynomial::var(Indeterminate::parameter(1));
        let y = |k| Polynomial::var(Indeterminate::signal("y", Role::Output, k));
        assert_eq!(iop.polynomials(), vec![&y(1) - &(&th * &y(0))]);
        assert_eq!(iop.equations[0].output, Some(0));
        let pi = extract_summary(&iop).unwrap();
        assert_eq!(pi.values(), vec![Expression::from(th)]);
    }

    #[test]
    fn empty_nullspace_is_an_error() {
        let m = parse_model("time: continuous\nparams: theta1\nA: [theta1]\nC: [1]").unwrap();
        let s = build_stack(&m, 0).unwrap();
        let ns = left_nullspace_ordered(&s.o, &s.elimination_order());
        assert_eq!(form_iop(&s, &ns), Err(CoreError::EmptyNullspace));
    }

    #[test]
    fn summary_requires_parameters() {
        let y = |k| Polynomial::var(Indeterminate::signal("y", Role::Output, k));
        let iop = IopSet::from_polynomials(vec![&y(1) - &y(0)], 1).unwrap();
        assert_eq!(extract_summary(&iop), Err(CoreError::NoParameterDependence));
    }
}
