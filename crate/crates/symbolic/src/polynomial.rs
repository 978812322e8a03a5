use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Result, SymbolicError};
use crate::indeterminate::Indeterminate;
use crate::monomial::Monomial;
use crate::Rational;

/// Sparse multivariate polynomial with exact rational coefficients.
///
/// Terms are keyed by [`Monomial`] so iteration runs in ascending canonical
/// order; the leading term is the last one. Zero coefficients are never
/// stored.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Polynomial {
    terms: BTreeMap<Monomial, Rational>,
}

impl Polynomial {
    pub fn zero() -> Self {
        Polynomial::default()
    }

    pub fn one() -> Self {
        Self::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> Self {
        Self::term(c, Monomial::one())
    }

    pub fn integer(c: i64) -> Self {
        Self::constant(Rational::from_integer(BigInt::from(c)))
    }

    pub fn var(v: Indeterminate) -> Self {
        Self::term(Rational::one(), Monomial::var(v))
    }

    pub fn term(c: Rational, m: Monomial) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        Polynomial { terms }
    }

    pub fn from_terms<I: IntoIterator<Item = (Monomial, Rational)>>(terms: I) -> Self {
        let mut p = Polynomial::zero();
        for (m, c) in terms {
            p.add_term(m, c);
        }
        p
    }

    pub fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let s = e.get() + &c;
                if s.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = s;
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.constant_value().is_some_and(|c| c.is_one())
    }

    pub fn is_constant(&self) -> bool {
        self.terms.is_empty() || (self.terms.len() == 1 && self.terms.keys().next().unwrap().is_one())
    }

    /// The value of a constant polynomial.
    pub fn constant_value(&self) -> Option<Rational> {
        if self.terms.is_empty() {
            return Some(Rational::zero());
        }
        if self.is_constant() {
            return self.terms.values().next().cloned();
        }
        None
    }

    pub fn is_monomial(&self) -> bool {
        self.terms.len() == 1
    }

    /// Number of terms.
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in ascending canonical order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, m: &Monomial) -> Rational {
        self.terms.get(m).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn leading_term(&self) -> Option<(&Monomial, &Rational)> {
        self.terms.iter().next_back()
    }

    pub fn leading_monomial(&self) -> Option<&Monomial> {
        self.leading_term().map(|(m, _)| m)
    }

    pub fn leading_coefficient(&self) -> Rational {
        self.leading_term().map_or_else(Rational::zero, |(_, c)| c.clone())
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    pub fn degree_in(&self, v: &Indeterminate) -> u32 {
        self.terms.keys().map(|m| m.exponent(v)).max().unwrap_or(0)
    }

    pub fn variables(&self) -> BTreeSet<Indeterminate> {
        self.terms.keys().flat_map(|m| m.variables().cloned()).collect()
    }

    pub fn contains_variable<F: Fn(&Indeterminate) -> bool>(&self, pred: F) -> bool {
        self.terms.keys().any(|m| m.variables().any(&pred))
    }

    /// Greatest variable under the global order.
    pub fn main_variable(&self) -> Option<Indeterminate> {
        self.terms
            .keys()
            .filter_map(|m| m.factors().last().map(|(v, _)| v))
            .max()
            .cloned()
    }

    pub fn scale(&self, c: &Rational) -> Polynomial {
        if c.is_zero() {
            return Polynomial::zero();
        }
        Polynomial {
            terms: self.terms.iter().map(|(m, k)| (m.clone(), k * c)).collect(),
        }
    }

    pub fn mul_monomial(&self, m: &Monomial) -> Polynomial {
        Polynomial {
            terms: self.terms.iter().map(|(n, k)| (n.mul(m), k.clone())).collect(),
        }
    }

    pub fn mul_term(&self, c: &Rational, m: &Monomial) -> Polynomial {
        if c.is_zero() {
            return Polynomial::zero();
        }
        Polynomial {
            terms: self.terms.iter().map(|(n, k)| (n.mul(m), k * c)).collect(),
        }
    }

    pub fn pow(&self, exp: u32) -> Polynomial {
        let mut result = Polynomial::one();
        let mut base = self.clone();
        let mut e = exp;
        while e > 0 {
            if e & 1 == 1 {
                result = &result * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        result
    }

    /// Formal partial derivative with respect to `v`.
    pub fn partial_derivative(&self, v: &Indeterminate) -> Polynomial {
        let mut out = Polynomial::zero();
        for (m, c) in &self.terms {
            let e = m.exponent(v);
            if e > 0 {
                out.add_term(m.without(v, 1), c * Rational::from_integer(BigInt::from(e)));
            }
        }
        out
    }

    /// Total time derivative: each signal of order k is a function of time
    /// whose derivative is the same signal at order k+1; parameters and
    /// reference parameters are constants.
    pub fn time_derivative(&self) -> Polynomial {
        let mut out = Polynomial::zero();
        for (m, c) in &self.terms {
            for (v, e) in m.factors() {
                if !v.is_signal() {
                    continue;
                }
                let rest = m.without(v, 1).mul(&Monomial::var(v.advanced()));
                out.add_term(rest, c * Rational::from_integer(BigInt::from(*e)));
            }
        }
        out
    }

    /// Forward shift: every signal advances one step; a ring homomorphism.
    pub fn shift(&self) -> Polynomial {
        self.map_variables(Indeterminate::advanced)
    }

    pub fn map_variables<F: Fn(&Indeterminate) -> Indeterminate>(&self, f: F) -> Polynomial {
        let mut out = Polynomial::zero();
        for (m, c) in &self.terms {
            out.add_term(m.map_variables(&f), c.clone());
        }
        out
    }

    /// Groups terms by their monomial part over the variables accepted by
    /// `pred`; coefficients are free of those variables.
    pub fn collect<F: Fn(&Indeterminate) -> bool>(&self, pred: F) -> BTreeMap<Monomial, Polynomial> {
        let mut out: BTreeMap<Monomial, Polynomial> = BTreeMap::new();
        for (m, c) in &self.terms {
            let (key, rest) = m.split(&pred);
            out.entry(key).or_default().add_term(rest, c.clone());
        }
        out
    }

    /// Coefficients as a univariate polynomial in `v`, indexed by degree.
    pub fn coefficients_in(&self, v: &Indeterminate) -> Vec<Polynomial> {
        let mut out = vec![Polynomial::zero(); self.degree_in(v) as usize + 1];
        for (m, c) in &self.terms {
            let e = m.exponent(v);
            out[e as usize].add_term(m.without(v, e), c.clone());
        }
        out
    }

    /// Rational content with the sign of the leading coefficient:
    /// `self = content * primitive` where the primitive part has coprime
    /// integer coefficients and a positive leading coefficient.
    pub fn content(&self) -> Rational {
        let mut num_gcd = BigInt::zero();
        let mut den_lcm = BigInt::one();
        for c in self.terms.values() {
            num_gcd = num_gcd.gcd(c.numer());
            den_lcm = den_lcm.lcm(c.denom());
        }
        if num_gcd.is_zero() {
            return Rational::zero();
        }
        let c = Rational::new(num_gcd, den_lcm);
        if self.leading_coefficient().is_negative() {
            -c
        } else {
            c
        }
    }

    /// Splits off the rational content: returns `(primitive, content)` with
    /// `self == content * primitive`.
    pub fn normalize_primitive(&self) -> Result<(Polynomial, Rational)> {
        if self.is_zero() {
            return Err(SymbolicError::ZeroPolynomial);
        }
        let c = self.content();
        Ok((self.scale(&c.recip()), c))
    }

    /// Primitive part, or zero for zero.
    pub fn primitive(&self) -> Polynomial {
        self.normalize_primitive().map_or_else(|_| Polynomial::zero(), |(p, _)| p)
    }

    /// Scales so the leading coefficient is 1.
    pub fn monic(&self) -> Polynomial {
        if self.is_zero() {
            return Polynomial::zero();
        }
        self.scale(&self.leading_coefficient().recip())
    }

    /// Exact division; `None` when `divisor` does not divide `self`.
    pub fn exact_div(&self, divisor: &Polynomial) -> Option<Polynomial> {
        let (lm_d, lc_d) = divisor.leading_term()?;
        if divisor.is_constant() {
            return Some(self.scale(&lc_d.recip()));
        }
        if divisor.is_monomial() {
            let mut terms = BTreeMap::new();
            for (m, c) in &self.terms {
                terms.insert(m.checked_div(lm_d)?, c / lc_d);
            }
            return Some(Polynomial { terms });
        }
        let mut quotient = Polynomial::zero();
        let mut rem = self.clone();
        while let Some((lm_r, lc_r)) = rem.leading_term() {
            let m = lm_r.checked_div(lm_d)?;
            let c = lc_r / lc_d;
            rem = &rem - &divisor.mul_term(&c, &m);
            quotient.add_term(m, c);
        }
        Some(quotient)
    }

    /// Evaluates at a point binding every variable.
    pub fn evaluate(&self, point: &BTreeMap<Indeterminate, Rational>) -> Result<Rational> {
        let mut acc = Rational::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (v, e) in m.factors() {
                let val = point
                    .get(v)
                    .ok_or_else(|| SymbolicError::UnboundIndeterminate(v.to_string()))?;
                t *= num_traits::pow(val.clone(), *e as usize);
            }
            acc += t;
        }
        Ok(acc)
    }

    /// Substitutes rational values for the bound variables only.
    pub fn evaluate_partial(&self, point: &BTreeMap<Indeterminate, Rational>) -> Polynomial {
        let mut out = Polynomial::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            let mut rest = Vec::new();
            for (v, e) in m.factors() {
                match point.get(v) {
                    Some(val) => t *= num_traits::pow(val.clone(), *e as usize),
                    None => rest.push((v.clone(), *e)),
                }
            }
            out.add_term(Monomial::from_factors(rest), t);
        }
        out
    }

    pub fn fmt_with(&self, f: &mut fmt::Formatter<'_>, namer: &dyn Fn(&Indeterminate) -> String) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        for (k, (m, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            let abs = c.abs();
            if k == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else if neg {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            if m.is_one() {
                write!(f, "{abs}")?;
            } else {
                if !abs.is_one() {
                    write!(f, "{abs}*")?;
                }
                m.fmt_with(f, namer)?;
            }
        }
        Ok(())
    }

    /// Renders with a custom naming of indeterminates.
    pub fn render_with(&self, namer: &dyn Fn(&Indeterminate) -> String) -> String {
        struct W<'a>(&'a Polynomial, &'a dyn Fn(&Indeterminate) -> String);
        impl fmt::Display for W<'_> {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                self.0.fmt_with(f, self.1)
            }
        }
        W(self, namer).to_string()
    }
}

impl Ord for Polynomial {
    fn cmp(&self, other: &Self) -> Ordering {
        let mut a = self.terms.iter().rev();
        let mut b = other.terms.iter().rev();
        loop {
            match (a.next(), b.next()) {
                (None, None) => return Ordering::Equal,
                (Some(_), None) => return Ordering::Greater,
                (None, Some(_)) => return Ordering::Less,
                (Some((ma, ca)), Some((mb, cb))) => match ma.cmp(mb).then_with(|| ca.cmp(cb)) {
                    Ordering::Equal => continue,
                    o => return o,
                },
            }
        }
    }
}

impl PartialOrd for Polynomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_with(f, &|v| v.to_string())
    }
}

impl From<Indeterminate> for Polynomial {
    fn from(v: Indeterminate) -> Self {
        Polynomial::var(v)
    }
}

impl From<Rational> for Polynomial {
    fn from(c: Rational) -> Self {
        Polynomial::constant(c)
    }
}

impl From<i64> for Polynomial {
    fn from(c: i64) -> Self {
        Polynomial::integer(c)
    }
}

impl<'a> Add<&'a Polynomial> for &'a Polynomial {
    type Output = Polynomial;
    fn add(self, rhs: &'a Polynomial) -> Polynomial {
        let (big, small) = if self.len() >= rhs.len() { (self, rhs) } else { (rhs, self) };
        let mut out = big.clone();
        for (m, c) in &small.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl<'a> Sub<&'a Polynomial> for &'a Polynomial {
    type Output = Polynomial;
    fn sub(self, rhs: &'a Polynomial) -> Polynomial {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }
}

impl<'a> Mul<&'a Polynomial> for &'a Polynomial {
    type Output = Polynomial;
    fn mul(self, rhs: &'a Polynomial) -> Polynomial {
        let mut out = Polynomial::zero();
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        out
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        Polynomial {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c.clone())).collect(),
        }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $f:ident) => {
        impl $tr<Polynomial> for Polynomial {
            type Output = Polynomial;
            fn $f(self, rhs: Polynomial) -> Polynomial {
                (&self).$f(&rhs)
            }
        }
        impl<'a> $tr<&'a Polynomial> for Polynomial {
            type Output = Polynomial;
            fn $f(self, rhs: &'a Polynomial) -> Polynomial {
                (&self).$f(rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        -&self
    }
}
