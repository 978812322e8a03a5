use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_traits::{One, Zero};

use crate::error::{Result, SymbolicError};
use crate::gcd::gcd;
use crate::indeterminate::Indeterminate;
use crate::monomial::Monomial;
use crate::polynomial::Polynomial;
use crate::Rational;

/// Rational function `numerator / denominator` in canonical form.
///
/// Invariants: the denominator is nonzero with leading coefficient 1, and
/// numerator and denominator are coprime. Equal rational functions are
/// therefore structurally equal.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Expression {
    num: Polynomial,
    den: Polynomial,
}

impl Default for Expression {
    fn default() -> Self {
        Expression::zero()
    }
}

impl Expression {
    pub fn zero() -> Self {
        Expression {
            num: Polynomial::zero(),
            den: Polynomial::one(),
        }
    }

    pub fn one() -> Self {
        Expression::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> Self {
        Expression::from(Polynomial::constant(c))
    }

    pub fn integer(c: i64) -> Self {
        Expression::from(Polynomial::integer(c))
    }

    pub fn var(v: Indeterminate) -> Self {
        Expression::from(Polynomial::var(v))
    }

    /// Builds `num / den`, reducing to lowest terms.
    pub fn new(num: Polynomial, den: Polynomial) -> Result<Self> {
        if den.is_zero() {
            return Err(SymbolicError::DenominatorVanishes);
        }
        Ok(Self::reduce(num, den))
    }

    fn reduce(num: Polynomial, den: Polynomial) -> Self {
        if num.is_zero() {
            return Expression::zero();
        }
        if den.is_constant() {
            let c = den.constant_value().unwrap();
            return Expression {
                num: num.scale(&c.recip()),
                den: Polynomial::one(),
            };
        }
        let g = gcd(&num, &den);
        let (num, den) = if g.is_one() {
            (num, den)
        } else {
            (num.exact_div(&g).expect("gcd divides"), den.exact_div(&g).expect("gcd divides"))
        };
        Self::with_monic_den(num, den)
    }

    fn with_monic_den(num: Polynomial, den: Polynomial) -> Self {
        let lc = den.leading_coefficient();
        if lc.is_one() {
            Expression { num, den }
        } else {
            let inv = lc.recip();
            Expression {
                num: num.scale(&inv),
                den: den.scale(&inv),
            }
        }
    }

    pub fn numerator(&self) -> &Polynomial {
        &self.num
    }

    pub fn denominator(&self) -> &Polynomial {
        &self.den
    }

    pub fn into_parts(self) -> (Polynomial, Polynomial) {
        (self.num, self.den)
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.den.is_one() && self.num.is_one()
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.is_one()
    }

    pub fn as_polynomial(&self) -> Option<&Polynomial> {
        self.is_polynomial().then_some(&self.num)
    }

    pub fn is_constant(&self) -> bool {
        self.is_polynomial() && self.num.is_constant()
    }

    pub fn constant_value(&self) -> Option<Rational> {
        if self.is_polynomial() {
            self.num.constant_value()
        } else {
            None
        }
    }

    pub fn variables(&self) -> BTreeSet<Indeterminate> {
        let mut v = self.num.variables();
        v.extend(self.den.variables());
        v
    }

    pub fn contains_variable<F: Fn(&Indeterminate) -> bool>(&self, pred: F) -> bool {
        self.num.contains_variable(&pred) || self.den.contains_variable(&pred)
    }

    pub fn scale(&self, c: &Rational) -> Expression {
        if c.is_zero() {
            return Expression::zero();
        }
        Expression {
            num: self.num.scale(c),
            den: self.den.clone(),
        }
    }

    pub fn recip(&self) -> Option<Expression> {
        if self.is_zero() {
            return None;
        }
        Some(Self::with_monic_den(self.den.clone(), self.num.clone()))
    }

    pub fn checked_div(&self, rhs: &Expression) -> Option<Expression> {
        rhs.recip().map(|r| self * &r)
    }

    pub fn pow(&self, exp: u32) -> Expression {
        // powers of coprime polynomials stay coprime
        Self::with_monic_den(self.num.pow(exp), self.den.pow(exp))
    }

    /// Integer power; negative exponents invert. Fails on `0^-k`.
    pub fn powi(&self, exp: i64) -> Result<Expression> {
        let e = u32::try_from(exp.unsigned_abs()).expect("exponent fits in u32");
        if exp >= 0 {
            Ok(self.pow(e))
        } else {
            self.recip().map(|r| r.pow(e)).ok_or(SymbolicError::DenominatorVanishes)
        }
    }

    /// Time derivative: signals advance one order, parameters are constant.
    pub fn differentiate(&self) -> Expression {
        let dn = self.num.time_derivative();
        if self.den.is_one() {
            return Expression::from(dn);
        }
        let dd = self.den.time_derivative();
        let num = &(&dn * &self.den) - &(&self.num * &dd);
        Self::reduce(num, &self.den * &self.den)
    }

    /// Forward shift of every signal; parameters fixed.
    pub fn shift(&self) -> Expression {
        // a variable renaming preserves coprimality and leading coefficients
        // up to reordering, so renormalize the denominator only
        Self::with_monic_den(self.num.shift(), self.den.shift())
    }

    pub fn partial_derivative(&self, v: &Indeterminate) -> Expression {
        let dn = self.num.partial_derivative(v);
        if self.den.is_one() {
            return Expression::from(dn);
        }
        let dd = self.den.partial_derivative(v);
        Self::reduce(&(&dn * &self.den) - &(&self.num * &dd), &self.den * &self.den)
    }

    /// Simultaneous substitution of indeterminates by expressions.
    pub fn substitute(&self, bindings: &BTreeMap<Indeterminate, Expression>) -> Result<Expression> {
        let n = substitute_polynomial(&self.num, bindings);
        if self.den.is_one() {
            return Ok(n);
        }
        let d = substitute_polynomial(&self.den, bindings);
        n.checked_div(&d).ok_or(SymbolicError::DenominatorVanishes)
    }

    pub fn evaluate(&self, point: &BTreeMap<Indeterminate, Rational>) -> Result<Rational> {
        let n = self.num.evaluate(point)?;
        let d = self.den.evaluate(point)?;
        if d.is_zero() {
            return Err(SymbolicError::DenominatorVanishes);
        }
        Ok(n / d)
    }

    /// Substitutes rational values for the bound variables only.
    pub fn evaluate_partial(&self, point: &BTreeMap<Indeterminate, Rational>) -> Result<Expression> {
        let n = self.num.evaluate_partial(point);
        let d = self.den.evaluate_partial(point);
        Expression::new(n, d)
    }

    /// Groups the numerator by monomials over `pred`-variables; each
    /// coefficient is divided by the denominator.
    pub fn collect<F: Fn(&Indeterminate) -> bool>(&self, pred: F) -> Result<BTreeMap<Monomial, Expression>> {
        if self.den.contains_variable(&pred) {
            return Err(SymbolicError::NotPolynomialInVars);
        }
        Ok(self
            .num
            .collect(pred)
            .into_iter()
            .map(|(m, c)| (m, Self::reduce(c, self.den.clone())))
            .collect())
    }

    pub fn fmt_with(&self, f: &mut fmt::Formatter<'_>, namer: &dyn Fn(&Indeterminate) -> String) -> fmt::Result {
        if self.den.is_one() {
            return self.num.fmt_with(f, namer);
        }
        let wrap_num = self.num.len() > 1;
        if wrap_num {
            write!(f, "(")?;
        }
        self.num.fmt_with(f, namer)?;
        if wrap_num {
            write!(f, ")")?;
        }
        write!(f, "/(")?;
        self.den.fmt_with(f, namer)?;
        write!(f, ")")
    }

    pub fn render_with(&self, namer: &dyn Fn(&Indeterminate) -> String) -> String {
        struct W<'a>(&'a Expression, &'a dyn Fn(&Indeterminate) -> String);
        impl fmt::Display for W<'_> {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                self.0.fmt_with(f, self.1)
            }
        }
        W(self, namer).to_string()
    }
}

fn substitute_polynomial(p: &Polynomial, bindings: &BTreeMap<Indeterminate, Expression>) -> Expression {
    let mut acc = Expression::zero();
    let mut powers: BTreeMap<(Indeterminate, u32), Expression> = BTreeMap::new();
    for (m, c) in p.terms() {
        let mut kept = Vec::new();
        let mut t = Expression::constant(c.clone());
        for (v, e) in m.factors() {
            match bindings.get(v) {
                Some(val) => {
                    let pw = powers.entry((v.clone(), *e)).or_insert_with(|| val.pow(*e));
                    t = &t * &*pw;
                }
                None => kept.push((v.clone(), *e)),
            }
        }
        if !kept.is_empty() {
            t = &t * &Expression::from(Polynomial::term(Rational::one(), Monomial::from_factors(kept)));
        }
        acc = &acc + &t;
    }
    acc
}

impl From<Polynomial> for Expression {
    fn from(p: Polynomial) -> Self {
        Expression {
            num: p,
            den: Polynomial::one(),
        }
    }
}

impl From<Indeterminate> for Expression {
    fn from(v: Indeterminate) -> Self {
        Expression::var(v)
    }
}

impl From<Rational> for Expression {
    fn from(c: Rational) -> Self {
        Expression::constant(c)
    }
}

impl From<i64> for Expression {
    fn from(c: i64) -> Self {
        Expression::integer(c)
    }
}

impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_with(f, &|v| v.to_string())
    }
}

impl<'a> Add<&'a Expression> for &'a Expression {
    type Output = Expression;
    fn add(self, rhs: &'a Expression) -> Expression {
        if self.is_zero() {
            return rhs.clone();
        }
        if rhs.is_zero() {
            return self.clone();
        }
        if self.den == rhs.den {
            if self.den.is_one() {
                return Expression::from(&self.num + &rhs.num);
            }
            return Expression::reduce(&self.num + &rhs.num, self.den.clone());
        }
        let g = gcd(&self.den, &rhs.den);
        let a = self.den.exact_div(&g).expect("gcd divides");
        let b = rhs.den.exact_div(&g).expect("gcd divides");
        let num = &(&self.num * &b) + &(&rhs.num * &a);
        Expression::reduce(num, &self.den * &b)
    }
}

impl<'a> Sub<&'a Expression> for &'a Expression {
    type Output = Expression;
    fn sub(self, rhs: &'a Expression) -> Expression {
        self + &(-rhs)
    }
}

impl<'a> Mul<&'a Expression> for &'a Expression {
    type Output = Expression;
    fn mul(self, rhs: &'a Expression) -> Expression {
        if self.is_zero() || rhs.is_zero() {
            return Expression::zero();
        }
        if self.den.is_one() && rhs.den.is_one() {
            return Expression::from(&self.num * &rhs.num);
        }
        let g1 = gcd(&self.num, &rhs.den);
        let g2 = gcd(&rhs.num, &self.den);
        let n1 = self.num.exact_div(&g1).expect("gcd divides");
        let d2 = rhs.den.exact_div(&g1).expect("gcd divides");
        let n2 = rhs.num.exact_div(&g2).expect("gcd divides");
        let d1 = self.den.exact_div(&g2).expect("gcd divides");
        Expression::with_monic_den(&n1 * &n2, &d1 * &d2)
    }
}

impl<'a> Div<&'a Expression> for &'a Expression {
    type Output = Expression;
    /// Panics on division by zero; see [`Expression::checked_div`].
    fn div(self, rhs: &'a Expression) -> Expression {
        self.checked_div(rhs).expect("division by the zero expression")
    }
}

impl Neg for &Expression {
    type Output = Expression;
    fn neg(self) -> Expression {
        Expression {
            num: -&self.num,
            den: self.den.clone(),
        }
    }
}

impl Neg for Expression {
    type Output = Expression;
    fn neg(self) -> Expression {
        -&self
    }
}

macro_rules! forward_owned {
    ($tr:ident, $f:ident) => {
        impl $tr<Expression> for Expression {
            type Output = Expression;
            fn $f(self, rhs: Expression) -> Expression {
                (&self).$f(&rhs)
            }
        }
        impl<'a> $tr<&'a Expression> for Expression {
            type Output = Expression;
            fn $f(self, rhs: &'a Expression) -> Expression {
                (&self).$f(rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
forward_owned!(Div, div);

#[cfg(test)]
mod tests {
    use super::*;
    use crate::indeterminate::Role;
    use num_bigint::BigInt;

    fn q(n: i64) -> Rational {
        Rational::from_integer(BigInt::from(n))
    }
    fn th(i: u32) -> Expression {
        Expression::var(Indeterminate::parameter(i))
    }
    fn sig(name: &str, role: Role, order: u32) -> Expression {
        Expression::var(Indeterminate::signal(name, role, order))
    }
    fn u(k: u32) -> Expression {
        sig("u", Role::Input, k)
    }

    #[test]
    fn reduces_to_lowest_terms() {
        let a = &u(0) + &th(1);
        let b = &u(0) - &th(1);
        let e = &(&a * &b) / &(&a * &u(0));
        assert_eq!(e, &b / &u(0));
        assert!(e.denominator().leading_coefficient().is_one());
        assert_eq!(&e * &(&u(0) / &b), Expression::one());
    }

    #[test]
    fn differentiate_examples() {
        assert_eq!(u(0).differentiate(), u(1));
        let e = &(&th(2) * &u(0)) * &sig("x2", Role::State, 0);
        let expect = &(&(&th(2) * &u(1)) * &sig("x2", Role::State, 0))
            + &(&(&th(2) * &u(0)) * &sig("x2", Role::State, 1));
        assert_eq!(e.differentiate(), expect);
        let e = &th(2) * &u(0);
        assert_eq!(e.differentiate().differentiate(), &th(2) * &u(2));
        assert!(Expression::var(Indeterminate::ref_parameter(1)).differentiate().is_zero());
        // d/dt (1/u) = -u'/u^2
        let inv = u(0).recip().unwrap();
        assert_eq!(inv.differentiate(), -(&u(1) / &(&u(0) * &u(0))));
    }

    #[test]
    fn shift_examples() {
        assert_eq!(u(0).shift(), u(1));
        let x1 = sig("x1", Role::State, 0);
        let e = &(&th(1) * &(&x1 * &x1)) + &u(0);
        let x1s = x1.shift();
        assert_eq!(e.shift(), &(&th(1) * &(&x1s * &x1s)) + &u(1));
        let y = sig("y", Role::Output, 0);
        assert_eq!(y.shift().shift(), sig("y", Role::Output, 2));
    }

    #[test]
    fn substitute_examples() {
        let y = Indeterminate::signal("y", Role::Output, 0);
        let y1 = Indeterminate::signal("y", Role::Output, 1);
        let x = sig("x", Role::State, 0);
        let mut b = BTreeMap::new();
        b.insert(Indeterminate::parameter(1), Expression::integer(3));
        let e = &th(1) * &Expression::var(y.clone());
        assert_eq!(e.substitute(&b).unwrap(), Expression::var(y.clone()).scale(&q(3)));

        // -theta*y + y' with y -> x, y' -> theta*x
        let e = &(-&(&th(1) * &Expression::var(y.clone()))) + &Expression::var(y1.clone());
        let mut b = BTreeMap::new();
        b.insert(y, x.clone());
        b.insert(y1, &th(1) * &x);
        assert!(e.substitute(&b).unwrap().is_zero());

        let inv = u(0).recip().unwrap();
        let mut b = BTreeMap::new();
        b.insert(Indeterminate::signal("u", Role::Input, 0), Expression::zero());
        assert_eq!(inv.substitute(&b), Err(SymbolicError::DenominatorVanishes));
    }

    #[test]
    fn evaluate_examples() {
        let mut p = BTreeMap::new();
        p.insert(Indeterminate::parameter(2), q(2));
        p.insert(Indeterminate::parameter(3), q(3));
        assert_eq!((&th(2) * &th(3)).evaluate(&p).unwrap(), q(6));

        let mut p = BTreeMap::new();
        p.insert(Indeterminate::signal("u", Role::Input, 0), q(1));
        p.insert(Indeterminate::signal("u", Role::Input, 1), q(5));
        p.insert(Indeterminate::parameter(3), q(2));
        let e = &(&u(1) - &(&th(3) * &u(0))) / &u(0);
        assert_eq!(e.evaluate(&p).unwrap(), q(3));

        let mut p = BTreeMap::new();
        p.insert(Indeterminate::signal("u", Role::Input, 0), q(0));
        assert_eq!(u(0).recip().unwrap().evaluate(&p), Err(SymbolicError::DenominatorVanishes));
    }

    #[test]
    fn collect_rejects_signal_denominator() {
        let e = &th(1) / &u(0);
        assert_eq!(e.collect(Indeterminate::is_signal), Err(SymbolicError::NotPolynomialInVars));
        let e = &u(0) / &th(1);
        let m = e.collect(Indeterminate::is_signal).unwrap();
        assert_eq!(m.len(), 1);
    }
}
