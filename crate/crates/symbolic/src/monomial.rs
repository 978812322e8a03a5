use std::cmp::Ordering;
use std::fmt;

use crate::indeterminate::Indeterminate;

/// A power product of indeterminates.
///
/// Factors are kept sorted by the global variable order with strictly
/// positive exponents, so structural equality is mathematical equality.
/// Monomials compare lexicographically with the greatest variable most
/// significant; this is the crate-wide canonical monomial order.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Monomial {
    factors: Vec<(Indeterminate, u32)>,
}

fn add_exp(a: u32, b: u32) -> u32 {
    a.checked_add(b).expect("monomial exponent overflow")
}

impl Monomial {
    pub fn one() -> Self {
        Monomial::default()
    }

    pub fn var(v: Indeterminate) -> Self {
        Self::power(v, 1)
    }

    pub fn power(v: Indeterminate, exp: u32) -> Self {
        if exp == 0 {
            return Self::one();
        }
        Monomial {
            factors: vec![(v, exp)],
        }
    }

    /// Builds a monomial from arbitrary factors, merging repeats and
    /// dropping zero exponents.
    pub fn from_factors<I: IntoIterator<Item = (Indeterminate, u32)>>(factors: I) -> Self {
        let mut v: Vec<(Indeterminate, u32)> = factors.into_iter().filter(|(_, e)| *e > 0).collect();
        v.sort_by(|a, b| a.0.cmp(&b.0));
        let mut out: Vec<(Indeterminate, u32)> = Vec::with_capacity(v.len());
        for (var, e) in v {
            match out.last_mut() {
                Some((last, le)) if *last == var => *le = add_exp(*le, e),
                _ => out.push((var, e)),
            }
        }
        Monomial { factors: out }
    }

    pub fn is_one(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn factors(&self) -> &[(Indeterminate, u32)] {
        &self.factors
    }

    pub fn variables(&self) -> impl Iterator<Item = &Indeterminate> {
        self.factors.iter().map(|(v, _)| v)
    }

    pub fn degree(&self) -> u32 {
        self.factors.iter().fold(0, |acc, (_, e)| add_exp(acc, *e))
    }

    pub fn exponent(&self, v: &Indeterminate) -> u32 {
        self.factors
            .binary_search_by(|(w, _)| w.cmp(v))
            .map_or(0, |i| self.factors[i].1)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut out = Vec::with_capacity(self.factors.len() + other.factors.len());
        let (mut i, mut j) = (0, 0);
        while i < self.factors.len() && j < other.factors.len() {
            let (a, ea) = &self.factors[i];
            let (b, eb) = &other.factors[j];
            match a.cmp(b) {
                Ordering::Less => {
                    out.push((a.clone(), *ea));
                    i += 1;
                }
                Ordering::Greater => {
                    out.push((b.clone(), *eb));
                    j += 1;
                }
                Ordering::Equal => {
                    out.push((a.clone(), add_exp(*ea, *eb)));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&self.factors[i..]);
        out.extend_from_slice(&other.factors[j..]);
        Monomial { factors: out }
    }

    pub fn pow(&self, exp: u32) -> Monomial {
        if exp == 0 {
            return Monomial::one();
        }
        Monomial {
            factors: self
                .factors
                .iter()
                .map(|(v, e)| (v.clone(), e.checked_mul(exp).expect("monomial exponent overflow")))
                .collect(),
        }
    }

    pub fn divides(&self, other: &Monomial) -> bool {
        self.factors.iter().all(|(v, e)| other.exponent(v) >= *e)
    }

    /// `self / divisor` when exact.
    pub fn checked_div(&self, divisor: &Monomial) -> Option<Monomial> {
        let mut out = Vec::with_capacity(self.factors.len());
        let mut j = 0;
        for (v, e) in &self.factors {
            let mut sub = 0;
            if j < divisor.factors.len() && divisor.factors[j].0 < *v {
                return None;
            }
            if j < divisor.factors.len() && divisor.factors[j].0 == *v {
                sub = divisor.factors[j].1;
                j += 1;
            }
            match e.cmp(&sub) {
                Ordering::Less => return None,
                Ordering::Equal => {}
                Ordering::Greater => out.push((v.clone(), e - sub)),
            }
        }
        if j < divisor.factors.len() {
            return None;
        }
        Some(Monomial { factors: out })
    }

    pub fn gcd(&self, other: &Monomial) -> Monomial {
        Monomial {
            factors: self
                .factors
                .iter()
                .filter_map(|(v, e)| {
                    let m = (*e).min(other.exponent(v));
                    (m > 0).then(|| (v.clone(), m))
                })
                .collect(),
        }
    }

    pub fn lcm(&self, other: &Monomial) -> Monomial {
        let g = self.gcd(other);
        self.mul(other).checked_div(&g).expect("gcd divides product")
    }

    /// Splits into the part over variables accepted by `pred` and the rest.
    pub fn split<F: Fn(&Indeterminate) -> bool>(&self, pred: F) -> (Monomial, Monomial) {
        let (a, b): (Vec<_>, Vec<_>) = self.factors.iter().cloned().partition(|(v, _)| pred(v));
        (Monomial { factors: a }, Monomial { factors: b })
    }

    /// Applies a variable renaming. The map need not be order preserving.
    pub fn map_variables<F: Fn(&Indeterminate) -> Indeterminate>(&self, f: F) -> Monomial {
        Monomial::from_factors(self.factors.iter().map(|(v, e)| (f(v), *e)))
    }

    /// Removes `exp` copies of `v` (panics if not present that often).
    pub fn without(&self, v: &Indeterminate, exp: u32) -> Monomial {
        self.checked_div(&Monomial::power(v.clone(), exp))
            .expect("monomial does not contain the factor")
    }

    pub fn fmt_with(&self, f: &mut fmt::Formatter<'_>, namer: &dyn Fn(&Indeterminate) -> String) -> fmt::Result {
        if self.is_one() {
            return write!(f, "1");
        }
        for (k, (v, e)) in self.factors.iter().enumerate() {
            if k > 0 {
                write!(f, "*")?;
            }
            write!(f, "{}", namer(v))?;
            if *e > 1 {
                write!(f, "^{e}")?;
            }
        }
        Ok(())
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        let mut a = self.factors.iter().rev();
        let mut b = other.factors.iter().rev();
        loop {
            match (a.next(), b.next()) {
                (None, None) => return Ordering::Equal,
                (Some(_), None) => return Ordering::Greater,
                (None, Some(_)) => return Ordering::Less,
                (Some((va, ea)), Some((vb, eb))) => match va.cmp(vb) {
                    Ordering::Equal => match ea.cmp(eb) {
                        Ordering::Equal => continue,
                        o => return o,
                    },
                    o => return o,
                },
            }
        }
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_with(f, &|v| v.to_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::indeterminate::Role;

    fn x() -> Indeterminate {
        Indeterminate::signal("x", Role::State, 0)
    }
    fn y() -> Indeterminate {
        Indeterminate::signal("y", Role::Output, 0)
    }

    #[test]
    fn lex_order_greatest_variable_first() {
        let mx = Monomial::var(x());
        let my2 = Monomial::power(y(), 2);
        let mxy = mx.mul(&Monomial::var(y()));
        assert!(mx > my2);
        assert!(mxy > mx);
        assert!(Monomial::one() < my2);
    }

    #[test]
    fn division_and_lcm() {
        let a = Monomial::from_factors([(x(), 2), (y(), 1)]);
        let b = Monomial::from_factors([(x(), 1), (y(), 3)]);
        assert_eq!(a.lcm(&b), Monomial::from_factors([(x(), 2), (y(), 3)]));
        assert_eq!(a.gcd(&b), Monomial::from_factors([(x(), 1), (y(), 1)]));
        assert_eq!(a.checked_div(&b), None);
        assert_eq!(a.checked_div(&Monomial::var(x())), Some(Monomial::from_factors([(x(), 1), (y(), 1)])));
        assert!(Monomial::var(y()).divides(&a));
        assert_eq!(
            Monomial::var(Indeterminate::parameter(1)).checked_div(&Monomial::var(x())),
            None
        );
    }

    #[test]
    fn from_factors_merges() {
        let m = Monomial::from_factors([(y(), 1), (x(), 1), (y(), 2), (x(), 0)]);
        assert_eq!(m.exponent(&y()), 3);
        assert_eq!(m.exponent(&x()), 1);
        assert_eq!(m.degree(), 4);
    }
}
