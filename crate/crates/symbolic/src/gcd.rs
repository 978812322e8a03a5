//! Multivariate polynomial gcd over the rationals.
//!
//! Recursive: a polynomial is viewed as univariate in its greatest variable
//! with coefficients in the ring of the remaining variables, and the gcd of
//! primitive parts is obtained by a primitive pseudo-remainder sequence.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::Zero;

use crate::indeterminate::Indeterminate;
use crate::monomial::Monomial;
use crate::polynomial::Polynomial;
use crate::Rational;

/// Greatest common divisor, normalized to leading coefficient 1.
/// `gcd(0, 0) = 0`.
pub fn gcd(a: &Polynomial, b: &Polynomial) -> Polynomial {
    if a.is_zero() {
        return b.monic();
    }
    if b.is_zero() {
        return a.monic();
    }
    if a.is_constant() || b.is_constant() {
        return Polynomial::one();
    }
    if a == b {
        return a.monic();
    }
    if a.is_monomial() {
        return monomial_gcd(a.leading_monomial().unwrap(), b);
    }
    if b.is_monomial() {
        return monomial_gcd(b.leading_monomial().unwrap(), a);
    }
    let (small, big) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    if big.exact_div(small).is_some() {
        return small.monic();
    }

    // A gcd free of some common variable reduces to a gcd of contents; the
    // univariate image degree under a lucky evaluation detects this cheaply.
    let common: Vec<Indeterminate> = a.variables().intersection(&b.variables()).cloned().collect();
    if common.is_empty() {
        return Polynomial::one();
    }
    for w in common.iter().rev() {
        if image_degree(a, b, w) == Some(0) {
            return gcd(&content_in(a, w), &content_in(b, w));
        }
    }

    let v = match (a.main_variable(), b.main_variable()) {
        (Some(x), Some(y)) => x.max(y),
        _ => unreachable!("non-constant polynomials have variables"),
    };
    let (da, db) = (a.degree_in(&v), b.degree_in(&v));
    if da == 0 {
        return gcd(a, &content_in(b, &v));
    }
    if db == 0 {
        return gcd(&content_in(a, &v), b);
    }
    let ca = content_in(a, &v);
    let cb = content_in(b, &v);
    let c = gcd(&ca, &cb);
    let pa = a.exact_div(&ca).expect("content divides");
    let pb = b.exact_div(&cb).expect("content divides");
    let g = primitive_prs_gcd(pa, pb, &v);
    (&c * &g).monic()
}

/// gcd of a list; zero for an empty or all-zero list.
pub fn gcd_all<'a, I: IntoIterator<Item = &'a Polynomial>>(items: I) -> Polynomial {
    let mut g = Polynomial::zero();
    for p in items {
        if g.is_one() {
            break;
        }
        g = gcd(&g, p);
    }
    g
}

/// Least common multiple, leading coefficient 1.
pub fn lcm(a: &Polynomial, b: &Polynomial) -> Polynomial {
    if a.is_zero() || b.is_zero() {
        return Polynomial::zero();
    }
    let g = gcd(a, b);
    (&a.exact_div(&g).expect("gcd divides") * b).monic()
}

/// Degree of the gcd of univariate images in `v`, with every other variable
/// bound to a fixed small integer. Upper bound on the true degree in `v`
/// whenever it is `Some`; `None` when the point lowers a degree.
fn image_degree(a: &Polynomial, b: &Polynomial, v: &Indeterminate) -> Option<u32> {
    for attempt in 0..3i64 {
        let mut point = BTreeMap::new();
        for (i, w) in a.variables().union(&b.variables()).enumerate() {
            if w != v {
                point.insert(w.clone(), Rational::from_integer(BigInt::from(EVAL_POINTS[i % EVAL_POINTS.len()] + 17 * attempt)));
            }
        }
        let ua = univariate_image(a, v, &point);
        let ub = univariate_image(b, v, &point);
        if ua.len() as u32 != a.degree_in(v) + 1 || ub.len() as u32 != b.degree_in(v) + 1 {
            continue;
        }
        return Some(univariate_gcd_degree(ua, ub));
    }
    None
}

const EVAL_POINTS: [i64; 12] = [3, 5, 7, 11, 13, 19, 23, 29, 31, 37, 41, 43];

/// Dense coefficients, lowest degree first, trailing zeros trimmed.
fn univariate_image(p: &Polynomial, v: &Indeterminate, point: &BTreeMap<Indeterminate, Rational>) -> Vec<Rational> {
    let mut out: Vec<Rational> = p
        .coefficients_in(v)
        .iter()
        .map(|c| c.evaluate(point).expect("all other variables bound"))
        .collect();
    while out.last().is_some_and(|c| c.is_zero()) {
        out.pop();
    }
    out
}

fn univariate_gcd_degree(mut a: Vec<Rational>, mut b: Vec<Rational>) -> u32 {
    if a.len() < b.len() {
        std::mem::swap(&mut a, &mut b);
    }
    while !b.is_empty() {
        // a mod b
        let lb = b.last().unwrap().clone();
        while a.len() >= b.len() {
            let q = a.last().unwrap() / &lb;
            let off = a.len() - b.len();
            for (i, c) in b.iter().enumerate() {
                a[off + i] -= &q * c;
            }
            a.pop();
            while a.last().is_some_and(|c| c.is_zero()) {
                a.pop();
            }
        }
        std::mem::swap(&mut a, &mut b);
    }
    (a.len() as u32).saturating_sub(1)
}

fn monomial_gcd(m: &Monomial, p: &Polynomial) -> Polynomial {
    let mut g = m.clone();
    for (t, _) in p.terms() {
        g = g.gcd(t);
        if g.is_one() {
            break;
        }
    }
    Polynomial::term(num_traits::One::one(), g)
}

/// Content with respect to `v`: gcd of the coefficients when viewed as a
/// polynomial in `v`.
pub fn content_in(p: &Polynomial, v: &Indeterminate) -> Polynomial {
    let coeffs = p.coefficients_in(v);
    gcd_all(coeffs.iter().filter(|c| !c.is_zero()))
}

pub fn primitive_part_in(p: &Polynomial, v: &Indeterminate) -> Polynomial {
    if p.is_zero() {
        return Polynomial::zero();
    }
    p.exact_div(&content_in(p, v)).expect("content divides")
}

fn leading_coefficient_in(p: &Polynomial, v: &Indeterminate) -> Polynomial {
    p.coefficients_in(v).pop().unwrap_or_default()
}

/// Pseudo-remainder of `a` by `b` in `v` (up to a factor that is a power of
/// the leading coefficient of `b`).
fn pseudo_remainder(a: &Polynomial, b: &Polynomial, v: &Indeterminate) -> Polynomial {
    let db = b.degree_in(v);
    let lb = leading_coefficient_in(b, v);
    let mut r = a.clone();
    while !r.is_zero() && r.degree_in(v) >= db {
        let dr = r.degree_in(v);
        let lr = leading_coefficient_in(&r, v);
        let shift = Monomial::power(v.clone(), dr - db);
        r = &(&r * &lb) - &(&lr * &b.mul_monomial(&shift));
    }
    r
}

fn primitive_prs_gcd(a: Polynomial, b: Polynomial, v: &Indeterminate) -> Polynomial {
    let (mut r0, mut r1) = if a.degree_in(v) >= b.degree_in(v) { (a, b) } else { (b, a) };
    loop {
        let r = pseudo_remainder(&r0, &r1, v);
        if r.is_zero() {
            return primitive_part_in(&r1, v).primitive();
        }
        if r.degree_in(v) == 0 {
            return Polynomial::one();
        }
        r0 = r1;
        r1 = primitive_part_in(&r, v).primitive();
        debug_assert!(!r1.leading_coefficient().is_zero());
    }
}
