//! Buchberger's algorithm over an arbitrary coefficient field.

use std::cmp::Ordering;
use std::fmt::Debug;

use lpv_symbolic::{Expression, Indeterminate, MonomialOrder, Polynomial, Rational};
use num_traits::{One, Zero};

use crate::error::{CoreError, Result};

/// Coefficient field for Gröbner computations.
pub trait Field: Clone + PartialEq + Debug + Send + Sync {
    fn zero() -> Self;
    fn one() -> Self;
    fn from_rational(r: &Rational) -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn neg(&self) -> Self;
    /// Panics on zero.
    fn inv(&self) -> Self;
    fn is_one(&self) -> bool {
        *self == Self::one()
    }
    fn render(&self, namer: &dyn Fn(&Indeterminate) -> String) -> String;
    /// True when the rendering needs parentheses as a product factor.
    fn is_compound(&self) -> bool;
}

impl Field for Rational {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn inv(&self) -> Self {
        self.recip()
    }
    fn render(&self, _: &dyn Fn(&Indeterminate) -> String) -> String {
        self.to_string()
    }
    fn is_compound(&self) -> bool {
        false
    }
}

impl Field for Expression {
    fn zero() -> Self {
        Expression::zero()
    }
    fn one() -> Self {
        Expression::one()
    }
    fn from_rational(r: &Rational) -> Self {
        Expression::constant(r.clone())
    }
    fn is_zero(&self) -> bool {
        Expression::is_zero(self)
    }
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn neg(&self) -> Self {
        -self
    }
    fn inv(&self) -> Self {
        self.recip().expect("inverse of zero")
    }
    fn render(&self, namer: &dyn Fn(&Indeterminate) -> String) -> String {
        self.render_with(namer)
    }
    fn is_compound(&self) -> bool {
        !(self.is_polynomial() && self.numerator().len() <= 1)
    }
}

type Exps = Vec<u32>;

/// Polynomial over `F` in a fixed variable sequence; terms are kept in
/// strictly decreasing order under the ring's monomial order.
#[derive(Clone, Debug, PartialEq)]
pub struct GPoly<F> {
    terms: Vec<(Exps, F)>,
}

/// Variable sequence plus monomial order.
#[derive(Clone, Debug, PartialEq)]
pub struct Ring {
    pub order: MonomialOrder,
    /// Display names, parallel to the order's variables.
    pub names: Vec<String>,
}

impl Ring {
    pub fn new(order: MonomialOrder, names: Vec<String>) -> Self {
        assert_eq!(order.variables().len(), names.len());
        Ring { order, names }
    }

    pub fn nvars(&self) -> usize {
        self.order.variables().len()
    }

    fn cmp(&self, a: &Exps, b: &Exps) -> Ordering {
        self.order.compare_exponents(a, b)
    }

    /// Converts a polynomial whose ring variables are those of the order;
    /// every other indeterminate goes into the coefficient via `coeff`.
    pub fn poly_from<F: Field>(&self, p: &Polynomial, coeff: &dyn Fn(&Polynomial) -> F) -> GPoly<F> {
        let vars = self.order.variables();
        let collected = p.collect(|v| vars.contains(v));
        let terms = collected
            .iter()
            .map(|(m, c)| (self.order.exponents(m).expect("variable in ring"), coeff(c)))
            .filter(|(_, c)| !c.is_zero())
            .collect();
        self.normalize(terms)
    }

    fn normalize<F: Field>(&self, mut terms: Vec<(Exps, F)>) -> GPoly<F> {
        terms.sort_by(|a, b| self.cmp(&b.0, &a.0));
        let mut out: Vec<(Exps, F)> = Vec::with_capacity(terms.len());
        for (e, c) in terms {
            match out.last_mut() {
                Some((le, lc)) if *le == e => *lc = lc.add(&c),
                _ => out.push((e, c)),
            }
        }
        out.retain(|(_, c)| !c.is_zero());
        GPoly { terms: out }
    }

    pub fn render<F: Field>(&self, p: &GPoly<F>, namer: &dyn Fn(&Indeterminate) -> String) -> String {
        if p.terms.is_empty() {
            return "0".into();
        }
        let mut s = String::new();
        for (k, (e, c)) in p.terms.iter().enumerate() {
            let mono: Vec<String> = e
                .iter()
                .zip(&self.names)
                .filter(|(x, _)| **x > 0)
                .map(|(x, n)| if *x == 1 { n.clone() } else { format!("{n}^{x}") })
                .collect();
            let mut coef = c.render(namer);
            let negative = !c.is_compound() && coef.starts_with('-');
            if negative {
                coef.remove(0);
            }
            let sep = match (k, negative) {
                (0, true) => "-",
                (0, false) => "",
                (_, true) => " - ",
                (_, false) => " + ",
            };
            s.push_str(sep);
            let mono = mono.join("*");
            let coef = if c.is_compound() { format!("({coef})") } else { coef };
            if mono.is_empty() {
                s.push_str(&coef);
            } else if coef == "1" {
                s.push_str(&mono);
            } else {
                s.push_str(&format!("{coef}*{mono}"));
            }
        }
        s
    }

    fn add<F: Field>(&self, a: &GPoly<F>, b: &GPoly<F>) -> GPoly<F> {
        let (mut i, mut j) = (0, 0);
        let mut out = Vec::with_capacity(a.terms.len() + b.terms.len());
        while i < a.terms.len() && j < b.terms.len() {
            match self.cmp(&a.terms[i].0, &b.terms[j].0) {
                Ordering::Greater => {
                    out.push(a.terms[i].clone());
                    i += 1;
                }
                Ordering::Less => {
                    out.push(b.terms[j].clone());
                    j += 1;
                }
                Ordering::Equal => {
                    let c = a.terms[i].1.add(&b.terms[j].1);
                    if !c.is_zero() {
                        out.push((a.terms[i].0.clone(), c));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a.terms[i..]);
        out.extend_from_slice(&b.terms[j..]);
        GPoly { terms: out }
    }

    /// `c * x^e * p`; order-preserving, so no re-sort.
    fn mul_term<F: Field>(&self, p: &GPoly<F>, c: &F, e: &Exps) -> GPoly<F> {
        GPoly {
            terms: p
                .terms
                .iter()
                .map(|(pe, pc)| (pe.iter().zip(e).map(|(a, b)| a + b).collect(), pc.mul(c)))
                .collect(),
        }
    }

    fn s_poly<F: Field>(&self, f: &GPoly<F>, g: &GPoly<F>) -> GPoly<F> {
        let (fe, fc) = &f.terms[0];
        let (ge, gc) = &g.terms[0];
        let l = lcm(fe, ge);
        let a = self.mul_term(f, &fc.inv(), &sub(&l, fe));
        let b = self.mul_term(g, &gc.inv().neg(), &sub(&l, ge));
        self.add(&a, &b)
    }

    /// Full reduction of `p` modulo `basis`.
    pub fn reduce<F: Field>(&self, p: &GPoly<F>, basis: &[GPoly<F>]) -> GPoly<F> {
        let mut p = p.clone();
        let mut rem: Vec<(Exps, F)> = Vec::new();
        while let Some((pe, pc)) = p.terms.first().cloned() {
            let divisor = basis.iter().find(|g| divides(&g.terms[0].0, &pe));
            match divisor {
                Some(g) => {
                    let (ge, gc) = &g.terms[0];
                    let c = pc.mul(&gc.inv()).neg();
                    p = self.add(&p, &self.mul_term(g, &c, &sub(&pe, ge)));
                }
                None => {
                    rem.push(p.terms.remove(0));
                }
            }
        }
        GPoly { terms: rem }
    }

    pub fn monic<F: Field>(&self, p: &GPoly<F>) -> GPoly<F> {
        match p.terms.first() {
            None => p.clone(),
            Some((_, c)) if c.is_one() => p.clone(),
            Some((_, c)) => {
                let inv = c.inv();
                GPoly { terms: p.terms.iter().map(|(e, k)| (e.clone(), k.mul(&inv))).collect() }
            }
        }
    }
}

fn lcm(a: &Exps, b: &Exps) -> Exps {
    a.iter().zip(b).map(|(x, y)| *x.max(y)).collect()
}

fn sub(a: &Exps, b: &Exps) -> Exps {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn divides(a: &Exps, b: &Exps) -> bool {
    a.iter().zip(b).all(|(x, y)| x <= y)
}

fn coprime(a: &Exps, b: &Exps) -> bool {
    a.iter().zip(b).all(|(x, y)| *x == 0 || *y == 0)
}

impl<F: Field> GPoly<F> {
    pub fn zero() -> Self {
        GPoly { terms: Vec::new() }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &[(Vec<u32>, F)] {
        &self.terms
    }

    pub fn leading_exponents(&self) -> Option<&[u32]> {
        self.terms.first().map(|(e, _)| e.as_slice())
    }

    pub fn is_constant(&self) -> bool {
        self.terms.len() == 1 && self.terms[0].0.iter().all(|e| *e == 0)
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.iter().map(|(e, _)| e.iter().sum()).max().unwrap_or(0)
    }

    /// Indices of variables that occur.
    pub fn support(&self) -> Vec<usize> {
        let n = self.terms.first().map_or(0, |(e, _)| e.len());
        (0..n).filter(|&i| self.terms.iter().any(|(e, _)| e[i] > 0)).collect()
    }

    /// Dense univariate coefficients in variable `v` (lowest degree first),
    /// if no other variable occurs.
    pub fn as_univariate(&self, v: usize) -> Option<Vec<F>> {
        if self.support().iter().any(|&i| i != v) {
            return None;
        }
        let deg = self.terms.iter().map(|(e, _)| e[v]).max().unwrap_or(0) as usize;
        let mut out = vec![F::zero(); deg + 1];
        for (e, c) in &self.terms {
            out[e[v] as usize] = c.clone();
        }
        Some(out)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GroebnerBudget {
    pub max_pairs: usize,
    pub max_degree: u32,
}

impl Default for GroebnerBudget {
    fn default() -> Self {
        GroebnerBudget { max_pairs: 20_000, max_degree: 48 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GroebnerBasis<F> {
    pub ring: Ring,
    pub generators: Vec<GPoly<F>>,
}

impl<F: Field> GroebnerBasis<F> {
    pub fn is_unit(&self) -> bool {
        self.generators.len() == 1 && self.generators[0].is_constant()
    }

    pub fn reduce(&self, p: &GPoly<F>) -> GPoly<F> {
        self.ring.reduce(p, &self.generators)
    }

    pub fn render(&self, namer: &dyn Fn(&Indeterminate) -> String) -> Vec<String> {
        self.generators.iter().map(|g| self.ring.render(g, namer)).collect()
    }

    /// Buchberger criterion: every S-polynomial reduces to zero.
    pub fn satisfies_buchberger_criterion(&self) -> bool {
        let g = &self.generators;
        (0..g.len()).all(|i| (i + 1..g.len()).all(|j| self.reduce(&self.ring.s_poly(&g[i], &g[j])).is_zero()))
    }

    /// No leading monomial divides a term of another generator; monic.
    pub fn is_reduced(&self) -> bool {
        let g = &self.generators;
        g.iter().all(|p| p.terms[0].1.is_one())
            && (0..g.len()).all(|i| {
                (0..g.len()).all(|j| i == j || !g[j].terms.iter().any(|(e, _)| divides(&g[i].terms[0].0, e)))
            })
    }
}

/// Reduced Gröbner basis of the ideal generated by `gens`.
pub fn groebner<F: Field>(ring: &Ring, gens: &[GPoly<F>], budget: GroebnerBudget) -> Result<GroebnerBasis<F>> {
    let mut basis: Vec<GPoly<F>> = Vec::new();
    for g in gens.iter().filter(|g| !g.is_zero()) {
        let h = ring.monic(&ring.reduce(g, &basis));
        if !h.is_zero() {
            basis.push(h);
        }
    }
    if basis.iter().any(GPoly::is_constant) {
        return Ok(unit_basis(ring));
    }
    let mut pairs: Vec<(usize, usize)> = Vec::new();
    for j in 0..basis.len() {
        for i in 0..j {
            pairs.push((i, j));
        }
    }
    let mut done: std::collections::HashSet<(usize, usize)> = std::collections::HashSet::new();
    let mut processed = 0usize;
    while !pairs.is_empty() {
        // normal selection strategy: smallest lcm first
        let (k, _) = pairs
            .iter()
            .enumerate()
            .min_by(|(_, a), (_, b)| {
                let la = lcm(&basis[a.0].terms[0].0, &basis[a.1].terms[0].0);
                let lb = lcm(&basis[b.0].terms[0].0, &basis[b.1].terms[0].0);
                ring.cmp(&la, &lb).then(a.cmp(b))
            })
            .expect("nonempty");
        let (i, j) = pairs.swap_remove(k);
        done.insert((i, j));
        processed += 1;
        if processed > budget.max_pairs {
            return Err(CoreError::BudgetExceeded(format!("more than {} S-pairs", budget.max_pairs)));
        }
        let (ei, ej) = (&basis[i].terms[0].0, &basis[j].terms[0].0);
        if coprime(ei, ej) {
            continue;
        }
        let l = lcm(ei, ej);
        let key = |a: usize, b: usize| if a < b { (a, b) } else { (b, a) };
        let chain = (0..basis.len()).any(|m| {
            m != i && m != j && divides(&basis[m].terms[0].0, &l) && done.contains(&key(i, m)) && done.contains(&key(j, m))
        });
        if chain {
            continue;
        }
        let h = ring.reduce(&ring.s_poly(&basis[i], &basis[j]), &basis);
        if h.is_zero() {
            continue;
        }
        if h.is_constant() {
            return Ok(unit_basis(ring));
        }
        if h.total_degree() > budget.max_degree {
            return Err(CoreError::BudgetExceeded(format!("basis degree above {}", budget.max_degree)));
        }
        let n = basis.len();
        basis.push(ring.monic(&h));
        for m in 0..n {
            pairs.push((m, n));
        }
    }
    Ok(GroebnerBasis { ring: ring.clone(), generators: interreduce(ring, basis) })
}

fn unit_basis<F: Field>(ring: &Ring) -> GroebnerBasis<F> {
    GroebnerBasis {
        ring: ring.clone(),
        generators: vec![GPoly { terms: vec![(vec![0; ring.nvars()], F::one())] }],
    }
}

fn interreduce<F: Field>(ring: &Ring, mut basis: Vec<GPoly<F>>) -> Vec<GPoly<F>> {
    // minimal basis: drop generators whose leading monomial is divisible by another's
    basis.sort_by(|a, b| ring.cmp(&a.terms[0].0, &b.terms[0].0));
    let mut minimal: Vec<GPoly<F>> = Vec::new();
    for g in basis {
        if !minimal.iter().any(|m| divides(&m.terms[0].0, &g.terms[0].0)) {
            minimal.push(g);
        }
    }
    let mut out = Vec::with_capacity(minimal.len());
    for i in 0..minimal.len() {
        let others: Vec<GPoly<F>> = minimal
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, g)| g.clone())
            .collect();
        let (lead, tail) = minimal[i].terms.split_first().expect("nonzero");
        let tail = ring.reduce(&GPoly { terms: tail.to_vec() }, &others);
        let mut terms = vec![lead.clone()];
        terms.extend(tail.terms);
        out.push(ring.monic(&GPoly { terms }));
    }
    out
}

/// Degree of the squarefree part of a univariate polynomial (dense,
/// lowest degree first).
pub fn squarefree_degree<F: Field>(p: &[F]) -> usize {
    let deg = p.len().saturating_sub(1);
    if deg == 0 {
        return 0;
    }
    let dp: Vec<F> = p
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, c)| c.mul(&F::from_rational(&Rational::from_integer((k as i64).into()))))
        .collect();
    deg - univariate_gcd(p.to_vec(), dp).len().saturating_sub(1)
}

fn trim<F: Field>(v: &mut Vec<F>) {
    while v.last().is_some_and(F::is_zero) {
        v.pop();
    }
}

fn univariate_gcd<F: Field>(mut a: Vec<F>, mut b: Vec<F>) -> Vec<F> {
    trim(&mut a);
    trim(&mut b);
    while !b.is_empty() {
        let lb = b.last().expect("nonempty").inv();
        while a.len() >= b.len() {
            let q = a.last().expect("nonempty").mul(&lb);
            let off = a.len() - b.len();
            for (i, c) in b.iter().enumerate() {
                a[off + i] = a[off + i].sub(&q.mul(c));
            }
            a.pop();
            trim(&mut a);
        }
        std::mem::swap(&mut a, &mut b);
    }
    a
}
