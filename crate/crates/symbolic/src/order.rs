use std::cmp::Ordering;

use crate::indeterminate::Indeterminate;
use crate::monomial::Monomial;

/// Monomial order over an explicit variable sequence; the first variable
/// is the greatest.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MonomialOrder {
    Lex(Vec<Indeterminate>),
    DegRevLex(Vec<Indeterminate>),
}

impl MonomialOrder {
    pub fn variables(&self) -> &[Indeterminate] {
        match self {
            MonomialOrder::Lex(v) | MonomialOrder::DegRevLex(v) => v,
        }
    }

    pub fn position(&self, v: &Indeterminate) -> Option<usize> {
        self.variables().iter().position(|w| w == v)
    }

    pub fn compare_exponents(&self, a: &[u32], b: &[u32]) -> Ordering {
        match self {
            MonomialOrder::Lex(_) => a.cmp(b),
            MonomialOrder::DegRevLex(_) => {
                let da: u64 = a.iter().map(|&e| e as u64).sum();
                let db: u64 = b.iter().map(|&e| e as u64).sum();
                da.cmp(&db).then_with(|| {
                    for (x, y) in a.iter().zip(b).rev() {
                        if x != y {
                            return y.cmp(x);
                        }
                    }
                    Ordering::Equal
                })
            }
        }
    }

    /// Exponent vector of `m` over this order's variables, or `None` if `m`
    /// mentions a variable outside the sequence.
    pub fn exponents(&self, m: &Monomial) -> Option<Vec<u32>> {
        let vars = self.variables();
        let mut out = vec![0u32; vars.len()];
        for (v, e) in m.factors() {
            out[self.position(v)?] = *e;
        }
        Some(out)
    }

    pub fn compare(&self, a: &Monomial, b: &Monomial) -> Ordering {
        let ea = self.exponents(a).expect("variable outside the order");
        let eb = self.exponents(b).expect("variable outside the order");
        self.compare_exponents(&ea, &eb)
    }
}
