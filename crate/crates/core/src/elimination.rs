//! Left null-space and rank over the rational-function field by
//! fraction-free (Bareiss) elimination.

use lpv_symbolic::gcd::{gcd_all, lcm};
use lpv_symbolic::{Expression, Polynomial, Rational};
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::matrix::ExprMatrix;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NullspaceBasis {
    /// Each row `ω` satisfies `ω O = 0`; polynomial, primitive, with a
    /// positive leading coefficient at its free position.
    pub rows: Vec<Vec<Expression>>,
    pub rank_of_o: usize,
    /// Row of `O` whose dependency each basis row expresses; the basis row has
    /// a nonzero entry there and zeros at the other free positions.
    pub free_rows: Vec<usize>,
}

impl NullspaceBasis {
    pub fn dim(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

fn pivot_key(p: &Polynomial) -> (u32, usize) {
    (p.total_degree(), p.len())
}

/// Clears the denominators of a row of expressions.
fn polynomial_row(row: &[Expression]) -> Vec<Polynomial> {
    let mut l = Polynomial::one();
    for e in row {
        if !e.is_polynomial() {
            l = lcm(&l, e.denominator());
        }
    }
    row.iter()
        .map(|e| {
            if e.is_zero() {
                return Polynomial::zero();
            }
            let f = l.exact_div(e.denominator()).expect("lcm multiple");
            e.numerator() * &f
        })
        .collect()
}

struct Echelon {
    rows: Vec<Vec<Polynomial>>,
    pivots: Vec<usize>,
}

/// Fraction-free row echelon form. Row `k < pivots.len()` has its pivot in
/// column `pivots[k]` and zeros to the left of it.
fn bareiss(mut a: Vec<Vec<Polynomial>>, cols: usize) -> Echelon {
    let nrows = a.len();
    let mut pivots = Vec::new();
    let mut prev = Polynomial::one();
    let mut r = 0;
    for c in 0..cols {
        if r == nrows {
            break;
        }
        let best = (r..nrows)
            .filter(|&i| !a[i][c].is_zero())
            .min_by(|&i, &j| {
                pivot_key(&a[i][c])
                    .cmp(&pivot_key(&a[j][c]))
                    .then_with(|| a[i][c].cmp(&a[j][c]))
                    .then(i.cmp(&j))
            });
        let Some(best) = best else { continue };
        a.swap(r, best);
        let piv = a[r][c].clone();
        for i in r + 1..nrows {
            let lead = std::mem::take(&mut a[i][c]);
            let mut updated: Vec<Polynomial> = (c + 1..cols)
                .map(|j| &(&piv * &a[i][j]) - &(&lead * &a[r][j]))
                .collect();
            if !prev.is_one() {
                let divided: Option<Vec<Polynomial>> = updated.iter().map(|t| t.exact_div(&prev)).collect();
                // Bareiss divisions are exact; keep the undivided row otherwise
                if let Some(d) = divided {
                    updated = d;
                }
            }
            for (off, v) in updated.into_iter().enumerate() {
                a[i][c + 1 + off] = v;
            }
        }
        pivots.push(c);
        prev = piv;
        r += 1;
    }
    Echelon { rows: a, pivots }
}

/// Rank over the field of rational functions.
pub fn rank(m: &ExprMatrix) -> usize {
    let rows: Vec<Vec<Polynomial>> = (0..m.rows()).map(|i| polynomial_row(m.row(i))).collect();
    bareiss(rows, m.cols()).pivots.len()
}

/// Left null-space with the natural row order.
pub fn left_nullspace(o: &ExprMatrix) -> NullspaceBasis {
    let order: Vec<usize> = (0..o.rows()).collect();
    left_nullspace_ordered(o, &order)
}

/// Left null-space; rows of `O` listed late in `order` are preferred as
/// free positions.
pub fn left_nullspace_ordered(o: &ExprMatrix, order: &[usize]) -> NullspaceBasis {
    assert_eq!(order.len(), o.rows(), "order must list every row");
    let ncols = o.rows();
    // M = O^T with columns permuted by `order`
    let m: Vec<Vec<Polynomial>> = (0..o.cols())
        .map(|c| {
            let row: Vec<Expression> = order.iter().map(|&k| o.get(k, c).clone()).collect();
            polynomial_row(&row)
        })
        .collect();
    let ech = bareiss(m, ncols);
    let rank_of_o = ech.pivots.len();
    let is_pivot = |c: usize| ech.pivots.contains(&c);
    let mut rows = Vec::new();
    let mut free_rows = Vec::new();
    for f in (0..ncols).filter(|&c| !is_pivot(c)) {
        let mut x = vec![Expression::zero(); ncols];
        x[f] = Expression::one();
        for (k, &pc) in ech.pivots.iter().enumerate().rev() {
            if pc > f {
                continue;
            }
            let row = &ech.rows[k];
            let mut acc = Expression::zero();
            for j in pc + 1..ncols {
                if !row[j].is_zero() && !x[j].is_zero() {
                    acc = &acc + &(&Expression::from(row[j].clone()) * &x[j]);
                }
            }
            if !acc.is_zero() {
                x[pc] = -(&acc / &Expression::from(row[pc].clone()));
            }
        }
        let mut poly = polynomial_row(&x);
        let g = gcd_all(poly.iter().filter(|p| !p.is_zero()));
        if !g.is_one() {
            poly = poly.iter().map(|p| p.exact_div(&g).expect("gcd divides")).collect();
        }
        let mut content = vector_content(&poly);
        if poly[f].leading_coefficient().is_negative() {
            content = -content;
        }
        let mut unscaled = vec![Expression::zero(); ncols];
        for (k, p) in poly.into_iter().enumerate() {
            let p = p.scale(&content.recip());
            unscaled[order[k]] = Expression::from(p);
        }
        debug_assert!(!unscaled[order[f]].numerator().leading_coefficient().is_negative());
        rows.push(unscaled);
        free_rows.push(order[f]);
    }
    NullspaceBasis { rows, rank_of_o, free_rows }
}

/// Positive rational gcd of the coefficients of all entries.
pub(crate) fn vector_content(v: &[Polynomial]) -> Rational {
    let mut num = BigInt::zero();
    let mut den = BigInt::one();
    for p in v {
        for (_, c) in p.terms() {
            num = num.gcd(c.numer());
            den = den.lcm(c.denom());
        }
    }
    if num.is_zero() {
        return Rational::one();
    }
    Rational::new(num, den)
}

/// `ω O` for a candidate row.
pub fn residual(o: &ExprMatrix, omega: &[Expression]) -> Vec<Expression> {
    o.vec_mul(omega)
}
