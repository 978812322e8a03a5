//! Stacked algebraic form `Y0 + G U = O X` of the output and state relations
//! up to derivative (or shift) order `w`.

use lpv_symbolic::{Expression, Indeterminate, Role};
use serde::Serialize;

use crate::error::{CoreError, Result};
use crate::matrix::ExprMatrix;
use crate::model::{Domain, LpvModel};

/// What a row of `O` encodes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum RowLabel {
    /// Output `output` at derivative/shift order `order`.
    Output { output: usize, order: u32 },
    /// Propagation of state `state` from order `order` to `order + 1`.
    State { state: usize, order: u32 },
}

#[derive(Clone, Debug)]
pub struct StackedSystem {
    pub domain: Domain,
    pub order: u32,
    pub y: Vec<Indeterminate>,
    pub u: Vec<Indeterminate>,
    pub x: Vec<Indeterminate>,
    pub o: ExprMatrix,
    pub g: ExprMatrix,
    /// `(Y, 0)`: outputs followed by `w*n` zeros.
    pub y0: Vec<Expression>,
    pub labels: Vec<RowLabel>,
}

impl StackedSystem {
    /// `Y0 + G U` as a column of expressions.
    pub fn known_side(&self) -> Vec<Expression> {
        let uvec: Vec<Expression> = self.u.iter().cloned().map(Expression::var).collect();
        let gu = self.g.mul_vec(&uvec);
        self.y0.iter().zip(gu).map(|(a, b)| a + &b).collect()
    }

    /// Row order for elimination: state rows, then output rows by ascending
    /// order. Late rows become the free (dependent) ones.
    pub fn elimination_order(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.labels.len()).collect();
        idx.sort_by_key(|&i| match self.labels[i] {
            RowLabel::State { state, order } => (0u8, order, state),
            RowLabel::Output { output, order } => (1u8, order, output),
        });
        idx
    }
}

/// Pascal triangle rows `0..=w`, built additively.
pub fn binom_schedule(w: u32) -> Vec<Vec<u64>> {
    let mut rows: Vec<Vec<u64>> = Vec::with_capacity(w as usize + 1);
    for i in 0..=w as usize {
        let mut row = vec![1u64; i + 1];
        for j in 1..i {
            row[j] = rows[i - 1][j - 1]
                .checked_add(rows[i - 1][j])
                .expect("binomial coefficient overflow");
        }
        rows.push(row);
    }
    rows
}

/// Default cap on the column count `(w+1)n` of `O`.
pub const DEFAULT_MAX_COLUMNS: usize = 64;

pub fn build_stack(model: &LpvModel, w: u32) -> Result<StackedSystem> {
    build_stack_capped(model, w, DEFAULT_MAX_COLUMNS)
}

pub fn build_stack_capped(model: &LpvModel, w: u32, max_columns: usize) -> Result<StackedSystem> {
    let (n, m, p) = (model.n(), model.m(), model.p());
    let wu = w as usize;
    let cols = (wu + 1) * n;
    if cols > max_columns {
        return Err(CoreError::OrderTooLargeForBudget { order: w, columns: cols, cap: max_columns });
    }
    let rows = (wu + 1) * p + wu * n;
    let signal = |name: &str, role: Role, k: u32| Indeterminate::signal(name, role, k);
    let y: Vec<Indeterminate> = (0..=w)
        .flat_map(|k| model.outputs.iter().map(move |s| signal(s, Role::Output, k)))
        .collect();
    let u: Vec<Indeterminate> = (0..=w)
        .flat_map(|k| model.inputs.iter().map(move |s| signal(s, Role::Input, k)))
        .collect();
    let x: Vec<Indeterminate> = (0..=w)
        .flat_map(|k| model.states.iter().map(move |s| signal(s, Role::State, k)))
        .collect();

    // derivs[k] = k-th derivative (or shift) of each model matrix
    let step = |mat: &ExprMatrix| match model.domain {
        Domain::Continuous => mat.differentiate(),
        Domain::Discrete => mat.shift(),
    };
    let mut a_k = vec![model.a.clone()];
    let mut b_k = vec![model.b.clone()];
    let mut c_k = vec![model.c.clone()];
    let mut d_k = vec![model.d.clone()];
    for k in 1..=wu {
        a_k.push(step(&a_k[k - 1]));
        b_k.push(step(&b_k[k - 1]));
        c_k.push(step(&c_k[k - 1]));
        d_k.push(step(&d_k[k - 1]));
    }

    let mut o = ExprMatrix::zeros(rows, cols);
    let mut g = ExprMatrix::zeros(rows, (wu + 1) * m);
    let mut labels = Vec::with_capacity(rows);
    let binom = binom_schedule(w);
    let coef = |i: usize, j: usize| -> Option<(Expression, usize)> {
        match model.domain {
            Domain::Continuous => Some((Expression::integer(binom[i][j] as i64), i - j)),
            // discrete blocks are diagonal and carry the i-th shift
            Domain::Discrete => (i == j).then(|| (Expression::one(), i)),
        }
    };

    for i in 0..=wu {
        for j in 0..=i {
            let Some((k, der)) = coef(i, j) else { continue };
            o.set_block(i * p, j * n, &c_k[der].scale(&k));
            g.set_block(i * p, j * m, &d_k[der].scale(&-&k));
        }
        for out in 0..p {
            labels.push(RowLabel::Output { output: out, order: i as u32 });
        }
    }
    let top = (wu + 1) * p;
    for i in 0..wu {
        for j in 0..=i {
            let Some((k, der)) = coef(i, j) else { continue };
            o.set_block(top + i * n, j * n, &a_k[der].scale(&-&k));
            g.set_block(top + i * n, j * m, &b_k[der].scale(&k));
        }
        o.set_block(top + i * n, (i + 1) * n, &ExprMatrix::identity(n));
        for s in 0..n {
            labels.push(RowLabel::State { state: s, order: i as u32 });
        }
    }
    let mut y0: Vec<Expression> = y.iter().cloned().map(Expression::var).collect();
    y0.resize(rows, Expression::zero());
    Ok(StackedSystem { domain: model.domain, order: w, y, u, x, o, g, y0, labels })
}
