//! Exact symbolic algebra over the rationals for signal/parameter models:
//! indeterminates with a fixed global order, sparse multivariate
//! polynomials, multivariate gcd, and canonical rational functions.

pub mod error;
pub mod expression;
pub mod gcd;
pub mod indeterminate;
pub mod monomial;
pub mod order;
pub mod polynomial;

pub type Rational = num_rational::BigRational;

pub use error::{Result, SymbolicError};
pub use expression::Expression;
pub use indeterminate::{Indeterminate, Role, Signal};
pub use monomial::Monomial;
pub use order::MonomialOrder;
pub use polynomial::Polynomial;

/// Rational from an integer.
pub fn rat(n: i64) -> Rational {
    Rational::from_integer(n.into())
}

/// Rational `n/d`; panics if `d == 0`.
pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}
