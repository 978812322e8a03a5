use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SymbolicError {
    #[error("a denominator vanishes identically")]
    DenominatorVanishes,
    #[error("operation undefined for the zero polynomial")]
    ZeroPolynomial,
    #[error("denominator depends on the collected variables")]
    NotPolynomialInVars,
    #[error("no value bound for indeterminate `{0}`")]
    UnboundIndeterminate(String),
}

pub type Result<T, E = SymbolicError> = std::result::Result<T, E>;
