use lpv_symbolic::SymbolicError;

use crate::model::ModelError;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum CoreError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Symbolic(#[from] SymbolicError),
    #[error("order {order} needs {columns} stacked state columns, above the cap of {cap}")]
    OrderTooLargeForBudget { order: u32, columns: usize, cap: usize },
    #[error("the left null-space is empty; increase the order")]
    EmptyNullspace,
    #[error("state `{0}` survived elimination")]
    StateNotEliminated(String),
    #[error("no coefficient depends on the parameters")]
    NoParameterDependence,
    #[error("Groebner budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("a summary denominator vanishes at the chosen parameter values")]
    DenominatorVanishesAtTheta,
    #[error("unknown engine `{0}`")]
    UnknownEngine(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
}

pub type Result<T, E = CoreError> = std::result::Result<T, E>;
