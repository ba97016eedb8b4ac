//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("syntax error at column {col}: {msg}")]
    Parse { col: usize, msg: String },

    #[error("index {index} out of range 1..={max}")]
    IndexOutOfRange { index: usize, max: usize },

    #[error("jet order {order} exceeds maximum order {max}")]
    OrderOverflow { order: usize, max: usize },

    #[error("division by zero")]
    DivisionByZero,

    #[error("missing binding for {0}")]
    MissingBinding(String),

    #[error("total derivative is undefined on momentum variable {0}")]
    MomentumDerivative(String),

    #[error("singular coefficient matrix: {0}")]
    SingularMatrix(String),

    #[error("constraint {label} is not affine in the top-order jets")]
    NonAffineConstraint { label: String },

    #[error("hamiltonian has no lagrangian counterpart: condition ({condition}) fails, {witness}")]
    NotLagrangian { condition: char, witness: String },

    #[error("fiber derivative is not affine in the momenta: {0}")]
    NonAffineFiberDerivative(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
