//! Symbolic variational calculus on jet coordinates.
//!
//! Given a higher-order Lagrangian density in local jet coordinates, this
//! crate derives and verifies, with exact rational arithmetic throughout:
//!
//! - Euler-Lagrange equations and constraint (momentum) equations,
//! - the top-jet Hessian and a hyperregularity verdict,
//! - the de Donder Hamiltonian obtained by eliminating the top-order jets,
//!   and the associated Hamilton-de Donder-Weyl first-order system,
//! - generalized and classical Hamilton-Jacobi residual systems for a
//!   momentum section `T` or an ansatz `S`, with curvature/flatness of the
//!   induced jet connection,
//! - behavior of the whole picture under addition of a total divergence to
//!   the Lagrangian (momentum shift, Hamiltonian shift, residual
//!   invariance),
//! - recovery of a Lagrangian from a bare Hamiltonian when one exists.
//!
//! Identities are established as exact normal-form zeros; numeric oracles
//! (finite differences, random-point sampling) cross-check the symbolic
//! operators. The `jetvar` binary exposes the pipeline on problem files.

pub mod dedonder;
pub mod error;
pub mod expr;
pub mod hamjac;
pub mod jetcalc;
pub mod linalg;
pub mod multiindex;
pub mod numcheck;
pub mod problem;
pub mod variational;

pub use error::{Error, Result};
pub use expr::{parse, Atom, Expr, ParseContext, Point, VarId};
pub use multiindex::MultiIndex;
