//! A basis-sensitive quantum lambda calculus: canonical term distributions,
//! evaluation, a type checker and a unitarity verifier.

pub mod basis;
pub mod checker;
pub mod cli;
pub mod corpus;
pub mod eval;
pub mod frontend;
pub mod scalar;
pub mod subst;
pub mod term;
pub mod types;
pub mod unitary;
