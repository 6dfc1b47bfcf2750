//! Process-theory diagrams with discarding, evaluated in finite stochastic
//! or finite-dimensional quantum semantics, with checkers for terminality,
//! non-signalling over causal structures, and local-hidden-variable models.

pub mod behavior;
pub mod causal;
pub mod checkers;
pub mod diagram;
pub mod dsl;
pub mod semantics;
