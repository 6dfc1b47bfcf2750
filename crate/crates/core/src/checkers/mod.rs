//! Terminality, non-signalling and the (!) condition, decided on concrete
//! interpretations, plus the witness constructions relating them.

mod bang;
mod nonsig;
mod terminal;
mod theorems;

use thiserror::Error;

use crate::causal::CausalError;
use crate::diagram::DiagramError;
use crate::semantics::SemanticsError;

pub use bang::{check_bang, BangMethod, BangReport, ClosedCounterexample, DEFAULT_MAX_SIZE};
pub use nonsig::{check_nonsignalling, check_weak_nonsignalling, EffectPool, NonSigReport, Split};
pub use terminal::{
    check_terminal_process, check_terminal_theory, unique_effect_check, EffectCheck, TerminalityReport,
};
pub use theorems::{theorem1_witness, theorem2_audit, EmbeddingAudit, Theorem1Witness, Theorem2Audit};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CheckError {
    #[error(transparent)]
    Semantics(#[from] SemanticsError),
    #[error(transparent)]
    Diagram(#[from] DiagramError),
    #[error(transparent)]
    Causal(#[from] CausalError),
    #[error("invalid split: {0}")]
    Split(String),
    #[error("theory not terminal at box {name} (residual {residual:.3e})")]
    NotTerminal { name: String, residual: f64 },
    #[error("effect candidate {index} has outputs {outputs}")]
    NotAnEffect { index: usize, outputs: String },
    #[error("effect pool for party {0} is empty")]
    EmptyPool(char),
    #[error("effect {index} for party {party} has the wrong shape")]
    EffectShape { party: char, index: usize },
}
