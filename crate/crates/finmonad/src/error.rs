//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("mixed base-category variants: {0} and {1}")]
    MixedVariants(String, String),

    #[error("morphisms are not parallel")]
    NotParallel,

    #[error("ill-formed morphism: {0}")]
    IllFormedMorphism(String),

    #[error("chain link {0} is not injective")]
    NonMonoInChain(usize),

    #[error("mono preservation violated: {0}")]
    MonoViolation(String),

    #[error("budget exhausted after {steps} steps: {detail}")]
    BudgetExhausted { steps: usize, detail: String },

    #[error("unit component not injective at {0}")]
    NonMonicUnit(String),

    #[error("monad is not separated: {0}")]
    NotSeparated(String),

    #[error("rewrite rules are not terminating: {0}")]
    NonTerminatingRules(String),

    #[error("invalid presentation: {0}")]
    InvalidPresentation(String),

    #[error("diagonal fill-in failed: {0}")]
    FillInFailure(String),

    #[error("node {0} is not weakly terminal in the diagram")]
    NotWeaklyTerminal(usize),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
