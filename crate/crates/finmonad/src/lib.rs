//! Finite monads over set-like base categories.
//!
//! The crate materializes free monads via the free-algebra chain, coproducts
//! of separated monads via a mutual-recursion initial algebra, coequalizers
//! and cointersections of monads via congruence closure on Eilenberg–Moore
//! algebras, and the graph functors showing that coequalizers of monads can
//! fail to exist. Everything is computed on explicit finite carriers and
//! verified by exhaustive checks at small sizes.

pub mod atom;
pub mod base;
pub mod error;
pub mod functor;
pub mod colimit;
pub mod monad;
pub mod report;
pub mod term;

pub use atom::Atom;
pub use base::{BaseMor, BaseObj, ChainStatus, Component, InjectionWitness, Variant};
pub use error::{Error, Result};
