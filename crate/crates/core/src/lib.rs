//! Executable derivation engine for a non-idempotent, non-associative
//! intersection type system over the untyped λ-calculus.
//!
//! Layers, bottom up: [`term`] (syntax and β-reduction), [`types`] and
//! [`context`], [`derivation`] (trees, checker, formats), [`measures`],
//! [`transform`] (substitution and subject reduction on derivations),
//! [`inference`] (bounded derivation search), [`harness`] (corpus checks)
//! and [`cli`].

pub mod cli;
pub mod context;
pub mod derivation;
pub mod harness;
pub mod inference;
pub mod measures;
pub mod names;
pub mod term;
pub mod transform;
pub mod types;

pub use context::{ctx_intersect, Context};
pub use derivation::{check_derivation, Derivation, Rule, Sequent};
pub use names::{FreshSupply, Name};
pub use term::{parse_term, RedexPosition, Strategy, Term};
pub use types::{parse_type, LinearType, Type};
