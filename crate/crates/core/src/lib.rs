//! Optimal skip alignments for process trees.
//!
//! A skip alignment summarizes the model-only part of an alignment by moves
//! that skip whole blocks of the model. This crate enumerates all optimal skip
//! alignments of a trace in a canonical normal form and provides the rewriting
//! machinery connecting them to classical alignments.

pub mod alignment;
pub mod corpus;
pub mod io;
pub mod model;
pub mod oracle;
pub mod rewrite;
pub mod search;
pub mod semantics;

pub use alignment::{Alignment, Move, SkipAlignment, Trace};
pub use model::{BlockId, Model, ModelError, Operator, Tree};
pub use semantics::{Configuration, Mode, Semantics, Step};
