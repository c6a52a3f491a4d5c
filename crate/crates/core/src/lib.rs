//! Learns spreadsheet conditional-formatting rules from a few formatted
//! example cells.
//!
//! The pipeline runs per column:
//!
//! 1. [`predicate`] instantiates typed predicates with constants taken from
//!    the column and computes each cell's predicate signature.
//! 2. [`cluster`] guesses which unformatted cells should carry each format,
//!    using the examples and their positions (users annotate top-down).
//! 3. [`synth`] grows small decision trees over the predicates against those
//!    guesses; every tree reads off as a rule in disjunctive normal form.
//! 4. [`rank`] scores the candidate rules with a linear model over
//!    handpicked features.
//!
//! [`engine`] composes the steps; [`rule`] holds the rule language, its
//! execution and its spreadsheet formula emission.

pub mod bitset;
pub mod cluster;
pub mod engine;
pub mod error;
pub mod json;
pub mod predicate;
pub mod rank;
pub mod rule;
pub mod synth;
pub mod table;

#[cfg(feature = "testkit")]
pub mod testkit;

pub use engine::{apply, oracle_search, ApplyResult, Engine, SuggestRequest, SuggestResponse};
pub use error::{Error, Result};
pub use rule::{Literal, Rule};
pub use table::{Annotation, CellValue, ColumnType, FormatId, TypedColumn};
