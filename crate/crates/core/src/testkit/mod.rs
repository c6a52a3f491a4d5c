//! Test support shared by unit, integration and acceptance tests: an
//! independent formula evaluator, random instance generation and proptest
//! strategies.

pub mod formula;
pub mod properties;
pub mod scenarios;
pub mod strategies;
pub mod sweep;
