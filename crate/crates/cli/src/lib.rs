//! Command-line tool and HTTP service around `cfsynth-core`.

pub mod input;
pub mod output;
pub mod service;
