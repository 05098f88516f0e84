//! Recourse summaries: shallow decision trees that assign one action to each
//! leaf group of adversely classified instances, searched for the full
//! cost/invalidity trade-off curve.

pub mod actions;
pub mod audit;
pub mod binarize;
pub mod bitset;
pub mod cache;
pub mod cdf;
pub mod error;
pub mod eval;
pub mod pareto;
pub mod pipeline;
pub mod predictor;
pub mod schema;
pub mod solver;
pub mod synth;
pub mod tree;

pub use error::{Error, Result};
