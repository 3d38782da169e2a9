//! Experiment harness: parameter sweeps, scheme comparisons and CSV output.

pub mod experiments;
pub mod table;

pub use experiments::*;
pub use table::{ExperimentTable, Value};
