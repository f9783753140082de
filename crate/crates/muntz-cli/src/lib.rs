//! Experiment runner for the `muntz` crate: configuration, orchestration,
//! persistence, and report emission.

// Validation sites use `!(x > 0.0)` style comparisons on purpose: the
// negation rejects NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod report;
pub mod run;
