//! C4.5 decision-tree induction for academic-advising risk classification.
//!
//! * [`dataset`]: schema-typed weighted instances, CSV and ARFF ingestion.
//! * [`features`]: credit-hour and GPA features, synthetic advising data.
//! * [`tree`]: gain-ratio induction, pessimistic pruning, rendering.
//! * [`eval`]: stratified cross-validation and the metric report.
//! * [`cli`]: the batch command front end.

pub mod cli;
pub mod dataset;
pub mod eval;
pub mod features;
pub mod tree;
