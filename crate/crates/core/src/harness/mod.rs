//! Experiment driver: seeded training runs with periodic greedy evaluation,
//! solve detection, baseline-normalized reports and CSV curves.

pub mod config;
pub mod csv;
pub mod report;
pub mod train;

pub use config::{Algorithm, RunConfig};
pub use csv::{emit_csv, read_csv};
pub use report::{compare, compare_against, Comparison, ComparisonRow};
pub use train::{evaluate, train, train_with, EvalRecord, Evaluation, RunLog, RunSummary, TrainedRun};
