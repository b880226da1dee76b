//! Experiment harness: configuration, subjects, property sweeps, reports.

mod config;
mod report;
mod subject;
mod suite;

pub use config::{Config, ConfigError, CONFIG_ENV};
pub use report::{
    chain_csv, chain_json, chain_text, diagonal_text, overhead_csv, ExperimentReport, CHAIN_SCHEMA, REPORT_SCHEMA,
};
pub use subject::{limit_of, OverheadRow, Subject, SubjectError};
pub use suite::{
    chain_oracle, chain_shape, continuity, core_criteria, diagonal, halting_limit, monotonicity, mutant_sensitivity,
    no_bounded_fixed_point, overhead_law, run_suite, PropertyResult, SuiteReport,
};
