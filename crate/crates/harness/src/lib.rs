//! Experiment harness for the adaptive-filter library: TOML experiment
//! configs, paired Monte-Carlo ensembles with divergence screening,
//! steady-state summaries with matching theory predictions, per-step
//! operation audits, and CSV reporting.
//!
//! Everything is seed-deterministic: a config plus a base seed fixes
//! every byte of the output, independent of thread count.

pub mod audit;
pub mod config;
pub mod error;
pub mod experiment;
pub mod report;

pub use audit::{audit_all, audit_op_counts, OpCountReport, OpCounts};
pub use config::{
    parse_config, parse_config_str, ExperimentConfig, FilterSpec, FilterVariant, SwitchSpec,
    SystemSource, STREAM_RUN_BASE, STREAM_SWITCH_SYSTEM, STREAM_SYSTEM, THEORY_MIN_LENGTH,
};
pub use error::{Error, Result};
pub use experiment::{
    run_identification, run_tracking, ExperimentReport, LearningCurve, VariantReport,
    DIVERGENCE_MSD_LINEAR,
};
pub use report::{curves_csv, summary_csv, summary_path, theory_emse_for, write_report};
