//! Error metrics and the benchmark runs built on them.

pub mod benchmark;
mod metrics;

pub use benchmark::{mean_std, run_benchmark, resolution_sweep, MetricReport, ModelKind};
pub use metrics::{cut_mask, cut_windows, dis_error, l1_error};
