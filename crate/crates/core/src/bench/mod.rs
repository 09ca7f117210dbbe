//! Benchmark harness: configuration, the k-fold runner, reports and charts.

mod charts;
mod config;
mod report;
mod runner;

pub use charts::{mean_rank_chart, radar_chart, render_charts};
pub use config::{DatasetSpec, ExperimentConfig, MethodSettings, ProtocolConfig};
pub use report::{emit_report, load_artifact, scores_csv, ReportFile};
pub use runner::{
    run_benchmark, DatasetFailure, FoldAccounting, FoldModels, QueryRecord, RunArtifact, SeedEntry,
};
