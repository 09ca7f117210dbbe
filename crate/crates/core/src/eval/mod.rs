//! Evaluation metrics, per-slice normalisation and rank aggregation.

mod metrics;
mod ranks;
mod report;

pub use metrics::{
    metric_confusability, metric_distance, metric_plausibility, metric_robustness, metric_sparsity, Robustness,
};
pub use ranks::{compute_ranks, rank_values, RankTable, SliceRanks};
pub use report::{min_max, normalize_scores, Direction, Metric, MetricReport, ScoreEntry};
