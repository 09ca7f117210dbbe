use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::runner::{DatasetFailure, FoldAccounting, FoldSummary, RunArtifact};
use crate::error::{Error, Result};
use crate::eval::{Metric, MetricReport, RankTable};

/// Contents of `report.json`: the run without its per-query records.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportFile {
    pub config: ExperimentConfig,
    pub report: MetricReport,
    pub ranks: RankTable,
    pub accounting: Vec<FoldAccounting>,
    pub folds: Vec<FoldSummary>,
    pub dataset_errors: Vec<DatasetFailure>,
    pub notes: Vec<String>,
}

impl ReportFile {
    pub fn from_artifact(a: &RunArtifact) -> Self {
        ReportFile {
            config: a.config.clone(),
            report: a.report.clone(),
            ranks: a.ranks.clone(),
            accounting: a.accounting.clone(),
            folds: a.folds.clone(),
            dataset_errors: a.dataset_errors.clone(),
            notes: a.notes.clone(),
        }
    }
}

pub fn load_artifact(path: &Path) -> Result<RunArtifact> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::load(path, e.to_string()))?;
    serde_json::from_str(&text).map_err(|e| Error::load(path, e.to_string()))
}

fn fmt_value(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| x.to_string())
}

/// Table layout: one row per (metric, method), one value column and one
/// best-flag column per dataset.
pub fn scores_csv(report: &MetricReport) -> String {
    let datasets = report.datasets();
    let mut out = String::from("metric,direction,method");
    for d in &datasets {
        let _ = write!(out, ",{d},{d}_best");
    }
    out.push('\n');
    for metric in Metric::ALL {
        let best: Vec<_> = datasets.iter().map(|d| report.best(d, metric)).collect();
        let direction = match report.direction(metric) {
            crate::eval::Direction::HigherBetter => "higher",
            crate::eval::Direction::LowerBetter => "lower",
        };
        for method in report.methods() {
            let _ = write!(out, "{},{direction},{}", metric.key(), method.label());
            for (d, b) in datasets.iter().zip(&best) {
                let v = report.get(d, metric, method).and_then(|e| e.normalized);
                let _ = write!(out, ",{},{}", fmt_value(v), u8::from(b.contains(&method)));
            }
            out.push('\n');
        }
    }
    out
}

fn ranks_csv(ranks: &RankTable) -> String {
    let mut out = String::from("method,family,mean_rank");
    for m in Metric::ALL {
        let _ = write!(out, ",median_{}", m.key());
    }
    out.push('\n');
    for (method, mean) in &ranks.mean_rank {
        let family = match method.family() {
            crate::explain::MethodFamily::CounterfactualFree => "counterfactual_free",
            crate::explain::MethodFamily::CounterfactualGuided => "counterfactual_guided",
        };
        let _ = write!(out, "{},{family},{mean}", method.label());
        for m in Metric::ALL {
            let v = ranks.median_rank.get(method).and_then(|r| r.get(&m)).copied();
            let _ = write!(out, ",{}", fmt_value(v));
        }
        out.push('\n');
    }
    out
}

fn write(path: PathBuf, contents: &str) -> Result<PathBuf> {
    std::fs::write(&path, contents)?;
    Ok(path)
}

/// Write `scores.csv`, `report.json` and `ranks.csv` into `dir`.
pub fn emit_report(artifact: &RunArtifact, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let json = serde_json::to_string_pretty(&ReportFile::from_artifact(artifact))?;
    Ok(vec![
        write(dir.join("scores.csv"), &scores_csv(&artifact.report))?,
        write(dir.join("report.json"), &json)?,
        write(dir.join("ranks.csv"), &ranks_csv(&artifact.ranks))?,
    ])
}
