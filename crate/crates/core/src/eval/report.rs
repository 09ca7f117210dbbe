use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::explain::MethodId;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Distance,
    Plausibility,
    Confusability,
    Robustness,
    Sparsity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    HigherBetter,
    LowerBetter,
}

impl Direction {
    pub fn flip(self) -> Self {
        match self {
            Direction::HigherBetter => Direction::LowerBetter,
            Direction::LowerBetter => Direction::HigherBetter,
        }
    }

    /// Normalised value a failed method receives.
    pub fn worst(self) -> f64 {
        match self {
            Direction::HigherBetter => 0.0,
            Direction::LowerBetter => 1.0,
        }
    }
}

impl Metric {
    pub const ALL: [Metric; 5] =
        [Metric::Distance, Metric::Plausibility, Metric::Confusability, Metric::Robustness, Metric::Sparsity];

    /// Direction of the normalised score. Robustness is reversed during
    /// normalisation, so its raw Lipschitz value is lower-better but the
    /// normalised one is higher-better.
    pub fn direction(self) -> Direction {
        match self {
            Metric::Distance | Metric::Robustness | Metric::Sparsity => Direction::HigherBetter,
            Metric::Plausibility | Metric::Confusability => Direction::LowerBetter,
        }
    }

    pub fn reversed(self) -> bool {
        self == Metric::Robustness
    }

    pub fn key(self) -> &'static str {
        match self {
            Metric::Distance => "distance",
            Metric::Plausibility => "plausibility",
            Metric::Confusability => "confusability",
            Metric::Robustness => "robustness",
            Metric::Sparsity => "sparsity",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Metric::Distance => "Distance",
            Metric::Plausibility => "Plausibility",
            Metric::Confusability => "Confusability",
            Metric::Robustness => "Robustness",
            Metric::Sparsity => "Sparsity",
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreEntry {
    pub dataset: String,
    pub metric: Metric,
    pub method: MethodId,
    /// Mean over valid explanations; `None` when the method produced none.
    pub raw: Option<f64>,
    pub normalized: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    /// Sorted by (dataset, metric, method).
    pub entries: Vec<ScoreEntry>,
    pub directions: BTreeMap<Metric, Direction>,
    pub notes: Vec<String>,
}

impl MetricReport {
    pub fn from_raw(mut entries: Vec<ScoreEntry>) -> Self {
        entries.sort_by(|a, b| (&a.dataset, a.metric, a.method).cmp(&(&b.dataset, b.metric, b.method)));
        let directions = Metric::ALL.iter().map(|&m| (m, m.direction())).collect();
        MetricReport { entries, directions, notes: Vec::new() }
    }

    pub fn datasets(&self) -> Vec<String> {
        let mut d: Vec<String> = self.entries.iter().map(|e| e.dataset.clone()).collect();
        d.dedup();
        d
    }

    pub fn methods(&self) -> Vec<MethodId> {
        let mut m: Vec<MethodId> = self.entries.iter().map(|e| e.method).collect();
        m.sort();
        m.dedup();
        m
    }

    pub fn direction(&self, metric: Metric) -> Direction {
        self.directions.get(&metric).copied().unwrap_or(metric.direction())
    }

    pub fn slice<'a>(&'a self, dataset: &'a str, metric: Metric) -> impl Iterator<Item = &'a ScoreEntry> + 'a {
        self.entries.iter().filter(move |e| e.dataset == dataset && e.metric == metric)
    }

    pub fn get(&self, dataset: &str, metric: Metric, method: MethodId) -> Option<&ScoreEntry> {
        self.entries.iter().find(|e| e.dataset == dataset && e.metric == metric && e.method == method)
    }

    /// Methods holding the best normalised value of a slice (several on ties).
    pub fn best(&self, dataset: &str, metric: Metric) -> Vec<MethodId> {
        let vals: Vec<(MethodId, f64)> =
            self.slice(dataset, metric).filter_map(|e| e.normalized.map(|v| (e.method, v))).collect();
        let target = match self.direction(metric) {
            Direction::HigherBetter => vals.iter().map(|v| v.1).fold(f64::NEG_INFINITY, f64::max),
            Direction::LowerBetter => vals.iter().map(|v| v.1).fold(f64::INFINITY, f64::min),
        };
        vals.into_iter().filter(|v| v.1 == target).map(|v| v.0).collect()
    }
}

/// Min-max scale to `[0, 1]`; `None` for a constant input.
pub fn min_max(values: &[f64]) -> Option<Vec<f64>> {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (hi > lo).then(|| values.iter().map(|v| (v - lo) / (hi - lo)).collect())
}

/// Min-max normalise every (dataset, metric) slice. Robustness is reversed,
/// constant slices become 0.5 and methods without a raw score get the
/// slice-worst value.
pub fn normalize_scores(raw: &MetricReport) -> MetricReport {
    let mut out = raw.clone();
    out.notes.clear();
    for dataset in raw.datasets() {
        for metric in Metric::ALL {
            let idx: Vec<usize> =
                (0..out.entries.len()).filter(|&i| out.entries[i].dataset == dataset && out.entries[i].metric == metric).collect();
            if idx.is_empty() {
                continue;
            }
            let scored: Vec<usize> = idx.iter().copied().filter(|&i| out.entries[i].raw.is_some()).collect();
            let values: Vec<f64> = scored.iter().map(|&i| out.entries[i].raw.unwrap()).collect();
            match min_max(&values) {
                Some(scaled) => {
                    for (&i, v) in scored.iter().zip(scaled) {
                        out.entries[i].normalized = Some(if metric.reversed() { 1.0 - v } else { v });
                    }
                }
                None if !values.is_empty() => {
                    out.notes.push(format!("{dataset}/{metric}: constant slice, all scores set to 0.5"));
                    for &i in &scored {
                        out.entries[i].normalized = Some(0.5);
                    }
                }
                None => out.notes.push(format!("{dataset}/{metric}: no method produced a score")),
            }
            let worst = out.direction(metric).worst();
            for &i in &idx {
                if out.entries[i].raw.is_none() {
                    out.entries[i].normalized = Some(worst);
                }
            }
        }
    }
    out
}
