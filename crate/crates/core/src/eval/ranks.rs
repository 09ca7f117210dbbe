use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::report::{Direction, Metric, MetricReport};
use crate::explain::MethodId;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SliceRanks {
    pub dataset: String,
    pub metric: Metric,
    pub ranks: BTreeMap<MethodId, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankTable {
    pub slices: Vec<SliceRanks>,
    /// Mean over every (dataset, metric) slice.
    pub mean_rank: BTreeMap<MethodId, f64>,
    /// Median over datasets, per metric.
    pub median_rank: BTreeMap<MethodId, BTreeMap<Metric, f64>>,
}

/// Ranks with 1 = best; tied values share the average of their positions.
pub fn rank_values(values: &[f64], direction: Direction) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| match direction {
        Direction::HigherBetter => values[b].total_cmp(&values[a]),
        Direction::LowerBetter => values[a].total_cmp(&values[b]),
    });
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = avg;
        }
        i = j + 1;
    }
    ranks
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    }
}

pub fn compute_ranks(report: &MetricReport) -> RankTable {
    let mut slices = Vec::new();
    for dataset in report.datasets() {
        for metric in Metric::ALL {
            let scored: Vec<(MethodId, f64)> =
                report.slice(&dataset, metric).filter_map(|e| e.normalized.map(|v| (e.method, v))).collect();
            if scored.is_empty() {
                continue;
            }
            let values: Vec<f64> = scored.iter().map(|s| s.1).collect();
            let ranks = rank_values(&values, report.direction(metric));
            slices.push(SliceRanks {
                dataset: dataset.clone(),
                metric,
                ranks: scored.iter().map(|s| s.0).zip(ranks).collect(),
            });
        }
    }
    let mut mean_rank = BTreeMap::new();
    let mut median_rank = BTreeMap::new();
    for method in report.methods() {
        let all: Vec<f64> = slices.iter().filter_map(|s| s.ranks.get(&method).copied()).collect();
        if !all.is_empty() {
            mean_rank.insert(method, all.iter().sum::<f64>() / all.len() as f64);
        }
        let mut per_metric = BTreeMap::new();
        for metric in Metric::ALL {
            let mut v: Vec<f64> =
                slices.iter().filter(|s| s.metric == metric).filter_map(|s| s.ranks.get(&method).copied()).collect();
            if !v.is_empty() {
                per_metric.insert(metric, median(&mut v));
            }
        }
        median_rank.insert(method, per_metric);
    }
    RankTable { slices, mean_rank, median_rank }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::{normalize_scores, ScoreEntry};
    use proptest::prelude::*;

    #[test]
    fn rank_examples() {
        assert_eq!(rank_values(&[0.0, 0.5, 1.0], Direction::HigherBetter), vec![3.0, 2.0, 1.0]);
        assert_eq!(rank_values(&[1.0, 1.0, 0.0], Direction::HigherBetter), vec![1.5, 1.5, 3.0]);
        assert_eq!(rank_values(&[0.2, 0.1], Direction::LowerBetter), vec![2.0, 1.0]);
    }

    #[test]
    fn method_best_everywhere_has_mean_rank_one() {
        let mut entries = Vec::new();
        for d in ["a", "b"] {
            for metric in Metric::ALL {
                for (i, method) in [MethodId::Mdn, MethodId::Dice, MethodId::Piece].into_iter().enumerate() {
                    // Mdn best under every direction after normalisation
                    let good = match (metric.direction(), metric.reversed()) {
                        (Direction::HigherBetter, false) => 10.0 - i as f64,
                        (Direction::HigherBetter, true) => i as f64,
                        (Direction::LowerBetter, _) => i as f64,
                    };
                    entries.push(ScoreEntry { dataset: d.into(), metric, method, raw: Some(good), normalized: None });
                }
            }
        }
        let t = compute_ranks(&normalize_scores(&MetricReport::from_raw(entries)));
        assert_eq!(t.mean_rank[&MethodId::Mdn], 1.0);
        assert_eq!(t.mean_rank[&MethodId::Piece], 3.0);
        assert_eq!(t.slices.len(), 10);
        assert_eq!(t.median_rank[&MethodId::Dice][&Metric::Sparsity], 2.0);
    }

    proptest! {
        #[test]
        fn ranks_sum_to_triangular_number(v in prop::collection::vec(0u8..5, 1..9)) {
            let v: Vec<f64> = v.into_iter().map(f64::from).collect();
            let n = v.len() as f64;
            let r = rank_values(&v, Direction::HigherBetter);
            prop_assert!((r.iter().sum::<f64>() - n * (n + 1.0) / 2.0).abs() < 1e-9);
        }

        #[test]
        fn flipping_direction_reverses_ranking(v in prop::collection::vec(0u8..5, 1..9)) {
            let v: Vec<f64> = v.into_iter().map(f64::from).collect();
            let n = v.len() as f64;
            let hi = rank_values(&v, Direction::HigherBetter);
            let lo = rank_values(&v, Direction::LowerBetter);
            for (a, b) in hi.iter().zip(&lo) {
                prop_assert!((a + b - (n + 1.0)).abs() < 1e-9);
            }
        }
    }
}
