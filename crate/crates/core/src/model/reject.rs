//! k-NN based reject score: `r(x) = 1 - (majority neighbour count / k)`.

use serde::{Deserialize, Serialize};

use super::knn::KnnIndex;
use crate::data::{split_kfold, Dataset};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RejectScore {
    pub k: usize,
    pub threshold: f64,
    index: KnnIndex,
    labels: Vec<usize>,
    n_classes: usize,
}

impl RejectScore {
    pub fn fit(train: &Dataset, k: usize, threshold: f64) -> Result<Self> {
        if k == 0 || k > train.len() {
            return Err(Error::input(format!("reject score k = {k} outside 1..={}", train.len())));
        }
        Ok(RejectScore {
            k,
            threshold,
            index: KnnIndex::new(train.instances.clone())?,
            labels: train.labels.clone(),
            n_classes: train.schema.n_classes(),
        })
    }

    fn votes(&self, x: &[f64]) -> Vec<usize> {
        let mut votes = vec![0; self.n_classes];
        for n in self.index.query(x, self.k).expect("k validated at fit") {
            votes[self.labels[n.index]] += 1;
        }
        votes
    }

    /// Higher means a more ambiguous neighbourhood.
    pub fn score(&self, x: &[f64]) -> f64 {
        let majority = *self.votes(x).iter().max().unwrap();
        1.0 - majority as f64 / self.k as f64
    }

    /// k-NN majority class, ties to the lowest class id.
    pub fn predict(&self, x: &[f64]) -> usize {
        let v = self.votes(x);
        let mut best = 0;
        for (c, &n) in v.iter().enumerate() {
            if n > v[best] {
                best = c;
            }
        }
        best
    }

    pub fn rejects(&self, x: &[f64]) -> bool {
        self.score(x) > self.threshold
    }
}

/// Choose the reject threshold by cross-validation over `grid`.
///
/// Each held-out instance is scored by a k-NN fitted on the other folds.
/// A threshold earns credit for accepting correct predictions and for
/// rejecting wrong ones; the best mean credit wins, ties to the larger
/// threshold (more coverage).
pub fn grid_search_threshold(train: &Dataset, k: usize, grid: &[f64], folds: usize, seed: u64) -> Result<f64> {
    if grid.is_empty() {
        return Err(Error::input("empty threshold grid"));
    }
    let plan = split_kfold(&train.labels, folds, seed)?;
    let mut held_out = Vec::with_capacity(train.len());
    for f in 0..folds {
        let tr = train.subset(&plan.train_indices(f))?;
        let rs = RejectScore::fit(&tr, k.min(tr.len()), 0.0)?;
        for i in plan.test_indices(f) {
            let x = &train.instances[i];
            held_out.push((rs.score(x), rs.predict(x) == train.labels[i]));
        }
    }
    let mut best = (f64::NEG_INFINITY, grid[0]);
    for &theta in grid {
        let credit = held_out
            .iter()
            .filter(|(r, correct)| (*r <= theta) == *correct)
            .count() as f64
            / held_out.len() as f64;
        if credit > best.0 || (credit == best.0 && theta > best.1) {
            best = (credit, theta);
        }
    }
    Ok(best.1)
}
