//! Random forest of CART trees (Gini impurity, bootstrap rows, √F candidate
//! columns per split).

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::rng::{derive_seed, rng_from_seed, SfRng};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ForestParams {
    pub n_trees: usize,
    /// `None` grows every tree until its leaves are pure.
    pub max_depth: Option<usize>,
    pub min_samples_split: usize,
}

impl Default for ForestParams {
    fn default() -> Self {
        ForestParams { n_trees: 100, max_depth: None, min_samples_split: 2 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
enum Node {
    Split { column: usize, threshold: f64, left: usize, right: usize },
    Leaf { proba: Vec<f64> },
}

/// A single decision tree stored as a flat node array; node 0 is the root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    nodes: Vec<Node>,
}

impl Tree {
    /// A one-leaf tree that always returns `proba`.
    pub fn constant(proba: Vec<f64>) -> Self {
        Tree { nodes: vec![Node::Leaf { proba }] }
    }

    /// `x[column] <= threshold` goes to `left`, otherwise `right`.
    pub fn split(column: usize, threshold: f64, left: Tree, right: Tree) -> Self {
        let shift = |nodes: Vec<Node>, by: usize| {
            nodes.into_iter().map(move |n| match n {
                Node::Split { column, threshold, left, right } => {
                    Node::Split { column, threshold, left: left + by, right: right + by }
                }
                leaf => leaf,
            })
        };
        let n_left = left.nodes.len();
        let mut nodes = vec![Node::Split { column, threshold, left: 1, right: 1 + n_left }];
        nodes.extend(shift(left.nodes, 1));
        nodes.extend(shift(right.nodes, 1 + n_left));
        Tree { nodes }
    }

    fn leaf(&self, x: &[f64]) -> &[f64] {
        let mut i = 0;
        loop {
            match &self.nodes[i] {
                Node::Leaf { proba } => return proba,
                Node::Split { column, threshold, left, right } => {
                    i = if x[*column] <= *threshold { *left } else { *right };
                }
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn go(nodes: &[Node], i: usize) -> usize {
            match &nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + go(nodes, *left).max(go(nodes, *right)),
            }
        }
        go(&self.nodes, 0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestClassifier {
    trees: Vec<Tree>,
    n_classes: usize,
}

fn gini(counts: &[f64], total: f64) -> f64 {
    if total == 0.0 {
        return 0.0;
    }
    1.0 - counts.iter().map(|c| (c / total).powi(2)).sum::<f64>()
}

struct Builder<'a> {
    x: &'a [Vec<f64>],
    y: &'a [usize],
    n_classes: usize,
    n_candidates: usize,
    params: ForestParams,
    nodes: Vec<Node>,
}

impl Builder<'_> {
    fn leaf(&mut self, rows: &[usize]) -> usize {
        let mut proba = vec![0.0; self.n_classes];
        for &r in rows {
            proba[self.y[r]] += 1.0;
        }
        let n = rows.len() as f64;
        proba.iter_mut().for_each(|p| *p /= n);
        self.nodes.push(Node::Leaf { proba });
        self.nodes.len() - 1
    }

    fn best_split(&self, rows: &[usize], rng: &mut SfRng) -> Option<(usize, f64)> {
        let width = self.x[0].len();
        let n = rows.len() as f64;
        let mut parent = vec![0.0; self.n_classes];
        for &r in rows {
            parent[self.y[r]] += 1.0;
        }
        let parent_gini = gini(&parent, n);
        let mut best: Option<(f64, usize, f64)> = None;
        let mut sorted = rows.to_vec();
        for column in sample(rng, width, self.n_candidates.min(width)).into_iter() {
            sorted.sort_by(|&a, &b| self.x[a][column].total_cmp(&self.x[b][column]).then(a.cmp(&b)));
            let mut left = vec![0.0; self.n_classes];
            let mut right = parent.clone();
            for i in 0..sorted.len() - 1 {
                let c = self.y[sorted[i]];
                left[c] += 1.0;
                right[c] -= 1.0;
                let lo = self.x[sorted[i]][column];
                let hi = self.x[sorted[i + 1]][column];
                if lo == hi {
                    continue;
                }
                let nl = (i + 1) as f64;
                let nr = n - nl;
                let impurity = (nl * gini(&left, nl) + nr * gini(&right, nr)) / n;
                if impurity < parent_gini - 1e-12 && best.is_none_or(|(b, _, _)| impurity < b) {
                    let mut threshold = 0.5 * (lo + hi);
                    if threshold >= hi {
                        threshold = lo;
                    }
                    best = Some((impurity, column, threshold));
                }
            }
        }
        best.map(|(_, c, t)| (c, t))
    }

    fn grow(&mut self, rows: Vec<usize>, depth: usize, rng: &mut SfRng) -> usize {
        let first = self.y[rows[0]];
        let pure = rows.iter().all(|&r| self.y[r] == first);
        let depth_capped = self.params.max_depth.is_some_and(|d| depth >= d);
        if pure || depth_capped || rows.len() < self.params.min_samples_split {
            return self.leaf(&rows);
        }
        let Some((column, threshold)) = self.best_split(&rows, rng) else {
            return self.leaf(&rows);
        };
        let (l, r): (Vec<usize>, Vec<usize>) = rows.iter().partition(|&&i| self.x[i][column] <= threshold);
        let id = self.nodes.len();
        self.nodes.push(Node::Split { column, threshold, left: 0, right: 0 });
        let left = self.grow(l, depth + 1, rng);
        let right = self.grow(r, depth + 1, rng);
        self.nodes[id] = Node::Split { column, threshold, left, right };
        id
    }
}

/// Train a forest on `train`. Each tree gets its own seed stream.
pub fn fit_classifier(train: &Dataset, params: ForestParams, seed: u64) -> Result<ForestClassifier> {
    let n_classes = train.schema.n_classes();
    if train.class_counts().iter().filter(|&&c| c > 0).count() < 2 {
        return Err(Error::input("classifier training needs at least two classes present"));
    }
    if params.n_trees == 0 {
        return Err(Error::input("forest needs at least one tree"));
    }
    let width = train.width();
    let n_candidates = ((width as f64).sqrt().floor() as usize).max(1);
    let n = train.len();
    let trees = (0..params.n_trees)
        .map(|t| {
            let mut rng = rng_from_seed(derive_seed(seed, &[t as u64]));
            let rows: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
            let mut b = Builder {
                x: &train.instances,
                y: &train.labels,
                n_classes,
                n_candidates,
                params,
                nodes: Vec::new(),
            };
            b.grow(rows, 0, &mut rng);
            Tree { nodes: b.nodes }
        })
        .collect();
    Ok(ForestClassifier { trees, n_classes })
}

impl ForestClassifier {
    pub fn from_trees(trees: Vec<Tree>, n_classes: usize) -> Self {
        ForestClassifier { trees, n_classes }
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn trees(&self) -> &[Tree] {
        &self.trees
    }

    /// Mean of the leaf class distributions reached in each tree.
    pub fn predict_proba(&self, x: &[f64]) -> Vec<f64> {
        let mut p = vec![0.0; self.n_classes];
        for t in &self.trees {
            for (acc, v) in p.iter_mut().zip(t.leaf(x)) {
                *acc += v;
            }
        }
        let total: f64 = p.iter().sum();
        p.iter_mut().for_each(|v| *v /= total);
        p
    }

    /// Most probable class; ties go to the lowest class id.
    pub fn predict(&self, x: &[f64]) -> usize {
        let p = self.predict_proba(x);
        let mut best = 0;
        for (c, v) in p.iter().enumerate() {
            if *v > p[best] {
                best = c;
            }
        }
        best
    }

    pub fn accuracy(&self, data: &Dataset) -> f64 {
        let hits = data.instances.iter().zip(&data.labels).filter(|(x, &y)| self.predict(x) == y).count();
        hits as f64 / data.len() as f64
    }
}
