//! Tabular data: schema, encoding, scaling, statistics and fold plans.
//!
//! Continuous features are min-max scaled into `[0, 1]`; categorical
//! features are one-hot encoded, so one schema feature may span several
//! columns of an encoded instance.

mod folds;
mod load;
pub mod synthetic;

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use folds::{split_kfold, FoldPlan};
pub use load::{load_dataset, load_table, ColumnSpec, Scaler, SchemaFile, Table};

/// An encoded, scaled feature vector.
pub type Instance = Vec<f64>;

/// Relative tolerance for continuous "sameness": two values are the same
/// when they differ by at most this fraction of the feature's std.
pub const SAMENESS_STD_FRACTION: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureKind {
    Continuous,
    Categorical,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSchema {
    pub name: String,
    pub kind: FeatureKind,
    pub mutable: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub categories: Option<Vec<String>>,
}

impl FeatureSchema {
    pub fn continuous(name: impl Into<String>, mutable: bool) -> Self {
        FeatureSchema { name: name.into(), kind: FeatureKind::Continuous, mutable, categories: None }
    }

    pub fn categorical(name: impl Into<String>, mutable: bool, categories: &[&str]) -> Self {
        FeatureSchema {
            name: name.into(),
            kind: FeatureKind::Categorical,
            mutable,
            categories: Some(categories.iter().map(|c| c.to_string()).collect()),
        }
    }

    fn width(&self) -> usize {
        match self.kind {
            FeatureKind::Continuous => 1,
            FeatureKind::Categorical => self.categories.as_ref().map_or(0, Vec::len),
        }
    }
}

/// Feature schema plus the encoded column layout and class names.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schema {
    features: Vec<FeatureSchema>,
    spans: Vec<Range<usize>>,
    classes: Vec<String>,
}

impl Schema {
    pub fn new(features: Vec<FeatureSchema>, classes: Vec<String>) -> Result<Self> {
        let mut seen = std::collections::BTreeSet::new();
        for f in &features {
            if !seen.insert(f.name.as_str()) {
                return Err(Error::Schema(format!("duplicate feature name `{}`", f.name)));
            }
            if f.kind == FeatureKind::Categorical {
                match &f.categories {
                    Some(c) if c.len() >= 2 => {}
                    _ => {
                        return Err(Error::Schema(format!(
                            "categorical feature `{}` needs at least two categories",
                            f.name
                        )))
                    }
                }
            }
        }
        if classes.len() < 2 {
            return Err(Error::Schema(format!("need at least two classes, found {}", classes.len())));
        }
        let mut spans = Vec::with_capacity(features.len());
        let mut start = 0;
        for f in &features {
            spans.push(start..start + f.width());
            start += f.width();
        }
        Ok(Schema { features, spans, classes })
    }

    pub fn features(&self) -> &[FeatureSchema] {
        &self.features
    }

    pub fn n_features(&self) -> usize {
        self.features.len()
    }

    /// Number of encoded columns.
    pub fn width(&self) -> usize {
        self.spans.last().map_or(0, |s| s.end)
    }

    pub fn span(&self, feature: usize) -> Range<usize> {
        self.spans[feature].clone()
    }

    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn n_classes(&self) -> usize {
        self.classes.len()
    }

    pub fn is_mutable(&self, feature: usize) -> bool {
        self.features[feature].mutable
    }

    pub fn mutable_features(&self) -> Vec<usize> {
        (0..self.features.len()).filter(|&f| self.features[f].mutable).collect()
    }

    pub fn continuous_features(&self) -> Vec<usize> {
        (0..self.features.len())
            .filter(|&f| self.features[f].kind == FeatureKind::Continuous)
            .collect()
    }

    /// The feature owning an encoded column.
    pub fn feature_of_column(&self, column: usize) -> usize {
        self.spans.iter().position(|s| s.contains(&column)).expect("column out of range")
    }

    /// Index of the active category of a one-hot block (argmax, first wins).
    pub fn category_of(&self, x: &[f64], feature: usize) -> usize {
        let span = self.span(feature);
        let block = &x[span];
        let mut best = 0;
        for (i, v) in block.iter().enumerate() {
            if *v > block[best] {
                best = i;
            }
        }
        best
    }

    pub fn set_category(&self, x: &mut [f64], feature: usize, category: usize) {
        let span = self.span(feature);
        for (i, col) in span.enumerate() {
            x[col] = if i == category { 1.0 } else { 0.0 };
        }
    }

    /// Clamp continuous columns into `[0, 1]` and snap categorical blocks
    /// back onto a single category.
    pub fn project(&self, x: &mut [f64]) {
        for (f, feat) in self.features.iter().enumerate() {
            match feat.kind {
                FeatureKind::Continuous => {
                    let c = self.spans[f].start;
                    x[c] = x[c].clamp(0.0, 1.0);
                }
                FeatureKind::Categorical => {
                    let k = self.category_of(x, f);
                    self.set_category(x, f, k);
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureStats {
    pub mean: f64,
    pub std: f64,
    pub min: f64,
    pub max: f64,
}

/// Per-column mean, population std, min and max.
pub fn feature_stats(instances: &[Instance]) -> Result<Vec<FeatureStats>> {
    let first = instances.first().ok_or_else(|| Error::input("feature statistics of an empty dataset"))?;
    let n = instances.len() as f64;
    let width = first.len();
    let mut out = Vec::with_capacity(width);
    for c in 0..width {
        let mut sum = 0.0;
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        for x in instances {
            sum += x[c];
            min = min.min(x[c]);
            max = max.max(x[c]);
        }
        let mean = sum / n;
        let var = instances.iter().map(|x| (x[c] - mean).powi(2)).sum::<f64>() / n;
        out.push(FeatureStats { mean, std: var.sqrt(), min, max });
    }
    Ok(out)
}

/// A labelled, encoded and scaled dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub instances: Vec<Instance>,
    pub labels: Vec<usize>,
    pub schema: Schema,
    pub stats: Vec<FeatureStats>,
    /// Continuous features match when they differ by at most this many stds.
    #[serde(default = "default_sameness")]
    pub sameness: f64,
}

fn default_sameness() -> f64 {
    SAMENESS_STD_FRACTION
}

impl Dataset {
    pub fn new(instances: Vec<Instance>, labels: Vec<usize>, schema: Schema) -> Result<Self> {
        if instances.len() != labels.len() {
            return Err(Error::input(format!(
                "{} instances but {} labels",
                instances.len(),
                labels.len()
            )));
        }
        let width = schema.width();
        for (i, x) in instances.iter().enumerate() {
            if x.len() != width {
                return Err(Error::input(format!("instance {i} has arity {}, schema expects {width}", x.len())));
            }
            if x.iter().any(|v| !v.is_finite()) {
                return Err(Error::input(format!("instance {i} has a non-finite value")));
            }
        }
        if let Some(&bad) = labels.iter().find(|&&y| y >= schema.n_classes()) {
            return Err(Error::input(format!("label {bad} outside the class set")));
        }
        let stats = feature_stats(&instances)?;
        Ok(Dataset { instances, labels, schema, stats, sameness: SAMENESS_STD_FRACTION })
    }

    pub fn with_sameness(mut self, fraction: f64) -> Self {
        self.sameness = fraction;
        self
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    pub fn width(&self) -> usize {
        self.schema.width()
    }

    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.schema.n_classes()];
        for &y in &self.labels {
            counts[y] += 1;
        }
        counts
    }

    pub fn indices_of_class(&self, class: usize) -> Vec<usize> {
        (0..self.len()).filter(|&i| self.labels[i] == class).collect()
    }

    /// Std of a continuous feature (population, on this dataset).
    pub fn feature_std(&self, feature: usize) -> f64 {
        self.stats[self.schema.span(feature).start].std
    }

    /// Whether feature `f` differs between `a` and `b` under the sameness
    /// rule: categorical features differ when the category changes,
    /// continuous ones when `|a - b| > sameness * std`.
    pub fn differs(&self, f: usize, a: &[f64], b: &[f64]) -> bool {
        match self.schema.features[f].kind {
            FeatureKind::Categorical => self.schema.category_of(a, f) != self.schema.category_of(b, f),
            FeatureKind::Continuous => {
                let c = self.schema.span(f).start;
                (a[c] - b[c]).abs() > self.sameness * self.stats[c].std
            }
        }
    }

    pub fn changed_features(&self, a: &[f64], b: &[f64]) -> Vec<usize> {
        (0..self.schema.n_features()).filter(|&f| self.differs(f, a, b)).collect()
    }

    pub fn same_count(&self, a: &[f64], b: &[f64]) -> usize {
        self.schema.n_features() - self.changed_features(a, b).len()
    }

    pub fn subset(&self, idx: &[usize]) -> Result<Dataset> {
        Dataset::new(
            idx.iter().map(|&i| self.instances[i].clone()).collect(),
            idx.iter().map(|&i| self.labels[i]).collect(),
            self.schema.clone(),
        )
        .map(|d| d.with_sameness(self.sameness))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_feature_schema() -> Schema {
        Schema::new(
            vec![
                FeatureSchema::continuous("a", true),
                FeatureSchema::categorical("c", false, &["yes", "no"]),
            ],
            vec!["n".into(), "p".into()],
        )
        .unwrap()
    }

    #[test]
    fn stats_two_point() {
        let s = feature_stats(&[vec![0.0], vec![1.0]]).unwrap();
        assert_eq!(s[0].mean, 0.5);
        assert_eq!(s[0].std, 0.5);
    }

    #[test]
    fn stats_constant_and_four_point() {
        let s = feature_stats(&[vec![3.0], vec![3.0], vec![3.0]]).unwrap();
        assert_eq!(s[0].std, 0.0);
        let xs: Vec<Instance> = [1.0, 2.0, 3.0, 4.0].iter().map(|v| vec![*v]).collect();
        let s = feature_stats(&xs).unwrap();
        // oracle: sqrt(((1.5^2 + 0.5^2) * 2) / 4) = sqrt(1.25)
        let oracle = ((1.5f64.powi(2) + 0.5f64.powi(2)) * 2.0 / 4.0).sqrt();
        assert_eq!(s[0].mean, 2.5);
        assert!((s[0].std - oracle).abs() < 1e-12);
        assert!((s[0].std - 1.118).abs() < 1e-3);
    }

    #[test]
    fn stats_of_nothing_is_an_error() {
        assert!(feature_stats(&[]).is_err());
    }

    #[test]
    fn schema_rejects_duplicates_and_single_category() {
        let dup = Schema::new(
            vec![FeatureSchema::continuous("a", true), FeatureSchema::continuous("a", true)],
            vec!["0".into(), "1".into()],
        );
        assert!(dup.is_err());
        let single = Schema::new(
            vec![FeatureSchema::categorical("c", true, &["only"])],
            vec!["0".into(), "1".into()],
        );
        assert!(single.is_err());
    }

    #[test]
    fn layout_and_projection() {
        let s = two_feature_schema();
        assert_eq!(s.width(), 3);
        assert_eq!(s.span(1), 1..3);
        assert_eq!(s.feature_of_column(2), 1);
        let mut x = vec![1.4, 0.2, 0.7];
        s.project(&mut x);
        assert_eq!(x, vec![1.0, 0.0, 1.0]);
    }

    #[test]
    fn sameness_rule() {
        let s = two_feature_schema();
        let ds = Dataset::new(
            vec![vec![0.0, 1.0, 0.0], vec![1.0, 0.0, 1.0]],
            vec![0, 1],
            s,
        )
        .unwrap();
        // std of column 0 is 0.5, threshold 0.1
        let q = [0.5, 1.0, 0.0];
        assert!(!ds.differs(0, &q, &[0.55, 1.0, 0.0]));
        assert!(ds.differs(0, &q, &[0.65, 1.0, 0.0]));
        assert!(ds.differs(1, &q, &[0.5, 0.0, 1.0]));
        assert_eq!(ds.changed_features(&q, &[0.9, 0.0, 1.0]), vec![0, 1]);
        assert_eq!(ds.same_count(&q, &q), 2);
    }

    #[test]
    fn dataset_rejects_bad_rows() {
        let s = two_feature_schema();
        assert!(Dataset::new(vec![vec![0.0, 1.0]], vec![0], s.clone()).is_err());
        assert!(Dataset::new(vec![vec![f64::NAN, 1.0, 0.0]], vec![0], s.clone()).is_err());
        assert!(Dataset::new(vec![vec![0.0, 1.0, 0.0]], vec![5], s).is_err());
    }
}
