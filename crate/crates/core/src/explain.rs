//! Types shared by every explanation method.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::model::ForestClassifier;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodId {
    Mdn,
    LocalRegion,
    Dser,
    Sgen,
    C2cVae,
    Dice,
    Kleor,
    Piece,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodFamily {
    CounterfactualFree,
    CounterfactualGuided,
}

impl MethodId {
    pub const ALL: [MethodId; 8] = [
        MethodId::Mdn,
        MethodId::LocalRegion,
        MethodId::Dser,
        MethodId::Sgen,
        MethodId::C2cVae,
        MethodId::Dice,
        MethodId::Kleor,
        MethodId::Piece,
    ];

    pub fn family(self) -> MethodFamily {
        match self {
            MethodId::Mdn | MethodId::LocalRegion | MethodId::Dser | MethodId::Sgen => MethodFamily::CounterfactualFree,
            _ => MethodFamily::CounterfactualGuided,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            MethodId::Mdn => "MDN",
            MethodId::LocalRegion => "Local-Region",
            MethodId::Dser => "DSER",
            MethodId::Sgen => "S-GEN",
            MethodId::C2cVae => "C2C-VAE",
            MethodId::Dice => "DiCE",
            MethodId::Kleor => "KLEOR",
            MethodId::Piece => "PIECE",
        }
    }

    pub fn key(self) -> &'static str {
        match self {
            MethodId::Mdn => "mdn",
            MethodId::LocalRegion => "local_region",
            MethodId::Dser => "dser",
            MethodId::Sgen => "sgen",
            MethodId::C2cVae => "c2c_vae",
            MethodId::Dice => "dice",
            MethodId::Kleor => "kleor",
            MethodId::Piece => "piece",
        }
    }
}

impl fmt::Display for MethodId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// A method that could not produce a valid explanation for a query.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, thiserror::Error)]
#[error("{method} failed: {reason}")]
pub struct MethodFailure {
    pub method: MethodId,
    pub reason: String,
}

impl MethodFailure {
    pub fn new(method: MethodId, reason: impl Into<String>) -> Self {
        MethodFailure { method, reason: reason.into() }
    }
}

/// One generated explanation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SemiFactual {
    pub instance: Vec<f64>,
    pub query_id: usize,
    pub method: MethodId,
    /// The classifier assigns the explanation the query's class.
    pub valid: bool,
    /// Schema features that differ from the query under the sameness rule.
    pub changed_features: Vec<usize>,
    pub diagnostics: BTreeMap<String, f64>,
}

/// Training fold, classifier and cached predictions every method works from.
#[derive(Debug, Clone)]
pub struct ExplainContext {
    pub train: Dataset,
    pub classifier: ForestClassifier,
    predictions: Vec<usize>,
}

impl ExplainContext {
    pub fn new(train: Dataset, classifier: ForestClassifier) -> Self {
        let predictions = train.instances.iter().map(|x| classifier.predict(x)).collect();
        ExplainContext { train, classifier, predictions }
    }

    pub fn query_class(&self, q: &[f64]) -> usize {
        self.classifier.predict(q)
    }

    /// Training instances labelled `class` that the classifier also puts in
    /// `class`: the candidate pool for instance-selection methods.
    pub fn class_pool(&self, class: usize) -> Vec<usize> {
        (0..self.train.len())
            .filter(|&i| self.train.labels[i] == class && self.predictions[i] == class)
            .collect()
    }

    pub fn semifactual(
        &self,
        method: MethodId,
        query_id: usize,
        q: &[f64],
        query_class: usize,
        instance: Vec<f64>,
    ) -> SemiFactual {
        let valid = self.classifier.predict(&instance) == query_class;
        let changed_features = self.train.changed_features(q, &instance);
        SemiFactual { instance, query_id, method, valid, changed_features, diagnostics: BTreeMap::new() }
    }
}

impl SemiFactual {
    pub fn with(mut self, key: &str, value: f64) -> Self {
        self.diagnostics.insert(key.to_string(), value);
        self
    }
}
