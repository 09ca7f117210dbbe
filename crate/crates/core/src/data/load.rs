use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Dataset, FeatureKind, FeatureSchema, Instance, Schema};
use crate::error::{Error, Result};

/// One column entry of a schema file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnSpec {
    pub name: String,
    #[serde(default = "default_kind")]
    pub kind: FeatureKind,
    #[serde(default = "default_true")]
    pub mutable: bool,
    #[serde(default)]
    pub label: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub categories: Option<Vec<String>>,
}

fn default_kind() -> FeatureKind {
    FeatureKind::Continuous
}

fn default_true() -> bool {
    true
}

/// Schema document: `{"columns": [{"name": .., "kind": .., "mutable": .., "label": ..}]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemaFile {
    pub columns: Vec<ColumnSpec>,
}

/// Raw (unscaled) encoded rows, kept so each training fold can fit its own
/// scaler.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub schema: Schema,
    pub rows: Vec<Instance>,
    pub labels: Vec<usize>,
}

/// Min-max scaler over the continuous columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scaler {
    ranges: Vec<Option<(f64, f64)>>,
}

impl Scaler {
    pub fn fit<'a>(schema: &Schema, rows: impl IntoIterator<Item = &'a Instance>) -> Result<Self> {
        let mut ranges: Vec<Option<(f64, f64)>> = vec![None; schema.width()];
        let continuous: Vec<usize> =
            schema.continuous_features().into_iter().map(|f| schema.span(f).start).collect();
        let mut any = false;
        for row in rows {
            any = true;
            for &c in &continuous {
                let v = row[c];
                ranges[c] = Some(match ranges[c] {
                    None => (v, v),
                    Some((lo, hi)) => (lo.min(v), hi.max(v)),
                });
            }
        }
        if !any {
            return Err(Error::input("cannot fit a scaler on zero rows"));
        }
        Ok(Scaler { ranges })
    }

    /// Zero-range columns map to 0; values outside the fitted range clamp.
    pub fn transform(&self, row: &[f64]) -> Instance {
        row.iter()
            .zip(&self.ranges)
            .map(|(&v, r)| match *r {
                None => v,
                Some((lo, hi)) if hi > lo => ((v - lo) / (hi - lo)).clamp(0.0, 1.0),
                Some(_) => 0.0,
            })
            .collect()
    }
}

impl Table {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// Scale the rows in `idx` with `scaler` and wrap them as a dataset.
    pub fn to_dataset(&self, scaler: &Scaler, idx: &[usize]) -> Result<Dataset> {
        Dataset::new(
            idx.iter().map(|&i| scaler.transform(&self.rows[i])).collect(),
            idx.iter().map(|&i| self.labels[i]).collect(),
            self.schema.clone(),
        )
    }

    /// Scale everything with statistics fitted on every row.
    pub fn to_full_dataset(&self) -> Result<Dataset> {
        let scaler = Scaler::fit(&self.schema, &self.rows)?;
        let all: Vec<usize> = (0..self.len()).collect();
        self.to_dataset(&scaler, &all)
    }
}

fn sort_labels(mut names: Vec<String>) -> Vec<String> {
    if names.iter().all(|n| n.parse::<f64>().is_ok()) {
        names.sort_by(|a, b| {
            a.parse::<f64>().unwrap().partial_cmp(&b.parse::<f64>().unwrap()).unwrap()
        });
    } else {
        names.sort();
    }
    names
}

/// Read a CSV + schema pair into an encoded, unscaled table.
pub fn load_table(path: &Path, schema_path: &Path) -> Result<Table> {
    let text = std::fs::read_to_string(schema_path).map_err(|e| Error::load(schema_path, e.to_string()))?;
    let spec: SchemaFile =
        serde_json::from_str(&text).map_err(|e| Error::load(schema_path, e.to_string()))?;

    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::load(path, e.to_string()))?;
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| Error::load(path, e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    let records: Vec<csv::StringRecord> = reader
        .records()
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Error::load(path, e.to_string()))?;
    if records.is_empty() {
        return Err(Error::load(path, "no data rows"));
    }

    let column_index = |name: &str| {
        header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::load(path, format!("missing column `{name}`")))
    };

    let label_name = match spec.columns.iter().filter(|c| c.label).count() {
        0 => header.last().cloned().ok_or_else(|| Error::load(path, "empty header"))?,
        1 => spec.columns.iter().find(|c| c.label).unwrap().name.clone(),
        _ => return Err(Error::load(schema_path, "more than one label column")),
    };
    let label_col = column_index(&label_name)?;

    let feature_specs: Vec<&ColumnSpec> =
        spec.columns.iter().filter(|c| !c.label && c.name != label_name).collect();
    let mut features = Vec::with_capacity(feature_specs.len());
    let mut cols = Vec::with_capacity(feature_specs.len());
    for c in &feature_specs {
        let col = column_index(&c.name)?;
        cols.push(col);
        let categories = match c.kind {
            FeatureKind::Continuous => None,
            FeatureKind::Categorical => Some(match &c.categories {
                Some(declared) => declared.clone(),
                None => {
                    let seen: BTreeSet<&str> = records.iter().map(|r| &r[col]).collect();
                    seen.into_iter().map(str::to_string).collect()
                }
            }),
        };
        features.push(FeatureSchema { name: c.name.clone(), kind: c.kind, mutable: c.mutable, categories });
    }

    let declared = spec.columns.iter().find(|c| c.name == label_name).and_then(|c| c.categories.clone());
    let classes = match declared {
        Some(cats) => cats,
        None => {
            let seen: BTreeSet<&str> = records.iter().map(|r| &r[label_col]).collect();
            sort_labels(seen.into_iter().map(str::to_string).collect())
        }
    };
    let schema = Schema::new(features, classes.clone())?;

    let mut rows = Vec::with_capacity(records.len());
    let mut labels = Vec::with_capacity(records.len());
    for (line, rec) in records.iter().enumerate() {
        let mut row = vec![0.0; schema.width()];
        for (f, &col) in cols.iter().enumerate() {
            let raw = &rec[col];
            let feat = &schema.features()[f];
            match feat.kind {
                FeatureKind::Continuous => {
                    let v: f64 = raw.parse().map_err(|_| {
                        Error::load(path, format!("row {}: non-numeric value `{raw}` in `{}`", line + 1, feat.name))
                    })?;
                    if !v.is_finite() {
                        return Err(Error::load(path, format!("row {}: non-finite value in `{}`", line + 1, feat.name)));
                    }
                    row[schema.span(f).start] = v;
                }
                FeatureKind::Categorical => {
                    let cats = feat.categories.as_ref().unwrap();
                    let k = cats.iter().position(|c| c == raw).ok_or_else(|| {
                        Error::load(path, format!("row {}: unknown category `{raw}` in `{}`", line + 1, feat.name))
                    })?;
                    schema.set_category(&mut row, f, k);
                }
            }
        }
        rows.push(row);
        let label = &rec[label_col];
        labels.push(classes.iter().position(|c| c == label).ok_or_else(|| {
            Error::load(path, format!("row {}: unknown class `{label}`", line + 1))
        })?);
    }
    Ok(Table { schema, rows, labels })
}

/// Load a CSV dataset, encode it per schema and min-max scale continuous
/// columns with statistics of the loaded rows.
pub fn load_dataset(path: &Path, schema_path: &Path) -> Result<Dataset> {
    load_table(path, schema_path)?.to_full_dataset()
}
