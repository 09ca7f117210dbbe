//! Synthetic fixtures: a two-Gaussian problem and a linear causal chain.

use std::path::Path;

use rand::Rng;

use super::{ColumnSpec, Dataset, FeatureKind, FeatureSchema, Schema, SchemaFile, Table};
use crate::error::Result;
use crate::rng::{rng_from_seed, standard_normal};
use crate::sf_free::{ScmSpec, StructuralEquation};

/// Two classes of equal size. `x1`, `x2` carry the signal (means ±1.2,
/// sd 0.6); `x3` is noise; `x4` is noise and immutable.
pub fn two_gaussians_table(n: usize, seed: u64) -> Table {
    let mut rng = rng_from_seed(seed);
    let schema = Schema::new(
        vec![
            FeatureSchema::continuous("x1", true),
            FeatureSchema::continuous("x2", true),
            FeatureSchema::continuous("x3", true),
            FeatureSchema::continuous("x4", false),
        ],
        vec!["neg".into(), "pos".into()],
    )
    .expect("static schema");
    let mut rows = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let y = i % 2;
        let mu = if y == 1 { 1.2 } else { -1.2 };
        rows.push(vec![
            mu + 0.6 * standard_normal(&mut rng),
            mu + 0.6 * standard_normal(&mut rng),
            standard_normal(&mut rng),
            standard_normal(&mut rng),
        ]);
        labels.push(y);
    }
    Table { schema, rows, labels }
}

pub fn two_gaussians(n: usize, seed: u64) -> Dataset {
    two_gaussians_table(n, seed).to_full_dataset().expect("synthetic data is well formed")
}

/// Loan-style data with a causal chain `income -> savings -> credit`.
///
/// Returns the raw table and the chain as an SCM over normalised features
/// (coefficients rescaled by the full-data feature ranges).
pub fn scm_chain_table(n: usize, seed: u64) -> (Table, ScmSpec) {
    let mut rng = rng_from_seed(seed);
    let schema = Schema::new(
        vec![
            FeatureSchema::continuous("income", true),
            FeatureSchema::continuous("savings", true),
            FeatureSchema::continuous("credit", true),
            FeatureSchema::continuous("loan", true),
            FeatureSchema::continuous("age", false),
            FeatureSchema::categorical("region", false, &["east", "north", "south"]),
        ],
        vec!["declined".into(), "approved".into()],
    )
    .expect("static schema");
    let savings_eq = StructuralEquation::new("savings", &["income"], &[0.5], 0.0);
    let credit_eq = StructuralEquation::new("credit", &["savings"], &[0.8], 10.0);
    let mut rows = Vec::with_capacity(n);
    let mut scores = Vec::with_capacity(n);
    for _ in 0..n {
        let income = 50.0 + 10.0 * standard_normal(&mut rng);
        let savings = savings_eq.value(&[income]) + 3.0 * standard_normal(&mut rng);
        let credit = credit_eq.value(&[savings]) + 2.0 * standard_normal(&mut rng);
        let loan = rng.random_range(5.0..40.0);
        let age = rng.random_range(20.0..70.0);
        let region = rng.random_range(0..3usize);
        let mut row = vec![income, savings, credit, loan, age, 0.0, 0.0, 0.0];
        row[5 + region] = 1.0;
        scores.push(0.06 * income + 0.1 * credit - 0.12 * loan + 0.5 * standard_normal(&mut rng));
        rows.push(row);
    }
    let mut sorted = scores.clone();
    sorted.sort_by(f64::total_cmp);
    let median = sorted[n / 2];
    let labels = scores.iter().map(|&s| usize::from(s > median)).collect();
    let range = |c: usize| {
        let lo = rows.iter().map(|r: &Vec<f64>| r[c]).fold(f64::INFINITY, f64::min);
        let hi = rows.iter().map(|r| r[c]).fold(f64::NEG_INFINITY, f64::max);
        hi - lo
    };
    let scm = ScmSpec {
        equations: vec![
            StructuralEquation::new("savings", &["income"], &[0.5 * range(0) / range(1)], 0.0),
            StructuralEquation::new("credit", &["savings"], &[0.8 * range(1) / range(2)], 0.0),
        ],
    };
    (Table { schema, rows, labels }, scm)
}

/// Schema document describing `table`, label column named `label`.
pub fn schema_file(table: &Table) -> SchemaFile {
    let mut columns: Vec<ColumnSpec> = table
        .schema
        .features()
        .iter()
        .map(|f| ColumnSpec {
            name: f.name.clone(),
            kind: f.kind,
            mutable: f.mutable,
            label: false,
            categories: f.categories.clone(),
        })
        .collect();
    columns.push(ColumnSpec {
        name: "label".into(),
        kind: FeatureKind::Categorical,
        mutable: false,
        label: true,
        categories: Some(table.schema.classes().to_vec()),
    });
    SchemaFile { columns }
}

/// Write `table` as CSV (categories decoded back to names) plus its schema.
pub fn write_table(table: &Table, csv_path: &Path, schema_path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(csv_path).map_err(|e| crate::Error::load(csv_path, e.to_string()))?;
    let mut header: Vec<String> = table.schema.features().iter().map(|f| f.name.clone()).collect();
    header.push("label".into());
    w.write_record(&header).map_err(|e| crate::Error::load(csv_path, e.to_string()))?;
    for (row, &y) in table.rows.iter().zip(&table.labels) {
        let mut rec = Vec::with_capacity(header.len());
        for (f, feat) in table.schema.features().iter().enumerate() {
            match feat.kind {
                FeatureKind::Continuous => rec.push(format!("{:.6}", row[table.schema.span(f).start])),
                FeatureKind::Categorical => {
                    let k = table.schema.category_of(row, f);
                    rec.push(feat.categories.as_ref().unwrap()[k].clone());
                }
            }
        }
        rec.push(table.schema.classes()[y].clone());
        w.write_record(&rec).map_err(|e| crate::Error::load(csv_path, e.to_string()))?;
    }
    w.flush()?;
    std::fs::write(schema_path, serde_json::to_string_pretty(&schema_file(table))? + "\n")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{load_dataset, Scaler};

    #[test]
    fn two_gaussians_is_balanced_and_scaled() {
        let ds = two_gaussians(500, 1);
        assert_eq!(ds.class_counts(), vec![250, 250]);
        assert!(ds.instances.iter().flatten().all(|v| (0.0..=1.0).contains(v)));
    }

    #[test]
    fn csv_round_trip_preserves_categories() {
        let (table, _) = scm_chain_table(60, 3);
        let dir = tempfile::tempdir().unwrap();
        let (c, s) = (dir.path().join("d.csv"), dir.path().join("s.json"));
        write_table(&table, &c, &s).unwrap();
        let ds = load_dataset(&c, &s).unwrap();
        for (orig, loaded) in table.rows.iter().zip(&ds.instances) {
            assert_eq!(table.schema.category_of(orig, 5), ds.schema.category_of(loaded, 5));
        }
        assert_eq!(ds.labels, table.labels);
    }

    #[test]
    fn rescaling_scaled_data_is_identity() {
        let ds = two_gaussians(100, 8);
        let scaler = Scaler::fit(&ds.schema, &ds.instances).unwrap();
        for x in &ds.instances {
            let y = scaler.transform(x);
            for (a, b) in x.iter().zip(&y) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn scm_fixture_resolves() {
        let (table, scm) = scm_chain_table(100, 2);
        let compiled = scm.compile(&table.schema).unwrap();
        assert_eq!(compiled.len(), 2);
    }
}
