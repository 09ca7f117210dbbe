use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, MethodSettings};
use crate::data::{load_table, split_kfold, Dataset, Scaler, Table};
use crate::error::{Error, Result};
use crate::eval::{
    compute_ranks, metric_confusability, metric_distance, metric_plausibility, metric_robustness, metric_sparsity,
    normalize_scores, Metric, MetricReport, RankTable, ScoreEntry,
};
use crate::explain::{ExplainContext, MethodFailure, MethodId, SemiFactual};
use crate::model::{fit_classifier, RejectScore};
use crate::neural::{train_c2c, train_vae, C2cModel, VaeModel};
use crate::parallel::{par_map, Jobs};
use crate::rng::{derive_seed, hash_str};
use crate::sf_free::{dser_sf, dser_threshold, local_region_sf, mdn_sf, sgen_sf, CompiledScm, ScmSpec};
use crate::sf_guided::{c2c_sf, dice_sf, find_nun, kleor_sf, mad_weights, piece_sf, PieceModel};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryRecord {
    pub dataset: String,
    pub fold: usize,
    /// Row of the query in the dataset file.
    pub query: usize,
    pub method: MethodId,
    pub seed: u64,
    pub explanations: Vec<SemiFactual>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
    /// Per-query metric values: means over the valid explanations (the
    /// robustness sweep uses the first one).
    pub metrics: BTreeMap<Metric, f64>,
    #[serde(default)]
    pub robustness_failures: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldAccounting {
    pub dataset: String,
    pub fold: usize,
    pub method: MethodId,
    pub queries: usize,
    pub successes: usize,
    pub failures: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldSummary {
    pub dataset: String,
    pub fold: usize,
    pub train_size: usize,
    pub test_size: usize,
    pub accuracy: f64,
    pub reject_threshold: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedEntry {
    pub dataset: String,
    pub fold: Option<usize>,
    pub purpose: String,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetFailure {
    pub dataset: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunArtifact {
    pub config: ExperimentConfig,
    pub report: MetricReport,
    pub ranks: RankTable,
    pub accounting: Vec<FoldAccounting>,
    pub folds: Vec<FoldSummary>,
    pub seeds: Vec<SeedEntry>,
    pub dataset_errors: Vec<DatasetFailure>,
    pub notes: Vec<String>,
    pub records: Vec<QueryRecord>,
}

/// Everything fitted on one training fold.
pub struct FoldModels {
    pub ctx: ExplainContext,
    pub settings: MethodSettings,
    pub reject: Option<RejectScore>,
    pub generative: Option<std::result::Result<(VaeModel, C2cModel), String>>,
    pub piece: Option<std::result::Result<PieceModel, String>>,
    pub scm: CompiledScm,
    pub mad: Vec<f64>,
}

impl FoldModels {
    /// Fit the classifier and the models the requested methods need.
    pub fn fit(
        train: Dataset,
        methods: &[MethodId],
        settings: &MethodSettings,
        scm: CompiledScm,
        seed: u64,
    ) -> Result<Self> {
        let s = |purpose: &str| derive_seed(seed, &[hash_str(purpose)]);
        let classifier = fit_classifier(&train, settings.forest, s("forest"))?;
        let uses = |m: MethodId| methods.contains(&m);
        let reject = if uses(MethodId::Dser) {
            let theta = dser_threshold(&train, &settings.dser, s("reject"))?;
            Some(RejectScore::fit(&train, settings.dser.reject_k.min(train.len()), theta)?)
        } else {
            None
        };
        let generative = uses(MethodId::C2cVae).then(|| {
            let vae = train_vae(&train, settings.vae, s("vae")).map_err(|e| e.to_string())?;
            let c2c = train_c2c(&vae, &train, settings.c2c_model, s("c2c")).map_err(|e| e.to_string())?;
            Ok((vae, c2c))
        });
        let piece = uses(MethodId::Piece).then(|| PieceModel::fit(&train).map_err(|e| e.to_string()));
        let mad = if uses(MethodId::Dice) { mad_weights(&train) } else { Vec::new() };
        Ok(FoldModels {
            ctx: ExplainContext::new(train, classifier),
            settings: settings.clone(),
            reject,
            generative,
            piece,
            scm,
            mad,
        })
    }

    /// Run one method on one query. Explanations may include invalid ones;
    /// callers filter on `valid`.
    pub fn explain(
        &self,
        method: MethodId,
        q: &[f64],
        query_id: usize,
        seed: u64,
    ) -> std::result::Result<Vec<SemiFactual>, MethodFailure> {
        let s = &self.settings;
        let ctx = &self.ctx;
        let missing = |what: &str| MethodFailure::new(method, format!("{what} was not fitted for this fold"));
        match method {
            MethodId::Mdn => mdn_sf(q, query_id, ctx).map(|x| vec![x]),
            MethodId::LocalRegion => local_region_sf(q, query_id, ctx, &s.local_region).map(|x| vec![x]),
            MethodId::Dser => {
                let rs = self.reject.as_ref().ok_or_else(|| missing("reject score"))?;
                dser_sf(q, query_id, ctx, rs, &s.dser, seed)
            }
            MethodId::Sgen => sgen_sf(q, query_id, ctx, &self.scm, &s.sgen, seed),
            MethodId::C2cVae => match &self.generative {
                Some(Ok((vae, c2c))) => c2c_sf(q, query_id, ctx, vae, c2c, &s.c2c, seed).map(|x| vec![x]),
                Some(Err(e)) => Err(MethodFailure::new(method, format!("generative models failed to train: {e}"))),
                None => Err(missing("VAE")),
            },
            MethodId::Dice => dice_sf(q, query_id, ctx, &self.mad, &s.dice, seed),
            MethodId::Kleor => kleor_sf(q, query_id, ctx, s.kleor).map(|x| vec![x]),
            MethodId::Piece => match &self.piece {
                Some(Ok(model)) => piece_sf(q, query_id, ctx, model, &s.piece).map(|x| vec![x]),
                Some(Err(e)) => Err(MethodFailure::new(method, format!("gamma models failed to fit: {e}"))),
                None => Err(missing("gamma model")),
            },
        }
    }

    /// Primary valid explanation, as used by the robustness sweep.
    pub fn primary(&self, method: MethodId, q: &[f64], query_id: usize, seed: u64) -> Option<Vec<f64>> {
        let sfs = self.explain(method, q, query_id, seed).ok()?;
        sfs.into_iter().find(|s| s.valid).map(|s| s.instance)
    }
}

fn mean(v: &[f64]) -> Option<f64> {
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

struct Unit<'a> {
    dataset: &'a str,
    fold: usize,
    method: MethodId,
    query: usize,
    instance: &'a [f64],
    robustness: bool,
}

fn evaluate(unit: &Unit, models: &FoldModels, cfg: &ExperimentConfig, seed: u64) -> QueryRecord {
    let ctx = &models.ctx;
    let q = unit.instance;
    let mut record = QueryRecord {
        dataset: unit.dataset.to_string(),
        fold: unit.fold,
        query: unit.query,
        method: unit.method,
        seed,
        explanations: Vec::new(),
        failure: None,
        metrics: BTreeMap::new(),
        robustness_failures: 0,
    };
    match models.explain(unit.method, q, unit.query, seed) {
        Ok(sfs) => record.explanations = sfs,
        Err(e) => {
            record.failure = Some(e.reason);
            return record;
        }
    }
    let valid: Vec<&SemiFactual> = record.explanations.iter().filter(|s| s.valid).collect();
    if valid.is_empty() {
        record.failure = Some("no explanation keeps the query's class".into());
        return record;
    }
    let qc = ctx.query_class(q);
    let cf = find_nun(q, &ctx.train, qc).map(|n| n.class).ok();
    let train = &ctx.train;
    let collect = |f: &dyn Fn(&[f64]) -> Option<f64>| mean(&valid.iter().filter_map(|s| f(&s.instance)).collect::<Vec<_>>());
    let ideal = cfg.protocol.ideal_diff as f64;
    let values = [
        (Metric::Distance, collect(&|x| metric_distance(q, x).ok())),
        (Metric::Plausibility, collect(&|x| metric_plausibility(x, train).ok())),
        (Metric::Confusability, collect(&|x| cf.and_then(|c| metric_confusability(x, train, qc, c).ok()))),
        (Metric::Sparsity, collect(&|x| metric_sparsity(q, x, train).ok().map(|s| ideal * s))),
    ];
    for (m, v) in values {
        if let Some(v) = v {
            record.metrics.insert(m, v);
        }
    }
    if unit.robustness {
        let p = &cfg.protocol;
        let rseed = derive_seed(seed, &[hash_str("robustness")]);
        let primary = &valid[0].instance;
        if let Ok(r) = metric_robustness(q, primary, p.epsilon, p.perturbations, rseed, |x, _| {
            models.primary(unit.method, x, unit.query, seed)
        }) {
            record.metrics.insert(Metric::Robustness, r.max_ratio);
            record.robustness_failures = r.failures;
        }
    }
    record
}

struct DatasetRun {
    records: Vec<QueryRecord>,
    accounting: Vec<FoldAccounting>,
    folds: Vec<FoldSummary>,
    seeds: Vec<SeedEntry>,
}

fn run_dataset(cfg: &ExperimentConfig, spec_index: usize, table: &Table, scm: CompiledScm) -> Result<DatasetRun> {
    let name = &cfg.datasets[spec_index].name;
    let settings = cfg.effective_settings();
    let p = &cfg.protocol;
    let ds_seed = derive_seed(cfg.seed, &[hash_str(name)]);
    let mut seeds = vec![SeedEntry { dataset: name.clone(), fold: None, purpose: "dataset".into(), seed: ds_seed }];
    let fold_seed = derive_seed(ds_seed, &[hash_str("folds")]);
    seeds.push(SeedEntry { dataset: name.clone(), fold: None, purpose: "folds".into(), seed: fold_seed });
    let plan = split_kfold(&table.labels, p.folds, fold_seed)?;

    let mut out = DatasetRun { records: Vec::new(), accounting: Vec::new(), folds: Vec::new(), seeds };
    for fold in 0..p.folds {
        let train_idx = plan.train_indices(fold);
        let test_idx = plan.test_indices(fold);
        let scaler = Scaler::fit(&table.schema, train_idx.iter().map(|&i| &table.rows[i]))?;
        let train = table.to_dataset(&scaler, &train_idx)?.with_sameness(p.sameness_std_fraction);
        let test = table.to_dataset(&scaler, &test_idx)?;
        let models_seed = derive_seed(ds_seed, &[fold as u64, hash_str("models")]);
        out.seeds.push(SeedEntry { dataset: name.clone(), fold: Some(fold), purpose: "models".into(), seed: models_seed });
        let models = FoldModels::fit(train, &cfg.methods, &settings, scm.clone(), models_seed)?;
        out.folds.push(FoldSummary {
            dataset: name.clone(),
            fold,
            train_size: train_idx.len(),
            test_size: test_idx.len(),
            accuracy: models.ctx.classifier.accuracy(&test),
            reject_threshold: models.reject.as_ref().map(|r| r.threshold),
        });

        let n_queries = p.max_queries_per_fold.map_or(test_idx.len(), |m| m.min(test_idx.len()));
        let n_robust = p.robustness_queries_per_fold.map_or(n_queries, |m| m.min(n_queries));
        let mut units = Vec::with_capacity(cfg.methods.len() * n_queries);
        for &method in &cfg.methods {
            for (pos, &row) in test_idx.iter().take(n_queries).enumerate() {
                units.push(Unit {
                    dataset: name,
                    fold,
                    method,
                    query: row,
                    instance: &test.instances[pos],
                    robustness: pos < n_robust,
                });
            }
        }
        let records = par_map(&units, Jobs(cfg.jobs), |u| {
            let seed = derive_seed(ds_seed, &[fold as u64, hash_str(u.method.key()), u.query as u64]);
            evaluate(u, &models, cfg, seed)
        });
        for &method in &cfg.methods {
            let mine: Vec<&QueryRecord> = records.iter().filter(|r| r.method == method).collect();
            let failures = mine.iter().filter(|r| r.failure.is_some()).count();
            out.accounting.push(FoldAccounting {
                dataset: name.clone(),
                fold,
                method,
                queries: mine.len(),
                successes: mine.len() - failures,
                failures,
            });
        }
        out.records.extend(records);
    }
    Ok(out)
}

/// Mean per-query metric values into raw report entries. A robustness
/// value whose sweep saw failures is replaced by the slice maximum.
fn aggregate(cfg: &ExperimentConfig, datasets: &[String], records: &[QueryRecord]) -> Vec<ScoreEntry> {
    let mut entries = Vec::new();
    for d in datasets {
        let in_d: Vec<&QueryRecord> = records.iter().filter(|r| &r.dataset == d).collect();
        let slice_max = in_d
            .iter()
            .filter_map(|r| r.metrics.get(&Metric::Robustness).copied())
            .fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.max(v))));
        for metric in Metric::ALL {
            for &method in &cfg.methods {
                let values: Vec<f64> = in_d
                    .iter()
                    .filter(|r| r.method == method)
                    .filter_map(|r| {
                        let v = *r.metrics.get(&metric)?;
                        Some(match (metric, slice_max) {
                            (Metric::Robustness, Some(max)) if r.robustness_failures > 0 => max.max(v),
                            _ => v,
                        })
                    })
                    .collect();
                entries.push(ScoreEntry { dataset: d.clone(), metric, method, raw: mean(&values), normalized: None });
            }
        }
    }
    entries
}

fn load(cfg: &ExperimentConfig, i: usize) -> Result<(Table, CompiledScm)> {
    let spec = &cfg.datasets[i];
    let table = load_table(&spec.csv, &spec.schema)?;
    let scm = match &spec.scm {
        Some(path) => ScmSpec::load(path)?.compile(&table.schema)?,
        None => CompiledScm::default(),
    };
    Ok((table, scm))
}

/// Run the whole protocol. Datasets that fail to load or fit are reported
/// in `dataset_errors` and skipped; method failures never abort the run.
pub fn run_benchmark(cfg: &ExperimentConfig) -> Result<RunArtifact> {
    cfg.validate()?;
    let mut records = Vec::new();
    let mut accounting = Vec::new();
    let mut folds = Vec::new();
    let mut seeds = Vec::new();
    let mut dataset_errors = Vec::new();
    let mut done = Vec::new();
    for (i, spec) in cfg.datasets.iter().enumerate() {
        let result = load(cfg, i).and_then(|(table, scm)| run_dataset(cfg, i, &table, scm));
        match result {
            Ok(run) => {
                records.extend(run.records);
                accounting.extend(run.accounting);
                folds.extend(run.folds);
                seeds.extend(run.seeds);
                done.push(spec.name.clone());
            }
            Err(e @ Error::Config(_)) => return Err(e),
            Err(e) => dataset_errors.push(DatasetFailure { dataset: spec.name.clone(), reason: e.to_string() }),
        }
    }
    let report = normalize_scores(&MetricReport::from_raw(aggregate(cfg, &done, &records)));
    let ranks = compute_ranks(&report);
    let notes = vec![
        "per-query scores are averaged with the arithmetic mean before normalisation".to_string(),
        "methods without a valid explanation in a slice receive the slice-worst normalised score".to_string(),
    ];
    Ok(RunArtifact {
        config: cfg.clone(),
        report,
        ranks,
        accounting,
        folds,
        seeds,
        dataset_errors,
        notes,
        records,
    })
}
