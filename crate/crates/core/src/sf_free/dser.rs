//! DSER: semi-factuals for a reject-option classifier, found by minimising
//! a feasibility + sparsity + similarity + diversity loss.

use std::collections::BTreeSet;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, FeatureKind};
use crate::error::Result;
use crate::explain::{ExplainContext, MethodFailure, MethodId, SemiFactual};
use crate::model::{grid_search_threshold, RejectScore};
use crate::rng::{derive_seed, rng_from_seed, standard_normal, SfRng};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DserConfig {
    pub c_feasible: f64,
    pub c_sf: f64,
    pub c_sparse: f64,
    pub c_similar: f64,
    pub c_diverse: f64,
    pub mu: usize,
    /// Reject threshold; `None` means grid search on the training fold.
    pub theta: Option<f64>,
    pub theta_grid: Vec<f64>,
    pub reject_k: usize,
    pub budget: usize,
    pub population: usize,
    pub step: f64,
    pub n_diverse: usize,
    pub max_retries: usize,
}

impl Default for DserConfig {
    fn default() -> Self {
        DserConfig {
            c_feasible: 1.0,
            c_sf: 1.0,
            c_sparse: 1.0,
            c_similar: 1.0,
            c_diverse: 1.0,
            mu: 1,
            theta: None,
            theta_grid: vec![0.0, 0.1, 0.2, 0.3, 0.4, 0.5],
            reject_k: 5,
            budget: 2000,
            population: 20,
            step: 0.15,
            n_diverse: 3,
            max_retries: 3,
        }
    }
}

/// Reject threshold for a training fold: the configured one, else grid search.
pub fn dser_threshold(train: &Dataset, cfg: &DserConfig, seed: u64) -> Result<f64> {
    match cfg.theta {
        Some(t) => Ok(t),
        None => grid_search_threshold(train, cfg.reject_k, &cfg.theta_grid, 5, seed),
    }
}

/// Loss of a candidate. `used` holds features changed by earlier explanations.
pub fn dser_loss(
    q_sf: &[f64],
    q: &[f64],
    cfg: &DserConfig,
    rs: &RejectScore,
    used: &BTreeSet<usize>,
    data: &Dataset,
) -> f64 {
    loss_given_query_score(q_sf, q, rs.score(q), cfg, rs, used, data)
}

fn loss_given_query_score(
    q_sf: &[f64],
    q: &[f64],
    r_q: f64,
    cfg: &DserConfig,
    rs: &RejectScore,
    used: &BTreeSet<usize>,
    data: &Dataset,
) -> f64 {
    let r_sf = rs.score(q_sf);
    let feasible = cfg.c_feasible * (r_sf - rs.threshold).max(0.0) + cfg.c_sf * (r_q - r_sf).max(0.0);
    let changed = data.changed_features(q, q_sf);
    let sparse = cfg.c_sparse * changed.len().saturating_sub(cfg.mu) as f64;
    let dist = q_sf.iter().zip(q).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
    let reused = changed.iter().filter(|f| used.contains(f)).count() as f64;
    feasible + sparse - cfg.c_similar * dist + cfg.c_diverse * reused
}

struct Search<'a> {
    q: &'a [f64],
    qc: usize,
    r_q: f64,
    ctx: &'a ExplainContext,
    rs: &'a RejectScore,
    cfg: &'a DserConfig,
    mutable: Vec<usize>,
}

impl Search<'_> {
    fn mutate(&self, x: &[f64], rng: &mut SfRng) -> Vec<f64> {
        let schema = &self.ctx.train.schema;
        let mut y = x.to_vec();
        let n = if rng.random_bool(0.7) { 1 } else { 2 };
        for _ in 0..n {
            let f = self.mutable[rng.random_range(0..self.mutable.len())];
            match schema.features()[f].kind {
                FeatureKind::Continuous => {
                    let c = schema.span(f).start;
                    y[c] += self.cfg.step * standard_normal(rng);
                }
                FeatureKind::Categorical => {
                    let k = schema.span(f).len();
                    schema.set_category(&mut y, f, rng.random_range(0..k));
                }
            }
        }
        schema.project(&mut y);
        y
    }

    /// One evolution-strategy run. Returns (best, loss, initial best loss).
    fn run(&self, used: &BTreeSet<usize>, seed: u64) -> Option<(Vec<f64>, f64, f64)> {
        let mut rng = rng_from_seed(seed);
        let loss = |x: &[f64]| loss_given_query_score(x, self.q, self.r_q, self.cfg, self.rs, used, &self.ctx.train);
        let valid = |x: &[f64]| self.ctx.classifier.predict(x) == self.qc;
        let mut evals = 0;
        let mut pop: Vec<(f64, Vec<f64>)> = Vec::with_capacity(self.cfg.population);
        while pop.len() < self.cfg.population && evals < self.cfg.budget {
            let x = self.mutate(self.q, &mut rng);
            evals += 1;
            if valid(&x) {
                pop.push((loss(&x), x));
            }
        }
        if pop.is_empty() {
            return None;
        }
        let initial = pop.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
        while evals < self.cfg.budget {
            let parent = &pop[rng.random_range(0..pop.len())].1;
            let child = self.mutate(parent, &mut rng);
            evals += 1;
            if !valid(&child) {
                continue;
            }
            let l = loss(&child);
            let worst = pop.iter().enumerate().max_by(|a, b| a.1 .0.total_cmp(&b.1 .0)).map(|(i, p)| (i, p.0));
            match worst {
                Some((i, w)) if pop.len() >= self.cfg.population && l < w => pop[i] = (l, child),
                _ if pop.len() < self.cfg.population => pop.push((l, child)),
                _ => {}
            }
        }
        let (l, best) = pop.into_iter().min_by(|a, b| a.0.total_cmp(&b.0))?;
        Some((best, l, initial))
    }
}

/// Generate `cfg.n_diverse` semi-factuals one after another; each one's
/// changed features are penalised for the ones that follow.
pub fn dser_sf(
    q: &[f64],
    query_id: usize,
    ctx: &ExplainContext,
    rs: &RejectScore,
    cfg: &DserConfig,
    seed: u64,
) -> Result<Vec<SemiFactual>, MethodFailure> {
    let fail = |r: &str| MethodFailure::new(MethodId::Dser, r);
    if cfg.n_diverse == 0 || cfg.mu == 0 {
        return Err(fail("n_diverse and mu must be at least 1"));
    }
    let mutable = ctx.train.schema.mutable_features();
    if mutable.is_empty() {
        return Err(fail("no mutable features"));
    }
    let search = Search { q, qc: ctx.query_class(q), r_q: rs.score(q), ctx, rs, cfg, mutable };
    let mut used = BTreeSet::new();
    let mut out = Vec::with_capacity(cfg.n_diverse);
    for d in 0..cfg.n_diverse {
        let found = (0..=cfg.max_retries).find_map(|attempt| search.run(&used, derive_seed(seed, &[d as u64, attempt as u64])));
        let Some((x, loss, initial)) = found else {
            if out.is_empty() {
                return Err(fail("no valid candidate within budget"));
            }
            break;
        };
        let r = rs.score(&x);
        let sf = ctx
            .semifactual(MethodId::Dser, query_id, q, search.qc, x)
            .with("final_loss", loss)
            .with("initial_best_loss", initial)
            .with("reject_score", r);
        used.extend(sf.changed_features.iter().copied());
        out.push(sf);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::synthetic::two_gaussians;
    use crate::model::{fit_classifier, ForestParams};

    fn context() -> (ExplainContext, RejectScore) {
        let train = two_gaussians(200, 11);
        let clf = fit_classifier(&train, ForestParams { n_trees: 20, ..Default::default() }, 1).unwrap();
        let rs = RejectScore::fit(&train, 5, 0.2).unwrap();
        (ExplainContext::new(train, clf), rs)
    }

    fn cfg() -> DserConfig {
        DserConfig { budget: 400, n_diverse: 2, ..Default::default() }
    }

    #[test]
    fn loss_of_the_query_is_its_feasibility() {
        let (ctx, rs) = context();
        let q = &ctx.train.instances[0];
        let l = dser_loss(q, q, &cfg(), &rs, &BTreeSet::new(), &ctx.train);
        assert!((l - (rs.score(q) - rs.threshold).max(0.0)).abs() < 1e-12);
    }

    #[test]
    fn loss_terms_follow_their_definitions() {
        let (ctx, rs) = context();
        let q = ctx.train.instances[0].clone();
        let mut x = q.clone();
        // move three features by clearly more than the sameness threshold
        for c in 0..3 {
            x[c] = if q[c] > 0.5 { q[c] - 0.4 } else { q[c] + 0.4 };
        }
        let only_sparse = DserConfig { c_feasible: 0.0, c_sf: 0.0, c_similar: 0.0, c_diverse: 0.0, ..cfg() };
        assert_eq!(dser_loss(&x, &q, &only_sparse, &rs, &BTreeSet::new(), &ctx.train), 2.0);

        let only_similar = DserConfig { c_feasible: 0.0, c_sf: 0.0, c_sparse: 0.0, c_diverse: 0.0, ..cfg() };
        let mut far = q.clone();
        far[0] += 2.0;
        let l = dser_loss(&far, &q, &only_similar, &rs, &BTreeSet::new(), &ctx.train);
        assert!((l + 2.0).abs() < 1e-12);

        let only_diverse = DserConfig { c_feasible: 0.0, c_sf: 0.0, c_sparse: 0.0, c_similar: 0.0, ..cfg() };
        let used: BTreeSet<usize> = [0, 1, 3].into();
        assert_eq!(dser_loss(&x, &q, &only_diverse, &rs, &used, &ctx.train), 2.0);
    }

    #[test]
    fn search_is_elitist_valid_and_respects_mutability() {
        let (ctx, rs) = context();
        for (id, q) in ctx.train.instances.iter().take(10).enumerate() {
            let sfs = dser_sf(q, id, &ctx, &rs, &cfg(), id as u64).unwrap();
            for sf in &sfs {
                assert!(sf.valid);
                assert!(sf.diagnostics["final_loss"] <= sf.diagnostics["initial_best_loss"]);
                assert_eq!(sf.instance[3], q[3], "immutable feature changed");
            }
        }
    }

    #[test]
    fn later_explanations_avoid_used_features() {
        let (ctx, rs) = context();
        let q = &ctx.train.instances[5];
        let sfs = dser_sf(q, 5, &ctx, &rs, &cfg(), 3).unwrap();
        assert_eq!(sfs.len(), 2);
        assert_ne!(sfs[0].changed_features, sfs[1].changed_features);
    }

    #[test]
    fn deterministic_given_seed() {
        let (ctx, rs) = context();
        let q = &ctx.train.instances[2];
        assert_eq!(dser_sf(q, 2, &ctx, &rs, &cfg(), 9), dser_sf(q, 2, &ctx, &rs, &cfg(), 9));
    }
}
