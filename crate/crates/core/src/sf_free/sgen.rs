//! S-GEN: diverse, robust actions whose causal consequences keep the
//! prediction while moving the instance as far as plausible.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::scm::CompiledScm;
use crate::explain::{ExplainContext, MethodFailure, MethodId, SemiFactual};
use crate::model::{euclidean, ForestClassifier, KnnIndex};
use crate::rng::{derive_seed, hash_str, rng_from_seed, sample_in_ball, standard_normal};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SgenConfig {
    pub m: usize,
    pub gamma: f64,
    pub psi: f64,
    pub radius: f64,
    pub ball_samples: usize,
    pub beta: f64,
    pub density_k: usize,
    pub budget: usize,
    pub max_delta: f64,
    pub step: f64,
}

impl Default for SgenConfig {
    fn default() -> Self {
        SgenConfig {
            m: 3,
            gamma: 1.0,
            psi: 0.5,
            radius: 0.05,
            ball_samples: 50,
            beta: 0.5,
            density_k: 5,
            budget: 2000,
            max_delta: 0.5,
            step: 0.1,
        }
    }
}

/// Outcome of an action: apply it, propagate through the SCM, clamp to the
/// data range.
fn outcome(q: &[f64], action: &[f64], scm: &CompiledScm) -> Vec<f64> {
    let mut x = scm.propagate(q, action);
    for v in &mut x {
        *v = v.clamp(0.0, 1.0);
    }
    x
}

/// Distance between the query and its post-action state.
pub fn sgen_gain(q: &[f64], action: &[f64], scm: &CompiledScm) -> f64 {
    euclidean(q, &outcome(q, action, scm))
}

/// Mean pairwise L2 distance; zero for fewer than two points.
pub fn diversity(points: &[Vec<f64>]) -> f64 {
    let m = points.len();
    if m < 2 {
        return 0.0;
    }
    let mut total = 0.0;
    for i in 0..m {
        for j in i + 1..m {
            total += euclidean(&points[i], &points[j]);
        }
    }
    total / (m * (m - 1) / 2) as f64
}

/// Seed of the neighbourhood sample used by the robustness check of a query.
pub fn sgen_ball_seed(seed: u64) -> u64 {
    derive_seed(seed, &[hash_str("sgen-ball")])
}

/// Smallest query-class probability over `n` uniform samples in the L2 ball
/// around `x`, the point itself included.
pub fn post_robustness(clf: &ForestClassifier, x: &[f64], class: usize, radius: f64, n: usize, seed: u64) -> f64 {
    let mut rng = rng_from_seed(seed);
    let mut worst = clf.predict_proba(x)[class];
    for _ in 0..n {
        let y = sample_in_ball(&mut rng, x, radius);
        worst = worst.min(clf.predict_proba(&y)[class]);
    }
    worst
}

struct Objective<'a> {
    q: &'a [f64],
    scm: &'a CompiledScm,
    density: KnnIndex,
    k: usize,
    cfg: &'a SgenConfig,
}

impl Objective<'_> {
    fn plausibility(&self, x: &[f64]) -> f64 {
        let nn = self.density.query(x, self.k).expect("k checked");
        1.0 / (1.0 + nn[self.k - 1].distance)
    }

    fn value(&self, actions: &[Vec<f64>]) -> f64 {
        let outs: Vec<Vec<f64>> = actions.iter().map(|a| outcome(self.q, a, self.scm)).collect();
        let b = self.cfg.beta;
        let mean = outs.iter().map(|x| b * self.plausibility(x) + (1.0 - b) * euclidean(self.q, x)).sum::<f64>()
            / outs.len() as f64;
        mean + self.cfg.gamma * diversity(&outs)
    }
}

pub fn sgen_sf(
    q: &[f64],
    query_id: usize,
    ctx: &ExplainContext,
    scm: &CompiledScm,
    cfg: &SgenConfig,
    seed: u64,
) -> Result<Vec<SemiFactual>, MethodFailure> {
    let fail = |r: &str| MethodFailure::new(MethodId::Sgen, r);
    if cfg.m == 0 || !(cfg.psi > 0.0 && cfg.psi < 1.0) {
        return Err(fail("m must be at least 1 and psi in (0, 1)"));
    }
    let schema = &ctx.train.schema;
    let columns: Vec<usize> = schema
        .continuous_features()
        .into_iter()
        .filter(|&f| schema.is_mutable(f))
        .map(|f| schema.span(f).start)
        .collect();
    if columns.is_empty() {
        return Err(fail("no mutable continuous features"));
    }
    let qc = ctx.query_class(q);
    let pool: Vec<Vec<f64>> = ctx.class_pool(qc).into_iter().map(|i| ctx.train.instances[i].clone()).collect();
    if pool.is_empty() {
        return Err(fail("no query-class training instances"));
    }
    let k = cfg.density_k.clamp(1, pool.len());
    let obj = Objective { q, scm, density: KnnIndex::new(pool).map_err(|e| fail(&e.to_string()))?, k, cfg };

    let ball = sgen_ball_seed(seed);
    let robust = |a: &[f64]| {
        let x = outcome(q, a, scm);
        ctx.classifier.predict(&x) == qc
            && post_robustness(&ctx.classifier, &x, qc, cfg.radius, cfg.ball_samples, ball) >= cfg.psi
    };
    let mut rng = rng_from_seed(seed);
    let perturb = |a: &[f64], scale: f64, rng: &mut crate::rng::SfRng| {
        let mut b = a.to_vec();
        let c = columns[rng.random_range(0..columns.len())];
        b[c] = (b[c] + scale * standard_normal(rng)).clamp(-cfg.max_delta, cfg.max_delta);
        b
    };

    // Seed the action set with feasible random actions.
    let zero = vec![0.0; q.len()];
    let mut evals = 0;
    let mut actions: Vec<Vec<f64>> = Vec::with_capacity(cfg.m);
    while actions.len() < cfg.m && evals < cfg.budget {
        let a = perturb(&zero, cfg.max_delta / 2.0, &mut rng);
        evals += 1;
        if robust(&a) {
            actions.push(a);
        }
    }
    if actions.is_empty() {
        return Err(fail("no action satisfies the robustness constraint within budget"));
    }
    while actions.len() < cfg.m {
        actions.push(actions[actions.len() - 1].clone());
    }

    let mut best = obj.value(&actions);
    while evals < cfg.budget {
        let i = rng.random_range(0..cfg.m);
        let mut trial = actions.clone();
        trial[i] = perturb(&actions[i], cfg.step, &mut rng);
        evals += 1;
        let v = obj.value(&trial);
        if v > best && robust(&trial[i]) {
            best = v;
            actions = trial;
        }
    }

    Ok(actions
        .iter()
        .map(|a| {
            let x = outcome(q, a, scm);
            let p = obj.plausibility(&x);
            let gain = euclidean(q, &x);
            ctx.semifactual(MethodId::Sgen, query_id, q, qc, x)
                .with("gain", gain)
                .with("plausibility", p)
                .with("objective", best)
        })
        .collect())
}
