//! DiCE's diverse-set objective turned around for semi-factuals: stay in
//! the query class while moving far from the query.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, FeatureKind};
use crate::explain::{ExplainContext, MethodFailure, MethodId, SemiFactual};
use crate::model::ForestClassifier;
use crate::rng::rng_from_seed;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DiceConfig {
    pub k: usize,
    pub lambda1: f64,
    pub lambda2: f64,
    pub budget: usize,
}

impl Default for DiceConfig {
    fn default() -> Self {
        DiceConfig { k: 3, lambda1: 0.5, lambda2: 1.0, budget: 2000 }
    }
}

/// Per-column inverse-MAD weights; a zero MAD gets weight 1.
pub fn mad_weights(train: &Dataset) -> Vec<f64> {
    let median = |v: &mut Vec<f64>| {
        v.sort_by(f64::total_cmp);
        let n = v.len();
        if n % 2 == 1 { v[n / 2] } else { (v[n / 2 - 1] + v[n / 2]) / 2.0 }
    };
    (0..train.width())
        .map(|c| {
            let mut col: Vec<f64> = train.instances.iter().map(|x| x[c]).collect();
            let m = median(&mut col);
            let mut dev: Vec<f64> = col.iter().map(|v| (v - m).abs()).collect();
            let mad = median(&mut dev);
            if mad > 0.0 { 1.0 / mad } else { 1.0 }
        })
        .collect()
}

fn weighted_l1(a: &[f64], b: &[f64], w: &[f64]) -> f64 {
    a.iter().zip(b).zip(w).map(|((x, y), w)| w * (x - y).abs()).sum()
}

fn determinant(mut m: Vec<Vec<f64>>) -> f64 {
    let n = m.len();
    let mut det = 1.0;
    for col in 0..n {
        let pivot = (col..n).max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs())).unwrap();
        if m[pivot][col].abs() < 1e-14 {
            return 0.0;
        }
        if pivot != col {
            m.swap(pivot, col);
            det = -det;
        }
        det *= m[col][col];
        for r in col + 1..n {
            let f = m[r][col] / m[col][col];
            for c in col..n {
                m[r][c] -= f * m[col][c];
            }
        }
    }
    det
}

/// `mean hinge(0.5 - p_y) + lambda1 * mean dist(c, q) - lambda2 * det K`
/// with `K_ij = 1 / (1 + dist(c_i, c_j))`. A negative `lambda1` rewards
/// distance from the query.
pub fn dice_loss(
    candidates: &[Vec<f64>],
    q: &[f64],
    clf: &ForestClassifier,
    y: usize,
    lambda1: f64,
    lambda2: f64,
    weights: &[f64],
) -> f64 {
    let k = candidates.len() as f64;
    let yloss = candidates.iter().map(|c| (0.5 - clf.predict_proba(c)[y]).max(0.0)).sum::<f64>() / k;
    let dist = candidates.iter().map(|c| weighted_l1(c, q, weights)).sum::<f64>() / k;
    let kernel = candidates
        .iter()
        .map(|a| candidates.iter().map(|b| 1.0 / (1.0 + weighted_l1(a, b, weights))).collect())
        .collect();
    yloss + lambda1 * dist - lambda2 * determinant(kernel)
}

pub fn dice_sf(
    q: &[f64],
    query_id: usize,
    ctx: &ExplainContext,
    weights: &[f64],
    cfg: &DiceConfig,
    seed: u64,
) -> Result<Vec<SemiFactual>, MethodFailure> {
    let fail = |r: &str| MethodFailure::new(MethodId::Dice, r);
    if cfg.k == 0 || cfg.budget < cfg.k {
        return Err(fail("k must be at least 1 and budget at least k"));
    }
    let schema = &ctx.train.schema;
    let mutable = schema.mutable_features();
    if mutable.is_empty() {
        return Err(fail("no mutable features"));
    }
    let qc = ctx.query_class(q);
    let loss = |set: &[Vec<f64>]| dice_loss(set, q, &ctx.classifier, qc, -cfg.lambda1, cfg.lambda2, weights);
    let mut rng = rng_from_seed(seed);

    let mut set: Vec<Vec<f64>> = Vec::with_capacity(cfg.k);
    let mut current = f64::INFINITY;
    let mut initial = f64::NAN;
    for _ in 0..cfg.budget {
        let mut c = q.to_vec();
        let first = rng.random_range(0..mutable.len());
        for (j, &f) in mutable.iter().enumerate() {
            if j != first && !rng.random_bool(0.5) {
                continue;
            }
            match schema.features()[f].kind {
                FeatureKind::Continuous => c[schema.span(f).start] = rng.random(),
                FeatureKind::Categorical => schema.set_category(&mut c, f, rng.random_range(0..schema.span(f).len())),
            }
        }
        if ctx.classifier.predict(&c) != qc || set.contains(&c) {
            continue;
        }
        if set.len() < cfg.k {
            set.push(c);
            if set.len() == cfg.k {
                current = loss(&set);
                initial = current;
            }
            continue;
        }
        let mut best: Option<(f64, usize)> = None;
        for i in 0..cfg.k {
            let mut trial = set.clone();
            trial[i] = c.clone();
            let l = loss(&trial);
            if l < current && best.is_none_or(|(b, _)| l < b) {
                best = Some((l, i));
            }
        }
        if let Some((l, i)) = best {
            set[i] = c;
            current = l;
        }
    }
    if set.is_empty() {
        return Err(fail("no valid candidate within budget"));
    }
    if set.len() < cfg.k {
        current = loss(&set);
        initial = current;
    }
    Ok(set
        .into_iter()
        .map(|x| {
            ctx.semifactual(MethodId::Dice, query_id, q, qc, x)
                .with("final_loss", current)
                .with("initial_loss", initial)
        })
        .collect())
}
