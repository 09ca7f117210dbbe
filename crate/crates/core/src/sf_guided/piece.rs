//! Tabular PIECE: pull features that are exceptional for the counterfactual
//! class toward that class's expected values, stopping before the
//! prediction flips.

use serde::{Deserialize, Serialize};

use super::nun::find_nun;
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::explain::{ExplainContext, MethodFailure, MethodId, SemiFactual};
use crate::model::{fit_gamma, gamma_cdf, GammaParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PieceConfig {
    pub alpha: f64,
    /// Steps taken per feature on the way to its expected value.
    pub steps: usize,
}

impl Default for PieceConfig {
    fn default() -> Self {
        PieceConfig { alpha: 0.05, steps: 10 }
    }
}

/// Gamma models per class and continuous feature, fitted on a training fold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PieceModel {
    /// `[class][feature]`; `None` for categorical features or classes with
    /// fewer than two members.
    models: Vec<Vec<Option<GammaParams>>>,
}

impl PieceModel {
    pub fn fit(train: &Dataset) -> Result<Self> {
        let schema = &train.schema;
        let mut models = vec![vec![None; schema.n_features()]; schema.n_classes()];
        for (class, row) in models.iter_mut().enumerate() {
            let members = train.indices_of_class(class);
            if members.len() < 2 {
                continue;
            }
            for f in schema.continuous_features() {
                let c = schema.span(f).start;
                let values: Vec<f64> = members.iter().map(|&i| train.instances[i][c]).collect();
                row[f] = Some(fit_gamma(&values)?);
            }
        }
        Ok(PieceModel { models })
    }

    pub fn model(&self, class: usize, feature: usize) -> Option<&GammaParams> {
        self.models.get(class)?.get(feature)?.as_ref()
    }

    /// Two-sided tail probability of `value` under the class model.
    pub fn tail(&self, class: usize, feature: usize, value: f64) -> Result<f64> {
        let m = self
            .model(class, feature)
            .ok_or_else(|| Error::input(format!("no gamma model for class {class}, feature {feature}")))?;
        let p = gamma_cdf(m, value);
        Ok(p.min(1.0 - p))
    }
}

pub fn piece_sf(
    q: &[f64],
    query_id: usize,
    ctx: &ExplainContext,
    model: &PieceModel,
    cfg: &PieceConfig,
) -> Result<SemiFactual, MethodFailure> {
    let fail = |r: String| MethodFailure::new(MethodId::Piece, r);
    if !(cfg.alpha > 0.0 && cfg.alpha < 0.5) || cfg.steps == 0 {
        return Err(fail("alpha must lie in (0, 0.5) and steps be positive".into()));
    }
    let schema = &ctx.train.schema;
    let qc = ctx.query_class(q);
    let cf = find_nun(q, &ctx.train, qc).map_err(|e| fail(e.to_string()))?.class;

    let mut exceptional: Vec<(f64, usize)> = Vec::new();
    for f in schema.continuous_features() {
        if !schema.is_mutable(f) || model.model(cf, f).is_none() {
            continue;
        }
        let tail = model.tail(cf, f, q[schema.span(f).start]).map_err(|e| fail(e.to_string()))?;
        if tail < cfg.alpha {
            exceptional.push((tail, f));
        }
    }
    exceptional.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    if exceptional.is_empty() {
        return Ok(ctx.semifactual(MethodId::Piece, query_id, q, qc, q.to_vec()).with("exceptional_features", 0.0));
    }

    let mut x = q.to_vec();
    let mut taken = 0;
    'features: for &(_, f) in &exceptional {
        let c = schema.span(f).start;
        let target = model.model(cf, f).unwrap().expected_value().clamp(0.0, 1.0);
        let start = x[c];
        for s in 1..=cfg.steps {
            let mut next = x.clone();
            next[c] = start + (target - start) * s as f64 / cfg.steps as f64;
            if ctx.classifier.predict(&next) != qc {
                break 'features;
            }
            x = next;
            taken += 1;
        }
    }
    Ok(ctx
        .semifactual(MethodId::Piece, query_id, q, qc, x)
        .with("exceptional_features", exceptional.len() as f64)
        .with("steps_taken", taken as f64))
}
