//! KLEOR: pick the query-class instance closest to the NUN.

use serde::{Deserialize, Serialize};

use super::nun::find_nun;
use crate::data::Schema;
use crate::explain::{ExplainContext, MethodFailure, MethodId, SemiFactual};
use crate::model::euclidean;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KleorVariant {
    SimMiss,
    GlobalSim,
    #[default]
    AttrSim,
}

pub fn similarity(a: &[f64], b: &[f64]) -> f64 {
    1.0 / (1.0 + euclidean(a, b))
}

/// Features on which `x` is more similar to `q` than the NUN is.
fn closer_features(schema: &Schema, q: &[f64], x: &[f64], nun: &[f64]) -> usize {
    (0..schema.n_features())
        .filter(|&f| {
            let s = schema.span(f);
            similarity(&q[s.clone()], &x[s.clone()]) > similarity(&q[s.clone()], &nun[s])
        })
        .count()
}

pub fn kleor_sf(
    q: &[f64],
    query_id: usize,
    ctx: &ExplainContext,
    variant: KleorVariant,
) -> Result<SemiFactual, MethodFailure> {
    let fail = |r: String| MethodFailure::new(MethodId::Kleor, r);
    let qc = ctx.query_class(q);
    let nun = find_nun(q, &ctx.train, qc).map_err(|e| fail(e.to_string()))?;
    let pool = ctx.class_pool(qc);
    if pool.is_empty() {
        return Err(fail("no query-class training instances".into()));
    }
    let x = |i: usize| ctx.train.instances[i].as_slice();
    let to_nun = |i: usize| similarity(x(i), &nun.instance);

    let argmax = |cands: &[usize], key: &dyn Fn(usize) -> (usize, f64)| {
        let mut best = cands[0];
        for &i in &cands[1..] {
            let (a, b) = (key(i), key(best));
            if a.0 > b.0 || (a.0 == b.0 && a.1 > b.1) {
                best = i;
            }
        }
        best
    };

    let mut fallback = false;
    let chosen = match variant {
        KleorVariant::SimMiss => argmax(&pool, &|i| (0, to_nun(i))),
        KleorVariant::GlobalSim => {
            let sim_qn = similarity(q, &nun.instance);
            let between: Vec<usize> = pool.iter().copied().filter(|&i| similarity(q, x(i)) > sim_qn).collect();
            if between.is_empty() {
                fallback = true;
                argmax(&pool, &|i| (0, to_nun(i)))
            } else {
                argmax(&between, &|i| (0, to_nun(i)))
            }
        }
        KleorVariant::AttrSim => {
            let schema = &ctx.train.schema;
            argmax(&pool, &|i| (closer_features(schema, q, x(i), &nun.instance), to_nun(i)))
        }
    };
    Ok(ctx
        .semifactual(MethodId::Kleor, query_id, q, qc, x(chosen).to_vec())
        .with("train_index", chosen as f64)
        .with("nun_index", nun.index as f64)
        .with("nun_similarity", to_nun(chosen))
        .with("fallback", if fallback { 1.0 } else { 0.0 }))
}
