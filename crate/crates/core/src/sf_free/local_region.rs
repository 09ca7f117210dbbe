//! Local-Region: fit a logistic surrogate on a class-balanced neighbourhood
//! of the query and return the query-class member the surrogate is least
//! sure about.

use serde::{Deserialize, Serialize};

use crate::explain::{ExplainContext, MethodFailure, MethodId, SemiFactual};
use crate::model::{assemble_local_region, fit_local_surrogate, SurrogateParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LocalRegionConfig {
    pub min_per_class: usize,
    pub surrogate: SurrogateParams,
}

impl Default for LocalRegionConfig {
    fn default() -> Self {
        LocalRegionConfig { min_per_class: 200, surrogate: SurrogateParams::default() }
    }
}

pub fn local_region_sf(
    q: &[f64],
    query_id: usize,
    ctx: &ExplainContext,
    cfg: &LocalRegionConfig,
) -> Result<SemiFactual, MethodFailure> {
    let fail = |r: String| MethodFailure::new(MethodId::LocalRegion, r);
    let qc = ctx.query_class(q);
    let region = assemble_local_region(q, &ctx.train, cfg.min_per_class);
    let xs: Vec<Vec<f64>> = region.iter().map(|&i| ctx.train.instances[i].clone()).collect();
    let ys: Vec<bool> = region.iter().map(|&i| ctx.train.labels[i] == qc).collect();
    let surrogate = fit_local_surrogate(&xs, &ys, cfg.surrogate).map_err(|e| fail(e.to_string()))?;

    let pool = ctx.class_pool(qc);
    let mut best: Option<(f64, usize)> = None;
    for &i in region.iter().filter(|i| pool.binary_search(i).is_ok()) {
        let p = surrogate.predict(&ctx.train.instances[i]);
        if best.is_none_or(|(b, _)| p < b) {
            best = Some((p, i));
        }
    }
    let (p, i) = best.ok_or_else(|| fail("no query-class candidates in the local region".into()))?;
    Ok(ctx
        .semifactual(MethodId::LocalRegion, query_id, q, qc, ctx.train.instances[i].clone())
        .with("surrogate_probability", p)
        .with("train_index", i as f64)
        .with("region_size", region.len() as f64))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{Dataset, FeatureSchema, Schema};
    use crate::model::{fit_classifier, fit_local_surrogate, ForestParams};

    fn line() -> ExplainContext {
        let schema = Schema::new(vec![FeatureSchema::continuous("x", true)], vec!["a".into(), "b".into()]).unwrap();
        let xs: Vec<Vec<f64>> = (0..60).map(|i| vec![i as f64 / 59.0]).collect();
        let ys = xs.iter().map(|x| usize::from(x[0] > 0.5)).collect();
        let ds = Dataset::new(xs, ys, schema).unwrap();
        let clf = fit_classifier(&ds, ForestParams { n_trees: 15, ..Default::default() }, 3).unwrap();
        ExplainContext::new(ds, clf)
    }

    #[test]
    fn picks_the_candidate_nearest_the_boundary() {
        let ctx = line();
        let q = [0.1];
        let sf = local_region_sf(&q, 0, &ctx, &LocalRegionConfig::default()).unwrap();
        assert!(sf.valid);
        // brute force: refit the same surrogate and score every candidate
        let region = assemble_local_region(&q, &ctx.train, 200);
        let xs: Vec<Vec<f64>> = region.iter().map(|&i| ctx.train.instances[i].clone()).collect();
        let ys: Vec<bool> = region.iter().map(|&i| ctx.train.labels[i] == 0).collect();
        let s = fit_local_surrogate(&xs, &ys, SurrogateParams::default()).unwrap();
        let oracle = ctx
            .class_pool(0)
            .into_iter()
            .min_by(|&a, &b| {
                s.predict(&ctx.train.instances[a]).total_cmp(&s.predict(&ctx.train.instances[b])).then(a.cmp(&b))
            })
            .unwrap();
        assert_eq!(sf.instance, ctx.train.instances[oracle]);
        // nearest the boundary at 0.5 among class-a members
        let best_a = ctx.class_pool(0).into_iter().map(|i| ctx.train.instances[i][0]).fold(0.0, f64::max);
        assert_eq!(sf.instance[0], best_a);
    }
}
