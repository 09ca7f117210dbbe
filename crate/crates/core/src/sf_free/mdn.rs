//! Most Distant Neighbour with the sparsity-weighted score.
//!
//! For every continuous feature the query-class instances above (Higher)
//! and below (Lower) the query beyond the sameness threshold are scored;
//! the best-scoring instance over all features and both directions wins.

use crate::data::FeatureKind;
use crate::explain::{ExplainContext, MethodFailure, MethodId, SemiFactual};

/// Base score: `same / F + diff / diff_max`.
pub fn sfs(same: usize, n_features: usize, diff: f64, diff_max: f64) -> f64 {
    same as f64 / n_features as f64 + diff / diff_max
}

/// `sfs / (F - same)`; `None` when the candidate matches on every feature.
pub fn sfs_v2(same: usize, n_features: usize, diff: f64, diff_max: f64) -> Option<f64> {
    if same >= n_features {
        return None;
    }
    Some(sfs(same, n_features, diff, diff_max) / (n_features - same) as f64)
}

pub fn mdn_sf(q: &[f64], query_id: usize, ctx: &ExplainContext) -> Result<SemiFactual, MethodFailure> {
    let train = &ctx.train;
    let qc = ctx.query_class(q);
    let pool = ctx.class_pool(qc);
    let n_features = train.schema.n_features();
    let same: Vec<usize> = pool.iter().map(|&i| train.same_count(q, &train.instances[i])).collect();

    // (score, train index, feature)
    let mut best: Option<(f64, usize, usize)> = None;
    for f in 0..n_features {
        if train.schema.features()[f].kind != FeatureKind::Continuous {
            continue;
        }
        let c = train.schema.span(f).start;
        let threshold = train.sameness * train.stats[c].std;
        for higher in [true, false] {
            let members: Vec<usize> = (0..pool.len())
                .filter(|&k| {
                    let d = train.instances[pool[k]][c] - q[c];
                    if higher {
                        d > threshold
                    } else {
                        -d > threshold
                    }
                })
                .collect();
            let Some(diff_max) = members.iter().map(|&k| (train.instances[pool[k]][c] - q[c]).abs()).reduce(f64::max)
            else {
                continue;
            };
            for &k in &members {
                let diff = (train.instances[pool[k]][c] - q[c]).abs();
                let Some(score) = sfs_v2(same[k], n_features, diff, diff_max) else { continue };
                let i = pool[k];
                let better = match best {
                    None => true,
                    Some((b, bi, _)) => score > b || (score == b && i < bi),
                };
                if better {
                    best = Some((score, i, f));
                }
            }
        }
    }
    let (score, i, f) = best.ok_or_else(|| MethodFailure::new(MethodId::Mdn, "every Higher/Lower set is empty"))?;
    Ok(ctx
        .semifactual(MethodId::Mdn, query_id, q, qc, train.instances[i].clone())
        .with("sfs_v2", score)
        .with("key_feature", f as f64)
        .with("train_index", i as f64))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_evaluated_scores() {
        // q = [0.5, 0.5], x = [0.5, 0.9]: one feature the same, diff = diff_max = 0.4
        assert!((sfs(1, 2, 0.4, 0.4) - 1.5).abs() < 1e-12);
        assert!((sfs_v2(1, 2, 0.4, 0.4).unwrap() - 1.5).abs() < 1e-12);
        assert_eq!(sfs_v2(2, 2, 0.0, 0.4), None);
    }

    #[test]
    fn v2_is_sfs_over_differing_count() {
        for f in 1..8usize {
            for same in 0..f {
                let (d, m) = (0.3, 0.7);
                let lhs = sfs_v2(same, f, d, m).unwrap();
                let rhs = sfs(same, f, d, m) / (f - same) as f64;
                assert!((lhs - rhs).abs() < 1e-15);
            }
        }
    }
}
