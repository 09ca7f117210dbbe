use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::model::euclidean;
use crate::rng::{rng_from_seed, sample_in_ball};

const DISTANCE_FLOOR: f64 = 1e-12;

pub fn metric_distance(q: &[f64], sf: &[f64]) -> Result<f64> {
    if q.len() != sf.len() {
        return Err(Error::input(format!("arity mismatch: {} vs {}", q.len(), sf.len())));
    }
    Ok(euclidean(q, sf))
}

fn nearest_distinct<'a>(x: &[f64], points: impl Iterator<Item = &'a Vec<f64>>) -> Option<f64> {
    points.filter(|p| p.as_slice() != x).map(|p| euclidean(x, p)).min_by(f64::total_cmp)
}

/// Distance to the nearest training instance that is not a copy of `sf`.
pub fn metric_plausibility(sf: &[f64], train: &Dataset) -> Result<f64> {
    nearest_distinct(sf, train.instances.iter())
        .ok_or_else(|| Error::input("training set holds no instance distinct from the explanation"))
}

/// `1 - d(sf, cf class) / d(sf, query class)`, each `d` the distance to the
/// nearest distinct member of that class.
pub fn metric_confusability(sf: &[f64], train: &Dataset, query_class: usize, cf_class: usize) -> Result<f64> {
    let d = |class: usize| {
        let members = train.instances.iter().zip(&train.labels).filter(|(_, &y)| y == class).map(|(x, _)| x);
        nearest_distinct(sf, members)
            .map(|d| d.max(DISTANCE_FLOOR))
            .ok_or_else(|| Error::input(format!("class {class} has no distinct training member")))
    };
    Ok(1.0 - d(cf_class)? / d(query_class)?)
}

/// Local Lipschitz estimate of an explanation function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Robustness {
    /// Largest `|f(q) - f(x)| / |q - x|` over perturbations that were explained.
    pub max_ratio: f64,
    /// Perturbations the method failed to explain.
    pub failures: usize,
}

/// Sample `n` points uniformly in the `eps` ball around `q` and compare
/// their explanations with `f_q`. `explain(x, i)` explains the i-th sample.
pub fn metric_robustness<F>(q: &[f64], f_q: &[f64], eps: f64, n: usize, seed: u64, explain: F) -> Result<Robustness>
where
    F: Fn(&[f64], usize) -> Option<Vec<f64>>,
{
    if !(eps > 0.0) || n == 0 {
        return Err(Error::input("robustness needs eps > 0 and at least one perturbation"));
    }
    let mut rng = rng_from_seed(seed);
    let samples: Vec<Vec<f64>> = (0..n).map(|_| sample_in_ball(&mut rng, q, eps)).collect();
    let mut out = Robustness { max_ratio: 0.0, failures: 0 };
    for (i, x) in samples.iter().enumerate() {
        match explain(x, i) {
            Some(f_x) => {
                let dx = euclidean(q, x);
                if dx > 0.0 {
                    out.max_ratio = out.max_ratio.max(euclidean(f_q, &f_x) / dx);
                }
            }
            None => out.failures += 1,
        }
    }
    Ok(out)
}

/// `1 / changed features` under the sameness rule.
pub fn metric_sparsity(q: &[f64], sf: &[f64], data: &Dataset) -> Result<f64> {
    match data.changed_features(q, sf).len() {
        0 => Err(Error::input("explanation changes no feature")),
        n => Ok(1.0 / n as f64),
    }
}
