//! LIME-style local logistic surrogate.

use serde::{Deserialize, Serialize};

use super::knn::euclidean;
use crate::data::Dataset;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SurrogateParams {
    pub learning_rate: f64,
    pub iterations: usize,
    pub l2: f64,
}

impl Default for SurrogateParams {
    fn default() -> Self {
        SurrogateParams { learning_rate: 1.0, iterations: 500, l2: 1e-3 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalSurrogate {
    pub weights: Vec<f64>,
    pub bias: f64,
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

impl LocalSurrogate {
    /// Probability of the positive (query) class.
    pub fn predict(&self, x: &[f64]) -> f64 {
        sigmoid(self.bias + self.weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>())
    }

    /// Mean log-loss plus the L2 penalty on the weights.
    pub fn loss(&self, xs: &[Vec<f64>], ys: &[bool], l2: f64) -> f64 {
        let n = xs.len() as f64;
        let ll: f64 = xs
            .iter()
            .zip(ys)
            .map(|(x, &y)| {
                let p = self.predict(x).clamp(1e-15, 1.0 - 1e-15);
                if y {
                    -p.ln()
                } else {
                    -(1.0 - p).ln()
                }
            })
            .sum::<f64>()
            / n;
        ll + 0.5 * l2 * self.weights.iter().map(|w| w * w).sum::<f64>()
    }

    /// Analytic gradient of [`loss`](Self::loss): `(d/dw, d/db)`.
    pub fn gradient(&self, xs: &[Vec<f64>], ys: &[bool], l2: f64) -> (Vec<f64>, f64) {
        let n = xs.len() as f64;
        let mut gw: Vec<f64> = self.weights.iter().map(|w| l2 * w).collect();
        let mut gb = 0.0;
        for (x, &y) in xs.iter().zip(ys) {
            let err = (self.predict(x) - if y { 1.0 } else { 0.0 }) / n;
            gb += err;
            for (g, v) in gw.iter_mut().zip(x) {
                *g += err * v;
            }
        }
        (gw, gb)
    }
}

/// Full-batch gradient descent on the regularised log-loss.
pub fn fit_local_surrogate(xs: &[Vec<f64>], ys: &[bool], params: SurrogateParams) -> Result<LocalSurrogate> {
    if xs.is_empty() || xs.len() != ys.len() {
        return Err(Error::input("surrogate region is empty or mislabelled"));
    }
    if ys.iter().all(|&y| y) || ys.iter().all(|&y| !y) {
        return Err(Error::input("surrogate region contains a single class"));
    }
    let mut model = LocalSurrogate { weights: vec![0.0; xs[0].len()], bias: 0.0 };
    for _ in 0..params.iterations {
        let (gw, gb) = model.gradient(xs, ys, params.l2);
        let norm = (gb * gb + gw.iter().map(|g| g * g).sum::<f64>()).sqrt();
        if norm < 1e-10 {
            break;
        }
        for (w, g) in model.weights.iter_mut().zip(&gw) {
            *w -= params.learning_rate * g;
        }
        model.bias -= params.learning_rate * gb;
    }
    Ok(model)
}

/// Indices of the `min_per_class` nearest training instances of every
/// class (all members when a class is smaller), in ascending index order.
pub fn assemble_local_region(q: &[f64], data: &Dataset, min_per_class: usize) -> Vec<usize> {
    let mut region = Vec::new();
    for class in 0..data.schema.n_classes() {
        let mut members: Vec<(f64, usize)> = data
            .indices_of_class(class)
            .into_iter()
            .map(|i| (euclidean(q, &data.instances[i]), i))
            .collect();
        members.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        region.extend(members.into_iter().take(min_per_class).map(|(_, i)| i));
    }
    region.sort_unstable();
    region
}
