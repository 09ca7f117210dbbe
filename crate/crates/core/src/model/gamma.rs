//! Method-of-moments gamma fits and their CDF.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma_lr;

use crate::error::{Error, Result};

/// A fitted gamma model. Samples are shifted by `offset` before fitting
/// when the raw support reaches zero or below.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaParams {
    pub shape: f64,
    pub scale: f64,
    pub offset: f64,
    /// Set when the samples had zero variance; holds the constant value.
    pub degenerate: Option<f64>,
}

const SUPPORT_MARGIN: f64 = 1e-3;

pub fn fit_gamma(samples: &[f64]) -> Result<GammaParams> {
    if samples.len() < 2 {
        return Err(Error::input("gamma fit needs at least two samples"));
    }
    let min = samples.iter().copied().fold(f64::INFINITY, f64::min);
    let offset = if min <= 0.0 { SUPPORT_MARGIN - min } else { 0.0 };
    let n = samples.len() as f64;
    let mean = samples.iter().map(|s| s + offset).sum::<f64>() / n;
    let var = samples.iter().map(|s| (s + offset - mean).powi(2)).sum::<f64>() / n;
    if var <= 1e-12 * mean * mean {
        return Ok(GammaParams { shape: f64::NAN, scale: f64::NAN, offset, degenerate: Some(samples[0]) });
    }
    Ok(GammaParams { shape: mean * mean / var, scale: var / mean, offset, degenerate: None })
}

impl GammaParams {
    /// Distribution mean mapped back to the original (unshifted) axis.
    pub fn expected_value(&self) -> f64 {
        match self.degenerate {
            Some(c) => c,
            None => self.shape * self.scale - self.offset,
        }
    }
}

/// CDF at `x` on the original axis (the fitted shift is applied here).
/// Degenerate fits give a unit step at the constant.
pub fn gamma_cdf(params: &GammaParams, x: f64) -> f64 {
    if let Some(c) = params.degenerate {
        return if x < c { 0.0 } else { 1.0 };
    }
    let t = x + params.offset;
    if t <= 0.0 {
        return 0.0;
    }
    gamma_lr(params.shape, t / params.scale).clamp(0.0, 1.0)
}
