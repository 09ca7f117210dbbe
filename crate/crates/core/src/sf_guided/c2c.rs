//! C2C-VAE: interpolate from the query toward a generated counterfactual
//! guide in the VAE latent space.

use serde::{Deserialize, Serialize};

use super::nun::find_nun;
use crate::explain::{ExplainContext, MethodFailure, MethodId, SemiFactual};
use crate::neural::{interpolate, sample_guide, C2cModel, VaeModel};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct C2cSfConfig {
    pub lambda: f64,
    pub guide_samples: usize,
    pub max_halvings: usize,
}

impl Default for C2cSfConfig {
    fn default() -> Self {
        C2cSfConfig { lambda: 0.2, guide_samples: 50, max_halvings: 5 }
    }
}

pub fn c2c_sf(
    q: &[f64],
    query_id: usize,
    ctx: &ExplainContext,
    vae: &VaeModel,
    c2c: &C2cModel,
    cfg: &C2cSfConfig,
    seed: u64,
) -> Result<SemiFactual, MethodFailure> {
    let fail = |r: String| MethodFailure::new(MethodId::C2cVae, r);
    if !(0.0..=1.0).contains(&cfg.lambda) {
        return Err(fail(format!("lambda {} outside [0, 1]", cfg.lambda)));
    }
    let qc = ctx.query_class(q);
    let target = find_nun(q, &ctx.train, qc).map_err(|e| fail(e.to_string()))?.class;
    let guide = sample_guide(c2c, vae, q, qc, target, cfg.guide_samples, seed);
    let fq = vae.encode(q);
    let mut lambda = cfg.lambda;
    for _ in 0..=cfg.max_halvings {
        let mut x = vae.decode(&interpolate(&fq, &guide.latent, lambda));
        ctx.train.schema.project(&mut x);
        let sf = ctx.semifactual(MethodId::C2cVae, query_id, q, qc, x);
        if sf.valid {
            return Ok(sf.with("lambda", lambda).with("guide_mse", guide.mse));
        }
        lambda /= 2.0;
    }
    Err(fail("decoded instance leaves the query class at every lambda".into()))
}
