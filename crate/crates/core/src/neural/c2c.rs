//! Conditional autoencoder over latent differences between classes.
//!
//! For a pair `(s, t)` from different classes the VAE latent difference
//! `f(s) - f(t)` is encoded together with the one-hot class pair; the
//! decoder is conditioned on the same class pair.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::mlp::{Activation, Adam, Mlp};
use super::vae::{kl_divergence, VaeModel};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::rng::{rng_from_seed, standard_normal, SfRng};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct C2cParams {
    pub hidden: usize,
    pub latent_dim: usize,
    pub pair_budget: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub kl_weight: f64,
    pub holdout_fraction: f64,
}

impl Default for C2cParams {
    fn default() -> Self {
        C2cParams {
            hidden: 32,
            latent_dim: 2,
            pair_budget: 2000,
            epochs: 60,
            learning_rate: 3e-3,
            batch_size: 32,
            kl_weight: 0.05,
            holdout_fraction: 0.2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct C2cModel {
    pub encoder: Mlp,
    pub decoder: Mlp,
    pub latent_dim: usize,
    pub delta_dim: usize,
    pub n_classes: usize,
    /// Held-out reconstruction MSE of the difference vectors.
    pub heldout_mse: f64,
    /// MSE of predicting the held-out mean difference for every pair.
    pub heldout_baseline: f64,
}

#[derive(Debug, Clone)]
struct Pair {
    delta: Vec<f64>,
    source: usize,
    target: usize,
}

fn one_hot_pair(n: usize, source: usize, target: usize) -> Vec<f64> {
    let mut v = vec![0.0; 2 * n];
    v[source] = 1.0;
    v[n + target] = 1.0;
    v
}

impl C2cModel {
    fn encoder_input(&self, delta: &[f64], source: usize, target: usize) -> Vec<f64> {
        let mut v = delta.to_vec();
        v.extend(one_hot_pair(self.n_classes, source, target));
        v
    }

    fn decoder_input(&self, z: &[f64], source: usize, target: usize) -> Vec<f64> {
        let mut v = z.to_vec();
        v.extend(one_hot_pair(self.n_classes, source, target));
        v
    }

    /// `g'(g(<delta, source, target>))` using the posterior mean.
    pub fn reconstruct(&self, delta: &[f64], source: usize, target: usize) -> Vec<f64> {
        let out = self.encoder.forward(&self.encoder_input(delta, source, target));
        self.decode(&out[..self.latent_dim], source, target)
    }

    pub fn decode(&self, z: &[f64], source: usize, target: usize) -> Vec<f64> {
        self.decoder.forward(&self.decoder_input(z, source, target))
    }

    fn sample_loss(&self, p: &Pair, noise: &[f64], w: f64, ge: &mut [f64], gd: &mut [f64]) -> f64 {
        let l = self.latent_dim;
        let (out, enc_cache) = self.encoder.forward_cached(&self.encoder_input(&p.delta, p.source, p.target));
        let (mean, log_var) = out.split_at(l);
        let sd: Vec<f64> = log_var.iter().map(|lv| (0.5 * lv).exp()).collect();
        let z: Vec<f64> = (0..l).map(|i| mean[i] + sd[i] * noise[i]).collect();
        let (recon, dec_cache) = self.decoder.forward_cached(&self.decoder_input(&z, p.source, p.target));
        let sse: f64 = recon.iter().zip(&p.delta).map(|(a, b)| (a - b).powi(2)).sum();
        let grad_recon: Vec<f64> = recon.iter().zip(&p.delta).map(|(a, b)| 2.0 * (a - b)).collect();
        let grad_in = self.decoder.backward(&dec_cache, &grad_recon, gd);
        let mut grad_enc = vec![0.0; 2 * l];
        for i in 0..l {
            grad_enc[i] = grad_in[i] + w * mean[i];
            grad_enc[l + i] = grad_in[i] * noise[i] * 0.5 * sd[i] + w * 0.5 * (log_var[i].exp() - 1.0);
        }
        self.encoder.backward(&enc_cache, &grad_enc, ge);
        sse + w * kl_divergence(mean, log_var)
    }
}

fn sample_pairs(vae: &VaeModel, train: &Dataset, budget: usize, rng: &mut SfRng) -> Vec<Pair> {
    let latents: Vec<Vec<f64>> = train.instances.iter().map(|x| vae.encode(x)).collect();
    let n = train.len();
    let mut pairs = Vec::with_capacity(budget);
    while pairs.len() < budget {
        let s = rng.random_range(0..n);
        let t = rng.random_range(0..n);
        if train.labels[s] == train.labels[t] {
            continue;
        }
        let delta = latents[s].iter().zip(&latents[t]).map(|(a, b)| a - b).collect();
        pairs.push(Pair { delta, source: train.labels[s], target: train.labels[t] });
    }
    pairs
}

pub fn train_c2c(vae: &VaeModel, train: &Dataset, params: C2cParams, seed: u64) -> Result<C2cModel> {
    if train.class_counts().iter().filter(|&&c| c > 0).count() < 2 {
        return Err(Error::input("class-to-class training needs at least two classes"));
    }
    if params.pair_budget < 2 {
        return Err(Error::input("pair budget must be at least 2"));
    }
    let mut rng = rng_from_seed(seed);
    let n_classes = train.schema.n_classes();
    let ld = vae.latent_dim;
    let h = params.hidden;
    let cl = params.latent_dim;
    let encoder = Mlp::new(&[ld + 2 * n_classes, h, h, 2 * cl], Activation::Relu, Activation::Identity, &mut rng);
    let decoder = Mlp::new(&[cl + 2 * n_classes, h, h, ld], Activation::Relu, Activation::Identity, &mut rng);
    let mut model = C2cModel {
        encoder,
        decoder,
        latent_dim: cl,
        delta_dim: ld,
        n_classes,
        heldout_mse: f64::NAN,
        heldout_baseline: f64::NAN,
    };

    let pairs = sample_pairs(vae, train, params.pair_budget, &mut rng);
    let n_hold = ((pairs.len() as f64 * params.holdout_fraction).round() as usize).clamp(1, pairs.len() - 1);
    let (heldout, fit) = pairs.split_at(n_hold);

    let mut enc_opt = Adam::new(model.encoder.n_params(), params.learning_rate);
    let mut dec_opt = Adam::new(model.decoder.n_params(), params.learning_rate);
    let mut order: Vec<usize> = (0..fit.len()).collect();
    for epoch in 0..params.epochs {
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for chunk in order.chunks(params.batch_size.max(1)) {
            let mut ge = vec![0.0; model.encoder.n_params()];
            let mut gd = vec![0.0; model.decoder.n_params()];
            for &i in chunk {
                let noise: Vec<f64> = (0..cl).map(|_| standard_normal(&mut rng)).collect();
                total += model.sample_loss(&fit[i], &noise, params.kl_weight, &mut ge, &mut gd);
            }
            let inv = 1.0 / chunk.len() as f64;
            ge.iter_mut().chain(gd.iter_mut()).for_each(|g| *g *= inv);
            enc_opt.step(&mut model.encoder.params, &ge);
            dec_opt.step(&mut model.decoder.params, &gd);
        }
        if !total.is_finite() {
            return Err(Error::Diverged { epoch });
        }
    }

    let mut mean = vec![0.0; ld];
    for p in heldout {
        for (m, v) in mean.iter_mut().zip(&p.delta) {
            *m += v / heldout.len() as f64;
        }
    }
    let mse = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>() / ld as f64;
    model.heldout_baseline = heldout.iter().map(|p| mse(&p.delta, &mean)).sum::<f64>() / heldout.len() as f64;
    model.heldout_mse = heldout
        .iter()
        .map(|p| mse(&p.delta, &model.reconstruct(&p.delta, p.source, p.target)))
        .sum::<f64>()
        / heldout.len() as f64;
    Ok(model)
}

/// A counterfactual-class guide decoded into feature space, with its
/// encoding `f(t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Guide {
    pub instance: Vec<f64>,
    pub latent: Vec<f64>,
    pub mse: f64,
}

/// Draw `n_samples` difference codes from the prior, turn each into a
/// target-class candidate `f'(f(q) - g'(z | C_q, C_t))`, and keep the one
/// closest to `q` in mean squared error (first wins ties).
pub fn sample_guide(
    c2c: &C2cModel,
    vae: &VaeModel,
    q: &[f64],
    query_class: usize,
    target_class: usize,
    n_samples: usize,
    seed: u64,
) -> Guide {
    let mut rng = rng_from_seed(seed);
    let fq = vae.encode(q);
    let mut best: Option<(f64, Vec<f64>)> = None;
    for _ in 0..n_samples.max(1) {
        let z: Vec<f64> = (0..c2c.latent_dim).map(|_| standard_normal(&mut rng)).collect();
        let delta = c2c.decode(&z, query_class, target_class);
        let ft: Vec<f64> = fq.iter().zip(&delta).map(|(a, d)| a - d).collect();
        let candidate = vae.decode(&ft);
        let mse = candidate.iter().zip(q).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / q.len() as f64;
        if best.as_ref().is_none_or(|(b, _)| mse < *b) {
            best = Some((mse, candidate));
        }
    }
    let (mse, instance) = best.expect("at least one sample");
    let latent = vae.encode(&instance);
    Guide { instance, latent, mse }
}
