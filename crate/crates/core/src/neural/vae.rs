use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::mlp::{Activation, Adam, Mlp};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::rng::{rng_from_seed, standard_normal};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct VaeParams {
    pub hidden: usize,
    pub latent_dim: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    /// Weight on the KL term relative to the summed squared error.
    pub kl_weight: f64,
}

impl Default for VaeParams {
    fn default() -> Self {
        VaeParams { hidden: 32, latent_dim: 4, epochs: 150, learning_rate: 3e-3, batch_size: 32, kl_weight: 0.05 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VaeModel {
    pub encoder: Mlp,
    pub decoder: Mlp,
    pub latent_dim: usize,
    /// Reconstruction MSE on the training data: entry 0 before any update,
    /// then one entry per epoch.
    pub training_mse: Vec<f64>,
}

/// KL(N(mean, exp(log_var)) || N(0, I)).
pub fn kl_divergence(mean: &[f64], log_var: &[f64]) -> f64 {
    -0.5 * mean.iter().zip(log_var).map(|(m, lv)| 1.0 + lv - m * m - lv.exp()).sum::<f64>()
}

impl VaeModel {
    /// Posterior mean and log-variance.
    pub fn posterior(&self, x: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let out = self.encoder.forward(x);
        (out[..self.latent_dim].to_vec(), out[self.latent_dim..].to_vec())
    }

    /// Deterministic encoding: the posterior mean.
    pub fn encode(&self, x: &[f64]) -> Vec<f64> {
        self.posterior(x).0
    }

    pub fn decode(&self, z: &[f64]) -> Vec<f64> {
        self.decoder.forward(z)
    }

    pub fn reconstruction_mse(&self, xs: &[Vec<f64>]) -> f64 {
        let d = xs[0].len() as f64;
        xs.iter()
            .map(|x| self.decode(&self.encode(x)).iter().zip(x).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / d)
            .sum::<f64>()
            / xs.len() as f64
    }

    /// Loss of one sample for a fixed noise draw, accumulating gradients.
    /// Loss is summed squared error plus `kl_weight * KL`.
    pub fn sample_loss(
        &self,
        x: &[f64],
        noise: &[f64],
        kl_weight: f64,
        enc_grads: &mut [f64],
        dec_grads: &mut [f64],
    ) -> f64 {
        let l = self.latent_dim;
        let (enc_out, enc_cache) = self.encoder.forward_cached(x);
        let (mean, log_var) = enc_out.split_at(l);
        let sd: Vec<f64> = log_var.iter().map(|lv| (0.5 * lv).exp()).collect();
        let z: Vec<f64> = (0..l).map(|i| mean[i] + sd[i] * noise[i]).collect();
        let (recon, dec_cache) = self.decoder.forward_cached(&z);
        let sse: f64 = recon.iter().zip(x).map(|(a, b)| (a - b).powi(2)).sum();
        let loss = sse + kl_weight * kl_divergence(mean, log_var);

        let grad_recon: Vec<f64> = recon.iter().zip(x).map(|(a, b)| 2.0 * (a - b)).collect();
        let grad_z = self.decoder.backward(&dec_cache, &grad_recon, dec_grads);
        let mut grad_enc = vec![0.0; 2 * l];
        for i in 0..l {
            grad_enc[i] = grad_z[i] + kl_weight * mean[i];
            grad_enc[l + i] = grad_z[i] * noise[i] * 0.5 * sd[i] + kl_weight * 0.5 * (log_var[i].exp() - 1.0);
        }
        self.encoder.backward(&enc_cache, &grad_enc, enc_grads);
        loss
    }
}

/// Encode `x` (posterior mean) and decode it back.
pub fn vae_codec(model: &VaeModel, x: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    if x.len() != model.encoder.input_size() {
        return Err(Error::input(format!(
            "instance arity {} does not match VAE input {}",
            x.len(),
            model.encoder.input_size()
        )));
    }
    let z = model.encode(x);
    let recon = model.decode(&z);
    Ok((z, recon))
}

/// `(1 - lambda) * from + lambda * to`.
pub fn interpolate(from: &[f64], to: &[f64], lambda: f64) -> Vec<f64> {
    from.iter().zip(to).map(|(a, b)| (1.0 - lambda) * a + lambda * b).collect()
}

pub fn train_vae(train: &Dataset, params: VaeParams, seed: u64) -> Result<VaeModel> {
    if train.is_empty() {
        return Err(Error::input("VAE training on an empty dataset"));
    }
    let mut rng = rng_from_seed(seed);
    let d = train.width();
    let l = params.latent_dim;
    let h = params.hidden;
    let encoder = Mlp::new(&[d, h, h, 2 * l], Activation::Relu, Activation::Identity, &mut rng);
    let decoder = Mlp::new(&[l, h, h, d], Activation::Relu, Activation::Identity, &mut rng);
    let mut model = VaeModel { encoder, decoder, latent_dim: l, training_mse: Vec::new() };
    model.training_mse.push(model.reconstruction_mse(&train.instances));

    let mut enc_opt = Adam::new(model.encoder.n_params(), params.learning_rate);
    let mut dec_opt = Adam::new(model.decoder.n_params(), params.learning_rate);
    let mut order: Vec<usize> = (0..train.len()).collect();
    let batch = params.batch_size.max(1);
    for epoch in 0..params.epochs {
        order.shuffle(&mut rng);
        let mut epoch_loss = 0.0;
        for chunk in order.chunks(batch) {
            let mut ge = vec![0.0; model.encoder.n_params()];
            let mut gd = vec![0.0; model.decoder.n_params()];
            for &i in chunk {
                let noise: Vec<f64> = (0..l).map(|_| standard_normal(&mut rng)).collect();
                epoch_loss += model.sample_loss(&train.instances[i], &noise, params.kl_weight, &mut ge, &mut gd);
            }
            let inv = 1.0 / chunk.len() as f64;
            ge.iter_mut().chain(gd.iter_mut()).for_each(|g| *g *= inv);
            enc_opt.step(&mut model.encoder.params, &ge);
            dec_opt.step(&mut model.decoder.params, &gd);
        }
        if !epoch_loss.is_finite() {
            return Err(Error::Diverged { epoch });
        }
        model.training_mse.push(model.reconstruction_mse(&train.instances));
    }
    Ok(model)
}
