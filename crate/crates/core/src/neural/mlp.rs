use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::rng::standard_normal;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Relu,
    Tanh,
    Identity,
}

impl Activation {
    fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Relu => z.max(0.0),
            Activation::Tanh => z.tanh(),
            Activation::Identity => z,
        }
    }

    /// Derivative expressed through the pre-activation `z` and output `a`.
    fn derivative(self, z: f64, a: f64) -> f64 {
        match self {
            Activation::Relu => {
                if z > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Tanh => 1.0 - a * a,
            Activation::Identity => 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Layer {
    inputs: usize,
    outputs: usize,
    activation: Activation,
    /// Offset of the `outputs x inputs` weight block in the flat parameters;
    /// the bias follows immediately.
    offset: usize,
}

/// Fully connected network with all parameters in one flat vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    layers: Vec<Layer>,
    pub params: Vec<f64>,
}

/// Per-layer inputs, pre-activations and outputs from a forward pass.
#[derive(Debug, Clone)]
pub struct MlpCache {
    inputs: Vec<Vec<f64>>,
    pre: Vec<Vec<f64>>,
    post: Vec<Vec<f64>>,
}

impl Mlp {
    /// `sizes = [in, h1, .., out]`; hidden layers use `hidden`, the last
    /// layer uses `output`. He-style init for ReLU, Xavier otherwise.
    pub fn new<R: Rng + ?Sized>(sizes: &[usize], hidden: Activation, output: Activation, rng: &mut R) -> Self {
        assert!(sizes.len() >= 2, "an MLP needs input and output sizes");
        let mut layers = Vec::new();
        let mut params = Vec::new();
        for w in sizes.windows(2) {
            let (i, o) = (w[0], w[1]);
            let activation = if layers.len() + 2 == sizes.len() { output } else { hidden };
            let scale = match activation {
                Activation::Relu => (2.0 / i as f64).sqrt(),
                _ => (1.0 / i as f64).sqrt(),
            };
            layers.push(Layer { inputs: i, outputs: o, activation, offset: params.len() });
            params.extend((0..i * o).map(|_| scale * standard_normal(rng)));
            params.extend(std::iter::repeat_n(0.0, o));
        }
        Mlp { layers, params }
    }

    pub fn input_size(&self) -> usize {
        self.layers[0].inputs
    }

    pub fn output_size(&self) -> usize {
        self.layers.last().unwrap().outputs
    }

    pub fn n_params(&self) -> usize {
        self.params.len()
    }

    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        let mut a = x.to_vec();
        for l in &self.layers {
            a = self.layer_pre(l, &a).into_iter().map(|z| l.activation.apply(z)).collect();
        }
        a
    }

    fn layer_pre(&self, l: &Layer, input: &[f64]) -> Vec<f64> {
        debug_assert_eq!(input.len(), l.inputs);
        let w = &self.params[l.offset..l.offset + l.inputs * l.outputs];
        let b = &self.params[l.offset + l.inputs * l.outputs..l.offset + (l.inputs + 1) * l.outputs];
        (0..l.outputs)
            .map(|o| b[o] + w[o * l.inputs..(o + 1) * l.inputs].iter().zip(input).map(|(w, x)| w * x).sum::<f64>())
            .collect()
    }

    pub fn forward_cached(&self, x: &[f64]) -> (Vec<f64>, MlpCache) {
        let mut cache = MlpCache { inputs: Vec::new(), pre: Vec::new(), post: Vec::new() };
        let mut a = x.to_vec();
        for l in &self.layers {
            let z = self.layer_pre(l, &a);
            let out: Vec<f64> = z.iter().map(|&v| l.activation.apply(v)).collect();
            cache.inputs.push(a);
            cache.pre.push(z);
            cache.post.push(out.clone());
            a = out;
        }
        (a, cache)
    }

    /// Accumulate parameter gradients into `grads` given dLoss/dOutput and
    /// return dLoss/dInput.
    pub fn backward(&self, cache: &MlpCache, grad_out: &[f64], grads: &mut [f64]) -> Vec<f64> {
        let mut g = grad_out.to_vec();
        for (li, l) in self.layers.iter().enumerate().rev() {
            let delta: Vec<f64> = (0..l.outputs)
                .map(|o| g[o] * l.activation.derivative(cache.pre[li][o], cache.post[li][o]))
                .collect();
            let input = &cache.inputs[li];
            let w_off = l.offset;
            let b_off = l.offset + l.inputs * l.outputs;
            let mut g_in = vec![0.0; l.inputs];
            for o in 0..l.outputs {
                let d = delta[o];
                if d == 0.0 {
                    continue;
                }
                grads[b_off + o] += d;
                let row = w_off + o * l.inputs;
                for i in 0..l.inputs {
                    grads[row + i] += d * input[i];
                    g_in[i] += d * self.params[row + i];
                }
            }
            g = g_in;
        }
        g
    }
}

/// Adam over a flat parameter vector.
#[derive(Debug, Clone)]
pub struct Adam {
    lr: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl Adam {
    pub fn new(n_params: usize, lr: f64) -> Self {
        Adam { lr, beta1: 0.9, beta2: 0.999, eps: 1e-8, m: vec![0.0; n_params], v: vec![0.0; n_params], t: 0 }
    }

    pub fn step(&mut self, params: &mut [f64], grads: &[f64]) {
        self.t += 1;
        let c1 = 1.0 - self.beta1.powi(self.t);
        let c2 = 1.0 - self.beta2.powi(self.t);
        for i in 0..params.len() {
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * grads[i];
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * grads[i] * grads[i];
            params[i] -= self.lr * (self.m[i] / c1) / ((self.v[i] / c2).sqrt() + self.eps);
        }
    }
}
