//! Small feed-forward networks with hand-written backpropagation: a VAE
//! over instances and the class-to-class difference autoencoder.

mod c2c;
mod mlp;
mod vae;

pub use c2c::{sample_guide, train_c2c, C2cModel, C2cParams, Guide};
pub use mlp::{Activation, Adam, Mlp, MlpCache};
pub use vae::{interpolate, kl_divergence, train_vae, vae_codec, VaeModel, VaeParams};
