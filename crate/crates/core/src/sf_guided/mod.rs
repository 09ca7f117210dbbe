//! Counterfactual-guided methods: KLEOR, PIECE, C2C-VAE and DiCE.

mod c2c;
mod dice;
mod kleor;
mod nun;
mod piece;

pub use c2c::{c2c_sf, C2cSfConfig};
pub use dice::{dice_loss, dice_sf, mad_weights, DiceConfig};
pub use kleor::{kleor_sf, similarity, KleorVariant};
pub use nun::{find_nun, Nun};
pub use piece::{piece_sf, PieceConfig, PieceModel};
