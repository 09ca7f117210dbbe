//! Semi-factual ("even-if") explanations for tabular classifiers.
//!
//! Eight explanation methods are provided, split into two families:
//!
//! * counterfactual-free ([`sf_free`]): Local-Region, DSER, MDN and S-GEN;
//! * counterfactual-guided ([`sf_guided`]): KLEOR, tabular PIECE, C2C-VAE and
//!   a semi-factual variant of DiCE.
//!
//! [`eval`] scores explanations on distance, plausibility, confusability,
//! robustness and sparsity, and [`bench`] runs the whole method × dataset ×
//! fold protocol and writes score tables, rank aggregates and SVG charts.

pub mod bench;
pub mod data;
pub mod error;
pub mod eval;
pub mod explain;
pub mod model;
pub mod neural;
pub mod parallel;
pub mod rng;
pub mod sf_free;
pub mod sf_guided;

pub use error::{Error, Result};
pub use explain::{MethodFailure, MethodFamily, MethodId, SemiFactual};
