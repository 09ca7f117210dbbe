//! Counterfactual-free methods: Local-Region, DSER, MDN and S-GEN.

mod dser;
mod local_region;
mod mdn;
mod scm;
mod sgen;

pub use dser::{dser_loss, dser_sf, dser_threshold, DserConfig};
pub use local_region::{local_region_sf, LocalRegionConfig};
pub use mdn::{mdn_sf, sfs, sfs_v2};
pub use scm::{CompiledScm, ScmSpec, StructuralEquation};
pub use sgen::{diversity, post_robustness, sgen_ball_seed, sgen_gain, sgen_sf, SgenConfig};
