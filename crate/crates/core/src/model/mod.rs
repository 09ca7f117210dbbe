//! Classical learned components used by the explainers.

mod forest;
mod gamma;
mod knn;
mod reject;
mod surrogate;

pub use forest::{fit_classifier, ForestClassifier, ForestParams, Tree};
pub use gamma::{fit_gamma, gamma_cdf, GammaParams};
pub use knn::{euclidean, KnnIndex, Neighbor};
pub use reject::{grid_search_threshold, RejectScore};
pub use surrogate::{assemble_local_region, fit_local_surrogate, LocalSurrogate, SurrogateParams};
