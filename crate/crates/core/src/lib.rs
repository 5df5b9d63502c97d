//! # cytolot
//!
//! Low-dimensional linear embeddings of collections of large point clouds
//! (one discrete probability measure per sample) through optimal transport.
//!
//! The pipeline has four stages:
//!
//! 1. [`quantize`]: K-means on the pooled mean measure gives a shared
//!    support of K centers; each sample becomes a weight vector of
//!    per-cell Voronoi masses.
//! 2. [`barycenter`]: a reference measure on K points, by default the
//!    free-support Wasserstein barycenter of the quantized samples.
//! 3. [`lot`]: exact transport plans from the reference to every sample,
//!    barycentric projection and the logarithm map, producing one
//!    displacement field per sample in a weighted L² space.
//! 4. [`analysis`]: PCA, silhouette scores, minimum spanning trees of the
//!    centers and leave-one-out logistic regression.
//!
//! [`baseline`] holds the two comparison embeddings (centered log-ratio of
//! the K-means weights, and kernel mean embedding with random Fourier
//! features). [`measures`] holds the measure types and the exact network
//! simplex transport solver everything else is built on.

pub mod analysis;
pub mod barycenter;
pub mod baseline;
mod error;
pub mod lot;
pub mod measures;
pub mod quantize;
pub mod synthetic;

pub use barycenter::{make_reference, wasserstein_barycenter, ReferenceMeasure, ReferenceStrategy};
pub use error::{Error, Result};
pub use lot::{embed_ensemble, LotEmbedding};
pub use measures::{map_induced_plan, solve_ot, wasserstein2, DiscreteMeasure, TransportPlan};
pub use quantize::{assign_weights, quantize_ensemble, QuantizedEnsemble};
