//! Representation and evaluation of embedded samples.

mod classify;
mod mst;
mod pca;
mod silhouette;

pub use classify::{
    fit_logistic, loo_logistic, ClassificationReport, LogisticModel, LogisticOptions,
};
pub use mst::{mst, mst_node_sizes, Mst};
pub use pca::{pca, PcaResult};
pub use silhouette::{encode_labels, silhouette, silhouette_from_distances, Silhouette};

use crate::error::{Error, Result};

/// Point-size transform for MRD values: `ln(y)` for `y >= 1`, `y` below.
pub fn logicle_scale(y: f64) -> Result<f64> {
    if y.is_nan() || y < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "logicle scale needs y >= 0, got {y}"
        )));
    }
    Ok(if y >= 1.0 { y.ln() } else { y })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn logicle_branches() {
        assert_eq!(logicle_scale(0.5).unwrap(), 0.5);
        assert_eq!(logicle_scale(0.0).unwrap(), 0.0);
        assert_eq!(logicle_scale(1.0).unwrap(), 0.0);
        assert!((logicle_scale(std::f64::consts::E).unwrap() - 1.0).abs() < 1e-15);
        assert!(logicle_scale(-0.1).is_err());
        assert!(logicle_scale(f64::NAN).is_err());
    }
}
