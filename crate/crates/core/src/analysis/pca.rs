use nalgebra::DMatrix;
use ndarray::{Array1, Array2, ArrayView2, Axis};

use crate::error::{Error, Result};

/// Principal components of a sample-by-feature matrix.
#[derive(Debug, Clone)]
pub struct PcaResult {
    pub mean: Array1<f64>,
    /// `c x p`, orthonormal rows.
    pub components: Array2<f64>,
    pub singular_values: Array1<f64>,
    /// Fraction of total variance carried by each retained component.
    pub explained_variance_ratio: Array1<f64>,
    /// `N x c` scores.
    pub coordinates: Array2<f64>,
}

impl PcaResult {
    pub fn transform(&self, x: ArrayView2<f64>) -> Array2<f64> {
        (&x - &self.mean).dot(&self.components.t())
    }

    pub fn reconstruct(&self, scores: ArrayView2<f64>) -> Array2<f64> {
        scores.dot(&self.components) + &self.mean
    }
}

/// PCA by thin SVD of the mean-centered data. The largest-magnitude entry
/// of every component is made positive.
pub fn pca(features: ArrayView2<f64>, c: usize) -> Result<PcaResult> {
    let (n, p) = features.dim();
    if c == 0 || c > n.min(p) {
        return Err(Error::InvalidParameter(format!(
            "component count {c} outside 1..={} for a {n}x{p} matrix",
            n.min(p)
        )));
    }
    if features.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidParameter("non-finite feature value".into()));
    }
    let mean = features.mean_axis(Axis(0)).expect("n > 0");
    let centered = &features - &mean;
    let matrix = DMatrix::from_fn(n, p, |i, j| centered[[i, j]]);
    let svd = matrix
        .try_svd(false, true, f64::EPSILON, 0)
        .ok_or_else(|| Error::Numerical("SVD did not converge".into()))?;
    let v_t = svd.v_t.expect("requested right singular vectors");
    let values = svd.singular_values;

    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));

    let total: f64 = values.iter().map(|s| s * s).sum();
    let mut components = Array2::zeros((c, p));
    let mut singular_values = Array1::zeros(c);
    let mut ratio = Array1::zeros(c);
    for (r, &idx) in order.iter().take(c).enumerate() {
        let row: Vec<f64> = v_t.row(idx).iter().copied().collect();
        let pivot = row.iter().copied().fold(
            0.0f64,
            |best, x| if x.abs() > best.abs() { x } else { best },
        );
        let sign = if pivot < 0.0 { -1.0 } else { 1.0 };
        for (j, x) in row.into_iter().enumerate() {
            components[[r, j]] = sign * x;
        }
        singular_values[r] = values[idx];
        ratio[r] = if total > 0.0 {
            values[idx] * values[idx] / total
        } else {
            0.0
        };
    }
    let coordinates = centered.dot(&components.t());
    Ok(PcaResult {
        mean,
        components,
        singular_values,
        explained_variance_ratio: ratio,
        coordinates,
    })
}
