//! Comparison embeddings: centered log-ratio of the K-means weight vectors,
//! and kernel mean embedding of the raw measures through random Fourier
//! features.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::measures::{check_dim, DiscreteMeasure};
use crate::quantize::QuantizedEnsemble;

pub const DEFAULT_PSEUDO_COUNT: f64 = 1e-6;
pub const DEFAULT_SIGMA: f64 = 5.0;

/// Centered log-ratio coordinates of the smoothed weight vectors.
#[derive(Debug, Clone)]
pub struct CompositionEmbedding {
    /// `N x K`, every row sums to zero.
    pub clr_matrix: Array2<f64>,
    pub pseudo_count: f64,
}

/// CLR of a strictly positive composition: `log(x_k) - mean_j log(x_j)`.
pub fn clr(parts: ArrayView1<f64>) -> Result<Array1<f64>> {
    if parts.is_empty() {
        return Err(Error::InvalidParameter("empty composition".into()));
    }
    if let Some(k) = parts.iter().position(|&x| !(x > 0.0 && x.is_finite())) {
        return Err(Error::InvalidParameter(format!(
            "composition part {k} is {} (must be positive)",
            parts[k]
        )));
    }
    let logs = parts.mapv(f64::ln);
    let center = logs.mean().expect("non-empty");
    Ok(logs - center)
}

/// Row-wise CLR of `weights + pseudo_count`.
pub fn clr_rows(weights: ArrayView2<f64>, pseudo_count: f64) -> Result<CompositionEmbedding> {
    if !(pseudo_count > 0.0 && pseudo_count.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "pseudo-count must be positive, got {pseudo_count}"
        )));
    }
    let mut out = Array2::zeros(weights.raw_dim());
    for (i, row) in weights.rows().into_iter().enumerate() {
        let smoothed = row.mapv(|w| w + pseudo_count);
        out.row_mut(i).assign(&clr(smoothed.view())?);
    }
    Ok(CompositionEmbedding {
        clr_matrix: out,
        pseudo_count,
    })
}

pub fn clr_transform(
    ensemble: &QuantizedEnsemble,
    pseudo_count: f64,
) -> Result<CompositionEmbedding> {
    clr_rows(ensemble.weights.view(), pseudo_count)
}

/// Kernel mean embedding with `s` random Fourier features of the Gaussian
/// kernel `exp(-|x - y|² / (2 sigma²))`.
///
/// The feature map is `sqrt(2/s) (sin(w_1·x), .., sin(w_{s/2}·x),
/// cos(w_1·x), .., cos(w_{s/2}·x))` with `w ~ N(0, sigma^-2 I)`, so feature
/// inner products are unbiased kernel estimates and Euclidean distances
/// between embedded measures estimate the MMD.
#[derive(Debug, Clone)]
pub struct KmeEmbedding {
    /// `(s/2) x d` frequencies.
    pub frequencies: Array2<f64>,
    pub sigma: f64,
    /// `N x s`; row `i` is the weighted mean feature of measure `i`.
    pub features: Array2<f64>,
    pub sample_ids: Vec<String>,
    pub seed: u64,
}

impl KmeEmbedding {
    /// Draws the frequencies without embedding anything.
    pub fn sampler(dim: usize, s: usize, sigma: f64, seed: u64) -> Result<Self> {
        if s < 2 || !s.is_multiple_of(2) {
            return Err(Error::InvalidParameter(format!(
                "feature count must be even and at least 2, got {s}"
            )));
        }
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "bandwidth must be positive, got {sigma}"
            )));
        }
        if dim == 0 {
            return Err(Error::InvalidParameter("zero-dimensional data".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let half = s / 2;
        let draws: Vec<f64> = (0..half * dim)
            .map(|_| {
                let z: f64 = StandardNormal.sample(&mut rng);
                z / sigma
            })
            .collect();
        Ok(Self {
            frequencies: Array2::from_shape_vec((half, dim), draws).expect("half * dim draws"),
            sigma,
            features: Array2::zeros((0, s)),
            sample_ids: Vec::new(),
            seed,
        })
    }

    pub fn n_features(&self) -> usize {
        2 * self.frequencies.nrows()
    }

    fn accumulate(&self, x: &[f64], weight: f64, out: &mut [f64]) {
        let half = self.frequencies.nrows();
        let scale = weight * (2.0 / self.n_features() as f64).sqrt();
        for (f, w) in self.frequencies.rows().into_iter().enumerate() {
            let phase: f64 = w.iter().zip(x).map(|(a, b)| a * b).sum();
            let (sin, cos) = phase.sin_cos();
            out[f] += scale * sin;
            out[half + f] += scale * cos;
        }
    }

    /// Normalized random feature map of a single point.
    pub fn feature_map(&self, x: &[f64]) -> Result<Array1<f64>> {
        check_dim(self.frequencies.ncols(), x.len())?;
        let mut out = vec![0.0; self.n_features()];
        self.accumulate(x, 1.0, &mut out);
        Ok(Array1::from(out))
    }

    /// Random-feature estimate of the Gaussian kernel between two points.
    pub fn kernel_estimate(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        Ok(self.feature_map(x)?.dot(&self.feature_map(y)?))
    }

    /// Weighted mean feature of a measure.
    pub fn embed(&self, measure: &DiscreteMeasure) -> Result<Array1<f64>> {
        check_dim(self.frequencies.ncols(), measure.dim())?;
        let mut out = vec![0.0; self.n_features()];
        for (row, &w) in measure.support().rows().into_iter().zip(measure.weights()) {
            let x: Vec<f64> = row.to_vec();
            self.accumulate(&x, w, &mut out);
        }
        Ok(Array1::from(out))
    }

    /// Estimated maximum mean discrepancy between embedded samples.
    pub fn mmd(&self, i: usize, j: usize) -> f64 {
        let diff = &self.features.row(i) - &self.features.row(j);
        diff.dot(&diff).sqrt()
    }
}

/// Embeds raw measures with `s` random Fourier features.
pub fn kme_embed(
    measures: &[DiscreteMeasure],
    s: usize,
    sigma: f64,
    seed: u64,
) -> Result<KmeEmbedding> {
    let first = measures
        .first()
        .ok_or_else(|| Error::InvalidParameter("no measures to embed".into()))?;
    let mut kme = KmeEmbedding::sampler(first.dim(), s, sigma, seed)?;
    let rows = measures
        .par_iter()
        .map(|m| kme.embed(m).map_err(|e| e.for_sample(m.id())))
        .collect::<Result<Vec<_>>>()?;
    let mut features = Array2::zeros((measures.len(), s));
    for (i, row) in rows.into_iter().enumerate() {
        features.row_mut(i).assign(&row);
    }
    kme.features = features;
    kme.sample_ids = measures.iter().map(|m| m.id().to_string()).collect();
    Ok(kme)
}
