//! Linearized optimal transport.
//!
//! Each sample is represented by the displacement field `v(x_k) = T(x_k) - x_k`
//! on the reference atoms, where `T` is the barycentric projection of the
//! optimal plan from the reference to the sample. Displacements live in
//! `L²(reference)`: the squared norm weights atom `k` by the reference mass
//! `ā_k`.

use ndarray::{s, Array1, Array2, Axis};
use rayon::prelude::*;

use crate::barycenter::{ReferenceMeasure, ReferenceStrategy};
use crate::error::{Error, Result};
use crate::measures::{check_dim, solve_ot, DiscreteMeasure, TransportPlan};
use crate::quantize::QuantizedEnsemble;

/// How reference weights enter the flattened feature matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FeatureScaling {
    /// Block `k` is scaled by `sqrt(ā_k)`, so row distances are LOT
    /// distances.
    #[default]
    Weighted,
    /// Raw displacements, plain Euclidean geometry.
    Plain,
}

/// Plan-conditional mean of the target atoms for every reference atom:
/// `T(x_k) = (1/ā_k) sum_l P_kl y_l`.
pub fn barycentric_map(
    plan: &TransportPlan,
    reference: &DiscreteMeasure,
    target: &DiscreteMeasure,
) -> Result<Array2<f64>> {
    check_dim(reference.dim(), target.dim())?;
    if plan.dim() != (reference.len(), target.len()) {
        return Err(Error::InvalidParameter(format!(
            "plan of shape {:?} does not couple {} reference atoms with {} target atoms",
            plan.dim(),
            reference.len(),
            target.len()
        )));
    }
    let weights = reference.weights();
    if let Some(k) = weights.iter().position(|&w| w <= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "reference atom {k} has no mass; the barycentric map is undefined there"
        )));
    }
    let mut mapped = plan.matrix.dot(&target.support());
    for (mut row, &w) in mapped.rows_mut().into_iter().zip(weights) {
        row /= w;
    }
    Ok(mapped)
}

/// Displacement fields of every sample with respect to one reference.
#[derive(Debug, Clone)]
pub struct LotEmbedding {
    pub reference: ReferenceMeasure,
    /// One `(total reference atoms) x d` tensor per sample. Pair references
    /// stack the two per-reference tensors along the atom axis.
    pub displacements: Vec<Array2<f64>>,
    pub sample_ids: Vec<String>,
    /// Reference weights defining the inner product, aligned with the
    /// displacement rows.
    pub inner_weights: Array1<f64>,
}

impl LotEmbedding {
    pub fn n_samples(&self) -> usize {
        self.displacements.len()
    }

    /// `ā`-weighted L² norm of a displacement tensor.
    fn weighted_norm(&self, v: &Array2<f64>) -> f64 {
        v.rows()
            .into_iter()
            .zip(&self.inner_weights)
            .map(|(row, w)| w * row.dot(&row))
            .sum::<f64>()
            .sqrt()
    }

    /// Norm of sample `i`'s displacement; the LOT distance to the reference.
    pub fn displacement_norm(&self, i: usize) -> f64 {
        self.weighted_norm(&self.displacements[i])
    }

    /// Linearized OT distance `|v_i - v_j|` in `L²(ā)`.
    pub fn lot_distance(&self, i: usize, j: usize) -> f64 {
        self.weighted_norm(&(&self.displacements[i] - &self.displacements[j]))
    }

    /// One row per sample, flattened atom-major (`k * d + coordinate`).
    pub fn as_feature_matrix(&self, scaling: FeatureScaling) -> Array2<f64> {
        let atoms = self.inner_weights.len();
        let dim = self.displacements.first().map_or(0, |v| v.ncols());
        let mut out = Array2::zeros((self.n_samples(), atoms * dim));
        for (i, v) in self.displacements.iter().enumerate() {
            for k in 0..atoms {
                let scale = match scaling {
                    FeatureScaling::Weighted => self.inner_weights[k].sqrt(),
                    FeatureScaling::Plain => 1.0,
                };
                for c in 0..dim {
                    out[[i, k * dim + c]] = scale * v[[k, c]];
                }
            }
        }
        out
    }
}

/// Embeds every quantized sample with respect to `reference`.
pub fn embed_ensemble(
    ensemble: &QuantizedEnsemble,
    reference: &ReferenceMeasure,
) -> Result<LotEmbedding> {
    let targets = (0..ensemble.n_samples())
        .map(|i| ensemble.measure(i))
        .collect::<Result<Vec<_>>>()?;
    embed_measures(&targets, reference)
}

/// Embeds arbitrary measures (not necessarily on a shared support).
pub fn embed_measures(
    targets: &[DiscreteMeasure],
    reference: &ReferenceMeasure,
) -> Result<LotEmbedding> {
    let expected = match reference.strategy {
        ReferenceStrategy::Pair => 2,
        _ => 1,
    };
    if reference.measures.len() != expected {
        return Err(Error::InvalidParameter(format!(
            "{} reference uses {expected} measure(s), got {}",
            reference.strategy,
            reference.measures.len()
        )));
    }
    let dim = reference.primary().dim();
    for r in &reference.measures {
        check_dim(dim, r.dim())?;
    }

    let displacements = targets
        .par_iter()
        .map(|target| {
            check_dim(dim, target.dim()).map_err(|e| e.for_sample(target.id()))?;
            let mut stacked = Array2::zeros((reference.total_atoms(), dim));
            let mut offset = 0;
            for r in &reference.measures {
                let plan = solve_ot(r, target).map_err(|e| e.for_sample(target.id()))?;
                let mut v =
                    barycentric_map(&plan, r, target).map_err(|e| e.for_sample(target.id()))?;
                v -= &r.support();
                stacked
                    .slice_mut(s![offset..offset + r.len(), ..])
                    .assign(&v);
                offset += r.len();
            }
            Ok(stacked)
        })
        .collect::<Result<Vec<_>>>()?;

    let inner_weights = ndarray::concatenate(
        Axis(0),
        &reference
            .measures
            .iter()
            .map(|m| m.weights())
            .collect::<Vec<_>>(),
    )
    .expect("1-D weight vectors");

    Ok(LotEmbedding {
        reference: reference.clone(),
        displacements,
        sample_ids: targets.iter().map(|t| t.id().to_string()).collect(),
        inner_weights,
    })
}
