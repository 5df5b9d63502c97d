//! Mean-measure quantization.
//!
//! All samples are pooled into a single weighted point cloud in which each
//! sample carries total mass `1/N` (the mean measure), K-means is run on
//! that cloud, and each sample is summarized by the mass it puts in every
//! Voronoi cell of the resulting centers. For any fixed set of centers,
//! the average `W2²` between the quantized samples and the raw samples
//! equals the K-means inertia of the pooled cloud; see
//! [`check_quantization_identity`].

use std::collections::HashSet;

use ndarray::{Array1, Array2, ArrayView2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::measures::{check_dim, solve_ot, squared_distance, DiscreteMeasure};

pub const DEFAULT_K: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KMeansOptions {
    pub max_iters: usize,
    /// Lloyd stops once no center moves by more than this (max-norm).
    pub tol: f64,
}

impl Default for KMeansOptions {
    fn default() -> Self {
        Self {
            max_iters: 300,
            tol: 1e-6,
        }
    }
}

/// K shared support points and one simplex weight vector per sample.
#[derive(Debug, Clone)]
pub struct QuantizedEnsemble {
    /// `K x d` centers.
    pub support: Array2<f64>,
    /// `N x K`; row `i` is the Voronoi mass vector of sample `i`.
    pub weights: Array2<f64>,
    pub sample_ids: Vec<String>,
    /// Within-cluster sum of squares of the pooled cloud at the final
    /// centers, each sample weighted `1/N`.
    pub kmeans_inertia: f64,
    /// Pooled inertia after every assignment step; non-increasing.
    pub inertia_trace: Vec<f64>,
    pub iterations: usize,
}

impl QuantizedEnsemble {
    pub fn k(&self) -> usize {
        self.support.nrows()
    }

    pub fn dim(&self) -> usize {
        self.support.ncols()
    }

    pub fn n_samples(&self) -> usize {
        self.weights.nrows()
    }

    /// Sample `i` as a measure on the shared support, with empty cells
    /// dropped.
    pub fn measure(&self, i: usize) -> Result<DiscreteMeasure> {
        DiscreteMeasure::dropping_zero_weights(
            self.sample_ids[i].clone(),
            self.support.view(),
            self.weights.row(i),
        )
        .map(|(m, _)| m)
    }

    /// Column means of the weight matrix: the quantized mean measure.
    pub fn mean_weights(&self) -> Array1<f64> {
        self.weights
            .mean_axis(ndarray::Axis(0))
            .expect("ensemble has at least one sample")
    }
}

struct PooledCloud {
    points: Vec<f64>,
    weights: Vec<f64>,
    /// `offsets[i]..offsets[i + 1]` are the atoms of sample `i`.
    offsets: Vec<usize>,
    dim: usize,
}

impl PooledCloud {
    fn new(measures: &[DiscreteMeasure]) -> Result<Self> {
        let first = measures
            .first()
            .ok_or_else(|| Error::InvalidParameter("no measures to quantize".into()))?;
        let dim = first.dim();
        let total: usize = measures.iter().map(DiscreteMeasure::len).sum();
        let mut points = Vec::with_capacity(total * dim);
        let mut weights = Vec::with_capacity(total);
        let mut offsets = vec![0];
        let share = 1.0 / measures.len() as f64;
        for m in measures {
            check_dim(dim, m.dim()).map_err(|e| e.for_sample(m.id()))?;
            for (row, &w) in m.support().rows().into_iter().zip(m.weights()) {
                points.extend(row.iter());
                weights.push(w * share);
            }
            offsets.push(weights.len());
        }
        Ok(Self {
            points,
            weights,
            offsets,
            dim,
        })
    }

    fn len(&self) -> usize {
        self.weights.len()
    }

    fn point(&self, p: usize) -> &[f64] {
        &self.points[p * self.dim..(p + 1) * self.dim]
    }

    fn distinct_points(&self) -> usize {
        let mut seen = HashSet::with_capacity(self.len());
        for p in 0..self.len() {
            let key: Vec<u64> = self.point(p).iter().map(|x| (x + 0.0).to_bits()).collect();
            seen.insert(key);
        }
        seen.len()
    }
}

/// Index of the nearest center and the squared distance to it. Ties go to
/// the lowest index.
#[inline]
fn nearest(point: &[f64], centers: &[f64], dim: usize) -> (usize, f64) {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (k, c) in centers.chunks_exact(dim).enumerate() {
        let d = squared_distance(point, c);
        if d < best_d {
            best_d = d;
            best = k;
        }
    }
    (best, best_d)
}

fn assign_all(cloud: &PooledCloud, centers: &[f64]) -> Vec<(usize, f64)> {
    (0..cloud.len())
        .into_par_iter()
        .map(|p| nearest(cloud.point(p), centers, cloud.dim))
        .collect()
}

/// Weighted k-means++ seeding: each new center is drawn with probability
/// proportional to `w * D²`.
fn kmeans_plus_plus(cloud: &PooledCloud, k: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let dim = cloud.dim;
    let draw = |scores: &[f64], rng: &mut ChaCha8Rng| -> usize {
        let total: f64 = scores.iter().sum();
        let mut u = rng.random::<f64>() * total;
        let mut last_positive = 0;
        for (p, &s) in scores.iter().enumerate() {
            if s > 0.0 {
                last_positive = p;
                if u < s {
                    return p;
                }
                u -= s;
            }
        }
        last_positive
    };

    let mut centers = Vec::with_capacity(k * dim);
    let first = draw(&cloud.weights, rng);
    centers.extend_from_slice(cloud.point(first));
    let mut d2: Vec<f64> = (0..cloud.len())
        .map(|p| squared_distance(cloud.point(p), cloud.point(first)))
        .collect();
    for _ in 1..k {
        let scores: Vec<f64> = d2.iter().zip(&cloud.weights).map(|(d, w)| d * w).collect();
        let next = draw(&scores, rng);
        let c = cloud.point(next).to_vec();
        d2.par_iter_mut().enumerate().for_each(|(p, d)| {
            let nd = squared_distance(cloud.point(p), &c);
            if nd < *d {
                *d = nd;
            }
        });
        centers.extend_from_slice(&c);
    }
    centers
}

/// Quantizes an ensemble of measures on `k` shared centers with the
/// default Lloyd settings.
pub fn quantize_ensemble(
    measures: &[DiscreteMeasure],
    k: usize,
    seed: u64,
) -> Result<QuantizedEnsemble> {
    quantize_ensemble_with(measures, k, seed, &KMeansOptions::default())
}

pub fn quantize_ensemble_with(
    measures: &[DiscreteMeasure],
    k: usize,
    seed: u64,
    options: &KMeansOptions,
) -> Result<QuantizedEnsemble> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be positive".into()));
    }
    let cloud = PooledCloud::new(measures)?;
    let distinct = cloud.distinct_points();
    if k > distinct {
        return Err(Error::InvalidParameter(format!(
            "k = {k} exceeds the {distinct} distinct pooled points"
        )));
    }
    let dim = cloud.dim;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centers = kmeans_plus_plus(&cloud, k, &mut rng);
    let mut trace = Vec::new();
    let mut iterations = 0;

    for _ in 0..options.max_iters {
        iterations += 1;
        let labels = assign_all(&cloud, &centers);
        trace.push(inertia(&cloud, &labels));

        let mut sums = vec![0.0; k * dim];
        let mut mass = vec![0.0; k];
        for (p, &(label, _)) in labels.iter().enumerate() {
            let w = cloud.weights[p];
            mass[label] += w;
            for (s, x) in sums[label * dim..(label + 1) * dim]
                .iter_mut()
                .zip(cloud.point(p))
            {
                *s += w * x;
            }
        }
        let mut updated = centers.clone();
        let mut reseeded = false;
        let mut taken: Vec<usize> = Vec::new();
        for c in 0..k {
            let slot = &mut updated[c * dim..(c + 1) * dim];
            if mass[c] > 0.0 {
                for (u, s) in slot.iter_mut().zip(&sums[c * dim..(c + 1) * dim]) {
                    *u = s / mass[c];
                }
            }
            let duplicate = (0..c).any(|o| {
                squared_distance(
                    &updated[o * dim..(o + 1) * dim],
                    &updated[c * dim..(c + 1) * dim],
                ) <= 1e-24
            });
            if mass[c] <= 0.0 || duplicate {
                // Empty (or collapsed) cluster: move it to the point farthest
                // from its own center.
                let far = (0..cloud.len())
                    .filter(|p| !taken.contains(p))
                    .max_by(|&p, &q| labels[p].1.total_cmp(&labels[q].1).then(q.cmp(&p)))
                    .expect("k does not exceed the number of distinct points");
                taken.push(far);
                updated[c * dim..(c + 1) * dim].copy_from_slice(cloud.point(far));
                reseeded = true;
            }
        }
        let shift = centers
            .iter()
            .zip(&updated)
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        centers = updated;
        if !reseeded && shift < options.tol {
            break;
        }
    }

    let labels = assign_all(&cloud, &centers);
    let final_inertia = inertia(&cloud, &labels);
    trace.push(final_inertia);

    let n = measures.len();
    let mut weights = Array2::zeros((n, k));
    for i in 0..n {
        for p in cloud.offsets[i]..cloud.offsets[i + 1] {
            // Undo the 1/N pooling share to recover the sample's own mass.
            weights[[i, labels[p].0]] += measures[i].weights()[p - cloud.offsets[i]];
        }
    }

    Ok(QuantizedEnsemble {
        support: Array2::from_shape_vec((k, dim), centers).expect("k * dim centers"),
        weights,
        sample_ids: measures.iter().map(|m| m.id().to_string()).collect(),
        kmeans_inertia: final_inertia,
        inertia_trace: trace,
        iterations,
    })
}

fn inertia(cloud: &PooledCloud, labels: &[(usize, f64)]) -> f64 {
    labels
        .iter()
        .zip(&cloud.weights)
        .map(|(&(_, d), w)| w * d)
        .sum()
}

/// Voronoi masses of `measure` with respect to `support`: component `k` is
/// the total weight of atoms whose nearest center is `k` (lowest index on
/// ties).
pub fn assign_weights(measure: &DiscreteMeasure, support: ArrayView2<f64>) -> Result<Array1<f64>> {
    check_dim(support.ncols(), measure.dim())?;
    if support.nrows() == 0 {
        return Err(Error::InvalidParameter("empty support".into()));
    }
    let centers = support.as_standard_layout();
    let centers = centers.as_slice().expect("standard layout");
    let mut out = Array1::zeros(support.nrows());
    for (row, &w) in measure.support().rows().into_iter().zip(measure.weights()) {
        let point: Vec<f64> = row.to_vec();
        out[nearest(&point, centers, measure.dim()).0] += w;
    }
    Ok(out)
}

/// Both sides of the quantization identity: the average `W2²` between each
/// quantized sample and its raw measure (`lhs`, from exact transport
/// solves) and the pooled K-means inertia (`rhs`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantizationIdentity {
    pub lhs: f64,
    pub rhs: f64,
    pub gap: f64,
}

/// Checks the identity for an ensemble built from `measures`. A large gap
/// is reported, not raised.
pub fn check_quantization_identity(
    measures: &[DiscreteMeasure],
    ensemble: &QuantizedEnsemble,
) -> Result<QuantizationIdentity> {
    if measures.len() != ensemble.n_samples() {
        return Err(Error::InvalidParameter(format!(
            "{} measures for an ensemble of {} samples",
            measures.len(),
            ensemble.n_samples()
        )));
    }
    let costs: Vec<f64> = measures
        .par_iter()
        .enumerate()
        .map(|(i, mu)| {
            let nu = ensemble.measure(i)?;
            solve_ot(&nu, mu)
                .map(|p| p.cost)
                .map_err(|e| e.for_sample(mu.id()))
        })
        .collect::<Result<_>>()?;
    let lhs = costs.iter().sum::<f64>() / measures.len() as f64;
    let rhs = ensemble.kmeans_inertia;
    Ok(QuantizationIdentity {
        lhs,
        rhs,
        gap: (lhs - rhs).abs(),
    })
}
