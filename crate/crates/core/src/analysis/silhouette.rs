use std::collections::{BTreeMap, BTreeSet};

use ndarray::{Array1, Array2, ArrayView2};

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct Silhouette {
    /// Mean of the per-point scores.
    pub score: f64,
    pub per_point: Array1<f64>,
}

/// Maps arbitrary labels to dense cluster indices following their sorted
/// order.
pub fn encode_labels<L: Ord + Clone>(labels: &[L]) -> Vec<usize> {
    let distinct: BTreeSet<&L> = labels.iter().collect();
    let codes: BTreeMap<&L, usize> = distinct
        .into_iter()
        .enumerate()
        .map(|(i, l)| (l, i))
        .collect();
    labels.iter().map(|l| codes[l]).collect()
}

/// Silhouette of a labelling with Euclidean distances between the rows of
/// `features`.
pub fn silhouette(features: ArrayView2<f64>, labels: &[usize]) -> Result<Silhouette> {
    let n = features.nrows();
    let mut dist = Array2::zeros((n, n));
    for i in 0..n {
        for j in (i + 1)..n {
            let d = (&features.row(i) - &features.row(j))
                .mapv(|x| x * x)
                .sum()
                .sqrt();
            dist[[i, j]] = d;
            dist[[j, i]] = d;
        }
    }
    silhouette_from_distances(dist.view(), labels)
}

/// Silhouette from a precomputed distance matrix.
///
/// For point `x` in cluster `A`, `a(x)` is its mean distance to the other
/// members of `A` and `b(x)` the smallest mean distance to another
/// cluster; the score is `(b - a) / max(a, b)`, and 0 for singletons.
pub fn silhouette_from_distances(dist: ArrayView2<f64>, labels: &[usize]) -> Result<Silhouette> {
    let n = dist.nrows();
    if dist.ncols() != n || labels.len() != n {
        return Err(Error::InvalidParameter(format!(
            "{} labels for a {}x{} distance matrix",
            labels.len(),
            dist.nrows(),
            dist.ncols()
        )));
    }
    let clusters = labels.iter().copied().max().map_or(0, |m| m + 1);
    let mut sizes = vec![0usize; clusters];
    for &l in labels {
        sizes[l] += 1;
    }
    let occupied = sizes.iter().filter(|&&s| s > 0).count();
    if occupied < 2 {
        return Err(Error::InvalidParameter(format!(
            "silhouette needs at least 2 clusters, got {occupied}"
        )));
    }

    let mut per_point = Array1::zeros(n);
    let mut sums = vec![0.0; clusters];
    for i in 0..n {
        sums.iter_mut().for_each(|s| *s = 0.0);
        for j in 0..n {
            if j != i {
                sums[labels[j]] += dist[[i, j]];
            }
        }
        let own = labels[i];
        if sizes[own] == 1 {
            continue;
        }
        let a = sums[own] / (sizes[own] - 1) as f64;
        let b = (0..clusters)
            .filter(|&c| c != own && sizes[c] > 0)
            .map(|c| sums[c] / sizes[c] as f64)
            .fold(f64::INFINITY, f64::min);
        let denom = a.max(b);
        per_point[i] = if denom > 0.0 { (b - a) / denom } else { 0.0 };
    }
    Ok(Silhouette {
        score: per_point.mean().expect("n > 0"),
        per_point,
    })
}
