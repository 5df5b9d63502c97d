//! Reference measures for the linearized embedding.
//!
//! The default reference is a free-support Wasserstein barycenter of the
//! quantized samples, computed by alternating minimization: exact plans
//! from the current barycenter to every sample, then every support point
//! moves to the average of its barycentric images. The alternatives
//! (uniform weights on the K-means centers, one randomly chosen sample, or
//! a pair of samples for a product-space embedding) are cheaper.

use std::fmt;
use std::str::FromStr;

use ndarray::{Array1, Array2, Axis};
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lot::barycentric_map;
use crate::measures::{solve_ot, squared_distance, DiscreteMeasure, TransportPlan};
use crate::quantize::QuantizedEnsemble;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ReferenceStrategy {
    Barycenter,
    UniformCenters,
    RandomSample,
    Pair,
}

impl ReferenceStrategy {
    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Barycenter => "barycenter",
            Self::UniformCenters => "uniform_centers",
            Self::RandomSample => "random_sample",
            Self::Pair => "pair",
        }
    }
}

impl fmt::Display for ReferenceStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ReferenceStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "barycenter" => Ok(Self::Barycenter),
            "uniform_centers" => Ok(Self::UniformCenters),
            "random_sample" => Ok(Self::RandomSample),
            "pair" => Ok(Self::Pair),
            other => Err(Error::InvalidParameter(format!(
                "unknown reference strategy {other:?}"
            ))),
        }
    }
}

/// How the barycenter weights are handled during the alternating scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BarycenterWeights {
    /// Weights stay uniform `1/k`; only the support moves.
    #[default]
    Uniform,
    /// After each support update, also try the Voronoi masses of the
    /// quantized mean measure as weights and keep them when they lower the
    /// objective.
    Refit,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BarycenterOptions {
    /// Support size; `None` uses the ensemble's K.
    pub k: Option<usize>,
    pub max_iters: usize,
    /// Stop once an iteration lowers the objective by less than this.
    pub tol: f64,
    pub weights: BarycenterWeights,
}

impl Default for BarycenterOptions {
    fn default() -> Self {
        Self {
            k: None,
            max_iters: 100,
            tol: 1e-8,
            weights: BarycenterWeights::Uniform,
        }
    }
}

/// A reference measure together with how it was obtained.
///
/// `measures` holds one measure, or two for [`ReferenceStrategy::Pair`].
#[derive(Debug, Clone)]
pub struct ReferenceMeasure {
    pub measures: Vec<DiscreteMeasure>,
    pub strategy: ReferenceStrategy,
    pub seed: u64,
    /// Sample indices the reference was drawn from (random/pair strategies).
    pub sample_indices: Vec<usize>,
    /// Barycenter objective `(1/N) sum_i W2²(ref, nu_i)` per accepted
    /// iterate; empty for the other strategies.
    pub objective_trace: Vec<f64>,
    /// The alternating scheme stopped because a step failed to decrease
    /// the objective.
    pub stalled: bool,
}

impl ReferenceMeasure {
    pub fn primary(&self) -> &DiscreteMeasure {
        &self.measures[0]
    }

    pub fn objective(&self) -> Option<f64> {
        self.objective_trace.last().copied()
    }

    /// Total number of reference atoms across all component measures.
    pub fn total_atoms(&self) -> usize {
        self.measures.iter().map(DiscreteMeasure::len).sum()
    }
}

fn ensemble_measures(ensemble: &QuantizedEnsemble) -> Result<Vec<DiscreteMeasure>> {
    (0..ensemble.n_samples())
        .map(|i| ensemble.measure(i))
        .collect()
}

fn solve_all(
    reference: &DiscreteMeasure,
    targets: &[DiscreteMeasure],
) -> Result<Vec<TransportPlan>> {
    targets
        .par_iter()
        .map(|t| solve_ot(reference, t).map_err(|e| e.for_sample(t.id())))
        .collect()
}

fn mean_cost(plans: &[TransportPlan]) -> f64 {
    plans.iter().map(|p| p.cost).sum::<f64>() / plans.len() as f64
}

/// Free-support barycenter with `k` atoms and uniform weights.
pub fn wasserstein_barycenter(
    ensemble: &QuantizedEnsemble,
    k: usize,
    seed: u64,
    max_iters: usize,
) -> Result<ReferenceMeasure> {
    let options = BarycenterOptions {
        k: Some(k),
        max_iters,
        ..BarycenterOptions::default()
    };
    wasserstein_barycenter_with(ensemble, seed, &options)
}

pub fn wasserstein_barycenter_with(
    ensemble: &QuantizedEnsemble,
    seed: u64,
    options: &BarycenterOptions,
) -> Result<ReferenceMeasure> {
    let targets = ensemble_measures(ensemble)?;
    barycenter_of(&targets, ensemble, seed, options)
}

fn barycenter_of(
    targets: &[DiscreteMeasure],
    ensemble: &QuantizedEnsemble,
    seed: u64,
    options: &BarycenterOptions,
) -> Result<ReferenceMeasure> {
    let k = options.k.unwrap_or_else(|| ensemble.k());
    if k == 0 {
        return Err(Error::InvalidParameter(
            "barycenter support size must be positive".into(),
        ));
    }
    if targets.is_empty() {
        return Err(Error::InvalidParameter("empty ensemble".into()));
    }
    let mean_weights = ensemble.mean_weights();
    let occupied = mean_weights.iter().filter(|&&w| w > 0.0).count();
    if k > occupied {
        return Err(Error::InvalidParameter(format!(
            "barycenter support size {k} exceeds the {occupied} occupied centers"
        )));
    }

    let mut support = if k == ensemble.k() {
        ensemble.support.clone()
    } else {
        seed_support(ensemble, &mean_weights, k, seed)
    };
    let mut weights = match options.weights {
        BarycenterWeights::Uniform => Array1::from_elem(k, 1.0 / k as f64),
        BarycenterWeights::Refit => voronoi_weights(ensemble, &mean_weights, &support),
    };

    let mut current = DiscreteMeasure::new("barycenter", support.clone(), weights.clone())?;
    let mut plans = solve_all(&current, targets)?;
    let mut objective = mean_cost(&plans);
    let mut trace = vec![objective];
    let mut stalled = false;

    for _ in 1..options.max_iters.max(1) {
        // Support update: each atom moves to the average of its images.
        let mut next_support = Array2::zeros(support.raw_dim());
        for (plan, target) in plans.iter().zip(targets) {
            next_support += &barycentric_map(plan, &current, target)?;
        }
        next_support /= targets.len() as f64;

        let mut candidate =
            DiscreteMeasure::new("barycenter", next_support.clone(), weights.clone())?;
        let mut candidate_plans = solve_all(&candidate, targets)?;
        let mut candidate_objective = mean_cost(&candidate_plans);
        let mut candidate_weights = weights.clone();

        if options.weights == BarycenterWeights::Refit {
            let refit = voronoi_weights(ensemble, &mean_weights, &next_support);
            let alt = DiscreteMeasure::new("barycenter", next_support.clone(), refit.clone())?;
            let alt_plans = solve_all(&alt, targets)?;
            let alt_objective = mean_cost(&alt_plans);
            if alt_objective < candidate_objective {
                candidate = alt;
                candidate_plans = alt_plans;
                candidate_objective = alt_objective;
                candidate_weights = refit;
            }
        }

        if candidate_objective > objective {
            stalled = true;
            break;
        }
        let decrease = objective - candidate_objective;
        support = next_support;
        weights = candidate_weights;
        current = candidate;
        plans = candidate_plans;
        objective = candidate_objective;
        trace.push(objective);
        if decrease < options.tol {
            break;
        }
    }

    Ok(ReferenceMeasure {
        measures: vec![current],
        strategy: ReferenceStrategy::Barycenter,
        seed,
        sample_indices: Vec::new(),
        objective_trace: trace,
        stalled,
    })
}

/// Picks `k` starting atoms among the occupied ensemble centers by
/// k-means++ on the quantized mean measure.
fn seed_support(
    ensemble: &QuantizedEnsemble,
    mean_weights: &Array1<f64>,
    k: usize,
    seed: u64,
) -> Array2<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let support = &ensemble.support;
    let kk = support.nrows();
    let mut chosen: Vec<usize> = Vec::with_capacity(k);
    let mut d2 = vec![f64::INFINITY; kk];
    for _ in 0..k {
        let scores: Vec<f64> = (0..kk)
            .map(|c| {
                if chosen.contains(&c) || mean_weights[c] <= 0.0 {
                    0.0
                } else if chosen.is_empty() {
                    mean_weights[c]
                } else {
                    mean_weights[c] * d2[c]
                }
            })
            .collect();
        let total: f64 = scores.iter().sum();
        let pick = if total > 0.0 {
            let mut u = rng.random::<f64>() * total;
            let mut pick = None;
            for (c, &s) in scores.iter().enumerate() {
                if s > 0.0 {
                    pick = Some(c);
                    if u < s {
                        break;
                    }
                    u -= s;
                }
            }
            pick.expect("positive total score")
        } else {
            // Remaining occupied centers coincide with chosen ones.
            (0..kk)
                .find(|c| !chosen.contains(c) && mean_weights[*c] > 0.0)
                .expect("k does not exceed occupied centers")
        };
        chosen.push(pick);
        let p = support.row(pick).to_vec();
        for (c, best) in d2.iter_mut().enumerate() {
            *best = best.min(squared_distance(&support.row(c).to_vec(), &p));
        }
    }
    support.select(Axis(0), &chosen)
}

/// Mass of the quantized mean measure in each Voronoi cell of `support`,
/// floored so that every atom keeps positive weight.
fn voronoi_weights(
    ensemble: &QuantizedEnsemble,
    mean_weights: &Array1<f64>,
    support: &Array2<f64>,
) -> Array1<f64> {
    const FLOOR: f64 = 1e-9;
    let k = support.nrows();
    let mut w = Array1::zeros(k);
    for (c, &mass) in mean_weights.iter().enumerate() {
        let x = ensemble.support.row(c).to_vec();
        let nearest = (0..k)
            .map(|j| (j, squared_distance(&x, &support.row(j).to_vec())))
            .fold(
                (0, f64::INFINITY),
                |best, cur| if cur.1 < best.1 { cur } else { best },
            );
        w[nearest.0] += mass;
    }
    w.mapv_inplace(|x: f64| x.max(FLOOR));
    let total = w.sum();
    w / total
}

/// Builds a reference measure with the given strategy.
pub fn make_reference(
    ensemble: &QuantizedEnsemble,
    strategy: ReferenceStrategy,
    seed: u64,
) -> Result<ReferenceMeasure> {
    make_reference_with(ensemble, strategy, seed, &BarycenterOptions::default())
}

pub fn make_reference_with(
    ensemble: &QuantizedEnsemble,
    strategy: ReferenceStrategy,
    seed: u64,
    options: &BarycenterOptions,
) -> Result<ReferenceMeasure> {
    let n = ensemble.n_samples();
    let simple = |measures: Vec<DiscreteMeasure>, sample_indices: Vec<usize>| ReferenceMeasure {
        measures,
        strategy,
        seed,
        sample_indices,
        objective_trace: Vec::new(),
        stalled: false,
    };
    match strategy {
        ReferenceStrategy::Barycenter => wasserstein_barycenter_with(ensemble, seed, options),
        ReferenceStrategy::UniformCenters => {
            let m = DiscreteMeasure::uniform("uniform_centers", ensemble.support.clone())?;
            Ok(simple(vec![m], Vec::new()))
        }
        ReferenceStrategy::RandomSample => {
            if n == 0 {
                return Err(Error::InvalidParameter("empty ensemble".into()));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let i = rng.random_range(0..n);
            Ok(simple(vec![ensemble.measure(i)?], vec![i]))
        }
        ReferenceStrategy::Pair => {
            if n < 2 {
                return Err(Error::InvalidParameter(format!(
                    "pair reference needs at least 2 samples, got {n}"
                )));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let picked = index::sample(&mut rng, n, 2).into_vec();
            let measures = picked
                .iter()
                .map(|&i| ensemble.measure(i))
                .collect::<Result<Vec<_>>>()?;
            Ok(simple(measures, picked))
        }
    }
}
