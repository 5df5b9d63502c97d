//! Discrete probability measures and exact optimal transport between them.
//!
//! Transport uses the squared Euclidean ground cost throughout. Plans are
//! computed exactly by a primal network simplex on the bipartite
//! transportation graph (see [`simplex`]), so every returned plan is an
//! optimal vertex of the transportation polytope.

mod simplex;

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};

use crate::error::{Error, Result};

pub use simplex::SolverOptions;

/// Weights of a measure must sum to one within this tolerance.
pub const WEIGHT_SUM_TOL: f64 = 1e-9;

/// A weighted point set in R^d with weights on the probability simplex.
///
/// Every weight is strictly positive: zero-mass atoms are rejected at
/// construction (use [`DiscreteMeasure::dropping_zero_weights`] to build
/// from a vector that may contain them).
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure {
    id: String,
    support: Array2<f64>,
    weights: Array1<f64>,
}

impl DiscreteMeasure {
    pub fn new(id: impl Into<String>, support: Array2<f64>, weights: Array1<f64>) -> Result<Self> {
        let id = id.into();
        let (n, d) = support.dim();
        if n == 0 {
            return Err(Error::InvalidMeasure(format!("{id}: empty support")));
        }
        if d == 0 {
            return Err(Error::InvalidMeasure(format!(
                "{id}: zero-dimensional support"
            )));
        }
        if weights.len() != n {
            return Err(Error::InvalidMeasure(format!(
                "{id}: {} weights for {n} atoms",
                weights.len()
            )));
        }
        if let Some(pos) = support.iter().position(|x| !x.is_finite()) {
            return Err(Error::InvalidMeasure(format!(
                "{id}: non-finite coordinate in atom {}",
                pos / d
            )));
        }
        if let Some(pos) = weights.iter().position(|&w| !(w > 0.0 && w.is_finite())) {
            return Err(Error::InvalidMeasure(format!(
                "{id}: atom {pos} has weight {} (weights must be positive)",
                weights[pos]
            )));
        }
        let total: f64 = weights.sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::InvalidMeasure(format!(
                "{id}: weights sum to {total}"
            )));
        }
        Ok(Self {
            id,
            support,
            weights,
        })
    }

    /// Uniform weights `1/n` on the rows of `support`.
    pub fn uniform(id: impl Into<String>, support: Array2<f64>) -> Result<Self> {
        let n = support.nrows();
        let w = if n == 0 { 0.0 } else { 1.0 / n as f64 };
        Self::new(id, support, Array1::from_elem(n, w))
    }

    pub fn dirac(id: impl Into<String>, point: &[f64]) -> Result<Self> {
        let support = Array2::from_shape_vec((1, point.len()), point.to_vec())
            .map_err(|e| Error::InvalidMeasure(e.to_string()))?;
        Self::new(id, support, Array1::ones(1))
    }

    /// Builds a measure from a weight vector that may contain zeros,
    /// keeping only the atoms with positive mass. Returns the measure and
    /// the indices (into `support`) of the kept atoms.
    pub fn dropping_zero_weights(
        id: impl Into<String>,
        support: ArrayView2<f64>,
        weights: ArrayView1<f64>,
    ) -> Result<(Self, Vec<usize>)> {
        let kept: Vec<usize> = (0..weights.len()).filter(|&k| weights[k] > 0.0).collect();
        let sub = support.select(Axis(0), &kept);
        let w = weights.select(Axis(0), &kept);
        Ok((Self::new(id, sub, w)?, kept))
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn len(&self) -> usize {
        self.support.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.support.nrows() == 0
    }

    pub fn dim(&self) -> usize {
        self.support.ncols()
    }

    pub fn support(&self) -> ArrayView2<'_, f64> {
        self.support.view()
    }

    pub fn weights(&self) -> ArrayView1<'_, f64> {
        self.weights.view()
    }

    /// Weighted mean of the atoms.
    pub fn mean(&self) -> Array1<f64> {
        self.weights.dot(&self.support)
    }

    /// The same measure with every atom shifted by `t`.
    pub fn translated(&self, t: &[f64]) -> Result<Self> {
        check_dim(self.dim(), t.len())?;
        let mut support = self.support.clone();
        for mut row in support.rows_mut() {
            for (x, dt) in row.iter_mut().zip(t) {
                *x += dt;
            }
        }
        Ok(Self {
            id: self.id.clone(),
            support,
            weights: self.weights.clone(),
        })
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.id = id.into();
        self
    }
}

/// A coupling between two measures together with its squared-cost value.
#[derive(Debug, Clone)]
pub struct TransportPlan {
    pub matrix: Array2<f64>,
    pub cost: f64,
    pub source_id: String,
    pub target_id: String,
}

impl TransportPlan {
    pub fn dim(&self) -> (usize, usize) {
        self.matrix.dim()
    }

    /// True when every row carries mass to a single column, i.e. the plan
    /// is induced by a map on the source atoms.
    pub fn is_deterministic(&self, tol: f64) -> bool {
        self.matrix
            .rows()
            .into_iter()
            .all(|row| row.iter().filter(|&&p| p > tol).count() <= 1)
    }

    /// Recomputes `sum_ij P_ij |x_i - y_j|^2` against the given marginals.
    pub fn evaluate_cost(&self, source: &DiscreteMeasure, target: &DiscreteMeasure) -> f64 {
        let cost = squared_cost_matrix(source.support(), target.support());
        (&self.matrix * &cost).sum()
    }

    /// Largest absolute deviation of the row/column sums from the marginal
    /// weights.
    pub fn marginal_error(&self, source: &DiscreteMeasure, target: &DiscreteMeasure) -> f64 {
        let rows = self.matrix.sum_axis(Axis(1));
        let cols = self.matrix.sum_axis(Axis(0));
        let r = (&rows - &source.weights())
            .iter()
            .fold(0.0f64, |m, x| m.max(x.abs()));
        let c = (&cols - &target.weights())
            .iter()
            .fold(0.0f64, |m, x| m.max(x.abs()));
        r.max(c)
    }
}

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch { expected, got });
    }
    Ok(())
}

#[inline]
pub(crate) fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// `C_ij = |x_i - y_j|^2` for the rows of `x` and `y`.
pub fn squared_cost_matrix(x: ArrayView2<f64>, y: ArrayView2<f64>) -> Array2<f64> {
    let mut cost = Array2::zeros((x.nrows(), y.nrows()));
    for (i, xi) in x.rows().into_iter().enumerate() {
        for (j, yj) in y.rows().into_iter().enumerate() {
            cost[[i, j]] = xi
                .iter()
                .zip(yj.iter())
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
        }
    }
    cost
}

/// Exact Kantorovich transport with squared Euclidean cost.
pub fn solve_ot(source: &DiscreteMeasure, target: &DiscreteMeasure) -> Result<TransportPlan> {
    solve_ot_with(source, target, &SolverOptions::default())
}

pub fn solve_ot_with(
    source: &DiscreteMeasure,
    target: &DiscreteMeasure,
    options: &SolverOptions,
) -> Result<TransportPlan> {
    check_dim(source.dim(), target.dim())?;
    let cost = squared_cost_matrix(source.support(), target.support());
    let matrix = simplex::solve(
        source.weights.as_slice().expect("contiguous weights"),
        target.weights.as_slice().expect("contiguous weights"),
        &cost,
        options,
    )?;
    let value = (&matrix * &cost).sum().max(0.0);
    Ok(TransportPlan {
        matrix,
        cost: value,
        source_id: source.id.clone(),
        target_id: target.id.clone(),
    })
}

/// 2-Wasserstein distance, the square root of the optimal transport cost.
pub fn wasserstein2(source: &DiscreteMeasure, target: &DiscreteMeasure) -> Result<f64> {
    Ok(solve_ot(source, target)?.cost.sqrt())
}

/// The deterministic coupling `P_{i, T(i)} = a_i` induced by a map from
/// source atoms to target atoms. The map must push the source weights
/// forward onto the target weights.
pub fn map_induced_plan(
    source: &DiscreteMeasure,
    assignment: &[usize],
    target: &DiscreteMeasure,
) -> Result<TransportPlan> {
    check_dim(source.dim(), target.dim())?;
    if assignment.len() != source.len() {
        return Err(Error::InfeasibleAssignment(format!(
            "{} entries for {} source atoms",
            assignment.len(),
            source.len()
        )));
    }
    let mut matrix: Array2<f64> = Array2::zeros((source.len(), target.len()));
    for (i, &j) in assignment.iter().enumerate() {
        if j >= target.len() {
            return Err(Error::InfeasibleAssignment(format!(
                "atom {i} mapped to {j}, target has {} atoms",
                target.len()
            )));
        }
        matrix[[i, j]] += source.weights[i];
    }
    let pushed = matrix.sum_axis(Axis(0));
    for (j, (&p, &b)) in pushed.iter().zip(target.weights.iter()).enumerate() {
        if (p - b).abs() > WEIGHT_SUM_TOL {
            return Err(Error::InfeasibleAssignment(format!(
                "target atom {j} receives {p}, expected {b}"
            )));
        }
    }
    let cost = squared_cost_matrix(source.support(), target.support());
    let value = (&matrix * &cost).sum();
    Ok(TransportPlan {
        matrix,
        cost: value,
        source_id: source.id.clone(),
        target_id: target.id.clone(),
    })
}
