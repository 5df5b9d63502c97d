use nalgebra::{DMatrix, DVector};
use ndarray::{Array1, ArrayView1, ArrayView2, Axis};
use rayon::prelude::*;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogisticOptions {
    /// Strength of the `(l2 / 2) |w|²` penalty; the intercept is not
    /// penalized.
    pub l2: f64,
    pub max_iters: usize,
    pub tol: f64,
}

impl Default for LogisticOptions {
    fn default() -> Self {
        Self {
            l2: 1.0,
            max_iters: 200,
            tol: 1e-10,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LogisticModel {
    pub intercept: f64,
    pub coefficients: Array1<f64>,
}

impl LogisticModel {
    pub fn probability(&self, x: ArrayView1<f64>) -> f64 {
        sigmoid(self.intercept + self.coefficients.dot(&x))
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `log(1 + exp(z))` without overflow.
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

fn penalized_loss(design: &DMatrix<f64>, y: &[f64], beta: &DVector<f64>, l2: f64) -> f64 {
    let z = design * beta;
    let data: f64 = z.iter().zip(y).map(|(&z, &y)| softplus(z) - y * z).sum();
    data + 0.5 * l2 * beta.rows(1, beta.len() - 1).norm_squared()
}

/// L2-regularized logistic regression fitted by damped Newton steps
/// (iteratively reweighted least squares).
pub fn fit_logistic(
    features: ArrayView2<f64>,
    labels: &[bool],
    options: &LogisticOptions,
) -> Result<LogisticModel> {
    let (n, c) = features.dim();
    if labels.len() != n || n == 0 {
        return Err(Error::InvalidParameter(format!(
            "{} labels for {n} samples",
            labels.len()
        )));
    }
    let p = c + 1;
    let design = DMatrix::from_fn(n, p, |i, j| if j == 0 { 1.0 } else { features[[i, j - 1]] });
    let y: Vec<f64> = labels.iter().map(|&l| if l { 1.0 } else { 0.0 }).collect();
    let mut penalty = DVector::from_element(p, options.l2);
    // Keeps the Hessian invertible when the training fold has one class.
    penalty[0] = 1e-10;
    let mut beta = DVector::zeros(p);
    let mut loss = penalized_loss(&design, &y, &beta, options.l2);

    for _ in 0..options.max_iters {
        let z = &design * &beta;
        let mut grad = DVector::zeros(p);
        let mut hess = DMatrix::from_diagonal(&penalty);
        for i in 0..n {
            let pi = sigmoid(z[i]);
            let row = design.row(i).transpose();
            grad += &row * (pi - y[i]);
            hess += &row * row.transpose() * (pi * (1.0 - pi)).max(1e-12);
        }
        for j in 1..p {
            grad[j] += options.l2 * beta[j];
        }
        let step = match hess.clone().cholesky() {
            Some(ch) => ch.solve(&grad),
            None => hess
                .lu()
                .solve(&grad)
                .ok_or_else(|| Error::Numerical("singular logistic Hessian".into()))?,
        };
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let candidate = &beta - &step * t;
            let cl = penalized_loss(&design, &y, &candidate, options.l2);
            if cl <= loss {
                beta = candidate;
                loss = cl;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if !accepted || (step.amax() * t) < options.tol {
            break;
        }
    }
    Ok(LogisticModel {
        intercept: beta[0],
        coefficients: Array1::from_iter(beta.iter().skip(1).copied()),
    })
}

/// Leave-one-out evaluation of a binary logistic classifier.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassificationReport {
    pub true_positive: usize,
    pub false_negative: usize,
    pub false_positive: usize,
    pub true_negative: usize,
    /// `(TP/(TP+FN) + TN/(TN+FP)) / 2`.
    pub balanced_accuracy: f64,
    pub predictions: Vec<bool>,
    pub probabilities: Vec<f64>,
}

impl ClassificationReport {
    pub fn sensitivity(&self) -> f64 {
        self.true_positive as f64 / (self.true_positive + self.false_negative) as f64
    }

    pub fn specificity(&self) -> f64 {
        self.true_negative as f64 / (self.true_negative + self.false_positive) as f64
    }

    pub fn total(&self) -> usize {
        self.true_positive + self.false_negative + self.false_positive + self.true_negative
    }
}

/// Fits on all samples but one, predicts the held-out sample at threshold
/// 0.5, and aggregates over every fold.
pub fn loo_logistic(features: ArrayView2<f64>, labels: &[bool]) -> Result<ClassificationReport> {
    loo_logistic_with(features, labels, &LogisticOptions::default())
}

pub fn loo_logistic_with(
    features: ArrayView2<f64>,
    labels: &[bool],
    options: &LogisticOptions,
) -> Result<ClassificationReport> {
    let n = features.nrows();
    if labels.len() != n {
        return Err(Error::InvalidParameter(format!(
            "{} labels for {n} samples",
            labels.len()
        )));
    }
    if features.ncols() == 0 {
        return Err(Error::InvalidParameter("no feature columns".into()));
    }
    let positives = labels.iter().filter(|&&l| l).count();
    if positives == 0 || positives == n {
        return Err(Error::InvalidParameter(
            "both classes must be present".into(),
        ));
    }

    let probabilities = (0..n)
        .into_par_iter()
        .map(|held_out| {
            let keep: Vec<usize> = (0..n).filter(|&i| i != held_out).collect();
            let train = features.select(Axis(0), &keep);
            let train_labels: Vec<bool> = keep.iter().map(|&i| labels[i]).collect();
            let model = fit_logistic(train.view(), &train_labels, options)?;
            Ok(model.probability(features.row(held_out)))
        })
        .collect::<Result<Vec<f64>>>()?;

    let predictions: Vec<bool> = probabilities.iter().map(|&p| p >= 0.5).collect();
    let mut report = ClassificationReport {
        true_positive: 0,
        false_negative: 0,
        false_positive: 0,
        true_negative: 0,
        balanced_accuracy: 0.0,
        predictions,
        probabilities,
    };
    for (&truth, &pred) in labels.iter().zip(&report.predictions) {
        match (truth, pred) {
            (true, true) => report.true_positive += 1,
            (true, false) => report.false_negative += 1,
            (false, true) => report.false_positive += 1,
            (false, false) => report.true_negative += 1,
        }
    }
    report.balanced_accuracy = 0.5 * (report.sensitivity() + report.specificity());
    Ok(report)
}
