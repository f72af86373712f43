//! Evaluation quantities: Monte-Carlo L2 error, negative fraction, and
//! distance-to-reference curves.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functions::{SampleSet, TestFunction};
use crate::problem::PolynomialModel;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub l2_error: f64,
    pub negative_fraction: f64,
    pub max_violation: f64,
    pub n_test_points: usize,
    pub seed: Option<u64>,
}

/// Pairwise summation; fixed reduction order for any input length.
pub(crate) fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 32 {
        return xs.iter().sum();
    }
    let (a, b) = xs.split_at(xs.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}

/// `sqrt((1/L) sum_i (f(z_i) - f~(z_i))^2)`.
pub fn l2_error_estimate(tf: &TestFunction, poly: &PolynomialModel, test: &SampleSet) -> Result<f64> {
    if test.is_empty() {
        return Err(Error::InvalidArgument("empty test set".into()));
    }
    if tf.dim() != poly.dim() {
        return Err(Error::dim("test function vs model", poly.dim(), tf.dim()));
    }
    let exact = tf.sample(test)?;
    let approx = poly.eval_samples(test)?;
    let sq: Vec<f64> = exact
        .iter()
        .zip(&approx)
        .map(|(a, b)| (a - b) * (a - b))
        .collect();
    Ok((pairwise_sum(&sq) / test.len() as f64).sqrt())
}

/// Share of test points with `f~(z_i) < 0` (strict).
pub fn negative_fraction(poly: &PolynomialModel, test: &SampleSet) -> Result<f64> {
    if test.is_empty() {
        return Err(Error::InvalidArgument("empty test set".into()));
    }
    let values = poly.eval_samples(test)?;
    let neg = values.iter().filter(|&&v| v < 0.0).count();
    Ok(neg as f64 / test.len() as f64)
}

/// `||c_k - c_ref||_2` per snapshot.
pub fn convergence_distance(snapshots: &[DVector<f64>], c_ref: &DVector<f64>) -> Result<Vec<f64>> {
    snapshots
        .iter()
        .map(|c| {
            if c.len() != c_ref.len() {
                Err(Error::dim("snapshot", c_ref.len(), c.len()))
            } else {
                Ok((c - c_ref).norm())
            }
        })
        .collect()
}

/// First index whose distance is at or below `tol`.
pub fn first_below(distances: &[f64], tol: f64) -> Option<usize> {
    distances.iter().position(|&d| d <= tol)
}
