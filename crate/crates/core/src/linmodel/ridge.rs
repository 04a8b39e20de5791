use nalgebra::DMatrix;

use super::DesignMatrix;
use crate::error::{AadError, Result};

/// Ridge weights for every output column, with the penalty actually applied.
#[derive(Debug, Clone, PartialEq)]
pub struct RidgeSolution {
    /// `(n_lags * n_inputs) x n_outputs`.
    pub weights: DMatrix<f64>,
    /// Penalty relative to `lambda_scale`.
    pub lambda: f64,
    /// Mean of the Gram diagonal; the effective penalty is `lambda * lambda_scale`.
    pub lambda_scale: f64,
}

impl RidgeSolution {
    pub fn effective_lambda(&self) -> f64 {
        self.lambda * self.lambda_scale
    }
}

/// Below this ratio of smallest to largest Cholesky pivot an unpenalised
/// system is treated as singular.
const PIVOT_RATIO: f64 = 1e-7;

/// Solve `(G + lambda * mean(diag G) * I) W = X'Y` by Cholesky with one step
/// of iterative refinement.
pub(crate) fn solve_normal(
    gram: &DMatrix<f64>,
    xty: &DMatrix<f64>,
    lambda: f64,
) -> Result<RidgeSolution> {
    if !(lambda.is_finite() && lambda >= 0.0) {
        return Err(AadError::Config(format!(
            "lambda must be finite and nonnegative, got {lambda}"
        )));
    }
    let p = gram.nrows();
    if p == 0 {
        return Err(AadError::Empty("design has no columns"));
    }
    let scale = gram.diagonal().mean();
    if scale == 0.0 {
        // all-zero design: every weight vector fits equally, pick the smallest
        return if lambda > 0.0 {
            Ok(RidgeSolution {
                weights: DMatrix::zeros(p, xty.ncols()),
                lambda,
                lambda_scale: scale,
            })
        } else {
            Err(AadError::RankDeficient)
        };
    }
    let mut a = gram.clone();
    let shift = lambda * scale;
    for i in 0..p {
        a[(i, i)] += shift;
    }
    let chol = a.clone().cholesky().ok_or(AadError::RankDeficient)?;
    if lambda == 0.0 {
        let diag = chol.l_dirty().diagonal();
        let (lo, hi) = diag
            .iter()
            .fold((f64::INFINITY, 0.0f64), |(lo, hi), &v| (lo.min(v), hi.max(v)));
        if lo <= PIVOT_RATIO * hi {
            return Err(AadError::RankDeficient);
        }
    }
    let mut weights = chol.solve(xty);
    let residual = xty - &a * &weights;
    weights += chol.solve(&residual);
    if weights.iter().any(|v| !v.is_finite()) {
        return Err(AadError::RankDeficient);
    }
    Ok(RidgeSolution {
        weights,
        lambda,
        lambda_scale: scale,
    })
}

/// Ridge regression of `y` on `x`; `lambda` is relative to the mean Gram diagonal.
pub fn ridge_solve(x: &DesignMatrix, y: &DMatrix<f64>, lambda: f64) -> Result<RidgeSolution> {
    if x.values.nrows() != y.nrows() {
        return Err(AadError::Config(format!(
            "design has {} rows but target has {}",
            x.values.nrows(),
            y.nrows()
        )));
    }
    let gram = x.values.tr_mul(&x.values);
    let xty = x.values.tr_mul(y);
    solve_normal(&gram, &xty, lambda)
}
