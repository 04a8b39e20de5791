use nalgebra::DMatrix;
use rayon::prelude::*;

use super::{solve_normal, BlockStats, DesignMatrix};
use crate::error::{AadError, Result};

/// Scores closer than this are ties, resolved towards the smaller lambda.
const TIE_TOLERANCE: f64 = 1e-12;

/// Outcome of cross-validated lambda selection.
#[derive(Debug, Clone, PartialEq)]
pub struct LambdaSelection {
    pub lambda: f64,
    /// `(lambda, mean held-out correlation)` in grid order; NaN where undefined.
    pub scores: Vec<(f64, f64)>,
}

fn mean_finite(values: impl IntoIterator<Item = f64>) -> f64 {
    let (sum, count) = values
        .into_iter()
        .filter(|v| v.is_finite())
        .fold((0.0, 0usize), |(s, c), v| (s + v, c + 1));
    if count == 0 {
        f64::NAN
    } else {
        sum / count as f64
    }
}

fn validate_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(AadError::Config("lambda grid is empty".into()));
    }
    if let Some(bad) = grid.iter().find(|l| !(l.is_finite() && **l >= 0.0)) {
        return Err(AadError::Config(format!("invalid lambda {bad} in grid")));
    }
    Ok(())
}

/// Leave-one-block-out selection over precomputed block statistics.
///
/// Each block is held out in turn, the model is fitted on the sum of the
/// others and scored by the Pearson correlation of its prediction on the
/// held-out block, averaged over outputs and then over folds.
pub(crate) fn select_from_blocks(blocks: &[BlockStats], grid: &[f64]) -> Result<LambdaSelection> {
    validate_grid(grid)?;
    if blocks.len() < 2 {
        return Err(AadError::Config(format!(
            "need at least 2 folds, got {}",
            blocks.len()
        )));
    }
    let mut total = BlockStats::zeros(blocks[0].n_features(), blocks[0].n_outputs());
    for b in blocks {
        total += b;
    }
    let fold_scores: Vec<Vec<f64>> = blocks
        .par_iter()
        .map(|held_out| {
            let mut train = total.clone();
            train -= held_out;
            grid.iter()
                .map(|&lambda| match solve_normal(&train.gram, &train.xty, lambda) {
                    Ok(sol) => mean_finite(held_out.prediction_correlations(&sol.weights)),
                    Err(_) => f64::NAN,
                })
                .collect()
        })
        .collect();
    let scores: Vec<(f64, f64)> = grid
        .iter()
        .enumerate()
        .map(|(g, &lambda)| (lambda, mean_finite(fold_scores.iter().map(|f| f[g]))))
        .collect();

    let best = scores
        .iter()
        .map(|s| s.1)
        .filter(|v| v.is_finite())
        .fold(f64::NEG_INFINITY, f64::max);
    if !best.is_finite() {
        return Err(AadError::DegenerateTarget);
    }
    let lambda = scores
        .iter()
        .filter(|(_, s)| s.is_finite() && *s >= best - TIE_TOLERANCE)
        .map(|(l, _)| *l)
        .fold(f64::INFINITY, f64::min);
    Ok(LambdaSelection { lambda, scores })
}

/// Contiguous k-fold cross-validation of the ridge penalty along the time axis.
pub fn select_lambda(
    x: &DesignMatrix,
    y: &DMatrix<f64>,
    grid: &[f64],
    k_folds: usize,
) -> Result<LambdaSelection> {
    validate_grid(grid)?;
    let t = x.values.nrows();
    if y.nrows() != t {
        return Err(AadError::Config(format!(
            "design has {t} rows but target has {}",
            y.nrows()
        )));
    }
    if k_folds < 2 || t < k_folds {
        return Err(AadError::Config(format!(
            "need 2 <= k_folds <= T, got k = {k_folds}, T = {t}"
        )));
    }
    let blocks: Vec<BlockStats> = (0..k_folds)
        .map(|f| {
            let (lo, hi) = (f * t / k_folds, (f + 1) * t / k_folds);
            BlockStats::from_design(
                &x.values.rows(lo, hi - lo).into_owned(),
                &y.rows(lo, hi - lo).into_owned(),
            )
        })
        .collect();
    select_from_blocks(&blocks, grid)
}
