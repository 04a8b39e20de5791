use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::Trial;
use crate::error::{AadError, Result};
use crate::linmodel::{
    build_lag_matrix, select_from_blocks, select_lambda, solve_normal, BlockStats, Direction,
    LagConfig,
};
use crate::signal::{MonoSeries, MultiSeries};

/// Backward model `g(tau, n)` reconstructing the attended envelope from EEG.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decoder {
    /// `n_lags x n_channels`.
    pub weights: DMatrix<f64>,
    pub lags: LagConfig,
    pub channels: Vec<String>,
    pub lambda: f64,
    pub subject: Option<String>,
    /// Number of cross-validation folds used to pick `lambda` (0 when fixed).
    pub folds: usize,
}

impl Decoder {
    pub fn lag_axis_ms(&self) -> Vec<f64> {
        self.lags.lag_axis_ms()
    }

    pub fn n_lags(&self) -> usize {
        self.weights.nrows()
    }

    /// Decoder from explicit weights, mostly for tests and imports.
    pub fn from_weights(
        weights: DMatrix<f64>,
        lags: LagConfig,
        channels: Vec<String>,
    ) -> Result<Self> {
        lags.validate()?;
        if weights.nrows() != lags.n_lags() || weights.ncols() != channels.len() {
            return Err(AadError::Schema(format!(
                "weights are {}x{}, expected {}x{}",
                weights.nrows(),
                weights.ncols(),
                lags.n_lags(),
                channels.len()
            )));
        }
        Ok(Self {
            weights,
            lags,
            channels,
            lambda: 0.0,
            subject: None,
            folds: 0,
        })
    }
}

/// Per-trial regression statistics of the backward model (attended envelope target).
pub(crate) fn backward_stats(trial: &Trial, lags: &LagConfig) -> BlockStats {
    let inputs: Vec<&[f64]> = (0..trial.eeg.n_channels())
        .map(|j| trial.eeg.channel(j))
        .collect();
    BlockStats::from_lagged(
        &inputs,
        lags.tau_min(),
        lags.tau_max(),
        Direction::Backward,
        &[trial.attended().samples()],
    )
}

/// Regularisation choice for model fitting.
#[derive(Debug, Clone, PartialEq)]
pub enum LambdaChoice {
    /// Cross-validate over the grid (relative penalties).
    Auto(Vec<f64>),
    Fixed(f64),
}

impl Default for LambdaChoice {
    fn default() -> Self {
        LambdaChoice::Auto(crate::linmodel::DEFAULT_LAMBDA_GRID.to_vec())
    }
}

/// Fit from per-trial statistics. Trials are grouped into `folds` contiguous
/// groups for lambda selection. Returns `(lambda, folds_used, weights)`.
pub(crate) fn fit_from_stats(
    stats: &[&BlockStats],
    lambda: &LambdaChoice,
    folds: usize,
) -> Result<(f64, usize, DMatrix<f64>)> {
    let first = stats.first().ok_or(AadError::Empty("no training trials"))?;
    let mut total = BlockStats::zeros(first.n_features(), first.n_outputs());
    for s in stats {
        total += s;
    }
    let (lam, used) = match lambda {
        LambdaChoice::Fixed(l) => (*l, 0),
        LambdaChoice::Auto(grid) if grid.len() == 1 => (grid[0], 0),
        LambdaChoice::Auto(grid) => {
            let k = folds.min(stats.len());
            if k < 2 {
                return Err(AadError::Config(format!(
                    "lambda selection needs at least 2 folds, got {k}"
                )));
            }
            let groups: Vec<BlockStats> = (0..k)
                .map(|f| {
                    let (lo, hi) = (f * stats.len() / k, (f + 1) * stats.len() / k);
                    let mut g = BlockStats::zeros(first.n_features(), first.n_outputs());
                    for s in &stats[lo..hi] {
                        g += s;
                    }
                    g
                })
                .collect();
            (select_from_blocks(&groups, grid)?.lambda, k)
        }
    };
    let sol = solve_normal(&total.gram, &total.xty, lam)?;
    Ok((lam, used, sol.weights))
}

pub(crate) fn check_consistent(trials: &[&Trial]) -> Result<()> {
    let first = trials.first().ok_or(AadError::Empty("no trials"))?;
    for t in trials {
        if t.eeg.channels() != first.eeg.channels() {
            return Err(AadError::Schema(format!(
                "trial {}/{} has a different channel set",
                t.meta.subject, t.meta.trial
            )));
        }
        if (t.fs() - first.fs()).abs() > 1e-9 {
            return Err(AadError::Schema(format!(
                "trial {}/{} sampled at {} Hz, expected {}",
                t.meta.subject,
                t.meta.trial,
                t.fs(),
                first.fs()
            )));
        }
    }
    Ok(())
}

pub(crate) fn reshape_weights(w: &DMatrix<f64>, n_lags: usize, n_channels: usize) -> DMatrix<f64> {
    DMatrix::from_fn(n_lags, n_channels, |l, n| w[(n * n_lags + l, 0)])
}

/// Train a backward decoder on the concatenation of `trials`, targeting the
/// attended envelope.
pub fn train_decoder(
    trials: &[Trial],
    lags: &LagConfig,
    lambda_grid: &[f64],
    folds: usize,
) -> Result<Decoder> {
    let refs: Vec<&Trial> = trials.iter().collect();
    train_decoder_refs(&refs, lags, &LambdaChoice::Auto(lambda_grid.to_vec()), folds)
}

pub(crate) fn train_decoder_refs(
    trials: &[&Trial],
    lags: &LagConfig,
    lambda: &LambdaChoice,
    folds: usize,
) -> Result<Decoder> {
    if trials.len() < 2 {
        return Err(AadError::Config(format!(
            "decoder training needs at least 2 trials, got {}",
            trials.len()
        )));
    }
    check_consistent(trials)?;
    lags.validate()?;
    lags.check_rate(trials[0].fs())?;
    let stats: Vec<BlockStats> = trials.iter().map(|t| backward_stats(t, lags)).collect();
    let refs: Vec<&BlockStats> = stats.iter().collect();
    fit_decoder(trials, &refs, lags, lambda, folds)
}

/// Fit a decoder from training trials and their precomputed statistics.
///
/// With a single training trial and a lambda grid, the penalty is chosen by
/// contiguous k-fold cross-validation within that trial.
pub(crate) fn fit_decoder(
    trials: &[&Trial],
    stats: &[&BlockStats],
    lags: &LagConfig,
    lambda: &LambdaChoice,
    folds: usize,
) -> Result<Decoder> {
    let first = trials.first().ok_or(AadError::Empty("no training trials"))?;
    let (lam, used, w) = match lambda {
        LambdaChoice::Auto(grid) if trials.len() == 1 && grid.len() > 1 => {
            let x = build_lag_matrix(&first.eeg, lags, Direction::Backward)?;
            let y = DMatrix::from_column_slice(first.n_samples(), 1, first.attended().samples());
            let k = folds.max(2);
            let sel = select_lambda(&x, &y, grid, k)?;
            let sol = solve_normal(&stats[0].gram, &stats[0].xty, sel.lambda)?;
            (sel.lambda, k, sol.weights)
        }
        _ => fit_from_stats(stats, lambda, folds)?,
    };
    let channels = first.eeg.channels().to_vec();
    let subject = trials
        .iter()
        .all(|t| t.meta.subject == first.meta.subject)
        .then(|| first.meta.subject.clone());
    Ok(Decoder {
        weights: reshape_weights(&w, lags.n_lags(), channels.len()),
        lags: *lags,
        channels,
        lambda: lam,
        subject,
        folds: used,
    })
}

/// Stimulus reconstruction `s(t) = sum_n sum_tau r(t + tau, n) g(tau, n)`,
/// with EEG outside the recording taken as zero.
pub fn reconstruct(decoder: &Decoder, eeg: &MultiSeries) -> Result<MonoSeries> {
    if decoder.channels.as_slice() != eeg.channels() {
        return Err(AadError::Schema(format!(
            "decoder channels [{}] do not match EEG channels [{}]",
            decoder.channels.join(","),
            eeg.channels().join(",")
        )));
    }
    decoder.lags.check_rate(eeg.fs())?;
    let t = eeg.n_samples() as isize;
    let mut out = vec![0.0; t as usize];
    for n in 0..eeg.n_channels() {
        let x = eeg.channel(n);
        for (l, tau) in decoder.lags.taus().enumerate() {
            let g = decoder.weights[(l, n)];
            if g == 0.0 {
                continue;
            }
            let lo = (-tau).max(0);
            let hi = (t - tau).min(t);
            for row in lo..hi {
                out[row as usize] += g * x[(row + tau) as usize];
            }
        }
    }
    MonoSeries::new(out, eeg.fs())
}
