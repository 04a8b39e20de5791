//! Forward models: channel-specific temporal response functions.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::decoder::{pearson_slices, LambdaChoice, Trial, N_CANDIDATES};
use crate::error::{AadError, Result};
use crate::linmodel::{
    build_lag_matrix, select_lambda, solve_normal, BlockStats, Direction, LagConfig,
};
use crate::signal::{MonoSeries, MultiSeries};

/// Lag window (ms) over which the peak response is measured.
pub const PEAK_WINDOW_MS: (f64, f64) = (50.0, 300.0);

/// Folds used when a TRF penalty is cross-validated within one trial.
const TRF_FOLDS: usize = 5;

/// Forward filter `w(tau, n)` predicting each EEG channel from an envelope.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trf {
    /// `n_lags x n_channels`.
    pub weights: DMatrix<f64>,
    pub lag_axis_ms: Vec<f64>,
    pub channels: Vec<String>,
    pub lambda: f64,
    pub lags: LagConfig,
}

impl Trf {
    pub fn n_lags(&self) -> usize {
        self.weights.nrows()
    }

    pub fn n_channels(&self) -> usize {
        self.weights.ncols()
    }

    /// Largest absolute weight at lags inside `[lo_ms, hi_ms]`, over all channels.
    pub fn peak_abs_in(&self, lo_ms: f64, hi_ms: f64) -> f64 {
        self.lag_axis_ms
            .iter()
            .enumerate()
            .filter(|(_, &ms)| ms >= lo_ms && ms <= hi_ms)
            .flat_map(|(l, _)| self.weights.row(l).iter().map(|w| w.abs()).collect::<Vec<_>>())
            .fold(0.0, f64::max)
    }

    pub fn peak_abs(&self) -> f64 {
        self.peak_abs_in(PEAK_WINDOW_MS.0, PEAK_WINDOW_MS.1)
    }

    fn same_axes(&self, other: &Trf) -> bool {
        self.lag_axis_ms == other.lag_axis_ms && self.channels == other.channels
    }
}

fn check_pair(envelope: &MonoSeries, eeg: &MultiSeries) -> Result<()> {
    if (envelope.fs() - eeg.fs()).abs() > 1e-9 {
        return Err(AadError::Schema(format!(
            "envelope at {} Hz, EEG at {} Hz",
            envelope.fs(),
            eeg.fs()
        )));
    }
    if envelope.len() != eeg.n_samples() {
        return Err(AadError::Schema(format!(
            "envelope has {} samples, EEG has {}",
            envelope.len(),
            eeg.n_samples()
        )));
    }
    Ok(())
}

fn forward_stats(envelope: &MonoSeries, eeg: &MultiSeries, lags: &LagConfig) -> BlockStats {
    let targets: Vec<&[f64]> = (0..eeg.n_channels()).map(|j| eeg.channel(j)).collect();
    BlockStats::from_lagged(
        &[envelope.samples()],
        lags.tau_min(),
        lags.tau_max(),
        Direction::Forward,
        &targets,
    )
}

fn trf_from(weights: DMatrix<f64>, eeg: &MultiSeries, lags: &LagConfig, lambda: f64) -> Trf {
    Trf {
        weights,
        lag_axis_ms: lags.lag_axis_ms(),
        channels: eeg.channels().to_vec(),
        lambda,
        lags: *lags,
    }
}

/// Ridge estimate of the forward filter mapping `envelope` to every EEG channel.
pub fn estimate_trf(
    envelope: &MonoSeries,
    eeg: &MultiSeries,
    lags: &LagConfig,
    lambda: f64,
) -> Result<Trf> {
    check_pair(envelope, eeg)?;
    lags.validate()?;
    lags.check_rate(eeg.fs())?;
    let stats = forward_stats(envelope, eeg, lags);
    let sol = solve_normal(&stats.gram, &stats.xty, lambda)?;
    Ok(trf_from(sol.weights, eeg, lags, lambda))
}

/// Joint ridge estimate over several envelopes driving the same EEG; one
/// [`Trf`] per envelope, in input order, sharing one penalty.
pub fn estimate_joint_trfs(
    envelopes: &[&MonoSeries],
    eeg: &MultiSeries,
    lags: &LagConfig,
    lambda: f64,
) -> Result<Vec<Trf>> {
    if envelopes.is_empty() {
        return Err(AadError::Schema("no envelopes".into()));
    }
    for env in envelopes {
        check_pair(env, eeg)?;
    }
    lags.validate()?;
    lags.check_rate(eeg.fs())?;
    let inputs: Vec<&[f64]> = envelopes.iter().map(|e| e.samples()).collect();
    let targets: Vec<&[f64]> = (0..eeg.n_channels()).map(|j| eeg.channel(j)).collect();
    let stats = BlockStats::from_lagged(&inputs, lags.tau_min(), lags.tau_max(), Direction::Forward, &targets);
    let sol = solve_normal(&stats.gram, &stats.xty, lambda)?;
    let n_lags = lags.n_lags();
    Ok((0..envelopes.len())
        .map(|k| trf_from(sol.weights.rows(k * n_lags, n_lags).into_owned(), eeg, lags, lambda))
        .collect())
}

/// Penalty for `envelope -> eeg` chosen by contiguous cross-validation within the trial.
pub fn select_trf_lambda(
    envelope: &MonoSeries,
    eeg: &MultiSeries,
    lags: &LagConfig,
    grid: &[f64],
) -> Result<f64> {
    check_pair(envelope, eeg)?;
    let x = build_lag_matrix(envelope, lags, Direction::Forward)?;
    let y = eeg.samples().clone();
    Ok(select_lambda(&x, &y, grid, TRF_FOLDS)?.lambda)
}

/// Predicted EEG `sum_tau w(tau, n) s(t - tau)` with zero-padded edges, plus
/// the per-channel correlation with `observed` when given.
pub fn predict_response(
    trf: &Trf,
    envelope: &MonoSeries,
    observed: Option<&MultiSeries>,
) -> Result<(MultiSeries, Option<Vec<f64>>)> {
    trf.lags.check_rate(envelope.fs())?;
    let s = envelope.samples();
    let t = s.len() as isize;
    let mut pred = DMatrix::zeros(s.len(), trf.n_channels());
    for n in 0..trf.n_channels() {
        let mut col = pred.column_mut(n);
        for (l, tau) in trf.lags.taus().enumerate() {
            let w = trf.weights[(l, n)];
            if w == 0.0 {
                continue;
            }
            for row in tau.max(0)..(t + tau).min(t) {
                col[row as usize] += w * s[(row - tau) as usize];
            }
        }
    }
    let pred = MultiSeries::new(pred, envelope.fs(), trf.channels.clone())?;
    let scores = match observed {
        None => None,
        Some(obs) => {
            check_pair(envelope, obs)?;
            if obs.channels() != trf.channels.as_slice() {
                return Err(AadError::Schema("observed EEG channels differ from the TRF".into()));
            }
            Some(
                (0..obs.n_channels())
                    .map(|n| pearson_slices(pred.channel(n), obs.channel(n)).unwrap_or(f64::NAN))
                    .collect(),
            )
        }
    };
    Ok((pred, scores))
}

/// The four per-stream TRFs of one trial, all fitted with the same penalty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StreamTrfs {
    pub subject: String,
    pub trial: String,
    pub attended_index: usize,
    pub trfs: Vec<Trf>,
}

/// Fit one TRF per candidate stream. With an automatic penalty the grid is
/// searched on the attended stream and the result reused for the others.
pub fn estimate_stream_trfs(trial: &Trial, lags: &LagConfig, lambda: &LambdaChoice) -> Result<StreamTrfs> {
    let lam = match lambda {
        LambdaChoice::Fixed(l) => *l,
        LambdaChoice::Auto(grid) if grid.len() == 1 => grid[0],
        LambdaChoice::Auto(grid) => select_trf_lambda(trial.attended(), &trial.eeg, lags, grid)?,
    };
    let trfs = trial
        .candidates
        .iter()
        .map(|c| estimate_trf(c, &trial.eeg, lags, lam))
        .collect::<Result<_>>()?;
    Ok(StreamTrfs {
        subject: trial.meta.subject.clone(),
        trial: trial.meta.trial.clone(),
        attended_index: trial.attended_index,
        trfs,
    })
}

/// Per-stream TRFs for many trials, in input order.
pub fn estimate_all_stream_trfs(
    trials: &[Trial],
    lags: &LagConfig,
    lambda: &LambdaChoice,
) -> Result<Vec<StreamTrfs>> {
    trials
        .par_iter()
        .map(|t| estimate_stream_trfs(t, lags, lambda))
        .collect()
}

/// Grand-average attended and unattended responses.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrfContrast {
    pub attended: Trf,
    /// Mean of the three unattended streams, averaged over trials.
    pub unattended: Trf,
    /// Unattended streams in their order of appearance after removing the attended one.
    pub per_stream_unattended: Vec<Trf>,
    pub attended_peak: f64,
    pub unattended_peak: f64,
    pub n_trials: usize,
}

fn mean_trf(trfs: &[&Trf]) -> Trf {
    let mut acc = DMatrix::zeros(trfs[0].n_lags(), trfs[0].n_channels());
    for t in trfs {
        acc += &t.weights;
    }
    acc /= trfs.len() as f64;
    Trf {
        weights: acc,
        ..trfs[0].clone()
    }
}

/// Attended versus unattended grand averages and their peak amplitudes.
pub fn contrast_trfs(sets: &[StreamTrfs]) -> Result<TrfContrast> {
    let first = sets
        .first()
        .and_then(|s| s.trfs.first())
        .ok_or(AadError::Empty("no TRFs to contrast"))?;
    for s in sets {
        if s.trfs.len() != N_CANDIDATES || s.attended_index >= N_CANDIDATES {
            return Err(AadError::Schema(format!(
                "trial {} has {} stream TRFs",
                s.trial,
                s.trfs.len()
            )));
        }
        if let Some(bad) = s.trfs.iter().find(|t| !t.same_axes(first)) {
            return Err(AadError::Schema(format!(
                "trial {} has TRFs on different lags or channels ({} lags)",
                s.trial,
                bad.n_lags()
            )));
        }
    }
    let attended: Vec<&Trf> = sets.iter().map(|s| &s.trfs[s.attended_index]).collect();
    fn unattended_of(s: &StreamTrfs) -> Vec<&Trf> {
        (0..N_CANDIDATES)
            .filter(|&k| k != s.attended_index)
            .map(|k| &s.trfs[k])
            .collect()
    }
    let per_trial_unattended: Vec<Trf> = sets.iter().map(|s| mean_trf(&unattended_of(s))).collect();
    let per_stream_unattended: Vec<Trf> = (0..N_CANDIDATES - 1)
        .map(|i| mean_trf(&sets.iter().map(|s| unattended_of(s)[i]).collect::<Vec<_>>()))
        .collect();
    let attended = mean_trf(&attended);
    let unattended = mean_trf(&per_trial_unattended.iter().collect::<Vec<_>>());
    Ok(TrfContrast {
        attended_peak: attended.peak_abs(),
        unattended_peak: unattended.peak_abs(),
        attended,
        unattended,
        per_stream_unattended,
        n_trials: sets.len(),
    })
}
