//! Leave-one-trial-out accuracy over decision windows of several lengths.

use std::borrow::Cow;
use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::classify::{argmax_first, pearson_slices};
use super::model::{backward_stats, check_consistent, fit_decoder, LambdaChoice};
use super::{binomial_significance, reconstruct, Decoder, Trial, CHANCE_LEVEL, N_CANDIDATES};
use crate::error::{AadError, Result};
use crate::layout::{select_layout, Layout};
use crate::linmodel::{BlockStats, LagConfig};

/// Decision-window lengths in seconds.
pub const DEFAULT_WINDOWS_S: [f64; 7] = [1.0, 2.0, 5.0, 10.0, 20.0, 30.0, 60.0];

/// Which trials a decoder is trained on.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DecoderScope {
    /// The held-out trial's subject only.
    #[default]
    Subject,
    /// Every other trial of every subject.
    Population,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvaluateConfig {
    pub lag_min_ms: f64,
    pub lag_max_ms: f64,
    pub lambda: LambdaChoice,
    /// Folds for the inner lambda search.
    pub inner_folds: usize,
    pub window_lengths_s: Vec<f64>,
    pub layout: Option<Layout>,
    pub scope: DecoderScope,
}

impl Default for EvaluateConfig {
    fn default() -> Self {
        Self {
            lag_min_ms: -50.0,
            lag_max_ms: 450.0,
            lambda: LambdaChoice::default(),
            inner_folds: 5,
            window_lengths_s: DEFAULT_WINDOWS_S.to_vec(),
            layout: None,
            scope: DecoderScope::Subject,
        }
    }
}

/// Tally for one (subject, held-out trial, window length).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AccuracyRow {
    pub subject: String,
    /// Index of the held-out trial within its subject.
    pub fold: usize,
    pub window_s: f64,
    /// Windows that were scored.
    pub n_windows: usize,
    pub n_correct: usize,
    /// Windows whose reconstruction or a candidate was constant.
    pub skipped_windows: usize,
}

impl AccuracyRow {
    pub fn accuracy(&self) -> f64 {
        if self.n_windows == 0 {
            f64::NAN
        } else {
            self.n_correct as f64 / self.n_windows as f64
        }
    }
}

/// Across-subject summary for one window length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowSummary {
    pub window_s: f64,
    pub n_subjects: usize,
    pub mean_accuracy: f64,
    /// Sample standard deviation of per-subject accuracy (0 for one subject).
    pub sd_accuracy: f64,
    pub n_windows: usize,
    pub n_correct: usize,
    pub skipped_windows: usize,
    /// One-sided binomial p-value of the pooled count against chance.
    pub p_value: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AccuracyTable {
    pub rows: Vec<AccuracyRow>,
}

impl AccuracyTable {
    pub fn window_lengths(&self) -> Vec<f64> {
        let mut w: Vec<f64> = self.rows.iter().map(|r| r.window_s).collect();
        w.sort_by(f64::total_cmp);
        w.dedup();
        w
    }

    /// Per-window-length mean and SD of subject accuracies, with pooled significance.
    pub fn summary(&self) -> Result<Vec<WindowSummary>> {
        self.window_lengths()
            .into_iter()
            .map(|window_s| {
                let mut per_subject: BTreeMap<&str, (usize, usize)> = BTreeMap::new();
                let (mut n_windows, mut n_correct, mut skipped) = (0, 0, 0);
                for r in self.rows.iter().filter(|r| r.window_s == window_s) {
                    let e = per_subject.entry(&r.subject).or_default();
                    e.0 += r.n_correct;
                    e.1 += r.n_windows;
                    n_windows += r.n_windows;
                    n_correct += r.n_correct;
                    skipped += r.skipped_windows;
                }
                let accs: Vec<f64> = per_subject
                    .values()
                    .filter(|(_, n)| *n > 0)
                    .map(|(c, n)| *c as f64 / *n as f64)
                    .collect();
                let m = accs.len();
                let mean = if m == 0 {
                    f64::NAN
                } else {
                    accs.iter().sum::<f64>() / m as f64
                };
                let sd = if m < 2 {
                    0.0
                } else {
                    (accs.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / (m - 1) as f64).sqrt()
                };
                Ok(WindowSummary {
                    window_s,
                    n_subjects: m,
                    mean_accuracy: mean,
                    sd_accuracy: sd,
                    n_windows,
                    n_correct,
                    skipped_windows: skipped,
                    p_value: binomial_significance(
                        n_correct as u64,
                        n_windows as u64,
                        CHANCE_LEVEL,
                    )?,
                })
            })
            .collect()
    }

    /// Pooled accuracy over all subjects and folds at one window length.
    pub fn pooled_accuracy(&self, window_s: f64) -> f64 {
        let (c, n) = self
            .rows
            .iter()
            .filter(|r| r.window_s == window_s)
            .fold((0, 0), |(c, n), r| (c + r.n_correct, n + r.n_windows));
        if n == 0 {
            f64::NAN
        } else {
            c as f64 / n as f64
        }
    }
}

enum WindowOutcome {
    Correct,
    Wrong,
    Skipped,
}

fn score_window(decoder: &Decoder, trial: &Trial, start: usize, end: usize) -> Result<WindowOutcome> {
    let recon = reconstruct(decoder, &trial.eeg.slice(start, end)?)?;
    let mut scores = [0.0; N_CANDIDATES];
    for (k, cand) in trial.candidates.iter().enumerate() {
        match pearson_slices(recon.samples(), &cand.samples()[start..end]) {
            Ok(r) => scores[k] = r,
            Err(AadError::UndefinedCorrelation(_)) => return Ok(WindowOutcome::Skipped),
            Err(e) => return Err(e),
        }
    }
    Ok(if argmax_first(&scores) == trial.attended_index {
        WindowOutcome::Correct
    } else {
        WindowOutcome::Wrong
    })
}

fn tally(
    decoder: &Decoder,
    trial: &Trial,
    fold: usize,
    windows: &[(f64, usize)],
) -> Result<Vec<AccuracyRow>> {
    windows
        .iter()
        .map(|&(window_s, len)| {
            let mut row = AccuracyRow {
                subject: trial.meta.subject.clone(),
                fold,
                window_s,
                n_windows: 0,
                n_correct: 0,
                skipped_windows: 0,
            };
            for w in 0..trial.n_samples() / len {
                match score_window(decoder, trial, w * len, (w + 1) * len)? {
                    WindowOutcome::Correct => {
                        row.n_windows += 1;
                        row.n_correct += 1;
                    }
                    WindowOutcome::Wrong => row.n_windows += 1,
                    WindowOutcome::Skipped => row.skipped_windows += 1,
                }
            }
            Ok(row)
        })
        .collect()
}

/// Leave-one-trial-out evaluation.
///
/// For every held-out trial a decoder is trained on the remaining trials
/// (same subject, or all subjects in population scope) after channel
/// selection, the held-out trial is cut into non-overlapping windows of each
/// length (a trailing partial window is dropped) and every window is
/// classified. The held-out trial never contributes to training or to the
/// lambda search.
pub fn evaluate(trials: &[Trial], cfg: &EvaluateConfig) -> Result<AccuracyTable> {
    if trials.is_empty() {
        return Err(AadError::Empty("no trials to evaluate"));
    }
    if cfg.window_lengths_s.is_empty() {
        return Err(AadError::Config("no decision window lengths".into()));
    }
    let trials: Cow<[Trial]> = match &cfg.layout {
        Some(layout) => Cow::Owned(
            trials
                .iter()
                .map(|t| t.with_eeg(select_layout(&t.eeg, layout)?))
                .collect::<Result<_>>()?,
        ),
        None => Cow::Borrowed(trials),
    };
    let refs: Vec<&Trial> = trials.iter().collect();
    check_consistent(&refs)?;
    let fs = refs[0].fs();
    let lags = LagConfig::new(cfg.lag_min_ms, cfg.lag_max_ms, fs)?;

    let shortest = refs.iter().map(|t| t.n_samples()).min().unwrap_or(0);
    let windows: Vec<(f64, usize)> = cfg
        .window_lengths_s
        .iter()
        .map(|&w| {
            let len = (w * fs).round() as usize;
            if !(w >= 1.0) {
                Err(AadError::Config(format!("window length {w} s is below 1 s")))
            } else if len > shortest {
                Err(AadError::Config(format!(
                    "window length {w} s exceeds the shortest trial ({:.1} s)",
                    shortest as f64 / fs
                )))
            } else {
                Ok((w, len))
            }
        })
        .collect::<Result<_>>()?;

    let mut by_subject: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, t) in refs.iter().enumerate() {
        by_subject.entry(&t.meta.subject).or_default().push(i);
    }
    if cfg.scope == DecoderScope::Subject {
        if let Some((s, _)) = by_subject.iter().find(|(_, v)| v.len() < 2) {
            return Err(AadError::Config(format!(
                "subject {s} has fewer than 2 trials; leave-one-trial-out needs at least 2"
            )));
        }
    } else if refs.len() < 2 {
        return Err(AadError::Config("population decoding needs at least 2 trials".into()));
    }

    let stats: Vec<BlockStats> = refs.par_iter().map(|t| backward_stats(t, &lags)).collect();

    // (held-out trial, fold index within subject, training trial indices)
    let folds: Vec<(usize, usize, Vec<usize>)> = by_subject
        .values()
        .flat_map(|members| {
            members.iter().enumerate().map(|(fold, &held)| {
                let pool: Vec<usize> = match cfg.scope {
                    DecoderScope::Subject => members.clone(),
                    DecoderScope::Population => (0..refs.len()).collect(),
                };
                (held, fold, pool.into_iter().filter(|&i| i != held).collect())
            })
        })
        .collect();

    let per_fold: Vec<Vec<AccuracyRow>> = folds
        .par_iter()
        .map(|(held, fold, train)| {
            let train_trials: Vec<&Trial> = train.iter().map(|&i| refs[i]).collect();
            let train_stats: Vec<&BlockStats> = train.iter().map(|&i| &stats[i]).collect();
            let decoder = fit_decoder(&train_trials, &train_stats, &lags, &cfg.lambda, cfg.inner_folds)?;
            tally(&decoder, refs[*held], *fold, &windows)
        })
        .collect::<Result<_>>()?;

    let mut rows: Vec<AccuracyRow> = per_fold.into_iter().flatten().collect();
    rows.sort_by(|a, b| {
        a.subject
            .cmp(&b.subject)
            .then(a.fold.cmp(&b.fold))
            .then(a.window_s.total_cmp(&b.window_s))
    });
    Ok(AccuracyTable { rows })
}
