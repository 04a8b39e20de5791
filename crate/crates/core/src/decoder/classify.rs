use super::{reconstruct, Decoder, Trial, N_CANDIDATES};
use crate::error::{AadError, Result};
use crate::signal::MonoSeries;

fn is_constant(m2: f64, n: usize, max_abs: f64) -> bool {
    m2 <= n as f64 * (1e-13 * max_abs).powi(2)
}

/// Sample Pearson correlation, accumulated in one pass with centred co-moments.
pub fn pearson_slices(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(AadError::Config(format!(
            "correlation of series with {} and {} samples",
            a.len(),
            b.len()
        )));
    }
    if a.len() < 2 {
        return Err(AadError::Length {
            required: 1,
            actual: a.len(),
        });
    }
    let (mut ma, mut mb) = (0.0, 0.0);
    let (mut saa, mut sbb, mut sab) = (0.0, 0.0, 0.0);
    let (mut amax, mut bmax) = (0.0f64, 0.0f64);
    for (i, (&x, &y)) in a.iter().zip(b).enumerate() {
        let k = (i + 1) as f64;
        let dx = x - ma;
        let dy = y - mb;
        ma += dx / k;
        mb += dy / k;
        saa += dx * (x - ma);
        sbb += dy * (y - mb);
        sab += dx * (y - mb);
        amax = amax.max(x.abs());
        bmax = bmax.max(y.abs());
    }
    if is_constant(saa, a.len(), amax) {
        return Err(AadError::UndefinedCorrelation("first"));
    }
    if is_constant(sbb, b.len(), bmax) {
        return Err(AadError::UndefinedCorrelation("second"));
    }
    Ok((sab / (saa * sbb).sqrt()).clamp(-1.0, 1.0))
}

/// Pearson correlation of two series of equal length.
pub fn pearson(a: &MonoSeries, b: &MonoSeries) -> Result<f64> {
    pearson_slices(a.samples(), b.samples())
}

/// Outcome of one decision window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WindowDecision {
    pub chosen: usize,
    pub scores: [f64; N_CANDIDATES],
}

/// Index of the largest score; the lowest index wins ties.
pub fn argmax_first(scores: &[f64]) -> usize {
    let mut best = 0;
    for (k, &s) in scores.iter().enumerate().skip(1) {
        if s > scores[best] {
            best = k;
        }
    }
    best
}

pub(crate) fn window_bounds(fs: f64, len: usize, start_s: f64, length_s: f64) -> Result<(usize, usize)> {
    if !(length_s >= 1.0) {
        return Err(AadError::Config(format!(
            "decision windows must be at least 1 s, got {length_s}"
        )));
    }
    if !(start_s >= 0.0) {
        return Err(AadError::Config(format!("window start {start_s} is negative")));
    }
    let start = (start_s * fs).round() as usize;
    let end = start + (length_s * fs).round() as usize;
    if end > len {
        return Err(AadError::Range { start, end, len });
    }
    Ok((start, end))
}

/// Correlate the reconstruction of one window with every candidate envelope
/// and pick the best-matching talker.
pub fn classify_window(
    decoder: &Decoder,
    trial: &Trial,
    start_s: f64,
    length_s: f64,
) -> Result<WindowDecision> {
    let (start, end) = window_bounds(trial.fs(), trial.n_samples(), start_s, length_s)?;
    let eeg = trial.eeg.slice(start, end)?;
    let recon = reconstruct(decoder, &eeg)?;
    let mut scores = [0.0; N_CANDIDATES];
    for (k, cand) in trial.candidates.iter().enumerate() {
        scores[k] = pearson_slices(recon.samples(), &cand.samples()[start..end])?;
    }
    Ok(WindowDecision {
        chosen: argmax_first(&scores),
        scores,
    })
}
