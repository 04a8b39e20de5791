use serde::{Deserialize, Serialize};

use crate::decoder::{AccuracyTable, WindowSummary, CHANCE_LEVEL};
use crate::error::{AadError, Result};
use crate::trf::{Trf, TrfContrast};

pub const RESULTS_HEADER: [&str; 7] = [
    "subject",
    "fold",
    "window_s",
    "n_windows",
    "n_correct",
    "accuracy",
    "skipped_windows",
];

fn csv_err(e: impl std::fmt::Display) -> AadError {
    AadError::Config(format!("csv encoding failed: {e}"))
}

/// Accuracy table as CSV text, one row per (subject, fold, window length).
pub fn results_csv(table: &AccuracyTable) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(RESULTS_HEADER).map_err(csv_err)?;
    for r in &table.rows {
        w.write_record([
            r.subject.clone(),
            r.fold.to_string(),
            r.window_s.to_string(),
            r.n_windows.to_string(),
            r.n_correct.to_string(),
            r.accuracy().to_string(),
            r.skipped_windows.to_string(),
        ])
        .map_err(csv_err)?;
    }
    String::from_utf8(w.into_inner().map_err(csv_err)?).map_err(csv_err)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub chance_level: f64,
    pub n_rows: usize,
    pub windows: Vec<WindowSummary>,
}

/// Per-window-length summary as pretty JSON. Undefined means serialise as `null`.
pub fn summary_json(table: &AccuracyTable) -> Result<String> {
    let summary = Summary {
        chance_level: CHANCE_LEVEL,
        n_rows: table.rows.len(),
        windows: table.summary()?,
    };
    let mut s = serde_json::to_string_pretty(&summary)
        .map_err(|e| AadError::Config(format!("summary encoding failed: {e}")))?;
    s.push('\n');
    Ok(s)
}

/// Plain JSON form of a TRF: weights as rows per lag.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrfExport {
    pub lag_axis_ms: Vec<f64>,
    pub channels: Vec<String>,
    pub lambda: f64,
    /// `weights[lag][channel]`.
    pub weights: Vec<Vec<f64>>,
}

impl From<&Trf> for TrfExport {
    fn from(t: &Trf) -> Self {
        Self {
            lag_axis_ms: t.lag_axis_ms.clone(),
            channels: t.channels.clone(),
            lambda: t.lambda,
            weights: t.weights.row_iter().map(|r| r.iter().copied().collect()).collect(),
        }
    }
}

#[derive(Serialize)]
struct ContrastExport {
    n_trials: usize,
    attended_peak: f64,
    unattended_peak: f64,
    peak_window_ms: [f64; 2],
    attended: TrfExport,
    unattended: TrfExport,
    per_stream_unattended: Vec<TrfExport>,
}

pub fn trf_contrast_json(c: &TrfContrast) -> Result<String> {
    let e = ContrastExport {
        n_trials: c.n_trials,
        attended_peak: c.attended_peak,
        unattended_peak: c.unattended_peak,
        peak_window_ms: [crate::trf::PEAK_WINDOW_MS.0, crate::trf::PEAK_WINDOW_MS.1],
        attended: (&c.attended).into(),
        unattended: (&c.unattended).into(),
        per_stream_unattended: c.per_stream_unattended.iter().map(Into::into).collect(),
    };
    let mut s = serde_json::to_string_pretty(&e)
        .map_err(|e| AadError::Config(format!("TRF encoding failed: {e}")))?;
    s.push('\n');
    Ok(s)
}

/// Long-format CSV `condition,lag_ms,<channels...>` for plotting.
pub fn trf_contrast_csv(c: &TrfContrast) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["condition".to_string(), "lag_ms".to_string()];
    header.extend(c.attended.channels.iter().cloned());
    w.write_record(&header).map_err(csv_err)?;
    let mut rows = vec![("attended".to_string(), &c.attended), ("unattended".to_string(), &c.unattended)];
    for (i, t) in c.per_stream_unattended.iter().enumerate() {
        rows.push((format!("unattended_{}", i + 1), t));
    }
    for (name, t) in rows {
        for (l, ms) in t.lag_axis_ms.iter().enumerate() {
            let mut rec = vec![name.clone(), ms.to_string()];
            rec.extend(t.weights.row(l).iter().map(|v| v.to_string()));
            w.write_record(&rec).map_err(csv_err)?;
        }
    }
    String::from_utf8(w.into_inner().map_err(csv_err)?).map_err(csv_err)
}
