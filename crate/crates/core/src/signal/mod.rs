//! Uniformly sampled signal containers and the EEG / envelope preprocessing chain.
//!
//! A [`MonoSeries`] holds a single stream such as a speech envelope; a
//! [`MultiSeries`] holds time-major multichannel EEG with one label per
//! column. Everything in this module is a pure function of its inputs.

mod envelope;
mod filter;
mod preprocess;
mod reference;
mod resample;

pub use envelope::{hilbert_envelope, power_law};
pub use filter::{design_bandpass, filtfilt, filtfilt_slice, BandpassSpec, Biquad, FilterCoeffs};
pub use preprocess::{preprocess_chain, preprocess_envelope, EnvelopeOptions};
pub use reference::{baseline_correct, common_average_reference};
pub use resample::{resample, resample_slice};

use std::collections::HashSet;

use nalgebra::DMatrix;

use crate::error::{AadError, Result};

fn check_fs(fs: f64) -> Result<()> {
    if fs.is_finite() && fs > 0.0 {
        Ok(())
    } else {
        Err(AadError::Config(format!("sampling rate must be positive, got {fs}")))
    }
}

/// A single uniformly sampled real-valued signal.
#[derive(Debug, Clone, PartialEq)]
pub struct MonoSeries {
    samples: Vec<f64>,
    fs: f64,
}

impl MonoSeries {
    pub fn new(samples: Vec<f64>, fs: f64) -> Result<Self> {
        check_fs(fs)?;
        if let Some(i) = samples.iter().position(|v| !v.is_finite()) {
            return Err(AadError::Data { row: i, col: 0 });
        }
        Ok(Self { samples, fs })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn fs(&self) -> f64 {
        self.fs
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_s(&self) -> f64 {
        self.samples.len() as f64 / self.fs
    }

    /// Copy of samples `[start, end)`.
    pub fn slice(&self, start: usize, end: usize) -> Result<Self> {
        if start > end || end > self.len() {
            return Err(AadError::Range {
                start,
                end,
                len: self.len(),
            });
        }
        Ok(Self {
            samples: self.samples[start..end].to_vec(),
            fs: self.fs,
        })
    }
}

/// Time-major multichannel signal: `T` rows (samples) by `N` labelled channel columns.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiSeries {
    samples: DMatrix<f64>,
    fs: f64,
    channels: Vec<String>,
}

impl MultiSeries {
    pub fn new(samples: DMatrix<f64>, fs: f64, channels: Vec<String>) -> Result<Self> {
        check_fs(fs)?;
        if samples.ncols() != channels.len() {
            return Err(AadError::Schema(format!(
                "{} columns but {} channel labels",
                samples.ncols(),
                channels.len()
            )));
        }
        let mut seen = HashSet::with_capacity(channels.len());
        for c in &channels {
            if !seen.insert(c.as_str()) {
                return Err(AadError::Schema(format!("duplicate channel label {c:?}")));
            }
        }
        for col in 0..samples.ncols() {
            if let Some(row) = samples.column(col).iter().position(|v| !v.is_finite()) {
                return Err(AadError::Data { row, col });
            }
        }
        Ok(Self {
            samples,
            fs,
            channels,
        })
    }

    /// Build from per-channel sample vectors of equal length.
    pub fn from_columns(columns: &[Vec<f64>], fs: f64, channels: Vec<String>) -> Result<Self> {
        let t = columns.first().map_or(0, Vec::len);
        if columns.iter().any(|c| c.len() != t) {
            return Err(AadError::Schema("channel columns differ in length".into()));
        }
        let m = DMatrix::from_fn(t, columns.len(), |i, j| columns[j][i]);
        Self::new(m, fs, channels)
    }

    pub fn samples(&self) -> &DMatrix<f64> {
        &self.samples
    }

    pub fn fs(&self) -> f64 {
        self.fs
    }

    pub fn channels(&self) -> &[String] {
        &self.channels
    }

    pub fn n_samples(&self) -> usize {
        self.samples.nrows()
    }

    pub fn n_channels(&self) -> usize {
        self.samples.ncols()
    }

    /// Samples of channel `j` (contiguous, since storage is column-major).
    pub fn channel(&self, j: usize) -> &[f64] {
        let t = self.samples.nrows();
        &self.samples.as_slice()[j * t..(j + 1) * t]
    }

    pub fn channel_series(&self, j: usize) -> MonoSeries {
        MonoSeries {
            samples: self.channel(j).to_vec(),
            fs: self.fs,
        }
    }

    /// Rows `[start, end)`.
    pub fn slice(&self, start: usize, end: usize) -> Result<Self> {
        if start > end || end > self.n_samples() {
            return Err(AadError::Range {
                start,
                end,
                len: self.n_samples(),
            });
        }
        Ok(Self {
            samples: self.samples.rows(start, end - start).into_owned(),
            fs: self.fs,
            channels: self.channels.clone(),
        })
    }

    /// Columns picked by index, in the given order.
    pub fn select_indices(&self, idx: &[usize]) -> Self {
        let t = self.n_samples();
        let samples = DMatrix::from_fn(t, idx.len(), |i, j| self.samples[(i, idx[j])]);
        Self {
            samples,
            fs: self.fs,
            channels: idx.iter().map(|&j| self.channels[j].clone()).collect(),
        }
    }

    pub(crate) fn with_samples(&self, samples: DMatrix<f64>, fs: f64) -> Self {
        Self {
            samples,
            fs,
            channels: self.channels.clone(),
        }
    }
}

/// Signals that can be processed channel by channel.
pub trait Channelwise: Sized {
    fn fs(&self) -> f64;
    fn n_samples(&self) -> usize;
    /// Apply `f` to each channel; `f` may change the length, which must then be
    /// the same for every channel.
    fn map_channels<F>(&self, new_fs: f64, f: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> Result<Vec<f64>>;
}

impl Channelwise for MonoSeries {
    fn fs(&self) -> f64 {
        self.fs
    }

    fn n_samples(&self) -> usize {
        self.samples.len()
    }

    fn map_channels<F>(&self, new_fs: f64, f: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> Result<Vec<f64>>,
    {
        MonoSeries::new(f(&self.samples)?, new_fs)
    }
}

impl Channelwise for MultiSeries {
    fn fs(&self) -> f64 {
        self.fs
    }

    fn n_samples(&self) -> usize {
        self.samples.nrows()
    }

    fn map_channels<F>(&self, new_fs: f64, f: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> Result<Vec<f64>>,
    {
        let cols = (0..self.n_channels())
            .map(|j| f(self.channel(j)))
            .collect::<Result<Vec<_>>>()?;
        MultiSeries::from_columns(&cols, new_fs, self.channels.clone())
    }
}
