//! Lagged design matrices and ridge-regularised least squares.
//!
//! Both the forward model (envelope -> EEG) and the backward model
//! (EEG -> envelope) are linear regressions on time-shifted copies of the
//! input. The forward convention places `x(t - tau)` in row `t`; the backward
//! convention places `x(t + tau)`. Samples shifted past either end are zero.
//!
//! Columns are ordered channel-major, lag-minor: column `j * n_lags + (tau - tau_min)`
//! holds input `j` at lag `tau`.

mod ridge;
mod select;
mod stats;

pub use ridge::{ridge_solve, RidgeSolution};
pub use select::{select_lambda, LambdaSelection};
pub use stats::BlockStats;

pub(crate) use ridge::solve_normal;
pub(crate) use select::select_from_blocks;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{AadError, Result};
use crate::signal::{MonoSeries, MultiSeries};

/// Default regularisation grid, relative to the mean Gram diagonal.
pub const DEFAULT_LAMBDA_GRID: [f64; 7] = [1e-6, 1e-4, 1e-2, 1.0, 1e2, 1e4, 1e6];

/// Lag window in milliseconds at a given sampling rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LagConfig {
    pub lag_min_ms: f64,
    pub lag_max_ms: f64,
    pub fs: f64,
}

impl LagConfig {
    pub fn new(lag_min_ms: f64, lag_max_ms: f64, fs: f64) -> Result<Self> {
        let cfg = Self {
            lag_min_ms,
            lag_max_ms,
            fs,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// -50 .. 450 ms.
    pub fn default_at(fs: f64) -> Self {
        Self {
            lag_min_ms: -50.0,
            lag_max_ms: 450.0,
            fs,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lag_min_ms.is_finite() && self.lag_max_ms.is_finite()) {
            return Err(AadError::Config("lag bounds must be finite".into()));
        }
        if self.lag_min_ms >= self.lag_max_ms {
            return Err(AadError::Config(format!(
                "lag_min_ms ({}) must be below lag_max_ms ({})",
                self.lag_min_ms, self.lag_max_ms
            )));
        }
        if !(self.fs.is_finite() && self.fs > 0.0) {
            return Err(AadError::Config(format!("invalid lag sampling rate {}", self.fs)));
        }
        Ok(())
    }

    pub fn tau_min(&self) -> isize {
        (self.lag_min_ms * self.fs / 1000.0).round() as isize
    }

    pub fn tau_max(&self) -> isize {
        (self.lag_max_ms * self.fs / 1000.0).round() as isize
    }

    pub fn n_lags(&self) -> usize {
        (self.tau_max() - self.tau_min() + 1) as usize
    }

    pub fn taus(&self) -> impl Iterator<Item = isize> {
        self.tau_min()..=self.tau_max()
    }

    pub fn lag_axis_ms(&self) -> Vec<f64> {
        self.taus().map(|t| t as f64 * 1000.0 / self.fs).collect()
    }

    /// Same window in milliseconds, evaluated at another rate.
    pub fn at_rate(&self, fs: f64) -> Self {
        Self { fs, ..*self }
    }

    pub(crate) fn check_rate(&self, fs: f64) -> Result<()> {
        if (self.fs - fs).abs() > 1e-9 * fs.abs().max(1.0) {
            return Err(AadError::Config(format!(
                "lag config is for {} Hz but the signal is sampled at {fs} Hz",
                self.fs
            )));
        }
        Ok(())
    }
}

/// Which side of `t` the lagged samples come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// Row `t` holds `x(t - tau)`: stimulus -> response.
    Forward,
    /// Row `t` holds `x(t + tau)`: response -> stimulus.
    Backward,
}

impl Direction {
    /// Offset added to `t` to find the sample used for lag `tau`.
    pub fn shift(self, tau: isize) -> isize {
        match self {
            Direction::Forward => -tau,
            Direction::Backward => tau,
        }
    }
}

/// Anything that can feed a lagged regression: one or more equally long channels.
pub trait LagInput {
    fn fs(&self) -> f64;
    fn input_channels(&self) -> Vec<&[f64]>;
    fn input_labels(&self) -> Vec<String>;
}

impl LagInput for MonoSeries {
    fn fs(&self) -> f64 {
        MonoSeries::fs(self)
    }

    fn input_channels(&self) -> Vec<&[f64]> {
        vec![self.samples()]
    }

    fn input_labels(&self) -> Vec<String> {
        vec!["envelope".to_string()]
    }
}

impl LagInput for MultiSeries {
    fn fs(&self) -> f64 {
        MultiSeries::fs(self)
    }

    fn input_channels(&self) -> Vec<&[f64]> {
        (0..self.n_channels()).map(|j| self.channel(j)).collect()
    }

    fn input_labels(&self) -> Vec<String> {
        self.channels().to_vec()
    }
}

/// Materialised lag matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    pub values: DMatrix<f64>,
    pub tau_min: isize,
    pub tau_max: isize,
    pub direction: Direction,
    pub labels: Vec<String>,
}

impl DesignMatrix {
    pub fn n_lags(&self) -> usize {
        (self.tau_max - self.tau_min + 1) as usize
    }

    pub fn n_inputs(&self) -> usize {
        self.labels.len()
    }

    pub fn column_index(&self, input: usize, tau: isize) -> usize {
        input * self.n_lags() + (tau - self.tau_min) as usize
    }

    /// Wrap an arbitrary matrix as a single-lag design (useful for plain ridge problems).
    pub fn plain(values: DMatrix<f64>) -> Self {
        let labels = (0..values.ncols()).map(|j| format!("x{j}")).collect();
        Self {
            values,
            tau_min: 0,
            tau_max: 0,
            direction: Direction::Forward,
            labels,
        }
    }
}

pub(crate) fn lag_columns(
    inputs: &[&[f64]],
    tau_min: isize,
    tau_max: isize,
    direction: Direction,
) -> DMatrix<f64> {
    let t = inputs.first().map_or(0, |c| c.len());
    let n_lags = (tau_max - tau_min + 1) as usize;
    let mut values = DMatrix::zeros(t, n_lags * inputs.len());
    for (j, x) in inputs.iter().enumerate() {
        for (l, tau) in (tau_min..=tau_max).enumerate() {
            let s = direction.shift(tau);
            let mut col = values.column_mut(j * n_lags + l);
            let lo = (-s).max(0) as usize;
            let hi = (t as isize - s).min(t as isize).max(0) as usize;
            for row in lo..hi.max(lo) {
                col[row] = x[(row as isize + s) as usize];
            }
        }
    }
    values
}

/// Lag matrix of `x` under `direction`, zero-padded at both ends; `T` rows.
pub fn build_lag_matrix<X: LagInput>(
    x: &X,
    lags: &LagConfig,
    direction: Direction,
) -> Result<DesignMatrix> {
    lags.validate()?;
    lags.check_rate(x.fs())?;
    let inputs = x.input_channels();
    Ok(DesignMatrix {
        values: lag_columns(&inputs, lags.tau_min(), lags.tau_max(), direction),
        tau_min: lags.tau_min(),
        tau_max: lags.tau_max(),
        direction,
        labels: x.input_labels(),
    })
}
