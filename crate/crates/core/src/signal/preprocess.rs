use serde::{Deserialize, Serialize};

use super::{
    baseline_correct, common_average_reference, design_bandpass, filtfilt, hilbert_envelope,
    power_law, resample, BandpassSpec, MonoSeries, MultiSeries,
};
use crate::error::{AadError, Result};

/// EEG chain: optional CAR, zero-phase band-pass, whole-trial demeaning, resampling.
pub fn preprocess_chain(
    eeg: &MultiSeries,
    band: &BandpassSpec,
    target_fs: f64,
    car: bool,
) -> Result<MultiSeries> {
    if eeg.n_channels() == 0 {
        return Err(AadError::Empty("recording has no channels"));
    }
    let referenced = if car {
        common_average_reference(eeg)?
    } else {
        eeg.clone()
    };
    let coeffs = design_bandpass(band, eeg.fs())?;
    let filtered = filtfilt(&referenced, &coeffs)?;
    let demeaned = baseline_correct(&filtered)?;
    resample(&demeaned, target_fs)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeOptions {
    /// Take the analytic-signal magnitude first (input is audio, not an envelope).
    pub extract: bool,
    /// Power-law compression applied to the envelope.
    pub exponent: f64,
}

impl Default for EnvelopeOptions {
    fn default() -> Self {
        Self {
            extract: true,
            exponent: 1.0,
        }
    }
}

/// Envelope chain: analytic magnitude (optional), compression, band-pass, resampling.
pub fn preprocess_envelope(
    signal: &MonoSeries,
    band: &BandpassSpec,
    target_fs: f64,
    opts: &EnvelopeOptions,
) -> Result<MonoSeries> {
    let env = if opts.extract {
        hilbert_envelope(signal)?
    } else {
        signal.clone()
    };
    let env = power_law(&env, opts.exponent)?;
    let coeffs = design_bandpass(band, env.fs())?;
    let filtered = filtfilt(&env, &coeffs)?;
    resample(&filtered, target_fs)
}
