use serde::{Deserialize, Serialize};

use crate::error::{AadError, Result};
use crate::signal::{MonoSeries, MultiSeries};

/// Number of simultaneous talkers in every trial.
pub const N_CANDIDATES: usize = 4;

/// Loudspeaker azimuths in degrees, in candidate order.
pub const AZIMUTHS_DEG: [f64; N_CANDIDATES] = [30.0, -30.0, 90.0, -90.0];

/// Guessing accuracy with four candidates.
pub const CHANCE_LEVEL: f64 = 1.0 / N_CANDIDATES as f64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialMeta {
    pub subject: String,
    pub trial: String,
    pub azimuths_deg: [f64; N_CANDIDATES],
}

/// One listening trial: EEG, the four candidate envelopes and which one was attended.
#[derive(Debug, Clone, PartialEq)]
pub struct Trial {
    pub eeg: MultiSeries,
    pub candidates: Vec<MonoSeries>,
    pub attended_index: usize,
    pub meta: TrialMeta,
}

impl Trial {
    pub fn new(
        eeg: MultiSeries,
        candidates: Vec<MonoSeries>,
        attended_index: usize,
        meta: TrialMeta,
    ) -> Result<Self> {
        if candidates.len() != N_CANDIDATES {
            return Err(AadError::Schema(format!(
                "trial {} has {} candidates, expected {N_CANDIDATES}",
                meta.trial,
                candidates.len()
            )));
        }
        if attended_index >= N_CANDIDATES {
            return Err(AadError::Schema(format!(
                "attended index {attended_index} out of range"
            )));
        }
        for (k, c) in candidates.iter().enumerate() {
            if c.len() != eeg.n_samples() {
                return Err(AadError::Schema(format!(
                    "candidate {k} of trial {} has {} samples, EEG has {}",
                    meta.trial,
                    c.len(),
                    eeg.n_samples()
                )));
            }
            if (c.fs() - eeg.fs()).abs() > 1e-9 {
                return Err(AadError::Schema(format!(
                    "candidate {k} sampled at {} Hz, EEG at {} Hz",
                    c.fs(),
                    eeg.fs()
                )));
            }
        }
        Ok(Self {
            eeg,
            candidates,
            attended_index,
            meta,
        })
    }

    pub fn attended(&self) -> &MonoSeries {
        &self.candidates[self.attended_index]
    }

    pub fn fs(&self) -> f64 {
        self.eeg.fs()
    }

    pub fn n_samples(&self) -> usize {
        self.eeg.n_samples()
    }

    pub fn duration_s(&self) -> f64 {
        self.n_samples() as f64 / self.fs()
    }

    /// Same trial with the EEG replaced (e.g. after channel selection).
    pub fn with_eeg(&self, eeg: MultiSeries) -> Result<Self> {
        Trial::new(
            eeg,
            self.candidates.clone(),
            self.attended_index,
            self.meta.clone(),
        )
    }
}
