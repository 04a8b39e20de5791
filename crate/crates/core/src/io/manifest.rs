use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{load_audio_wav, load_eeg, load_series, EegDtype};
use crate::decoder::{Trial, TrialMeta, N_CANDIDATES};
use crate::error::{AadError, Result};
use crate::signal::{
    preprocess_chain, preprocess_envelope, BandpassSpec, EnvelopeOptions, MonoSeries, MultiSeries,
};

pub const MANIFEST_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub version: u32,
    /// Sampling rate of the EEG and envelope files.
    pub fs_raw: f64,
    pub channels: Vec<String>,
    /// Whether the data already went through the preprocessing chain.
    #[serde(default)]
    pub preprocessed: bool,
    pub trials: Vec<TrialRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrialRecord {
    pub subject: String,
    pub trial: String,
    pub attended_index: usize,
    pub eeg: EegRecord,
    pub candidates: Vec<CandidateRecord>,
    pub azimuths_deg: [f64; N_CANDIDATES],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EegRecord {
    /// Relative to the manifest's directory.
    pub path: PathBuf,
    /// `[T, N]`.
    pub shape: [usize; 2],
    pub dtype: EegDtype,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CandidateKind {
    /// `f32le` samples at `fs_raw`, as many as the EEG has.
    Envelope,
    /// 16-bit PCM mono WAV at its own rate.
    Audio,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CandidateRecord {
    pub kind: CandidateKind,
    pub path: PathBuf,
}

impl Manifest {
    pub fn validate(&self) -> Result<()> {
        if self.version != MANIFEST_VERSION {
            return Err(AadError::Schema(format!(
                "manifest version {} is not supported (expected {MANIFEST_VERSION})",
                self.version
            )));
        }
        if self.trials.is_empty() {
            return Err(AadError::Schema("manifest lists no trials".into()));
        }
        for t in &self.trials {
            if t.candidates.len() != N_CANDIDATES {
                return Err(AadError::Schema(format!(
                    "trial {}/{} lists {} candidates, expected {N_CANDIDATES}",
                    t.subject,
                    t.trial,
                    t.candidates.len()
                )));
            }
            if t.eeg.shape[1] != self.channels.len() {
                return Err(AadError::Schema(format!(
                    "trial {}/{} has {} EEG columns but the manifest lists {} channels",
                    t.subject,
                    t.trial,
                    t.eeg.shape[1],
                    self.channels.len()
                )));
            }
            if t.attended_index >= N_CANDIDATES {
                return Err(AadError::Schema(format!(
                    "trial {}/{} has attended index {}",
                    t.subject, t.trial, t.attended_index
                )));
            }
        }
        Ok(())
    }

    /// Canonical text: pretty JSON in declaration order with a trailing newline.
    pub fn to_canonical_string(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)
            .map_err(|e| AadError::Config(format!("manifest encoding failed: {e}")))?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_str(path: &Path, text: &str) -> Result<Self> {
        let m: Manifest =
            serde_json::from_str(text).map_err(|e| AadError::format(path, e.to_string()))?;
        m.validate()?;
        Ok(m)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| AadError::io(path, e))?;
        Self::from_str(path, &text)
    }
}

/// Candidate stimulus as stored on disk.
#[derive(Debug, Clone, PartialEq)]
pub enum Candidate {
    Envelope(MonoSeries),
    Audio(MonoSeries),
}

/// A trial exactly as loaded, before preprocessing.
#[derive(Debug, Clone, PartialEq)]
pub struct RawTrial {
    pub eeg: MultiSeries,
    pub candidates: Vec<Candidate>,
    pub attended_index: usize,
    pub meta: TrialMeta,
}

#[derive(Debug, Clone)]
pub struct Dataset {
    pub manifest: Manifest,
    pub root: PathBuf,
    pub trials: Vec<RawTrial>,
}

fn load_record(m: &Manifest, root: &Path, rec: &TrialRecord) -> Result<RawTrial> {
    let [t, n] = rec.eeg.shape;
    let eeg = load_eeg(&root.join(&rec.eeg.path), (t, n), rec.eeg.dtype, m.fs_raw, &m.channels)?;
    let candidates = rec
        .candidates
        .iter()
        .map(|c| {
            let p = root.join(&c.path);
            Ok(match c.kind {
                CandidateKind::Envelope => Candidate::Envelope(load_series(&p, t, m.fs_raw)?),
                CandidateKind::Audio => Candidate::Audio(load_audio_wav(&p)?),
            })
        })
        .collect::<Result<_>>()?;
    Ok(RawTrial {
        eeg,
        candidates,
        attended_index: rec.attended_index,
        meta: TrialMeta {
            subject: rec.subject.clone(),
            trial: rec.trial.clone(),
            azimuths_deg: rec.azimuths_deg,
        },
    })
}

/// Load a manifest and every file it references.
pub fn load_dataset(manifest_path: &Path) -> Result<Dataset> {
    let manifest = Manifest::load(manifest_path)?;
    let root = manifest_path
        .parent()
        .map(Path::to_path_buf)
        .unwrap_or_default();
    let trials = manifest
        .trials
        .par_iter()
        .map(|r| load_record(&manifest, &root, r))
        .collect::<Result<_>>()?;
    Ok(Dataset {
        manifest,
        root,
        trials,
    })
}

/// Preprocessing settings applied to raw trials.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PrepConfig {
    pub band: BandpassSpec,
    pub target_fs: f64,
    pub car: bool,
    pub envelope_exponent: f64,
}

impl Default for PrepConfig {
    fn default() -> Self {
        Self {
            band: BandpassSpec::default(),
            target_fs: 64.0,
            car: true,
            envelope_exponent: 1.0,
        }
    }
}

fn truncate(s: MonoSeries, len: usize) -> Result<MonoSeries> {
    s.slice(0, len)
}

/// Run the EEG and envelope chains on one trial and trim everything to the
/// shortest resulting length.
pub fn prepare_trial(raw: &RawTrial, cfg: &PrepConfig) -> Result<Trial> {
    let eeg = preprocess_chain(&raw.eeg, &cfg.band, cfg.target_fs, cfg.car)?;
    let cands = raw
        .candidates
        .iter()
        .map(|c| {
            let (s, extract) = match c {
                Candidate::Envelope(s) => (s, false),
                Candidate::Audio(s) => (s, true),
            };
            let opts = EnvelopeOptions {
                extract,
                exponent: cfg.envelope_exponent,
            };
            preprocess_envelope(s, &cfg.band, cfg.target_fs, &opts)
        })
        .collect::<Result<Vec<_>>>()?;
    let len = cands.iter().map(MonoSeries::len).fold(eeg.n_samples(), usize::min);
    let cands = cands.into_iter().map(|c| truncate(c, len)).collect::<Result<_>>()?;
    Trial::new(eeg.slice(0, len)?, cands, raw.attended_index, raw.meta.clone())
}

/// Trials ready for modelling: used as stored when the manifest is marked
/// preprocessed, otherwise passed through [`prepare_trial`].
pub fn dataset_trials(ds: &Dataset, cfg: &PrepConfig) -> Result<Vec<Trial>> {
    ds.trials
        .par_iter()
        .map(|raw| {
            if ds.manifest.preprocessed {
                let cands = raw
                    .candidates
                    .iter()
                    .map(|c| match c {
                        Candidate::Envelope(s) => Ok(s.clone()),
                        Candidate::Audio(_) => Err(AadError::Schema(format!(
                            "trial {}/{} is marked preprocessed but lists audio candidates",
                            raw.meta.subject, raw.meta.trial
                        ))),
                    })
                    .collect::<Result<_>>()?;
                Trial::new(raw.eeg.clone(), cands, raw.attended_index, raw.meta.clone())
            } else {
                prepare_trial(raw, cfg)
            }
        })
        .collect()
}
