//! On-disk formats: EEG matrices, WAV audio, dataset manifests and result exports.

mod eeg;
mod manifest;
mod results;
mod wav;

use std::fs;
use std::path::{Path, PathBuf};

pub use eeg::{eeg_bytes, load_eeg, load_series, series_bytes, write_eeg, EegDtype};
pub use manifest::{
    dataset_trials, load_dataset, prepare_trial, Candidate, CandidateKind, CandidateRecord,
    Dataset, EegRecord, Manifest, PrepConfig, RawTrial, TrialRecord, MANIFEST_VERSION,
};
pub use results::{
    results_csv, summary_json, trf_contrast_csv, trf_contrast_json, Summary, TrfExport,
};
pub use wav::{load_audio_wav, parse_wav};

use crate::decoder::Trial;
use crate::error::{AadError, Result};

/// Write through a sibling temporary file and rename, so readers never see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| AadError::io(dir, e))?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".partial");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, bytes).map_err(|e| AadError::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| AadError::io(path, e))
}

/// Write modelling-ready trials under `dir` with a manifest marked preprocessed.
///
/// Every file is encoded in memory first; nothing is written if encoding fails.
pub fn write_dataset(dir: &Path, trials: &[Trial], dtype: EegDtype) -> Result<Manifest> {
    let first = trials.first().ok_or(AadError::Empty("no trials to write"))?;
    let mut files: Vec<(PathBuf, Vec<u8>)> = Vec::new();
    let mut records = Vec::with_capacity(trials.len());
    for t in trials {
        if t.eeg.channels() != first.eeg.channels() || t.fs() != first.fs() {
            return Err(AadError::Schema(format!(
                "trial {}/{} differs in channels or rate",
                t.meta.subject, t.meta.trial
            )));
        }
        let stem = format!("{}_{}", t.meta.subject, t.meta.trial);
        let eeg_path = PathBuf::from("eeg").join(format!("{stem}.{}", dtype.extension()));
        files.push((eeg_path.clone(), eeg_bytes(&t.eeg, dtype)?));
        let candidates = t
            .candidates
            .iter()
            .enumerate()
            .map(|(k, c)| {
                let p = PathBuf::from("envelopes").join(format!("{stem}_c{k}.f32"));
                files.push((p.clone(), series_bytes(c)));
                CandidateRecord {
                    kind: CandidateKind::Envelope,
                    path: p,
                }
            })
            .collect();
        records.push(TrialRecord {
            subject: t.meta.subject.clone(),
            trial: t.meta.trial.clone(),
            attended_index: t.attended_index,
            eeg: EegRecord {
                path: eeg_path,
                shape: [t.n_samples(), t.eeg.n_channels()],
                dtype,
            },
            candidates,
            azimuths_deg: t.meta.azimuths_deg,
        });
    }
    let manifest = Manifest {
        version: MANIFEST_VERSION,
        fs_raw: first.fs(),
        channels: first.eeg.channels().to_vec(),
        preprocessed: true,
        trials: records,
    };
    let text = manifest.to_canonical_string()?;
    for (p, bytes) in files {
        write_atomic(&dir.join(p), &bytes)?;
    }
    write_atomic(&dir.join("manifest.json"), text.as_bytes())?;
    Ok(manifest)
}
