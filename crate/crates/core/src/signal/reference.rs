use super::MultiSeries;
use crate::error::{AadError, Result};

/// Subtract the instantaneous mean across channels from every channel.
pub fn common_average_reference(eeg: &MultiSeries) -> Result<MultiSeries> {
    let n = eeg.n_channels();
    if n < 2 {
        return Err(AadError::DegenerateReference(n));
    }
    let mut out = eeg.samples().clone();
    for mut row in out.row_iter_mut() {
        let mean = row.iter().sum::<f64>() / n as f64;
        row.add_scalar_mut(-mean);
    }
    Ok(eeg.with_samples(out, eeg.fs()))
}

/// Remove each channel's whole-trial mean.
pub fn baseline_correct(eeg: &MultiSeries) -> Result<MultiSeries> {
    if eeg.n_samples() == 0 || eeg.n_channels() == 0 {
        return Err(AadError::Empty("baseline correction of an empty recording"));
    }
    let mut out = eeg.samples().clone();
    for mut col in out.column_iter_mut() {
        let mean = col.mean();
        col.add_scalar_mut(-mean);
    }
    Ok(eeg.with_samples(out, eeg.fs()))
}
