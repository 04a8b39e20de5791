//! Fixtures shared by the pipeline benchmarks.

use aad_core::decoder::Trial;
use aad_core::signal::MultiSeries;
use aad_core::synth::{generate_trials, SynthConfig};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Synthetic trials at 64 Hz with 20 channels.
pub fn trials(subjects: usize, per_subject: usize, length_s: f64) -> Vec<Trial> {
    generate_trials(&SynthConfig {
        n_subjects: subjects,
        trials_per_subject: per_subject,
        trial_length_s: length_s,
        seed: 1,
        ..SynthConfig::default()
    })
    .expect("valid synthetic config")
}

/// Uniform noise recording, e.g. raw EEG at the acquisition rate.
pub fn raw_eeg(n_samples: usize, n_channels: usize, fs: f64) -> MultiSeries {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let samples = DMatrix::from_fn(n_samples, n_channels, |_, _| rng.random_range(-50.0..50.0));
    let labels = (0..n_channels).map(|i| format!("ch{i:02}")).collect();
    MultiSeries::new(samples, fs, labels).expect("finite samples")
}
