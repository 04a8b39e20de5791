//! Synthetic four-talker trials with known forward kernels.
//!
//! All randomness comes from ChaCha8 streams seeded by [`derive_seed`], a
//! SplitMix64 mix of the dataset seed with subject and trial ids, so every
//! trial is reproducible on its own and across platforms.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::decoder::{Trial, TrialMeta, AZIMUTHS_DEG, N_CANDIDATES};
use crate::error::{AadError, Result};
use crate::layout::synthetic_channel_labels;
use crate::linmodel::LagConfig;
use crate::signal::{design_bandpass, filtfilt_slice, BandpassSpec, MonoSeries, MultiSeries};

/// Envelope mean in units of its own standard deviation, unless the
/// minimum forces a larger shift.
pub const ENVELOPE_OFFSET_SDS: f64 = 5.0;

/// Band of the surrogate speech envelopes.
pub const ENVELOPE_BAND_HZ: (f64, f64) = (1.0, 10.0);

/// Trial id reserved for the per-subject stream (kernels).
const SUBJECT_STREAM: u32 = u32::MAX;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseKind {
    #[default]
    White,
    /// 1/f power spectrum.
    Pink,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub n_subjects: usize,
    pub trials_per_subject: usize,
    pub trial_length_s: f64,
    pub fs: f64,
    pub n_channels: usize,
    pub attended_gain: f64,
    pub unattended_gain: f64,
    pub kernel_latency_ms: f64,
    pub kernel_width_ms: f64,
    pub snr_db: f64,
    pub seed: u64,
    /// Channels (from the first) that carry the response; the rest are noise only.
    pub informative_channels: Option<usize>,
    pub noise: NoiseKind,
    /// Lag window on which kernels are defined.
    pub lag_min_ms: f64,
    pub lag_max_ms: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            n_subjects: 16,
            trials_per_subject: 8,
            trial_length_s: 60.0,
            fs: 64.0,
            n_channels: 20,
            attended_gain: 1.5,
            unattended_gain: 1.0,
            kernel_latency_ms: 150.0,
            kernel_width_ms: 60.0,
            snr_db: 0.0,
            seed: 0,
            informative_channels: None,
            noise: NoiseKind::White,
            lag_min_ms: -50.0,
            lag_max_ms: 450.0,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(AadError::Config(msg));
        if self.n_subjects == 0 || self.trials_per_subject == 0 || self.n_channels == 0 {
            return bad("subjects, trials and channels must be positive".into());
        }
        if !(self.trial_length_s >= 1.0) {
            return bad(format!("trial length {} s is below 1 s", self.trial_length_s));
        }
        if !(self.fs > 2.0 * ENVELOPE_BAND_HZ.1) {
            return bad(format!("sampling rate {} Hz too low for the envelope band", self.fs));
        }
        if !(self.attended_gain > 0.0 && self.unattended_gain > 0.0) {
            return bad("stream gains must be positive".into());
        }
        if !self.snr_db.is_finite() {
            return bad("snr_db must be finite".into());
        }
        if !(self.kernel_width_ms > 0.0) {
            return bad("kernel width must be positive".into());
        }
        if let Some(k) = self.informative_channels {
            if k > self.n_channels {
                return bad(format!("{k} informative channels out of {}", self.n_channels));
            }
        }
        self.lags().validate()
    }

    pub fn lags(&self) -> LagConfig {
        LagConfig {
            lag_min_ms: self.lag_min_ms,
            lag_max_ms: self.lag_max_ms,
            fs: self.fs,
        }
    }

    fn n_samples(&self) -> usize {
        (self.trial_length_s * self.fs).round() as usize
    }

    fn n_informative(&self) -> usize {
        self.informative_channels.unwrap_or(self.n_channels)
    }
}

/// SplitMix64 finaliser.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of the stream belonging to `(subject, trial)` within a dataset seed.
pub fn derive_seed(seed: u64, subject: u32, trial: u32) -> u64 {
    splitmix64(splitmix64(splitmix64(seed) ^ subject as u64) ^ trial as u64)
}

/// Nonnegative, unit-RMS surrogate speech envelope band-limited to 1-10 Hz.
pub fn generate_envelope(length_s: f64, fs: f64, seed: u64) -> Result<MonoSeries> {
    if !(length_s >= 1.0) {
        return Err(AadError::Config(format!("envelope length {length_s} s is below 1 s")));
    }
    let n = (length_s * fs).round() as usize;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let raw: Vec<f64> = (0..n)
        .map(|_| rng.sample::<f64, _>(StandardNormal).abs())
        .collect();
    let coeffs = design_bandpass(&BandpassSpec::new(ENVELOPE_BAND_HZ.0, ENVELOPE_BAND_HZ.1, 4), fs)?;
    let mut env = filtfilt_slice(&raw, &coeffs)?;
    let mean = env.iter().sum::<f64>() / n as f64;
    let sd = (env.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64).sqrt();
    let min = env.iter().copied().fold(f64::INFINITY, f64::min);
    // a fixed offset keeps the AC share of the unit RMS equal across streams
    let shift = (ENVELOPE_OFFSET_SDS * sd - mean).max(-min);
    env.iter_mut().for_each(|v| *v += shift);
    let rms = (env.iter().map(|v| v * v).sum::<f64>() / n as f64).sqrt();
    env.iter_mut().for_each(|v| *v /= rms);
    MonoSeries::new(env, fs)
}

/// Gabor bump on the lag axis: a Gaussian envelope times a cosine whose
/// period is four widths, peaking at `latency_ms`.
pub fn gabor_kernel(lag_axis_ms: &[f64], latency_ms: f64, width_ms: f64) -> Vec<f64> {
    lag_axis_ms
        .iter()
        .map(|&t| {
            let u = (t - latency_ms) / width_ms;
            (-0.5 * u * u).exp() * (2.0 * PI * u / 4.0).cos()
        })
        .collect()
}

/// Per-subject base kernels (`n_lags x n_channels`), before stream gains.
pub fn subject_kernels(cfg: &SynthConfig, subject: u32) -> DMatrix<f64> {
    let lags = cfg.lags();
    let shape = gabor_kernel(&lags.lag_axis_ms(), cfg.kernel_latency_ms, cfg.kernel_width_ms);
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, subject, SUBJECT_STREAM));
    let mut k = DMatrix::zeros(shape.len(), cfg.n_channels);
    for n in 0..cfg.n_channels {
        let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
        let amp = 1.0 + 0.2 * rng.random_range(-1.0..1.0);
        if n < cfg.n_informative() {
            k.column_mut(n).copy_from_slice(&shape);
            k.column_mut(n).scale_mut(sign * amp);
        }
    }
    k
}

fn convolve(kernel: &[f64], taus: impl Iterator<Item = isize>, s: &[f64], out: &mut [f64]) {
    let t = s.len() as isize;
    for (&w, tau) in kernel.iter().zip(taus) {
        if w == 0.0 {
            continue;
        }
        for row in tau.max(0)..(t + tau).min(t) {
            out[row as usize] += w * s[(row - tau) as usize];
        }
    }
}

fn pink(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let mut buf: Vec<Complex64> = (0..n)
        .map(|_| Complex64::new(rng.sample(StandardNormal), 0.0))
        .collect();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(n).process(&mut buf);
    for (k, c) in buf.iter_mut().enumerate() {
        let f = k.min(n - k);
        *c = if f == 0 { Complex64::new(0.0, 0.0) } else { *c / (f as f64).sqrt() };
    }
    planner.plan_fft_inverse(n).process(&mut buf);
    let x: Vec<f64> = buf.iter().map(|c| c.re).collect();
    let sd = (x.iter().map(|v| v * v).sum::<f64>() / n as f64).sqrt();
    x.into_iter().map(|v| v / sd).collect()
}

/// A generated trial with the ground truth it was built from.
#[derive(Debug, Clone)]
pub struct SynthTrial {
    pub trial: Trial,
    /// Effective kernel of each stream (`n_lags x n_channels`, gain included).
    pub kernels: Vec<DMatrix<f64>>,
    /// Noise-free EEG.
    pub clean: DMatrix<f64>,
}

fn variance(x: &[f64]) -> f64 {
    let m = x.iter().sum::<f64>() / x.len() as f64;
    x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / x.len() as f64
}

/// Signal-to-noise ratio in dB of `eeg` against its noise-free part,
/// averaged over the informative channels.
pub fn measured_snr_db(clean: &DMatrix<f64>, eeg: &DMatrix<f64>, informative: usize) -> f64 {
    let (mut ps, mut pn) = (0.0, 0.0);
    for n in 0..informative {
        let c = clean.column(n);
        let noise: Vec<f64> = eeg.column(n).iter().zip(c.iter()).map(|(e, c)| e - c).collect();
        ps += variance(c.as_slice());
        pn += variance(&noise);
    }
    10.0 * (ps / pn).log10()
}

/// Trial `trial` (0-based) of subject `subject` (0-based).
pub fn generate_trial(cfg: &SynthConfig, subject: u32, trial: u32) -> Result<SynthTrial> {
    cfg.validate()?;
    let lags = cfg.lags();
    let t = cfg.n_samples();
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, subject, trial));
    let attended_index = rng.random_range(0..N_CANDIDATES);
    let envelopes = (0..N_CANDIDATES)
        .map(|_| generate_envelope(cfg.trial_length_s, cfg.fs, rng.next_u64()))
        .collect::<Result<Vec<_>>>()?;
    let base = subject_kernels(cfg, subject);
    let kernels: Vec<DMatrix<f64>> = (0..N_CANDIDATES)
        .map(|k| {
            let gain = if k == attended_index { cfg.attended_gain } else { cfg.unattended_gain };
            &base * gain
        })
        .collect();

    let mut clean = DMatrix::zeros(t, cfg.n_channels);
    for (kernel, env) in kernels.iter().zip(&envelopes) {
        for n in 0..cfg.n_channels {
            let mut col = clean.column_mut(n);
            convolve(kernel.column(n).as_slice(), lags.taus(), env.samples(), col.as_mut_slice());
        }
    }
    let informative = cfg.n_informative();
    let signal_power = if informative == 0 {
        1.0
    } else {
        (0..informative).map(|n| variance(clean.column(n).as_slice())).sum::<f64>() / informative as f64
    };
    let sigma = (signal_power / 10f64.powf(cfg.snr_db / 10.0)).sqrt();
    let mut eeg = clean.clone();
    for n in 0..cfg.n_channels {
        let noise: Vec<f64> = match cfg.noise {
            NoiseKind::White => (0..t).map(|_| rng.sample(StandardNormal)).collect(),
            NoiseKind::Pink => pink(&mut rng, t),
        };
        for (v, e) in eeg.column_mut(n).iter_mut().zip(noise) {
            *v += sigma * e;
        }
    }

    let eeg = MultiSeries::new(eeg, cfg.fs, synthetic_channel_labels(cfg.n_channels))?;
    let meta = TrialMeta {
        subject: format!("S{:02}", subject + 1),
        trial: format!("T{:02}", trial + 1),
        azimuths_deg: AZIMUTHS_DEG,
    };
    Ok(SynthTrial {
        trial: Trial::new(eeg, envelopes, attended_index, meta)?,
        kernels,
        clean,
    })
}

/// Every trial of the configured dataset, subject-major.
pub fn generate_dataset(cfg: &SynthConfig) -> Result<Vec<SynthTrial>> {
    cfg.validate()?;
    let ids: Vec<(u32, u32)> = (0..cfg.n_subjects as u32)
        .flat_map(|s| (0..cfg.trials_per_subject as u32).map(move |t| (s, t)))
        .collect();
    ids.par_iter().map(|&(s, t)| generate_trial(cfg, s, t)).collect()
}

/// Trials only.
pub fn generate_trials(cfg: &SynthConfig) -> Result<Vec<Trial>> {
    Ok(generate_dataset(cfg)?.into_iter().map(|s| s.trial).collect())
}
