use num_complex::Complex64;
use rustfft::FftPlanner;

use super::MonoSeries;
use crate::error::{AadError, Result};

const MIN_LEN: usize = 16;

/// Magnitude of the analytic signal, built by zeroing negative frequencies.
pub fn hilbert_envelope(audio: &MonoSeries) -> Result<MonoSeries> {
    let n = audio.len();
    if n < MIN_LEN {
        return Err(AadError::Length {
            required: MIN_LEN - 1,
            actual: n,
        });
    }
    let mut planner = FftPlanner::<f64>::new();
    let mut buf: Vec<Complex64> = audio
        .samples()
        .iter()
        .map(|&v| Complex64::new(v, 0.0))
        .collect();
    planner.plan_fft_forward(n).process(&mut buf);
    let nyquist = n / 2;
    for (k, v) in buf.iter_mut().enumerate() {
        let weight = if k == 0 || (n % 2 == 0 && k == nyquist) {
            1.0
        } else if k <= (n - 1) / 2 {
            2.0
        } else {
            0.0
        };
        *v *= weight;
    }
    planner.plan_fft_inverse(n).process(&mut buf);
    let scale = 1.0 / n as f64;
    MonoSeries::new(buf.iter().map(|c| c.norm() * scale).collect(), audio.fs())
}

/// Elementwise `|x|^exponent`; exponent 1 leaves a nonnegative envelope unchanged.
pub fn power_law(env: &MonoSeries, exponent: f64) -> Result<MonoSeries> {
    if exponent == 1.0 {
        return Ok(env.clone());
    }
    if !(exponent.is_finite() && exponent > 0.0) {
        return Err(AadError::Config(format!(
            "compression exponent must be positive, got {exponent}"
        )));
    }
    MonoSeries::new(
        env.samples().iter().map(|v| v.abs().powf(exponent)).collect(),
        env.fs(),
    )
}
