//! Butterworth band-pass design and zero-phase (forward-backward) application.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::Channelwise;
use crate::error::{AadError, Result};

/// Band edges and prototype order of a Butterworth band-pass.
///
/// `order` is the low-pass prototype order; the resulting band-pass has
/// `2 * order` poles, realised as `order` second-order sections.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandpassSpec {
    pub low_hz: f64,
    pub high_hz: f64,
    pub order: usize,
}

impl Default for BandpassSpec {
    fn default() -> Self {
        Self {
            low_hz: 2.0,
            high_hz: 8.0,
            order: 4,
        }
    }
}

impl BandpassSpec {
    pub fn new(low_hz: f64, high_hz: f64, order: usize) -> Self {
        Self {
            low_hz,
            high_hz,
            order,
        }
    }

    pub fn validate(&self, fs: f64) -> Result<()> {
        let nyq = fs / 2.0;
        if self.order == 0 {
            return Err(AadError::InvalidSpec("order must be at least 1".into()));
        }
        let ok = self.low_hz.is_finite()
            && self.high_hz.is_finite()
            && 0.0 < self.low_hz
            && self.low_hz < self.high_hz
            && self.high_hz < nyq;
        if ok {
            Ok(())
        } else {
            Err(AadError::InvalidSpec(format!(
                "need 0 < low ({}) < high ({}) < fs/2 ({nyq})",
                self.low_hz, self.high_hz
            )))
        }
    }
}

/// One second-order section, `a[0] == 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Biquad {
    pub b: [f64; 3],
    pub a: [f64; 3],
}

impl Biquad {
    fn response(&self, zinv: Complex64) -> Complex64 {
        let z2 = zinv * zinv;
        let num = self.b[0] + zinv * self.b[1] + z2 * self.b[2];
        let den = self.a[0] + zinv * self.a[1] + z2 * self.a[2];
        num / den
    }

    /// Steady-state transposed direct-form II state for a unit step input.
    fn step_state(&self) -> [f64; 2] {
        let [b0, b1, b2] = self.b;
        let [_, a1, a2] = self.a;
        let r0 = b1 - a1 * b0;
        let r1 = b2 - a2 * b0;
        let z0 = (r0 + r1) / (1.0 + a1 + a2);
        [z0, r1 - a2 * z0]
    }

    fn dc_gain(&self) -> f64 {
        self.b.iter().sum::<f64>() / self.a.iter().sum::<f64>()
    }

    fn run(&self, x: &mut [f64], mut z: [f64; 2]) {
        let [b0, b1, b2] = self.b;
        let [_, a1, a2] = self.a;
        for v in x.iter_mut() {
            let input = *v;
            let y = b0 * input + z[0];
            z[0] = b1 * input - a1 * y + z[1];
            z[1] = b2 * input - a2 * y;
            *v = y;
        }
    }
}

/// Cascade of second-order sections.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterCoeffs {
    sections: Vec<Biquad>,
}

impl FilterCoeffs {
    pub fn from_sections(sections: Vec<Biquad>) -> Self {
        Self { sections }
    }

    pub fn sections(&self) -> &[Biquad] {
        &self.sections
    }

    /// Order of the digital filter (number of poles).
    pub fn order(&self) -> usize {
        2 * self.sections.len()
    }

    /// Complex single-pass response at `freq_hz`.
    pub fn response(&self, freq_hz: f64, fs: f64) -> Complex64 {
        let zinv = Complex64::from_polar(1.0, -2.0 * PI * freq_hz / fs);
        self.sections
            .iter()
            .fold(Complex64::new(1.0, 0.0), |acc, s| acc * s.response(zinv))
    }

    /// Single-pass magnitude response in dB.
    pub fn gain_db(&self, freq_hz: f64, fs: f64) -> f64 {
        20.0 * self.response(freq_hz, fs).norm().log10()
    }

    /// Edge padding length used by [`filtfilt`].
    pub fn pad_len(&self) -> usize {
        3 * self.order()
    }

    fn run_with_initial(&self, x: &mut [f64]) {
        let first = x[0];
        let mut scale = 1.0;
        for s in &self.sections {
            let zi = s.step_state();
            s.run(x, [zi[0] * scale * first, zi[1] * scale * first]);
            scale *= s.dc_gain();
        }
    }
}

/// Butterworth band-pass via the bilinear transform with pre-warped band edges.
pub fn design_bandpass(spec: &BandpassSpec, fs: f64) -> Result<FilterCoeffs> {
    spec.validate(fs)?;
    let n = spec.order;
    let warp = |f: f64| 2.0 * fs * (PI * f / fs).tan();
    let (w1, w2) = (warp(spec.low_hz), warp(spec.high_hz));
    let bw = w2 - w1;
    let w0 = (w1 * w2).sqrt();
    let bilinear = |s: Complex64| (2.0 * fs + s) / (2.0 * fs - s);

    let mut pole_pairs: Vec<(Complex64, Complex64)> = Vec::with_capacity(n);
    for k in 0..n {
        let theta = PI / 2.0 + PI * (2 * k + 1) as f64 / (2 * n) as f64;
        let mut p = Complex64::from_polar(1.0, theta);
        if p.im.abs() <= 1e-12 {
            p = Complex64::new(-1.0, 0.0);
        }
        let half = p * (bw / 2.0);
        let disc = (half * half - w0 * w0).sqrt();
        let (s1, s2) = (half + disc, half - disc);
        if p.im > 1e-12 {
            // the conjugate prototype pole supplies conj(s1), conj(s2)
            pole_pairs.push((s1, s1.conj()));
            pole_pairs.push((s2, s2.conj()));
        } else if p.im == 0.0 {
            pole_pairs.push((s1, s2));
        }
    }

    let center = 2.0 * (w0 / (2.0 * fs)).atan();
    let zinv_c = Complex64::from_polar(1.0, -center);
    let sections = pole_pairs
        .into_iter()
        .map(|(s1, s2)| {
            let (z1, z2) = (bilinear(s1), bilinear(s2));
            let mut bq = Biquad {
                b: [1.0, 0.0, -1.0],
                a: [1.0, -(z1 + z2).re, (z1 * z2).re],
            };
            let g = bq.response(zinv_c).norm();
            for b in &mut bq.b {
                *b /= g;
            }
            bq
        })
        .collect();
    Ok(FilterCoeffs { sections })
}

fn forward_backward(x: &[f64], coeffs: &FilterCoeffs) -> Vec<f64> {
    let n = x.len();
    let pad = coeffs.pad_len();
    let mut ext = Vec::with_capacity(n + 2 * pad);
    ext.extend((1..=pad).rev().map(|i| 2.0 * x[0] - x[i]));
    ext.extend_from_slice(x);
    ext.extend((1..=pad).map(|i| 2.0 * x[n - 1] - x[n - 1 - i]));
    coeffs.run_with_initial(&mut ext);
    ext.reverse();
    coeffs.run_with_initial(&mut ext);
    ext.reverse();
    ext[pad..pad + n].to_vec()
}

/// Zero-phase filtering of one channel.
///
/// The forward-backward pass is averaged with the same pass applied to the
/// time-reversed input, so the result commutes exactly with time reversal.
pub fn filtfilt_slice(x: &[f64], coeffs: &FilterCoeffs) -> Result<Vec<f64>> {
    let pad = coeffs.pad_len();
    if x.len() <= pad {
        return Err(AadError::Length {
            required: pad,
            actual: x.len(),
        });
    }
    let fwd = forward_backward(x, coeffs);
    let rev: Vec<f64> = x.iter().rev().copied().collect();
    let bwd = forward_backward(&rev, coeffs);
    Ok(fwd
        .iter()
        .zip(bwd.iter().rev())
        .map(|(a, b)| 0.5 * (a + b))
        .collect())
}

/// Zero-phase filtering of every channel; length and rate are unchanged.
pub fn filtfilt<S: Channelwise>(x: &S, coeffs: &FilterCoeffs) -> Result<S> {
    x.map_channels(x.fs(), |c| filtfilt_slice(c, coeffs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::MonoSeries;

    fn spec() -> BandpassSpec {
        BandpassSpec::default()
    }

    #[test]
    fn passband_and_stopband_gain() {
        for fs in [64.0, 500.0, 1000.0] {
            let c = design_bandpass(&spec(), fs).unwrap();
            assert!(c.gain_db(4.0, fs).abs() < 1.0, "fs {fs}");
            assert!(c.gain_db(0.5, fs) < -12.0, "fs {fs}");
            let upper = (4.0 * 8.0_f64).min(0.95 * fs / 2.0);
            assert!(c.gain_db(upper, fs) < -12.0, "fs {fs}");
            assert_eq!(c.order(), 8);
        }
    }

    #[test]
    fn invalid_edges() {
        assert!(matches!(
            design_bandpass(&BandpassSpec::new(8.0, 2.0, 4), 64.0),
            Err(AadError::InvalidSpec(_))
        ));
        assert!(design_bandpass(&BandpassSpec::new(2.0, 40.0, 4), 64.0).is_err());
        assert!(design_bandpass(&BandpassSpec::new(0.0, 8.0, 4), 64.0).is_err());
        assert!(design_bandpass(&BandpassSpec::new(2.0, 8.0, 0), 64.0).is_err());
    }

    #[test]
    fn odd_orders_design() {
        for order in [1, 3, 5] {
            let c = design_bandpass(&BandpassSpec::new(2.0, 8.0, order), 64.0).unwrap();
            assert_eq!(c.sections().len(), order);
            let warp = |f: f64| 128.0 * (PI * f / 64.0).tan();
            let center_hz = (warp(2.0) * warp(8.0)).sqrt().atan2(128.0) * 64.0 / PI;
            assert!(c.gain_db(center_hz, 64.0).abs() < 1e-9);
        }
    }

    #[test]
    fn too_short_signal() {
        let c = design_bandpass(&spec(), 64.0).unwrap();
        let x = MonoSeries::new(vec![0.0; 10], 64.0).unwrap();
        assert!(matches!(filtfilt(&x, &c), Err(AadError::Length { .. })));
    }

    #[test]
    fn zeros_in_zeros_out() {
        let c = design_bandpass(&spec(), 64.0).unwrap();
        let x = MonoSeries::new(vec![0.0; 200], 64.0).unwrap();
        assert!(filtfilt(&x, &c).unwrap().samples().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn impulse_response_is_symmetric() {
        let c = design_bandpass(&spec(), 64.0).unwrap();
        let n = 640;
        let k = 300;
        let mut x = vec![0.0; n];
        x[k] = 1.0;
        let y = filtfilt_slice(&x, &c).unwrap();
        let peak = y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let asym = (1..k.min(n - k - 1))
            .map(|d| (y[k - d] - y[k + d]).abs())
            .fold(0.0f64, f64::max);
        assert!(asym < 1e-6 * peak, "asym {asym} peak {peak}");
    }

    #[test]
    fn in_band_sine_passes() {
        let fs = 64.0;
        let c = design_bandpass(&spec(), fs).unwrap();
        let x: Vec<f64> = (0..640)
            .map(|i| (2.0 * PI * 4.0 * i as f64 / fs).sin())
            .collect();
        let y = filtfilt_slice(&x, &c).unwrap();
        let r = crate::decoder::pearson_slices(&x[64..576], &y[64..576]).unwrap();
        assert!(r > 0.999, "r = {r}");
    }
}
