//! Rational-ratio polyphase resampling with a Kaiser-windowed sinc kernel.

use std::f64::consts::PI;

use super::Channelwise;
use crate::error::{AadError, Result};

/// Largest reduced up/down factor accepted.
const MAX_FACTOR: u64 = 4096;
/// Zero crossings of the sinc on each side, per unit of the larger factor.
const HALF_ZEROS: usize = 10;
const KAISER_BETA: f64 = 5.0;

fn integer_rate(fs: f64) -> Option<u64> {
    let r = fs.round();
    ((fs - r).abs() < 1e-9 && r >= 1.0 && r < 1e12).then_some(r as u64)
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

fn bessel_i0(x: f64) -> f64 {
    let mut sum = 1.0;
    let mut term = 1.0;
    let q = x * x / 4.0;
    for k in 1..200 {
        term *= q / (k * k) as f64;
        sum += term;
        if term < sum * 1e-17 {
            break;
        }
    }
    sum
}

/// Polyphase kernel: `phases[p][i]` is tap `p + up * i`, each phase normalised to unit sum.
struct Polyphase {
    up: usize,
    down: usize,
    half: usize,
    phases: Vec<Vec<f64>>,
}

impl Polyphase {
    fn new(up: usize, down: usize) -> Self {
        let max = up.max(down);
        let half = HALF_ZEROS * max;
        let len = 2 * half + 1;
        let cutoff = 1.0 / max as f64;
        let i0_beta = bessel_i0(KAISER_BETA);
        let taps: Vec<f64> = (0..len)
            .map(|j| {
                let t = j as f64 - half as f64;
                let arg = PI * cutoff * t;
                let sinc = if t == 0.0 { 1.0 } else { arg.sin() / arg };
                let r = 2.0 * j as f64 / (len - 1) as f64 - 1.0;
                let w = bessel_i0(KAISER_BETA * (1.0 - r * r).max(0.0).sqrt()) / i0_beta;
                sinc * w
            })
            .collect();
        let phases = (0..up)
            .map(|p| {
                let mut ph: Vec<f64> = taps.iter().skip(p).step_by(up).copied().collect();
                let s: f64 = ph.iter().sum();
                if s != 0.0 {
                    ph.iter_mut().for_each(|v| *v /= s);
                }
                ph
            })
            .collect();
        Self {
            up,
            down,
            half,
            phases,
        }
    }

    fn apply(&self, x: &[f64], out_len: usize) -> Vec<f64> {
        let n = x.len() as isize;
        // odd-symmetric extension, clamped for very short inputs
        let at = |k: isize| -> f64 {
            if k < 0 {
                2.0 * x[0] - x[(-k).min(n - 1) as usize]
            } else if k >= n {
                2.0 * x[(n - 1) as usize] - x[(2 * (n - 1) - k).max(0) as usize]
            } else {
                x[k as usize]
            }
        };
        (0..out_len)
            .map(|m| {
                let c = m * self.down + self.half;
                let phase = &self.phases[c % self.up];
                let top = (c / self.up) as isize;
                phase
                    .iter()
                    .enumerate()
                    .map(|(i, h)| h * at(top - i as isize))
                    .sum()
            })
            .collect()
    }
}

/// Resample one channel from `fs` to `target_fs`.
///
/// Both rates must be whole numbers of hertz whose reduced ratio has factors
/// no larger than 4096 (covers 500 -> 64 and 1000 -> 64).
pub fn resample_slice(x: &[f64], fs: f64, target_fs: f64) -> Result<Vec<f64>> {
    if !(target_fs.is_finite() && target_fs > 0.0) {
        return Err(AadError::Config(format!(
            "target rate must be positive, got {target_fs}"
        )));
    }
    if target_fs == fs {
        return Ok(x.to_vec());
    }
    let unsupported = || AadError::UnsupportedRatio {
        from: fs,
        to: target_fs,
    };
    let (from, to) = match (integer_rate(fs), integer_rate(target_fs)) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(unsupported()),
    };
    let g = gcd(from, to);
    let (up, down) = (to / g, from / g);
    if up > MAX_FACTOR || down > MAX_FACTOR {
        return Err(unsupported());
    }
    let out_len = (x.len() as f64 * up as f64 / down as f64).round() as usize;
    if x.is_empty() {
        return Ok(Vec::new());
    }
    Ok(Polyphase::new(up as usize, down as usize).apply(x, out_len))
}

/// Resample every channel to `target_fs`; output length is `round(T * target_fs / fs)`.
pub fn resample<S: Channelwise>(x: &S, target_fs: f64) -> Result<S> {
    let fs = x.fs();
    x.map_channels(target_fs, |c| resample_slice(c, fs, target_fs))
}
