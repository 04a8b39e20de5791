use std::path::Path;

use crate::error::{AadError, Result};
use crate::signal::MonoSeries;

fn u16_at(b: &[u8], i: usize) -> u16 {
    u16::from_le_bytes([b[i], b[i + 1]])
}

fn u32_at(b: &[u8], i: usize) -> u32 {
    u32::from_le_bytes([b[i], b[i + 1], b[i + 2], b[i + 3]])
}

/// Decode a RIFF/WAVE file holding 16-bit PCM mono audio; samples are divided by 32768.
pub fn parse_wav(path: &Path, bytes: &[u8]) -> Result<MonoSeries> {
    let bad = |msg: &str| AadError::format(path, msg);
    if bytes.len() < 12 || &bytes[0..4] != b"RIFF" || &bytes[8..12] != b"WAVE" {
        return Err(bad("not a RIFF/WAVE file"));
    }
    let mut fmt: Option<(u16, u16, u32, u16)> = None;
    let mut pos = 12;
    while pos + 8 <= bytes.len() {
        let id = &bytes[pos..pos + 4];
        let size = u32_at(bytes, pos + 4) as usize;
        let body = pos + 8;
        let end = body.checked_add(size).filter(|&e| e <= bytes.len());
        match id {
            b"fmt " => {
                let end = end.ok_or_else(|| bad("truncated fmt chunk"))?;
                if end - body < 16 {
                    return Err(bad("fmt chunk shorter than 16 bytes"));
                }
                fmt = Some((
                    u16_at(bytes, body),
                    u16_at(bytes, body + 2),
                    u32_at(bytes, body + 4),
                    u16_at(bytes, body + 14),
                ));
            }
            b"data" => {
                let (format, channels, rate, bits) = fmt.ok_or_else(|| bad("data chunk before fmt chunk"))?;
                if format != 1 || bits != 16 {
                    return Err(bad(&format!(
                        "unsupported encoding (format tag {format}, {bits} bits); only 16-bit PCM is read"
                    )));
                }
                if channels != 1 {
                    return Err(bad(&format!("unsupported channel count {channels}; only mono is read")));
                }
                if rate == 0 {
                    return Err(bad("sample rate is zero"));
                }
                let end = end.ok_or_else(|| bad("truncated data chunk"))?;
                let samples = bytes[body..end]
                    .chunks_exact(2)
                    .map(|b| i16::from_le_bytes([b[0], b[1]]) as f64 / 32768.0)
                    .collect();
                return MonoSeries::new(samples, rate as f64);
            }
            _ => {}
        }
        // chunks are padded to even sizes
        pos = body.saturating_add(size).saturating_add(size & 1);
    }
    Err(bad("no data chunk"))
}

pub fn load_audio_wav(path: &Path) -> Result<MonoSeries> {
    let bytes = std::fs::read(path).map_err(|e| AadError::io(path, e))?;
    parse_wav(path, &bytes)
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;

    fn write(path: &Path, channels: u16, bits: u16, rate: u32, samples: &[i32]) {
        let spec = hound::WavSpec {
            channels,
            sample_rate: rate,
            bits_per_sample: bits,
            sample_format: hound::SampleFormat::Int,
        };
        let mut w = hound::WavWriter::create(path, spec).unwrap();
        for &s in samples {
            if bits == 16 {
                w.write_sample(s as i16).unwrap();
            } else {
                w.write_sample(s).unwrap();
            }
        }
        w.finalize().unwrap();
    }

    #[test]
    fn constant_scales_by_32768() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.wav");
        write(&p, 1, 16, 16_000, &vec![16384; 16_000]);
        let a = load_audio_wav(&p).unwrap();
        assert_eq!(a.fs(), 16_000.0);
        assert_eq!(a.len(), 16_000);
        assert!(a.samples().iter().all(|&v| v == 0.5));
    }

    #[test]
    fn sine_from_external_writer() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.wav");
        let fs = 8000.0;
        let analytic: Vec<f64> = (0..8000).map(|i| 0.8 * (2.0 * PI * 440.0 * i as f64 / fs).sin()).collect();
        let ints: Vec<i32> = analytic.iter().map(|v| (v * 32768.0).round() as i32).collect();
        write(&p, 1, 16, 8000, &ints);
        let a = load_audio_wav(&p).unwrap();
        let err = a.samples().iter().zip(&analytic).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        assert!(err < 1.0 / 32768.0, "{err}");
    }

    #[test]
    fn rejects_stereo_and_24_bit() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("st.wav");
        write(&p, 2, 16, 8000, &[0, 0, 1, 1]);
        assert!(matches!(load_audio_wav(&p), Err(AadError::Format { .. })));
        write(&p, 1, 24, 8000, &[0, 1]);
        assert!(matches!(load_audio_wav(&p), Err(AadError::Format { .. })));
        assert!(parse_wav(&p, b"RIFF\0\0\0\0WAVEjunk").is_err());
    }
}
