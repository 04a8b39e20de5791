use std::fs;
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::write_atomic;
use crate::error::{AadError, Result};
use crate::signal::{MonoSeries, MultiSeries};

/// On-disk encoding of an EEG matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EegDtype {
    /// Headerless little-endian `f32`, time-major (one sample's channels contiguous).
    F32le,
    /// Header row of channel labels, one sample per line.
    Csv,
}

impl EegDtype {
    pub fn extension(self) -> &'static str {
        match self {
            EegDtype::F32le => "f32",
            EegDtype::Csv => "csv",
        }
    }
}

fn first_non_finite(values: &[f64], n_cols: usize) -> Option<(usize, usize)> {
    values
        .iter()
        .position(|v| !v.is_finite())
        .map(|i| (i / n_cols.max(1), i % n_cols.max(1)))
}

fn read_f32le(path: &Path, expected_values: usize) -> Result<Vec<f64>> {
    let bytes = fs::read(path).map_err(|e| AadError::io(path, e))?;
    let expected = expected_values * 4;
    if bytes.len() != expected {
        return Err(AadError::format(
            path,
            format!("expected {expected} bytes, found {}", bytes.len()),
        ));
    }
    Ok(bytes
        .chunks_exact(4)
        .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64)
        .collect())
}

/// Load a `T x N` EEG matrix.
///
/// Binary files must hold exactly `T * N` values; CSV files must carry a
/// header equal to `channels`. Non-finite values are reported by their
/// (row, column) position in file order.
pub fn load_eeg(
    path: &Path,
    shape: (usize, usize),
    dtype: EegDtype,
    fs: f64,
    channels: &[String],
) -> Result<MultiSeries> {
    let (t, n) = shape;
    if n != channels.len() {
        return Err(AadError::Schema(format!(
            "shape has {n} channels but {} labels are given",
            channels.len()
        )));
    }
    let values = match dtype {
        EegDtype::F32le => read_f32le(path, t * n)?,
        EegDtype::Csv => read_csv(path, channels, t)?,
    };
    if let Some((row, col)) = first_non_finite(&values, n) {
        return Err(AadError::Data { row, col });
    }
    MultiSeries::new(DMatrix::from_row_slice(t, n, &values), fs, channels.to_vec())
}

fn read_csv(path: &Path, channels: &[String], t: usize) -> Result<Vec<f64>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| AadError::format(path, e.to_string()))?;
    let header = reader
        .headers()
        .map_err(|e| AadError::format(path, e.to_string()))?
        .clone();
    if header.iter().ne(channels.iter().map(String::as_str)) {
        return Err(AadError::format(
            path,
            format!(
                "header [{}] does not match channels [{}]",
                header.iter().collect::<Vec<_>>().join(","),
                channels.join(",")
            ),
        ));
    }
    let mut values = Vec::with_capacity(t * channels.len());
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| AadError::format(path, e.to_string()))?;
        for (col, field) in record.iter().enumerate() {
            let v: f64 = field.trim().parse().map_err(|_| {
                AadError::format(path, format!("row {row}, column {col}: cannot parse {field:?}"))
            })?;
            values.push(v);
        }
    }
    if values.len() != t * channels.len() {
        return Err(AadError::format(
            path,
            format!("expected {t} rows, found {}", values.len() / channels.len().max(1)),
        ));
    }
    Ok(values)
}

/// Encode an EEG matrix; binary output stores values as `f32`.
pub fn eeg_bytes(eeg: &MultiSeries, dtype: EegDtype) -> Result<Vec<u8>> {
    let m = eeg.samples();
    match dtype {
        EegDtype::F32le => {
            let mut out = Vec::with_capacity(m.len() * 4);
            for r in 0..m.nrows() {
                for c in 0..m.ncols() {
                    out.extend_from_slice(&(m[(r, c)] as f32).to_le_bytes());
                }
            }
            Ok(out)
        }
        EegDtype::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            let wrap = |e: csv::Error| AadError::Config(format!("csv encoding failed: {e}"));
            w.write_record(eeg.channels()).map_err(wrap)?;
            for r in 0..m.nrows() {
                w.write_record(m.row(r).iter().map(|v| v.to_string())).map_err(wrap)?;
            }
            w.into_inner()
                .map_err(|e| AadError::Config(format!("csv encoding failed: {e}")))
        }
    }
}

pub fn write_eeg(path: &Path, eeg: &MultiSeries, dtype: EegDtype) -> Result<()> {
    write_atomic(path, &eeg_bytes(eeg, dtype)?)
}

/// Headerless little-endian `f32` samples.
pub fn series_bytes(series: &MonoSeries) -> Vec<u8> {
    series
        .samples()
        .iter()
        .flat_map(|&v| (v as f32).to_le_bytes())
        .collect()
}

pub fn load_series(path: &Path, len: usize, fs: f64) -> Result<MonoSeries> {
    let values = read_f32le(path, len)?;
    if let Some(row) = values.iter().position(|v| !v.is_finite()) {
        return Err(AadError::Data { row, col: 0 });
    }
    MonoSeries::new(values, fs)
}

#[cfg(test)]
mod tests {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;

    fn labels(n: usize) -> Vec<String> {
        (0..n).map(|i| format!("c{i}")).collect()
    }

    #[test]
    fn binary_layout_is_time_major() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.f32");
        let bytes: Vec<u8> = [1.0f32, 2.0, 3.0, 4.0].iter().flat_map(|v| v.to_le_bytes()).collect();
        fs::write(&p, bytes).unwrap();
        let e = load_eeg(&p, (2, 2), EegDtype::F32le, 64.0, &labels(2)).unwrap();
        assert_eq!(e.samples(), &DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]));
    }

    #[test]
    fn truncated_binary_is_a_format_error() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.f32");
        fs::write(&p, [0u8; 14]).unwrap();
        match load_eeg(&p, (2, 2), EegDtype::F32le, 64.0, &labels(2)) {
            Err(AadError::Format { msg, .. }) => assert!(msg.contains("16") && msg.contains("14")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn non_finite_position_in_file_order() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.f32");
        let vals = [0.0f32, 1.0, 2.0, 3.0, f32::NAN, 5.0, f32::INFINITY, 0.0];
        fs::write(&p, vals.iter().flat_map(|v| v.to_le_bytes()).collect::<Vec<u8>>()).unwrap();
        assert!(matches!(
            load_eeg(&p, (4, 2), EegDtype::F32le, 64.0, &labels(2)),
            Err(AadError::Data { row: 2, col: 0 })
        ));
    }

    #[test]
    fn round_trips() {
        let dir = tempfile::tempdir().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let m = DMatrix::from_fn(1000, 20, |_, _| rng.random_range(-100.0f32..100.0) as f64);
        let eeg = MultiSeries::new(m, 250.0, labels(20)).unwrap();
        for dtype in [EegDtype::F32le, EegDtype::Csv] {
            let p = dir.path().join(format!("x.{}", dtype.extension()));
            write_eeg(&p, &eeg, dtype).unwrap();
            let back = load_eeg(&p, (1000, 20), dtype, 250.0, &labels(20)).unwrap();
            assert_eq!(back, eeg);
        }
    }

    #[test]
    fn csv_header_must_match() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.csv");
        fs::write(&p, "c1,c0\n1,2\n").unwrap();
        assert!(matches!(
            load_eeg(&p, (1, 2), EegDtype::Csv, 64.0, &labels(2)),
            Err(AadError::Format { .. })
        ));
        fs::write(&p, "c0,c1\n1,NaN\n").unwrap();
        assert!(matches!(
            load_eeg(&p, (1, 2), EegDtype::Csv, 64.0, &labels(2)),
            Err(AadError::Data { row: 0, col: 1 })
        ));
    }
}
