//! The `aad` command line.

use std::path::{Path, PathBuf};

use aad_core::decoder::{evaluate, DecoderScope, EvaluateConfig, LambdaChoice, DEFAULT_WINDOWS_S};
use aad_core::io::{
    dataset_trials, load_dataset, prepare_trial, results_csv, summary_json, trf_contrast_csv,
    trf_contrast_json, write_atomic, write_dataset, EegDtype, PrepConfig,
};
use aad_core::layout::Layout;
use aad_core::linmodel::{LagConfig, DEFAULT_LAMBDA_GRID};
use aad_core::signal::BandpassSpec;
use aad_core::synth::{generate_trials, NoiseKind, SynthConfig};
use aad_core::trf::{contrast_trfs, estimate_all_stream_trfs};
use aad_core::{AadError, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_DATA: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "aad", version, about = "Auditory attention decoding pipeline")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic dataset with known forward kernels.
    Synth(SynthArgs),
    /// Run the preprocessing chain and write a preprocessed dataset.
    Preprocess(PreprocessArgs),
    /// Estimate per-stream forward TRFs and the attended/unattended contrast.
    Trf(TrfArgs),
    /// Leave-one-trial-out decoding accuracy per decision window length.
    Decode(DecodeArgs),
    /// List or show channel layouts.
    Layout(LayoutArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OnOff {
    On,
    Off,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum DtypeArg {
    F32le,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ScopeArg {
    Subject,
    Population,
}

#[derive(Debug, Args)]
struct SynthArgs {
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 16)]
    subjects: usize,
    #[arg(long, default_value_t = 8)]
    trials: usize,
    #[arg(long = "length-s", default_value_t = 60.0)]
    length_s: f64,
    #[arg(long = "snr-db", default_value_t = 0.0, allow_hyphen_values = true)]
    snr_db: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 20)]
    channels: usize,
    /// Only the first N channels carry the response.
    #[arg(long)]
    informative: Option<usize>,
    #[arg(long = "attended-gain", default_value_t = 1.5)]
    attended_gain: f64,
    #[arg(long = "unattended-gain", default_value_t = 1.0)]
    unattended_gain: f64,
    /// 1/f instead of white observation noise.
    #[arg(long)]
    pink: bool,
    #[arg(long, value_enum, default_value_t = DtypeArg::F32le)]
    dtype: DtypeArg,
}

#[derive(Debug, Args)]
struct PrepArgs {
    /// Pass band in Hz, `LO:HI`.
    #[arg(long, default_value = "2:8", value_parser = parse_range)]
    band: (f64, f64),
    #[arg(long = "target-fs", default_value_t = 64.0)]
    target_fs: f64,
    #[arg(long, value_enum, default_value_t = OnOff::On)]
    car: OnOff,
}

impl PrepArgs {
    fn config(&self) -> PrepConfig {
        PrepConfig {
            band: BandpassSpec::new(self.band.0, self.band.1, 4),
            target_fs: self.target_fs,
            car: self.car == OnOff::On,
            ..PrepConfig::default()
        }
    }
}

#[derive(Debug, Args)]
struct PreprocessArgs {
    #[arg(long)]
    manifest: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    prep: PrepArgs,
    #[arg(long, value_enum, default_value_t = DtypeArg::F32le)]
    dtype: DtypeArg,
}

#[derive(Debug, Args)]
struct TrfArgs {
    #[arg(long)]
    manifest: PathBuf,
    /// Lag window in ms, `MIN:MAX`.
    #[arg(long, default_value = "-50:450", value_parser = parse_range, allow_hyphen_values = true)]
    lags: (f64, f64),
    /// `auto` or a fixed relative penalty.
    #[arg(long, default_value = "auto", value_parser = parse_lambda)]
    lambda: LambdaChoice,
    #[arg(long)]
    out: PathBuf,
    /// Also write a plot-ready long-format CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
    #[command(flatten)]
    prep: PrepArgs,
}

#[derive(Debug, Args)]
struct DecodeArgs {
    #[arg(long)]
    manifest: PathBuf,
    /// Decision window lengths in seconds.
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_WINDOWS_S.to_vec())]
    windows: Vec<f64>,
    /// Built-in layout name or a file with one channel label per line.
    #[arg(long)]
    layout: Option<String>,
    #[arg(long, default_value = "auto", value_parser = parse_lambda)]
    lambda: LambdaChoice,
    #[arg(long, default_value = "-50:450", value_parser = parse_range, allow_hyphen_values = true)]
    lags: (f64, f64),
    #[arg(long, value_enum, default_value_t = ScopeArg::Subject)]
    scope: ScopeArg,
    #[arg(long = "inner-folds", default_value_t = 5)]
    inner_folds: usize,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    summary: Option<PathBuf>,
    #[command(flatten)]
    prep: PrepArgs,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
struct LayoutArgs {
    #[arg(long)]
    list: bool,
    #[arg(long)]
    show: Option<String>,
}

fn parse_range(s: &str) -> std::result::Result<(f64, f64), String> {
    let (lo, hi) = s
        .split_once(':')
        .ok_or_else(|| format!("expected LO:HI, got {s:?}"))?;
    let lo: f64 = lo.trim().parse().map_err(|_| format!("bad number {lo:?}"))?;
    let hi: f64 = hi.trim().parse().map_err(|_| format!("bad number {hi:?}"))?;
    if !(lo < hi) {
        return Err(format!("range {s:?} is empty"));
    }
    Ok((lo, hi))
}

fn parse_lambda(s: &str) -> std::result::Result<LambdaChoice, String> {
    if s.eq_ignore_ascii_case("auto") {
        return Ok(LambdaChoice::Auto(DEFAULT_LAMBDA_GRID.to_vec()));
    }
    match s.parse::<f64>() {
        Ok(v) if v.is_finite() && v >= 0.0 => Ok(LambdaChoice::Fixed(v)),
        _ => Err(format!("expected `auto` or a nonnegative number, got {s:?}")),
    }
}

fn dtype(d: DtypeArg) -> EegDtype {
    match d {
        DtypeArg::F32le => EegDtype::F32le,
        DtypeArg::Csv => EegDtype::Csv,
    }
}

fn run_synth(a: &SynthArgs) -> Result<String> {
    let cfg = SynthConfig {
        n_subjects: a.subjects,
        trials_per_subject: a.trials,
        trial_length_s: a.length_s,
        n_channels: a.channels,
        attended_gain: a.attended_gain,
        unattended_gain: a.unattended_gain,
        snr_db: a.snr_db,
        seed: a.seed,
        informative_channels: a.informative,
        noise: if a.pink { NoiseKind::Pink } else { NoiseKind::White },
        ..SynthConfig::default()
    };
    let trials = generate_trials(&cfg)?;
    write_dataset(&a.out, &trials, dtype(a.dtype))?;
    Ok(format!(
        "wrote {} trials to {}",
        trials.len(),
        a.out.join("manifest.json").display()
    ))
}

fn run_preprocess(a: &PreprocessArgs) -> Result<String> {
    let ds = load_dataset(&a.manifest)?;
    let cfg = a.prep.config();
    let trials = ds
        .trials
        .iter()
        .map(|raw| prepare_trial(raw, &cfg))
        .collect::<Result<Vec<_>>>()?;
    write_dataset(&a.out, &trials, dtype(a.dtype))?;
    Ok(format!("wrote {} preprocessed trials to {}", trials.len(), a.out.display()))
}

fn load_trials(manifest: &Path, prep: &PrepArgs) -> Result<Vec<aad_core::Trial>> {
    let ds = load_dataset(manifest)?;
    dataset_trials(&ds, &prep.config())
}

fn run_trf(a: &TrfArgs) -> Result<String> {
    let trials = load_trials(&a.manifest, &a.prep)?;
    let lags = LagConfig::new(a.lags.0, a.lags.1, trials[0].fs())?;
    let sets = estimate_all_stream_trfs(&trials, &lags, &a.lambda)?;
    let contrast = contrast_trfs(&sets)?;
    let json = trf_contrast_json(&contrast)?;
    let csv = a.csv.as_ref().map(|_| trf_contrast_csv(&contrast)).transpose()?;
    write_atomic(&a.out, json.as_bytes())?;
    if let (Some(p), Some(text)) = (&a.csv, csv) {
        write_atomic(p, text.as_bytes())?;
    }
    Ok(format!(
        "attended peak {:.4}, unattended peak {:.4} over {} trials",
        contrast.attended_peak, contrast.unattended_peak, contrast.n_trials
    ))
}

fn run_decode(a: &DecodeArgs) -> Result<String> {
    let layout = a.layout.as_deref().map(Layout::resolve).transpose()?;
    let trials = load_trials(&a.manifest, &a.prep)?;
    let cfg = EvaluateConfig {
        lag_min_ms: a.lags.0,
        lag_max_ms: a.lags.1,
        lambda: a.lambda.clone(),
        inner_folds: a.inner_folds,
        window_lengths_s: a.windows.clone(),
        layout,
        scope: match a.scope {
            ScopeArg::Subject => DecoderScope::Subject,
            ScopeArg::Population => DecoderScope::Population,
        },
    };
    let table = evaluate(&trials, &cfg)?;
    let csv = results_csv(&table)?;
    let summary = summary_json(&table)?;
    write_atomic(&a.out, csv.as_bytes())?;
    if let Some(p) = &a.summary {
        write_atomic(p, summary.as_bytes())?;
    }
    let lines: Vec<String> = table
        .summary()?
        .iter()
        .map(|s| format!("{:>5} s  mean {:.3}  sd {:.3}  p {:.2e}", s.window_s, s.mean_accuracy, s.sd_accuracy, s.p_value))
        .collect();
    Ok(lines.join("\n"))
}

fn run_layout(a: &LayoutArgs) -> Result<String> {
    if a.list {
        return Ok(Layout::builtin_names()
            .map(|(n, d)| format!("{n:<8} {d}"))
            .collect::<Vec<_>>()
            .join("\n"));
    }
    let name = a.show.as_deref().unwrap_or_default();
    let l = Layout::resolve(name)?;
    Ok(format!("{} ({} channels)\n{}", l.name, l.channels.len(), l.channels.join("\n")))
}

fn exit_code(e: &AadError) -> i32 {
    if e.is_data_error() {
        EXIT_DATA
    } else {
        EXIT_CONFIG
    }
}

/// Run the command line and return the process exit code.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    let out = match &cli.command {
        Command::Synth(a) => run_synth(a),
        Command::Preprocess(a) => run_preprocess(a),
        Command::Trf(a) => run_trf(a),
        Command::Decode(a) => run_decode(a),
        Command::Layout(a) => run_layout(a),
    };
    match out {
        Ok(msg) => {
            println!("{msg}");
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
