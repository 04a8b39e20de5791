//! Auditory attention decoding from (ear-)EEG.
//!
//! Preprocessing ([`signal`]), lagged ridge regression ([`linmodel`]),
//! forward response functions ([`trf`]), backward stimulus reconstruction and
//! window classification ([`decoder`]), a ground-truth generator ([`synth`])
//! and file formats ([`io`]).

pub mod decoder;
pub mod error;
pub mod io;
pub mod layout;
pub mod linmodel;
pub mod signal;
pub mod synth;
pub mod trf;

pub use decoder::{
    binomial_significance, classify_window, evaluate, pearson, reconstruct, train_decoder,
    AccuracyTable, Decoder, DecoderScope, EvaluateConfig, LambdaChoice, Trial, TrialMeta,
};
pub use error::{AadError, Result};
pub use layout::{select_layout, Layout};
pub use linmodel::{build_lag_matrix, ridge_solve, select_lambda, Direction, LagConfig};
pub use signal::{BandpassSpec, MonoSeries, MultiSeries};
pub use synth::{generate_trial, SynthConfig};
pub use trf::{contrast_trfs, estimate_joint_trfs, estimate_trf, predict_response, Trf, TrfContrast};
