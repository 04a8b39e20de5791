//! Backward stimulus reconstruction and attended-talker classification.

mod classify;
mod evaluate;
mod model;
mod significance;
mod trial;

pub use classify::{argmax_first, classify_window, pearson, pearson_slices, WindowDecision};
pub use evaluate::{
    evaluate, AccuracyRow, AccuracyTable, DecoderScope, EvaluateConfig, WindowSummary,
    DEFAULT_WINDOWS_S,
};
pub use model::{reconstruct, train_decoder, Decoder, LambdaChoice};
pub use significance::binomial_significance;
pub use trial::{Trial, TrialMeta, AZIMUTHS_DEG, CHANCE_LEVEL, N_CANDIDATES};
