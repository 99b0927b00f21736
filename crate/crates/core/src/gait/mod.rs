//! Gait analytics: ideal waveforms, joint deviation under push, left/right
//! asymmetry, handedness inference, knee–ankle trade-off, CoP asymmetry and
//! synthetic trial generation.

mod ideal;
mod metrics;
mod synth;

use thiserror::Error;

pub use ideal::{
    count_periodic_peaks, gait_shape, ideal_gait, GaitAmplitudes, IdealGait,
    DEFAULT_PROMINENCE_FRACTION,
};
pub use metrics::{
    asymmetry_index, cop_asymmetry, deviation_metrics, infer_handedness, knee_ankle_tradeoff,
    spearman, AsymmetryIndex, Baseline, DeviationMetrics, HandednessVerdict, HandednessWeights,
    InferredHandedness, KneeAnkleActivity, SideMetrics, TradeoffReport, TrialTradeoff,
    DEFAULT_HANDEDNESS_THRESHOLD, MIN_TRIALS_FOR_CORRELATION,
};
pub use synth::{synthesize_trial, PushSpec, SynthOptions, REST_COUNTS};

use crate::smoothing::SmoothError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GaitError {
    #[error("series is empty")]
    EmptySeries,
    #[error("length mismatch: expected {expected}, got {got}")]
    Length { expected: usize, got: usize },
    #[error("series are not on a shared time grid")]
    GridMismatch,
    #[error("baseline window of {window_s} s does not fit a {duration} s record")]
    BaselineWindow { window_s: f64, duration: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Smooth(#[from] SmoothError),
}
