//! Text-in, text-out stages shared by the command line and tests.

use crate::analysis::{analyze_documents, AnalysisConfig, AnalysisError, AnalysisReport};
use crate::gait::{synthesize_trial, GaitError, PushSpec, SynthOptions};
use crate::ingest::{
    ingest, parse_trial, serialize_converted, serialize_trial, ConversionConfig, IngestError,
    PushCondition, SubjectMeta,
};
use crate::smoothing::Smoother;
use crate::table::{format_table, parse_table, smooth_table, TableError};

pub fn synth_text(
    meta: &SubjectMeta,
    condition: PushCondition,
    push: PushSpec,
    noise_rms: f64,
    options: &SynthOptions,
) -> Result<String, GaitError> {
    synthesize_trial(meta, condition, push, noise_rms, options).map(|t| serialize_trial(&t))
}

pub fn ingest_text(
    raw: &str,
    rest_window: usize,
    config: &ConversionConfig,
) -> Result<String, IngestError> {
    let trial = parse_trial(raw)?;
    Ok(serialize_converted(&ingest(&trial, rest_window, config)?))
}

pub fn smooth_text(
    text: &str,
    method: Smoother,
    resample_hz: Option<f64>,
) -> Result<String, TableError> {
    Ok(format_table(&smooth_table(
        &parse_table(text)?,
        method,
        resample_hz,
    )?))
}

pub fn analyze_text(
    documents: &[(String, String)],
    config: &AnalysisConfig,
) -> Result<AnalysisReport, AnalysisError> {
    analyze_documents(documents, config, None)
}
