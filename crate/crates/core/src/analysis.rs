//! End-to-end trial analysis and the versioned JSON report.
//!
//! Report schema (`report_version` 1):
//!
//! ```text
//! {
//!   "report_version": 1,
//!   "condition_taxonomy": [ { "label", "eyes", "lunging", "stance" } × 8 ],
//!   "settings": { baseline window, gait cycle, weights, threshold, ... },
//!   "trials": [ {
//!       "source", "subject", "condition", "baseline",
//!       "left":  { "hip"|"knee"|"ankle": { "rms_deviation", "peak_deviation", "activity_score" } },
//!       "right": { ... },
//!       "asymmetry": { "hip", "knee", "ankle" },
//!       "handedness": { "inferred", "confidence", "aggregate" },
//!       "knee_ankle": { "left_ratio", "right_ratio", "cross_side" }
//!   } ],
//!   "knee_ankle_correlation": { "left", "right", "pooled" },   // null below 3 trials
//!   "cop_asymmetry": number | null
//! }
//! ```

use serde::Serialize;
use thiserror::Error;

use crate::gait::{
    asymmetry_index, cop_asymmetry, deviation_metrics, ideal_gait, infer_handedness,
    knee_ankle_tradeoff, AsymmetryIndex, Baseline, GaitAmplitudes, GaitError, HandednessVerdict,
    HandednessWeights, IdealGait, KneeAnkleActivity, SideMetrics, TrialTradeoff,
    DEFAULT_HANDEDNESS_THRESHOLD,
};
use crate::ingest::{
    ingest, is_converted, parse_converted, parse_trial, Channel, ConversionConfig, ConvertedTrial,
    ForceSeries, IngestError, Joint, PushCondition, Side, Stance, SubjectMeta, DEFAULT_REST_WINDOW,
};

pub const REPORT_VERSION: u32 = 1;
pub const DEFAULT_BASELINE_WINDOW_S: f64 = 0.8;

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("{source_name}: {error}")]
    Ingest {
        source_name: String,
        error: IngestError,
    },
    #[error("{source_name}: {error}")]
    Gait {
        source_name: String,
        error: GaitError,
    },
    #[error("inputs mix raw-count and converted-unit files; analyze one schema at a time")]
    MixedSchema,
    #[error("no input trials")]
    NoInput,
    #[error("force file line {line}: {message}")]
    ForceFile { line: usize, message: String },
    #[error("CoP asymmetry: {0}")]
    Cop(GaitError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnalysisConfig {
    /// Samples averaged for zero correction when raw trials are ingested.
    pub rest_window: usize,
    #[serde(skip)]
    pub conversion: ConversionConfig,
    pub baseline_window_s: f64,
    pub gait: IdealGait,
    pub weights: HandednessWeights,
    pub threshold: f64,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            rest_window: DEFAULT_REST_WINDOW,
            conversion: ConversionConfig::default(),
            baseline_window_s: DEFAULT_BASELINE_WINDOW_S,
            gait: ideal_gait(1.0, GaitAmplitudes::default()).expect("default gait is valid"),
            weights: HandednessWeights::default(),
            threshold: DEFAULT_HANDEDNESS_THRESHOLD,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BaselineKind {
    PrePushMean,
    FittedGait,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionEntry {
    pub label: String,
    #[serde(flatten)]
    pub condition: PushCondition,
}

impl From<PushCondition> for ConditionEntry {
    fn from(condition: PushCondition) -> Self {
        Self {
            label: condition.label(),
            condition,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialAnalysis {
    pub source: String,
    pub subject: SubjectMeta,
    pub condition: ConditionEntry,
    pub baseline: BaselineKind,
    pub left: SideMetrics,
    pub right: SideMetrics,
    pub asymmetry: AsymmetryIndex,
    pub handedness: HandednessVerdict,
    pub knee_ankle: TrialTradeoff,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrelationSummary {
    pub left: Option<f64>,
    pub right: Option<f64>,
    pub pooled: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalysisReport {
    pub report_version: u32,
    pub condition_taxonomy: Vec<ConditionEntry>,
    pub settings: AnalysisConfig,
    pub trials: Vec<TrialAnalysis>,
    pub knee_ankle_correlation: CorrelationSummary,
    pub cop_asymmetry: Option<f64>,
}

impl AnalysisReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

fn side_metrics(
    trial: &ConvertedTrial,
    side: Side,
    config: &AnalysisConfig,
) -> Result<SideMetrics, GaitError> {
    let baseline = match trial.condition.stance {
        Stance::Static => Baseline::PrePush {
            window_s: config.baseline_window_s,
        },
        Stance::Dynamic => Baseline::FittedGait {
            gait: config.gait,
            window_s: config.baseline_window_s,
        },
    };
    let m = |joint: Joint| deviation_metrics(trial.joint(Channel { side, joint }), &baseline);
    Ok(SideMetrics {
        hip: m(Joint::Hip)?,
        knee: m(Joint::Knee)?,
        ankle: m(Joint::Ankle)?,
    })
}

/// Per-joint deviations, asymmetry and handedness for one converted trial.
/// Static trials are compared against their pre-push mean, dynamic trials
/// against an ideal-gait template fitted to the pre-push window.
pub fn analyze_trial(
    source: &str,
    trial: &ConvertedTrial,
    config: &AnalysisConfig,
) -> Result<TrialAnalysis, GaitError> {
    let left = side_metrics(trial, Side::Left, config)?;
    let right = side_metrics(trial, Side::Right, config)?;
    let asymmetry = asymmetry_index(&left, &right);
    let handedness = infer_handedness(&asymmetry, &config.weights, config.threshold)?;
    let knee_ankle = knee_ankle_tradeoff(&[KneeAnkleActivity::from_sides(&left, &right)]).trials[0];
    Ok(TrialAnalysis {
        source: source.to_string(),
        subject: trial.subject.clone(),
        condition: trial.condition.into(),
        baseline: match trial.condition.stance {
            Stance::Static => BaselineKind::PrePushMean,
            Stance::Dynamic => BaselineKind::FittedGait,
        },
        left,
        right,
        asymmetry,
        handedness,
        knee_ankle,
    })
}

/// Parse and analyze a batch of trial documents `(source name, text)`. All
/// inputs must share one schema: raw counts or converted units.
pub fn analyze_documents(
    documents: &[(String, String)],
    config: &AnalysisConfig,
    cop: Option<(&ForceSeries, &ForceSeries)>,
) -> Result<AnalysisReport, AnalysisError> {
    if documents.is_empty() {
        return Err(AnalysisError::NoInput);
    }
    let converted_flags: Vec<bool> = documents
        .iter()
        .map(|(_, text)| is_converted(text))
        .collect();
    if converted_flags.iter().any(|&c| c != converted_flags[0]) {
        return Err(AnalysisError::MixedSchema);
    }
    let mut trials = Vec::with_capacity(documents.len());
    for ((name, text), converted) in documents.iter().zip(converted_flags) {
        let ingest_err = |error| AnalysisError::Ingest {
            source_name: name.clone(),
            error,
        };
        let trial = if converted {
            parse_converted(text).map_err(ingest_err)?
        } else {
            let raw = parse_trial(text).map_err(ingest_err)?;
            ingest(&raw, config.rest_window, &config.conversion).map_err(ingest_err)?
        };
        trials.push(
            analyze_trial(name, &trial, config).map_err(|error| AnalysisError::Gait {
                source_name: name.clone(),
                error,
            })?,
        );
    }
    let tradeoff = knee_ankle_tradeoff(
        &trials
            .iter()
            .map(|t| KneeAnkleActivity::from_sides(&t.left, &t.right))
            .collect::<Vec<_>>(),
    );
    let cop_asymmetry = cop
        .map(|(l, r)| cop_asymmetry(l, r).map_err(AnalysisError::Cop))
        .transpose()?;
    Ok(AnalysisReport {
        report_version: REPORT_VERSION,
        condition_taxonomy: PushCondition::all()
            .into_iter()
            .map(ConditionEntry::from)
            .collect(),
        settings: *config,
        trials,
        knee_ankle_correlation: CorrelationSummary {
            left: tradeoff.left_correlation,
            right: tradeoff.right_correlation,
            pooled: tradeoff.pooled_correlation,
        },
        cop_asymmetry,
    })
}

/// Per-foot force file: header `t,force_N`, then one sample per row.
pub fn parse_force_csv(text: &str) -> Result<ForceSeries, AnalysisError> {
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty());
    match lines.next() {
        Some((_, h)) if h.trim() == "t,force_N" => {}
        _ => {
            return Err(AnalysisError::ForceFile {
                line: 1,
                message: "expected header `t,force_N`".into(),
            })
        }
    }
    let mut t = Vec::new();
    let mut force = Vec::new();
    for (i, line) in lines {
        let err = |message: &str| AnalysisError::ForceFile {
            line: i + 1,
            message: message.into(),
        };
        let (a, b) = line
            .split_once(',')
            .ok_or_else(|| err("expected two fields"))?;
        let tv: f64 = a.trim().parse().map_err(|_| err("bad time"))?;
        let fv: f64 = b.trim().parse().map_err(|_| err("bad force"))?;
        if t.last().is_some_and(|&p| tv <= p) {
            return Err(err("timestamps must increase"));
        }
        t.push(tv);
        force.push(fv);
    }
    Ok(ForceSeries { t, force })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gait::{synthesize_trial, InferredHandedness, PushSpec, SynthOptions};
    use crate::ingest::{serialize_converted, serialize_trial, Handedness};

    fn raw_text(h: Handedness, seed: u64) -> String {
        let meta = SubjectMeta {
            handedness: h,
            ..Default::default()
        };
        let opts = SynthOptions {
            seed,
            ..Default::default()
        };
        serialize_trial(
            &synthesize_trial(
                &meta,
                PushCondition::default(),
                PushSpec::default(),
                1.0,
                &opts,
            )
            .unwrap(),
        )
    }

    #[test]
    fn right_handed_trial_is_recognised() {
        let docs = vec![("a.csv".to_string(), raw_text(Handedness::Right, 1))];
        let report = analyze_documents(&docs, &AnalysisConfig::default(), None).unwrap();
        assert_eq!(report.report_version, REPORT_VERSION);
        assert_eq!(report.condition_taxonomy.len(), 8);
        assert_eq!(
            report.trials[0].handedness.inferred,
            InferredHandedness::Right
        );
        assert!(report.knee_ankle_correlation.left.is_none());
    }

    #[test]
    fn mixed_schema_rejected() {
        let raw = raw_text(Handedness::Left, 2);
        let converted = serialize_converted(
            &ingest(
                &parse_trial(&raw).unwrap(),
                10,
                &ConversionConfig::default(),
            )
            .unwrap(),
        );
        let docs = vec![
            ("raw".to_string(), raw),
            ("conv".to_string(), converted.clone()),
        ];
        assert!(matches!(
            analyze_documents(&docs, &AnalysisConfig::default(), None),
            Err(AnalysisError::MixedSchema)
        ));
        let only = vec![("conv".to_string(), converted)];
        let r = analyze_documents(&only, &AnalysisConfig::default(), None).unwrap();
        assert_eq!(r.trials[0].handedness.inferred, InferredHandedness::Left);
        assert!(matches!(
            analyze_documents(&[], &AnalysisConfig::default(), None),
            Err(AnalysisError::NoInput)
        ));
    }

    #[test]
    fn force_csv() {
        let f = parse_force_csv("t,force_N\n0,1.5\n0.1,2\n").unwrap();
        assert_eq!(f.force, vec![1.5, 2.0]);
        assert!(parse_force_csv("time,f\n").is_err());
        assert!(parse_force_csv("t,force_N\n0,1\n0,1\n").is_err());
    }

    #[test]
    fn report_json_shape() {
        let docs = vec![("a".to_string(), raw_text(Handedness::Right, 3))];
        let json = analyze_documents(&docs, &AnalysisConfig::default(), None)
            .unwrap()
            .to_json();
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(v["report_version"], 1);
        assert_eq!(v["trials"][0]["handedness"]["inferred"], "right");
        assert_eq!(v["condition_taxonomy"][0]["label"], "open-with-static");
        assert!(v["trials"][0]["left"]["knee"]["activity_score"].is_number());
    }
}
