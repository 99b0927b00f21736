use pushrec_core::analysis::{analyze_trial, AnalysisConfig};
use pushrec_core::gait::{
    knee_ankle_tradeoff, synthesize_trial, InferredHandedness, KneeAnkleActivity, PushSpec,
    SynthOptions,
};
use pushrec_core::ingest::{ingest, ConversionConfig, Handedness, PushCondition, SubjectMeta};

fn analyze(
    meta: &SubjectMeta,
    condition: PushCondition,
    opts: &SynthOptions,
    noise: f64,
    mirror: bool,
) -> pushrec_core::analysis::TrialAnalysis {
    let mut raw = synthesize_trial(meta, condition, PushSpec::default(), noise, opts).unwrap();
    if mirror {
        raw = raw.mirrored();
    }
    let converted = ingest(&raw, 10, &ConversionConfig::default()).unwrap();
    analyze_trial("t", &converted, &AnalysisConfig::default()).unwrap()
}

#[test]
fn mirror_negates_indices_and_keeps_confidence() {
    let meta = SubjectMeta {
        handedness: Handedness::Right,
        ..Default::default()
    };
    for condition in PushCondition::all() {
        let opts = SynthOptions {
            seed: 5,
            ..Default::default()
        };
        let a = analyze(&meta, condition, &opts, 0.0, false);
        let b = analyze(&meta, condition, &opts, 0.0, true);
        assert!(
            (a.asymmetry.knee + b.asymmetry.knee).abs() < 1e-12,
            "{condition:?}"
        );
        assert!((a.asymmetry.hip + b.asymmetry.hip).abs() < 1e-12);
        assert!((a.asymmetry.ankle + b.asymmetry.ankle).abs() < 1e-12);
        assert!((a.handedness.confidence - b.handedness.confidence).abs() < 1e-12);
        assert_eq!(a.handedness.inferred, InferredHandedness::Right);
        assert_eq!(b.handedness.inferred, InferredHandedness::Left);
    }
}

#[test]
fn unknown_handedness_subject_has_symmetric_response() {
    let meta = SubjectMeta {
        handedness: Handedness::Unknown,
        ..Default::default()
    };
    let a = analyze(
        &meta,
        PushCondition::default(),
        &SynthOptions::default(),
        0.0,
        false,
    );
    assert_eq!(a.handedness.inferred, InferredHandedness::Indeterminate);
}

#[test]
fn inverse_knee_ankle_coupling_gives_strong_negative_correlation() {
    let meta = SubjectMeta::default();
    let activities: Vec<KneeAnkleActivity> = (0..12)
        .map(|k| {
            let opts = SynthOptions {
                seed: 300 + k,
                strategy: -0.9 + 0.15 * k as f64,
                ..Default::default()
            };
            let a = analyze(&meta, PushCondition::default(), &opts, 1.0, false);
            KneeAnkleActivity::from_sides(&a.left, &a.right)
        })
        .collect();
    let report = knee_ankle_tradeoff(&activities);
    assert!(
        report.left_correlation.unwrap() <= -0.8,
        "{:?}",
        report.left_correlation
    );
    assert!(
        report.right_correlation.unwrap() <= -0.8,
        "{:?}",
        report.right_correlation
    );
}
