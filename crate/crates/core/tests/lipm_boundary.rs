use proptest::prelude::*;
use pushrec_core::lipm::{
    apply_push, capture_point, classify_recovery, decision_boundary, phase_trajectory,
    CopController, FootGeometry, LipmParams, PhasePoint, SimOptions, Verdict,
};

fn params() -> LipmParams {
    LipmParams::new(9.8, 0.98, 60.0).unwrap()
}

#[test]
fn fast_forward_push_is_a_fall() {
    let p = params();
    let r = classify_recovery(
        &p,
        &FootGeometry::default(),
        PhasePoint::new(0.0, 1.0),
        &SimOptions::default(),
    )
    .unwrap();
    assert_eq!(r.verdict, Verdict::Fall);
    assert!((r.capture_point - 0.316).abs() < 1e-3);
}

#[test]
fn bang_bang_diverges_monotonically_after_a_large_push() {
    let p = params();
    let foot = FootGeometry::default();
    let r = phase_trajectory(
        &p,
        &foot,
        PhasePoint::new(0.0, 0.0),
        80.0,
        CopController::BangBang,
        &SimOptions::default(),
    )
    .unwrap();
    assert_eq!(r.verdict, Verdict::Fall);
    assert!(r.escape_time.is_some());
    assert!(r.trajectory.windows(2).all(|w| w[1].x > w[0].x));
}

#[test]
fn capture_controller_brings_a_small_push_to_rest() {
    let p = params();
    let foot = FootGeometry::default();
    let r = phase_trajectory(
        &p,
        &foot,
        PhasePoint::new(0.0, 0.0),
        10.0,
        CopController::Capture,
        &SimOptions::default(),
    )
    .unwrap();
    assert_eq!(r.verdict, Verdict::Recoverable);
    let last = r.trajectory.last().unwrap();
    assert!(last.xdot.abs() < 1e-3 && foot.contains(last.x));
}

proptest! {
    #[test]
    fn verdict_is_monotone_in_push(x in -0.05f64..0.15, impulse in 0.0f64..60.0, extra in 0.0f64..60.0) {
        let p = params();
        let foot = FootGeometry::default();
        let b = decision_boundary(&p, &foot);
        let weak = apply_push(&p, PhasePoint::new(x, 0.0), impulse);
        let strong = apply_push(&p, PhasePoint::new(x, 0.0), impulse + extra);
        let forward_slack = |s: PhasePoint| b.xdot_at(s.x) - s.xdot;
        prop_assert!(forward_slack(strong) <= forward_slack(weak));
        if forward_slack(weak) < 0.0 {
            prop_assert!(!b.is_recoverable(strong));
        }
    }

    #[test]
    fn classification_is_translation_invariant(x in -0.3f64..0.3, v in -1.5f64..1.5, shift in -1.0f64..1.0) {
        let p = params();
        let foot = FootGeometry::default();
        let moved = FootGeometry::new(foot.cop_min + shift, foot.cop_max + shift).unwrap();
        let b = decision_boundary(&p, &foot);
        let bm = decision_boundary(&p, &moved);
        let s = PhasePoint::new(x, v);
        let sm = PhasePoint::new(x + shift, v);
        prop_assert!((b.margin(s) - bm.margin(sm)).abs() < 1e-9);
        prop_assert!((capture_point(&p, sm) - capture_point(&p, s) - shift).abs() < 1e-12);
    }

    #[test]
    fn wider_foot_never_hurts(x in -0.3f64..0.3, v in -1.5f64..1.5, widen in 0.0f64..0.2) {
        let p = params();
        let foot = FootGeometry::default();
        let wide = FootGeometry::new(foot.cop_min - widen, foot.cop_max + widen).unwrap();
        let s = PhasePoint::new(x, v);
        if decision_boundary(&p, &foot).is_recoverable(s) {
            prop_assert!(decision_boundary(&p, &wide).is_recoverable(s));
        }
    }
}
