use serde::Serialize;

use super::ideal::{gait_shape, IdealGait};
use super::GaitError;
use crate::ingest::{sample_rate, ForceSeries, Handedness, Joint, JointSeries};
use crate::smoothing::{resample_uniform, Smoother};

/// Number of candidate phase offsets tried when fitting a gait template.
const PHASE_SEARCH_STEPS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeviationMetrics {
    /// RMS of (series − baseline) over the whole record, degrees.
    pub rms_deviation: f64,
    /// Largest |series − baseline|, degrees.
    pub peak_deviation: f64,
    /// RMS of (series − baseline) after the pre-push window, degrees.
    pub activity_score: f64,
}

impl DeviationMetrics {
    pub const ZERO: DeviationMetrics = DeviationMetrics {
        rms_deviation: 0.0,
        peak_deviation: 0.0,
        activity_score: 0.0,
    };
}

#[derive(Debug, Clone, PartialEq)]
pub enum Baseline {
    /// Mean angle over the leading `window_s` seconds.
    PrePush { window_s: f64 },
    /// Ideal waveform at phase zero, no fitting.
    Ideal { gait: IdealGait },
    /// Ideal waveform shape with gain, offset and phase least-squares fitted
    /// to the leading `window_s` seconds.
    FittedGait { gait: IdealGait, window_s: f64 },
}

/// Trapezoidal time-average of `v²`, square-rooted.
fn time_rms(t: &[f64], v: &[f64]) -> f64 {
    match t.len() {
        0 => 0.0,
        1 => v[0].abs(),
        _ => {
            let span = t[t.len() - 1] - t[0];
            let integral: f64 = t
                .windows(2)
                .zip(v.windows(2))
                .map(|(tw, vw)| 0.5 * (tw[1] - tw[0]) * (vw[0] * vw[0] + vw[1] * vw[1]))
                .sum();
            (integral / span).sqrt()
        }
    }
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Best `a·shape(t/T + φ) + b` over a phase grid; returns the fitted baseline on `t`.
fn fit_template(
    gait: &IdealGait,
    joint: Joint,
    t_fit: &[f64],
    y_fit: &[f64],
    t_all: &[f64],
) -> Vec<f64> {
    let y_mean = mean(y_fit);
    let mut best: Option<(f64, f64, f64, f64)> = None;
    for k in 0..PHASE_SEARCH_STEPS {
        let phi = k as f64 / PHASE_SEARCH_STEPS as f64;
        let w: Vec<f64> = t_fit
            .iter()
            .map(|&t| gait_shape(joint, t / gait.cycle_duration + phi))
            .collect();
        let w_mean = mean(&w);
        let sww: f64 = w.iter().map(|v| (v - w_mean).powi(2)).sum();
        let swy: f64 = w
            .iter()
            .zip(y_fit)
            .map(|(a, b)| (a - w_mean) * (b - y_mean))
            .sum();
        let gain = if sww > 0.0 { swy / sww } else { 0.0 };
        let offset = y_mean - gain * w_mean;
        let sse: f64 = w
            .iter()
            .zip(y_fit)
            .map(|(a, b)| (b - gain * a - offset).powi(2))
            .sum();
        if best.is_none_or(|(_, _, _, e)| sse < e) {
            best = Some((phi, gain, offset, sse));
        }
    }
    let (phi, gain, offset, _) = best.expect("phase grid is non-empty");
    t_all
        .iter()
        .map(|&t| gain * gait_shape(joint, t / gait.cycle_duration + phi) + offset)
        .collect()
}

/// Deviation of a joint series from a baseline, evaluated on a uniform grid at
/// the series' mean sampling rate.
pub fn deviation_metrics(
    series: &JointSeries,
    baseline: &Baseline,
) -> Result<DeviationMetrics, GaitError> {
    if series.t.is_empty() {
        return Err(GaitError::EmptySeries);
    }
    if series.t.len() != series.angle.len() {
        return Err(GaitError::Length {
            expected: series.t.len(),
            got: series.angle.len(),
        });
    }
    let (t, y) = match sample_rate(&series.t) {
        Some(rate) => resample_uniform(&series.t, &series.angle, rate, Smoother::Spline)?,
        None => (series.t.clone(), series.angle.clone()),
    };
    let t0 = t[0];
    let duration = t[t.len() - 1] - t0;
    let window_end = |window_s: f64| -> Result<usize, GaitError> {
        if !(window_s.is_finite() && window_s > 0.0) || window_s > duration {
            return Err(GaitError::BaselineWindow { window_s, duration });
        }
        Ok(t.partition_point(|&v| v < t0 + window_s).max(1))
    };
    let (base, split) = match baseline {
        Baseline::PrePush { window_s } => {
            let end = window_end(*window_s)?;
            (vec![mean(&y[..end]); t.len()], end)
        }
        Baseline::Ideal { gait } => (t.iter().map(|&v| gait.angle(series.joint, v)).collect(), 0),
        Baseline::FittedGait { gait, window_s } => {
            let end = window_end(*window_s)?;
            (
                fit_template(gait, series.joint, &t[..end], &y[..end], &t),
                end,
            )
        }
    };
    let dev: Vec<f64> = y.iter().zip(&base).map(|(a, b)| a - b).collect();
    let split = split.min(t.len() - 1);
    Ok(DeviationMetrics {
        rms_deviation: time_rms(&t, &dev),
        peak_deviation: dev.iter().fold(0.0, |m, v| m.max(v.abs())),
        activity_score: time_rms(&t[split..], &dev[split..]),
    })
}

/// Per-joint metrics for one leg.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SideMetrics {
    pub hip: DeviationMetrics,
    pub knee: DeviationMetrics,
    pub ankle: DeviationMetrics,
}

impl SideMetrics {
    pub fn get(&self, joint: Joint) -> &DeviationMetrics {
        match joint {
            Joint::Hip => &self.hip,
            Joint::Knee => &self.knee,
            Joint::Ankle => &self.ankle,
        }
    }
}

/// `(left − right) / (left + right)` of activity per joint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AsymmetryIndex {
    pub hip: f64,
    pub knee: f64,
    pub ankle: f64,
}

impl AsymmetryIndex {
    pub fn get(&self, joint: Joint) -> f64 {
        match joint {
            Joint::Hip => self.hip,
            Joint::Knee => self.knee,
            Joint::Ankle => self.ankle,
        }
    }
}

fn normalized_difference(left: f64, right: f64) -> f64 {
    let sum = left + right;
    if sum == 0.0 {
        0.0
    } else {
        (left - right) / sum
    }
}

pub fn asymmetry_index(left: &SideMetrics, right: &SideMetrics) -> AsymmetryIndex {
    let idx =
        |j: Joint| normalized_difference(left.get(j).activity_score, right.get(j).activity_score);
    AsymmetryIndex {
        hip: idx(Joint::Hip),
        knee: idx(Joint::Knee),
        ankle: idx(Joint::Ankle),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HandednessWeights {
    pub hip: f64,
    pub knee: f64,
    pub ankle: f64,
}

impl Default for HandednessWeights {
    /// Knee-dominant.
    fn default() -> Self {
        Self {
            hip: 0.3,
            knee: 0.5,
            ankle: 0.2,
        }
    }
}

pub const DEFAULT_HANDEDNESS_THRESHOLD: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum InferredHandedness {
    Left,
    Right,
    Indeterminate,
}

impl InferredHandedness {
    pub fn matches(self, h: Handedness) -> bool {
        matches!(
            (self, h),
            (InferredHandedness::Left, Handedness::Left)
                | (InferredHandedness::Right, Handedness::Right)
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HandednessVerdict {
    pub inferred: InferredHandedness,
    /// `1 − exp(−|aggregate| / threshold)`
    pub confidence: f64,
    pub aggregate: f64,
}

/// The side opposite the dominant hand works harder, so a positive (left
/// heavier) aggregate points to a right-handed subject.
pub fn infer_handedness(
    indices: &AsymmetryIndex,
    weights: &HandednessWeights,
    threshold: f64,
) -> Result<HandednessVerdict, GaitError> {
    let w = [weights.hip, weights.knee, weights.ankle];
    if w.iter().any(|v| !(v.is_finite() && *v >= 0.0)) || w.iter().sum::<f64>() <= 0.0 {
        return Err(GaitError::InvalidParameter(
            "weights must be non-negative and not all zero".into(),
        ));
    }
    if !(threshold.is_finite() && threshold >= 0.0) {
        return Err(GaitError::InvalidParameter(format!(
            "threshold must be non-negative, got {threshold}"
        )));
    }
    let aggregate =
        (weights.hip * indices.hip + weights.knee * indices.knee + weights.ankle * indices.ankle)
            / w.iter().sum::<f64>();
    let inferred = if aggregate > threshold {
        InferredHandedness::Right
    } else if aggregate < -threshold {
        InferredHandedness::Left
    } else {
        InferredHandedness::Indeterminate
    };
    let confidence = if threshold > 0.0 {
        1.0 - (-aggregate.abs() / threshold).exp()
    } else if aggregate != 0.0 {
        1.0
    } else {
        0.0
    };
    Ok(HandednessVerdict {
        inferred,
        confidence,
        aggregate,
    })
}

/// Knee and ankle activity of both legs in one trial.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KneeAnkleActivity {
    pub left_knee: f64,
    pub left_ankle: f64,
    pub right_knee: f64,
    pub right_ankle: f64,
}

impl KneeAnkleActivity {
    pub fn from_sides(left: &SideMetrics, right: &SideMetrics) -> Self {
        Self {
            left_knee: left.knee.activity_score,
            left_ankle: left.ankle.activity_score,
            right_knee: right.knee.activity_score,
            right_ankle: right.ankle.activity_score,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrialTradeoff {
    /// knee / ankle activity; `None` when ankle activity is zero.
    pub left_ratio: Option<f64>,
    pub right_ratio: Option<f64>,
    /// Rank correlation of (knee, ankle) across the two legs: −1 when the
    /// leg with more knee activity has less ankle activity.
    pub cross_side: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TradeoffReport {
    pub trials: Vec<TrialTradeoff>,
    /// Spearman correlation of knee vs ankle activity over trials, per leg and
    /// pooled over both legs; omitted for fewer than three trials.
    pub left_correlation: Option<f64>,
    pub right_correlation: Option<f64>,
    pub pooled_correlation: Option<f64>,
}

pub const MIN_TRIALS_FOR_CORRELATION: usize = 3;

fn ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut out = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        let rank = 0.5 * (i + j) as f64 + 1.0;
        for &k in &idx[i..=j] {
            out[k] = rank;
        }
        i = j + 1;
    }
    out
}

/// Spearman rank correlation with average ranks for ties; 0 when either side
/// has no variance.
pub fn spearman(a: &[f64], b: &[f64]) -> f64 {
    let (ra, rb) = (ranks(a), ranks(b));
    let (ma, mb) = (mean(&ra), mean(&rb));
    let cov: f64 = ra.iter().zip(&rb).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = ra.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = rb.iter().map(|y| (y - mb).powi(2)).sum();
    if va == 0.0 || vb == 0.0 {
        0.0
    } else {
        cov / (va * vb).sqrt()
    }
}

pub fn knee_ankle_tradeoff(batch: &[KneeAnkleActivity]) -> TradeoffReport {
    let ratio = |k: f64, a: f64| if a == 0.0 { None } else { Some(k / a) };
    let trials = batch
        .iter()
        .map(|t| TrialTradeoff {
            left_ratio: ratio(t.left_knee, t.left_ankle),
            right_ratio: ratio(t.right_knee, t.right_ankle),
            cross_side: spearman(&[t.left_knee, t.right_knee], &[t.left_ankle, t.right_ankle]),
        })
        .collect();
    let enough = batch.len() >= MIN_TRIALS_FOR_CORRELATION;
    let corr = |knee: Vec<f64>, ankle: Vec<f64>| enough.then(|| spearman(&knee, &ankle));
    TradeoffReport {
        trials,
        left_correlation: corr(
            batch.iter().map(|t| t.left_knee).collect(),
            batch.iter().map(|t| t.left_ankle).collect(),
        ),
        right_correlation: corr(
            batch.iter().map(|t| t.right_knee).collect(),
            batch.iter().map(|t| t.right_ankle).collect(),
        ),
        pooled_correlation: corr(
            batch
                .iter()
                .flat_map(|t| [t.left_knee, t.right_knee])
                .collect(),
            batch
                .iter()
                .flat_map(|t| [t.left_ankle, t.right_ankle])
                .collect(),
        ),
    }
}

/// `(mean left − mean right) / (mean left + mean right)` of per-foot force;
/// positive when the left foot carries more.
pub fn cop_asymmetry(left: &ForceSeries, right: &ForceSeries) -> Result<f64, GaitError> {
    if left.force.len() != right.force.len()
        || left.t.len() != left.force.len()
        || right.t.len() != right.force.len()
    {
        return Err(GaitError::Length {
            expected: left.force.len(),
            got: right.force.len(),
        });
    }
    if left.force.is_empty() {
        return Err(GaitError::EmptySeries);
    }
    if left
        .t
        .iter()
        .zip(&right.t)
        .any(|(a, b)| (a - b).abs() > 1e-9)
    {
        return Err(GaitError::GridMismatch);
    }
    Ok(normalized_difference(mean(&left.force), mean(&right.force)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gait::ideal::{ideal_gait, GaitAmplitudes};
    use crate::ingest::Side;

    fn series(t: &[f64], angle: Vec<f64>) -> JointSeries {
        JointSeries {
            joint: Joint::Knee,
            side: Side::Left,
            t: t.to_vec(),
            angle,
        }
    }

    fn grid(n: usize, dt: f64) -> Vec<f64> {
        (0..n).map(|k| k as f64 * dt).collect()
    }

    #[test]
    fn identical_to_baseline() {
        let g = ideal_gait(1.0, GaitAmplitudes::default()).unwrap();
        let t = grid(301, 0.01);
        let s = series(&t, t.iter().map(|&v| g.angle(Joint::Knee, v)).collect());
        let m = deviation_metrics(&s, &Baseline::Ideal { gait: g }).unwrap();
        assert!(m.rms_deviation < 1e-9 && m.peak_deviation < 1e-9 && m.activity_score < 1e-9);
        let flat = series(&t, vec![3.0; t.len()]);
        assert_eq!(
            deviation_metrics(&flat, &Baseline::PrePush { window_s: 0.5 }).unwrap(),
            DeviationMetrics::ZERO
        );
    }

    #[test]
    fn constant_offset() {
        let g = ideal_gait(1.0, GaitAmplitudes::default()).unwrap();
        let t = grid(201, 0.01);
        let s = series(
            &t,
            t.iter().map(|&v| g.angle(Joint::Knee, v) + 5.0).collect(),
        );
        let m = deviation_metrics(&s, &Baseline::Ideal { gait: g }).unwrap();
        assert!((m.rms_deviation - 5.0).abs() < 1e-9);
        assert!((m.peak_deviation - 5.0).abs() < 1e-9);
    }

    #[test]
    fn half_sine_bump_rms() {
        // 10° half-sine over 2 s of a 10 s record, quiet 1 s lead-in
        let t = grid(1001, 0.01);
        let angle = t
            .iter()
            .map(|&v| {
                if (3.0..=5.0).contains(&v) {
                    10.0 * (std::f64::consts::PI * (v - 3.0) / 2.0).sin()
                } else {
                    0.0
                }
            })
            .collect();
        let m =
            deviation_metrics(&series(&t, angle), &Baseline::PrePush { window_s: 1.0 }).unwrap();
        assert!(
            (m.rms_deviation - 10.0 * 0.1f64.sqrt()).abs() < 1e-6,
            "{}",
            m.rms_deviation
        );
        assert!((m.peak_deviation - 10.0).abs() < 1e-9);
    }

    #[test]
    fn fitted_gait_absorbs_gain_offset_phase() {
        let g = ideal_gait(1.0, GaitAmplitudes::default()).unwrap();
        let t = grid(401, 0.01);
        let angle = t
            .iter()
            .map(|&v| 0.7 * gait_shape(Joint::Knee, v + 0.35) * 40.0 - 12.0)
            .collect();
        let m = deviation_metrics(
            &series(&t, angle),
            &Baseline::FittedGait {
                gait: g,
                window_s: 1.5,
            },
        )
        .unwrap();
        assert!(m.rms_deviation < 1e-6, "{}", m.rms_deviation);
    }

    #[test]
    fn window_too_long() {
        let t = grid(11, 0.1);
        let err = deviation_metrics(
            &series(&t, vec![0.0; 11]),
            &Baseline::PrePush { window_s: 2.0 },
        )
        .unwrap_err();
        assert!(matches!(err, GaitError::BaselineWindow { .. }));
        assert!(
            deviation_metrics(&series(&[], vec![]), &Baseline::PrePush { window_s: 1.0 }).is_err()
        );
    }

    fn side(h: f64, k: f64, a: f64) -> SideMetrics {
        let m = |v| DeviationMetrics {
            rms_deviation: v,
            peak_deviation: v,
            activity_score: v,
        };
        SideMetrics {
            hip: m(h),
            knee: m(k),
            ankle: m(a),
        }
    }

    #[test]
    fn asymmetry_examples() {
        let l = side(1.0, 3.0, 2.0);
        let r = side(1.0, 1.0, 0.0);
        let idx = asymmetry_index(&l, &r);
        assert_eq!(idx.hip, 0.0);
        assert_eq!(idx.knee, 0.5);
        assert_eq!(idx.ankle, 1.0);
        let swapped = asymmetry_index(&r, &l);
        assert_eq!(swapped.knee, -0.5);
        let zero = asymmetry_index(&side(0.0, 0.0, 0.0), &side(0.0, 0.0, 0.0));
        assert_eq!(
            zero,
            AsymmetryIndex {
                hip: 0.0,
                knee: 0.0,
                ankle: 0.0
            }
        );
    }

    #[test]
    fn handedness_examples() {
        let w = HandednessWeights::default();
        let none = infer_handedness(
            &AsymmetryIndex {
                hip: 0.0,
                knee: 0.0,
                ankle: 0.0,
            },
            &w,
            0.1,
        )
        .unwrap();
        assert_eq!(none.inferred, InferredHandedness::Indeterminate);
        assert_eq!(none.confidence, 0.0);

        // left joints twice as active as right
        let idx = asymmetry_index(&side(2.0, 2.0, 2.0), &side(1.0, 1.0, 1.0));
        let v = infer_handedness(&idx, &w, 0.1).unwrap();
        assert_eq!(v.inferred, InferredHandedness::Right);
        assert!(v.confidence > 0.5);

        let mirrored = AsymmetryIndex {
            hip: -idx.hip,
            knee: -idx.knee,
            ankle: -idx.ankle,
        };
        let m = infer_handedness(&mirrored, &w, 0.1).unwrap();
        assert_eq!(m.inferred, InferredHandedness::Left);
        assert_eq!(m.confidence, v.confidence);

        let bad = HandednessWeights {
            hip: 0.0,
            knee: 0.0,
            ankle: 0.0,
        };
        assert!(infer_handedness(&idx, &bad, 0.1).is_err());
    }

    #[test]
    fn tradeoff_examples() {
        let anti = KneeAnkleActivity {
            left_knee: 4.0,
            left_ankle: 1.0,
            right_knee: 1.0,
            right_ankle: 4.0,
        };
        let r = knee_ankle_tradeoff(&[anti]);
        assert_eq!(r.trials[0].cross_side, -1.0);
        assert_eq!(r.trials[0].left_ratio, Some(4.0));
        assert_eq!(r.left_correlation, None);

        let same = KneeAnkleActivity {
            left_knee: 2.0,
            left_ankle: 2.0,
            right_knee: 2.0,
            right_ankle: 2.0,
        };
        let r = knee_ankle_tradeoff(&[same; 4]);
        assert_eq!(r.trials[0].cross_side, 0.0);
        assert_eq!(r.left_correlation, Some(0.0));
        assert_eq!(r.pooled_correlation, Some(0.0));

        let zero_ankle = KneeAnkleActivity {
            left_ankle: 0.0,
            ..same
        };
        assert_eq!(
            knee_ankle_tradeoff(&[zero_ankle]).trials[0].left_ratio,
            None
        );
    }

    #[test]
    fn spearman_ties() {
        assert!((spearman(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]) + 1.0).abs() < 1e-12);
        assert!((spearman(&[1.0, 1.0, 2.0], &[1.0, 1.0, 2.0]) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cop_examples() {
        let t = vec![0.0, 0.1, 0.2];
        let f = |v: f64| ForceSeries {
            t: t.clone(),
            force: vec![v; 3],
        };
        assert_eq!(cop_asymmetry(&f(5.0), &f(5.0)).unwrap(), 0.0);
        assert!((cop_asymmetry(&f(6.0), &f(4.0)).unwrap() - 0.2).abs() < 1e-12);
        assert!((cop_asymmetry(&f(4.0), &f(6.0)).unwrap() + 0.2).abs() < 1e-12);
        assert_eq!(cop_asymmetry(&f(0.0), &f(0.0)).unwrap(), 0.0);
        let short = ForceSeries {
            t: vec![0.0],
            force: vec![1.0],
        };
        assert!(cop_asymmetry(&f(1.0), &short).is_err());
    }
}
