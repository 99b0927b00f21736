use serde::Serialize;

use super::GaitError;
use crate::ingest::Joint;

/// Fraction of the waveform range a maximum must stand out by to count as a peak.
pub const DEFAULT_PROMINENCE_FRACTION: f64 = 0.1;

/// Periodic lobes `(centre phase, relative height, concentration)`. Each
/// lobe is `exp(κ(cos 2π(φ − c) − 1))`, peaking at 1 on its centre.
const KNEE_LOBES: [(f64, f64, f64); 2] = [(0.15, 0.3, 8.0), (0.72, 1.0, 8.0)];
const ANKLE_LOBES: [(f64, f64, f64); 2] = [(0.12, 0.5, 40.0), (0.62, 1.0, 40.0)];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GaitAmplitudes {
    pub hip: f64,
    pub knee: f64,
    pub ankle: f64,
}

impl GaitAmplitudes {
    pub fn get(&self, joint: Joint) -> f64 {
        match joint {
            Joint::Hip => self.hip,
            Joint::Knee => self.knee,
            Joint::Ankle => self.ankle,
        }
    }
}

impl Default for GaitAmplitudes {
    fn default() -> Self {
        Self {
            hip: 20.0,
            knee: 60.0,
            ankle: 15.0,
        }
    }
}

/// Reference joint-angle waveforms over one gait cycle: a single oscillation
/// at the hip, two rounded humps at the knee, two sharp humps at the ankle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IdealGait {
    pub cycle_duration: f64,
    pub amplitudes: GaitAmplitudes,
}

fn lobes(phase: f64, shape: &[(f64, f64, f64)]) -> f64 {
    shape.iter()
        .map(|&(c, h, k)| h * (k * ((2.0 * std::f64::consts::PI * (phase - c)).cos() - 1.0)).exp())
        .sum()
}

/// Unit-amplitude shape of `joint` at cycle phase `phase` (any real; periodic).
pub fn gait_shape(joint: Joint, phase: f64) -> f64 {
    let phase = phase.rem_euclid(1.0);
    match joint {
        Joint::Hip => (2.0 * std::f64::consts::PI * phase).sin(),
        Joint::Knee => lobes(phase, &KNEE_LOBES),
        Joint::Ankle => lobes(phase, &ANKLE_LOBES),
    }
}

pub fn ideal_gait(cycle_duration: f64, amplitudes: GaitAmplitudes) -> Result<IdealGait, GaitError> {
    if !(cycle_duration.is_finite() && cycle_duration > 0.0) {
        return Err(GaitError::InvalidParameter(format!(
            "cycle duration must be positive, got {cycle_duration}"
        )));
    }
    if Joint::ALL
        .iter()
        .any(|&j| !(amplitudes.get(j).is_finite() && amplitudes.get(j) >= 0.0))
    {
        return Err(GaitError::InvalidParameter(
            "amplitudes must be non-negative".into(),
        ));
    }
    Ok(IdealGait {
        cycle_duration,
        amplitudes,
    })
}

impl IdealGait {
    pub fn angle(&self, joint: Joint, t: f64) -> f64 {
        self.amplitudes.get(joint) * gait_shape(joint, t / self.cycle_duration)
    }

    /// One cycle sampled at `n` evenly spaced phases in `[0, 1)`.
    pub fn waveform(&self, joint: Joint, n: usize) -> Vec<f64> {
        (0..n)
            .map(|k| self.amplitudes.get(joint) * gait_shape(joint, k as f64 / n as f64))
            .collect()
    }
}

/// Count maxima of a periodic sampled waveform whose prominence reaches
/// `fraction` of the waveform range. Prominence is measured circularly: the
/// height above the higher of the two lowest points reached before meeting a
/// strictly higher sample on either side.
pub fn count_periodic_peaks(y: &[f64], fraction: f64) -> usize {
    let n = y.len();
    if n < 3 {
        return 0;
    }
    let (lo, hi) = y
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| {
            (l.min(v), h.max(v))
        });
    let range = hi - lo;
    if range <= 0.0 {
        return 0;
    }
    let threshold = fraction * range;
    let at = |i: isize| y[i.rem_euclid(n as isize) as usize];
    (0..n as isize)
        .filter(|&i| at(i) > at(i - 1) && at(i) >= at(i + 1))
        .filter(|&i| {
            let h = at(i);
            let walk = |dir: isize| {
                let mut low = h;
                for step in 1..n as isize {
                    let v = at(i + dir * step);
                    if v > h {
                        break;
                    }
                    low = low.min(v);
                }
                low
            };
            h - walk(-1).max(walk(1)) >= threshold
        })
        .count()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn signature_counts() {
        let g = ideal_gait(1.1, GaitAmplitudes::default()).unwrap();
        assert_eq!(count_periodic_peaks(&g.waveform(Joint::Hip, 1000), 0.1), 1);
        assert_eq!(count_periodic_peaks(&g.waveform(Joint::Knee, 1000), 0.1), 2);
        assert_eq!(
            count_periodic_peaks(&g.waveform(Joint::Ankle, 1000), 0.1),
            2
        );
    }

    #[test]
    fn zero_amplitude_is_flat() {
        let g = ideal_gait(
            1.0,
            GaitAmplitudes {
                hip: 0.0,
                knee: 0.0,
                ankle: 0.0,
            },
        )
        .unwrap();
        for j in Joint::ALL {
            assert!(g.waveform(j, 64).iter().all(|&v| v == 0.0));
            assert_eq!(count_periodic_peaks(&g.waveform(j, 64), 0.1), 0);
        }
    }

    #[test]
    fn periodic_in_time() {
        let g = ideal_gait(0.9, GaitAmplitudes::default()).unwrap();
        for j in Joint::ALL {
            assert!((g.angle(j, 0.3) - g.angle(j, 0.3 + 0.9)).abs() < 1e-9);
        }
    }

    #[test]
    fn small_bumps_filtered() {
        // main sine peak plus a ripple far below 10% of range
        let y: Vec<f64> = (0..500)
            .map(|k| {
                let p = k as f64 / 500.0;
                (2.0 * std::f64::consts::PI * p).sin()
                    + 0.01 * (40.0 * std::f64::consts::PI * p).sin()
            })
            .collect();
        assert_eq!(count_periodic_peaks(&y, 0.1), 1);
        assert!(count_periodic_peaks(&y, 0.0) > 1);
    }

    #[test]
    fn invalid_parameters() {
        assert!(ideal_gait(0.0, GaitAmplitudes::default()).is_err());
        assert!(ideal_gait(
            1.0,
            GaitAmplitudes {
                hip: -1.0,
                ..Default::default()
            }
        )
        .is_err());
    }
}
