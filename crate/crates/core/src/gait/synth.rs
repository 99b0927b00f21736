//! Seeded synthetic trials standing in for recorded subjects.
//!
//! Joint counts are a rest posture (static stance) or the ideal gait with the
//! legs half a cycle apart (dynamic stance), plus a damped push response. The
//! leg opposite the dominant hand responds harder, with the knee carrying most
//! of the recovery on that side and the ankle on the other.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::ideal::{GaitAmplitudes, IdealGait};
use super::GaitError;
use crate::ingest::{
    Channel, Eyes, Handedness, Joint, Lunging, PushCondition, RawSample, RawTrial, Side, Stance,
    SubjectMeta, DEFAULT_ACCEL_FULL_SCALE_G, DEFAULT_ANGLE_SCALE, DEFAULT_GYRO_FULL_SCALE_DPS,
    FORCE_SCALE, MAX_COUNT,
};

/// Rest counts in channel order (rhip, lhip, rknee, lknee, rankle, lankle).
pub const REST_COUNTS: [f64; 6] = [500.0, 500.0, 520.0, 520.0, 480.0, 480.0];

/// Peak joint response per unit impulse, degrees per N·s.
const RESPONSE_GAIN: f64 = 0.4;
const RESPONSE_DECAY_S: f64 = 0.4;
const RESPONSE_FREQ_HZ: f64 = 1.5;
const CONTACT_S: f64 = 0.2;

/// Relative response on the leg opposite the dominant hand.
const ACTIVE_FACTORS: [f64; 3] = [1.0, 2.0, 0.5];
/// Relative response on the leg on the dominant-hand side.
const PASSIVE_FACTORS: [f64; 3] = [0.5, 0.6, 0.9];

const OPEN_EYES_FACTOR: f64 = 0.7;
const LUNGING_FACTOR: f64 = 0.8;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PushSpec {
    pub onset: f64,
    /// N·s
    pub impulse: f64,
}

impl Default for PushSpec {
    fn default() -> Self {
        Self {
            onset: 1.0,
            impulse: 20.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthOptions {
    pub seed: u64,
    pub duration: f64,
    pub rate: f64,
    pub cycle_duration: f64,
    pub amplitudes: GaitAmplitudes,
    /// Knee-versus-ankle emphasis in `[-1, 1]`: scales knee response by
    /// `1 + s/2` and ankle response by `1 − s/2`.
    pub strategy: f64,
}

impl Default for SynthOptions {
    fn default() -> Self {
        Self {
            seed: 42,
            duration: 4.0,
            rate: 100.0,
            cycle_duration: 1.0,
            amplitudes: GaitAmplitudes::default(),
            strategy: 0.0,
        }
    }
}

fn joint_slot(j: Joint) -> usize {
    match j {
        Joint::Hip => 0,
        Joint::Knee => 1,
        Joint::Ankle => 2,
    }
}

fn response_factor(handedness: Handedness, ch: Channel, strategy: f64) -> f64 {
    let active = match handedness {
        Handedness::Right => ch.side == Side::Left,
        Handedness::Left => ch.side == Side::Right,
        Handedness::Unknown => true,
    };
    let base = if active {
        ACTIVE_FACTORS
    } else {
        PASSIVE_FACTORS
    }[joint_slot(ch.joint)];
    base * match ch.joint {
        Joint::Knee => 1.0 + 0.5 * strategy,
        Joint::Ankle => 1.0 - 0.5 * strategy,
        Joint::Hip => 1.0,
    }
}

fn damped(tau: f64) -> f64 {
    if tau < 0.0 {
        0.0
    } else {
        (-tau / RESPONSE_DECAY_S).exp()
            * (2.0 * std::f64::consts::PI * RESPONSE_FREQ_HZ * tau).sin()
    }
}

fn damped_rate(tau: f64) -> f64 {
    if tau < 0.0 {
        return 0.0;
    }
    let w = 2.0 * std::f64::consts::PI * RESPONSE_FREQ_HZ;
    (-tau / RESPONSE_DECAY_S).exp() * (w * (w * tau).cos() - (w * tau).sin() / RESPONSE_DECAY_S)
}

fn contact_force(tau: f64, impulse: f64) -> f64 {
    if (0.0..=CONTACT_S).contains(&tau) {
        std::f64::consts::PI * impulse / (2.0 * CONTACT_S)
            * (std::f64::consts::PI * tau / CONTACT_S).sin()
    } else {
        0.0
    }
}

fn quantize(v: f64) -> u16 {
    v.round().clamp(0.0, f64::from(MAX_COUNT)) as u16
}

fn imu_count(value: f64, full_scale: f64) -> f64 {
    (value / full_scale + 1.0) * 0.5 * f64::from(MAX_COUNT)
}

/// Deterministic for a given seed. The force channel saturates at 999 counts.
pub fn synthesize_trial(
    meta: &SubjectMeta,
    condition: PushCondition,
    push: PushSpec,
    noise_rms: f64,
    options: &SynthOptions,
) -> Result<RawTrial, GaitError> {
    meta.validate()
        .map_err(|e| GaitError::InvalidParameter(e.to_string()))?;
    let positive = |name: &str, v: f64| {
        if v.is_finite() && v > 0.0 {
            Ok(())
        } else {
            Err(GaitError::InvalidParameter(format!(
                "{name} must be positive, got {v}"
            )))
        }
    };
    positive("duration", options.duration)?;
    positive("rate", options.rate)?;
    positive("cycle duration", options.cycle_duration)?;
    if !(noise_rms.is_finite() && noise_rms >= 0.0) {
        return Err(GaitError::InvalidParameter(format!(
            "noise must be non-negative, got {noise_rms}"
        )));
    }
    if !(push.impulse.is_finite() && push.onset.is_finite()) {
        return Err(GaitError::InvalidParameter("push must be finite".into()));
    }
    if !(-1.0..=1.0).contains(&options.strategy) {
        return Err(GaitError::InvalidParameter(
            "strategy must lie in [-1, 1]".into(),
        ));
    }

    let gait = IdealGait {
        cycle_duration: options.cycle_duration,
        amplitudes: options.amplitudes,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let noise = Normal::new(0.0, noise_rms).expect("noise rms validated");
    let mut draw = |v: f64| {
        if noise_rms > 0.0 {
            v + noise.sample(&mut rng)
        } else {
            v
        }
    };

    let condition_gain = if condition.eyes == Eyes::Open {
        OPEN_EYES_FACTOR
    } else {
        1.0
    } * if condition.lunging == Lunging::With {
        LUNGING_FACTOR
    } else {
        1.0
    };
    let amplitude = RESPONSE_GAIN * push.impulse * condition_gain;
    let factors = Channel::ALL.map(|ch| response_factor(meta.handedness, ch, options.strategy));

    let n = (options.duration * options.rate).round() as usize + 1;
    let mut samples = Vec::with_capacity(n);
    for k in 0..n {
        let t = k as f64 / options.rate;
        let tau = t - push.onset;
        let response = damped(tau);

        let mut joint_counts = [0u16; 6];
        for ch in Channel::ALL {
            let i = ch.index();
            let gait_angle = match condition.stance {
                Stance::Static => 0.0,
                Stance::Dynamic => {
                    let lag = if ch.side == Side::Left {
                        0.5 * options.cycle_duration
                    } else {
                        0.0
                    };
                    gait.angle(ch.joint, t + lag)
                }
            };
            let angle = gait_angle + amplitude * factors[i] * response;
            joint_counts[i] = quantize(draw(REST_COUNTS[i] + angle / DEFAULT_ANGLE_SCALE));
        }

        let force = contact_force(tau, push.impulse);
        let force_count = quantize(draw(force / FORCE_SCALE));
        let accel_g = [
            force / meta.weight / crate::dynamics::DEFAULT_GRAVITY,
            0.0,
            1.0,
        ];
        let accel_counts =
            accel_g.map(|a| quantize(draw(imu_count(a, DEFAULT_ACCEL_FULL_SCALE_G))));
        let pitch_rate = amplitude * factors[0].max(factors[1]) * damped_rate(tau);
        let gyro_counts = [0.0, pitch_rate, 0.0]
            .map(|w| quantize(draw(imu_count(w, DEFAULT_GYRO_FULL_SCALE_DPS))));

        samples.push(RawSample {
            t,
            joint_counts,
            force_count,
            accel_counts,
            gyro_counts,
        });
    }
    Ok(RawTrial {
        subject: meta.clone(),
        condition,
        samples,
    })
}
