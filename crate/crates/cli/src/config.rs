//! TOML defaults file. Every key is optional; command-line flags win.
//!
//! ```toml
//! [ingest]
//! rest_window = 10
//!
//! [simulate]
//! controller = "bang-bang"
//! impulse = 15.0
//! ```

use std::path::{Path, PathBuf};

use pushrec_core::gait::{GaitAmplitudes, DEFAULT_HANDEDNESS_THRESHOLD};
use pushrec_core::ingest::{
    DEFAULT_ACCEL_FULL_SCALE_G, DEFAULT_ANGLE_SCALE, DEFAULT_GYRO_FULL_SCALE_DPS,
    DEFAULT_REST_WINDOW,
};
use pushrec_core::lipm::{DEFAULT_COP_MAX, DEFAULT_COP_MIN, DEFAULT_ESCAPE_RADIUS};
use serde::Deserialize;

use crate::failure::Failure;

pub const CONFIG_ENV: &str = "PUSHREC_CONFIG";

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub ingest: IngestDefaults,
    pub smooth: SmoothDefaults,
    pub simulate: SimulateDefaults,
    pub analyze: AnalyzeDefaults,
    pub synth: SynthDefaults,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IngestDefaults {
    pub rest_window: usize,
    pub angle_scale: f64,
    pub accel_full_scale_g: f64,
    pub gyro_full_scale_dps: f64,
}

impl Default for IngestDefaults {
    fn default() -> Self {
        Self {
            rest_window: DEFAULT_REST_WINDOW,
            angle_scale: DEFAULT_ANGLE_SCALE,
            accel_full_scale_g: DEFAULT_ACCEL_FULL_SCALE_G,
            gyro_full_scale_dps: DEFAULT_GYRO_FULL_SCALE_DPS,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SmoothDefaults {
    pub method: String,
    pub resample: Option<f64>,
}

impl Default for SmoothDefaults {
    fn default() -> Self {
        Self {
            method: "spline".into(),
            resample: None,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateDefaults {
    pub height: f64,
    pub mass: f64,
    /// Pendulum height; 0.57 × height when absent.
    pub z0: Option<f64>,
    pub gravity: f64,
    pub cop_min: f64,
    pub cop_max: f64,
    pub x0: f64,
    pub xdot0: f64,
    pub impulse: f64,
    pub controller: String,
    pub dt: f64,
    pub t_end: f64,
    pub escape_radius: f64,
    pub boundary_points: usize,
    pub perturbation: f64,
    pub kp: f64,
    pub kd: f64,
    pub recovery_dt: f64,
    pub recovery_t_end: f64,
}

impl Default for SimulateDefaults {
    fn default() -> Self {
        Self {
            height: 1.70,
            mass: 70.0,
            z0: None,
            gravity: 9.8,
            cop_min: DEFAULT_COP_MIN,
            cop_max: DEFAULT_COP_MAX,
            x0: 0.0,
            xdot0: 0.0,
            impulse: 10.0,
            controller: "capture".into(),
            dt: 1e-3,
            t_end: 3.0,
            escape_radius: DEFAULT_ESCAPE_RADIUS,
            boundary_points: 101,
            perturbation: 0.05,
            kp: 2000.0,
            kd: 400.0,
            recovery_dt: 1e-3,
            recovery_t_end: 2.0,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalyzeDefaults {
    pub rest_window: usize,
    pub angle_scale: f64,
    pub baseline_window: f64,
    pub cycle_duration: f64,
    pub hip_amplitude: f64,
    pub knee_amplitude: f64,
    pub ankle_amplitude: f64,
    pub weight_hip: f64,
    pub weight_knee: f64,
    pub weight_ankle: f64,
    pub threshold: f64,
}

impl Default for AnalyzeDefaults {
    fn default() -> Self {
        let amps = GaitAmplitudes::default();
        Self {
            rest_window: DEFAULT_REST_WINDOW,
            angle_scale: DEFAULT_ANGLE_SCALE,
            baseline_window: pushrec_core::analysis::DEFAULT_BASELINE_WINDOW_S,
            cycle_duration: 1.0,
            hip_amplitude: amps.hip,
            knee_amplitude: amps.knee,
            ankle_amplitude: amps.ankle,
            weight_hip: 0.3,
            weight_knee: 0.5,
            weight_ankle: 0.2,
            threshold: DEFAULT_HANDEDNESS_THRESHOLD,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthDefaults {
    pub seed: u64,
    pub noise: f64,
    pub duration: f64,
    pub rate: f64,
    pub cycle_duration: f64,
    pub onset: f64,
    pub impulse: f64,
    pub strategy: f64,
    pub subject_id: String,
    pub height: f64,
    pub weight: f64,
    pub sex: String,
    pub handedness: String,
    pub age: f64,
    pub eyes: String,
    pub lunging: String,
    pub stance: String,
}

impl Default for SynthDefaults {
    fn default() -> Self {
        Self {
            seed: 42,
            noise: 1.0,
            duration: 4.0,
            rate: 100.0,
            cycle_duration: 1.0,
            onset: 1.0,
            impulse: 20.0,
            strategy: 0.0,
            subject_id: "S00".into(),
            height: 1.70,
            weight: 70.0,
            sex: "male".into(),
            handedness: "right".into(),
            age: 25.0,
            eyes: "closed".into(),
            lunging: "without".into(),
            stance: "static".into(),
        }
    }
}

/// Explicit path first, then `$PUSHREC_CONFIG`, else built-in defaults.
pub fn load(explicit: Option<&Path>) -> Result<Config, Failure> {
    let path: Option<PathBuf> = explicit.map(Path::to_path_buf).or_else(|| {
        std::env::var_os(CONFIG_ENV)
            .filter(|v| !v.is_empty())
            .map(PathBuf::from)
    });
    let Some(path) = path else {
        return Ok(Config::default());
    };
    let text = std::fs::read_to_string(&path)
        .map_err(|e| Failure::Usage(format!("cannot read config {}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| Failure::Usage(format!("config {}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partial_config_keeps_defaults() {
        let c: Config = toml::from_str("[simulate]\nimpulse = 3.5\n").unwrap();
        assert_eq!(c.simulate.impulse, 3.5);
        assert_eq!(c.simulate.controller, "capture");
        assert_eq!(c.ingest.rest_window, 10);
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(toml::from_str::<Config>("[simulate]\nimpluse = 3.5\n").is_err());
        assert!(toml::from_str::<Config>("[nope]\n").is_err());
    }
}
