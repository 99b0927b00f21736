//! Linear inverted pendulum push simulation and the CoM phase-plane
//! recover/fall decision boundary.
//!
//! The CoM moves at constant height `z0` with `ẍ = ω²(x − p)`, where `p` is the
//! centre of pressure held inside the foot. A state can be brought to rest
//! without stepping iff its capture point `x + ẋ/ω` lies inside the foot, which
//! in the `(x, ẋ)` plane is the band between the lines `ẋ = ω(cop_max − x)` and
//! `ẋ = ω(cop_min − x)`.

use serde::Serialize;
use thiserror::Error;

use crate::ode::{rk4_step, step_schedule};

pub const DEFAULT_Z0_FRACTION: f64 = 0.57;
pub const DEFAULT_COP_MIN: f64 = -0.05;
pub const DEFAULT_COP_MAX: f64 = 0.15;
pub const DEFAULT_ESCAPE_RADIUS: f64 = 1.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LipmError {
    #[error("invalid pendulum parameters: {0}")]
    InvalidParams(String),
    #[error("invalid foot geometry: cop_min {cop_min} must be below cop_max {cop_max}")]
    InvalidFoot { cop_min: f64, cop_max: f64 },
    #[error("invalid step: dt = {dt}, t_end = {t_end}")]
    InvalidStep { dt: f64, t_end: f64 },
    #[error("state became non-finite at t = {t}")]
    NonFinite { t: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LipmParams {
    g: f64,
    z0: f64,
    mass: f64,
    omega: f64,
}

impl LipmParams {
    pub fn new(g: f64, z0: f64, mass: f64) -> Result<Self, LipmError> {
        for (name, v) in [("g", g), ("z0", z0), ("mass", mass)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(LipmError::InvalidParams(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        Ok(Self {
            g,
            z0,
            mass,
            omega: (g / z0).sqrt(),
        })
    }

    /// CoM height at 0.57 of body height.
    pub fn for_subject(height: f64, mass: f64) -> Result<Self, LipmError> {
        Self::new(
            crate::dynamics::DEFAULT_GRAVITY,
            DEFAULT_Z0_FRACTION * height,
            mass,
        )
    }

    pub fn g(&self) -> f64 {
        self.g
    }
    pub fn z0(&self) -> f64 {
        self.z0
    }
    pub fn mass(&self) -> f64 {
        self.mass
    }
    pub fn omega(&self) -> f64 {
        self.omega
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhasePoint {
    pub x: f64,
    pub xdot: f64,
}

impl PhasePoint {
    pub fn new(x: f64, xdot: f64) -> Self {
        Self { x, xdot }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FootGeometry {
    pub cop_min: f64,
    pub cop_max: f64,
}

impl FootGeometry {
    pub fn new(cop_min: f64, cop_max: f64) -> Result<Self, LipmError> {
        if !(cop_min.is_finite() && cop_max.is_finite() && cop_min < cop_max) {
            return Err(LipmError::InvalidFoot { cop_min, cop_max });
        }
        Ok(Self { cop_min, cop_max })
    }

    pub fn clamp(&self, p: f64) -> f64 {
        p.clamp(self.cop_min, self.cop_max)
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.cop_min + self.cop_max)
    }

    pub fn contains(&self, p: f64) -> bool {
        (self.cop_min..=self.cop_max).contains(&p)
    }
}

impl Default for FootGeometry {
    fn default() -> Self {
        Self {
            cop_min: DEFAULT_COP_MIN,
            cop_max: DEFAULT_COP_MAX,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LipmSample {
    pub t: f64,
    pub x: f64,
    pub xdot: f64,
    pub p: f64,
}

impl LipmSample {
    pub fn point(&self) -> PhasePoint {
        PhasePoint::new(self.x, self.xdot)
    }
}

/// RK4 simulation with the CoP chosen by `cop(t, state)` at the start of each
/// step, clamped into the foot and held over the step. `stop` ends the run
/// early once it returns true for a recorded sample.
pub fn simulate_lipm_until<C, S>(
    params: &LipmParams,
    foot: &FootGeometry,
    initial: PhasePoint,
    cop: C,
    dt: f64,
    t_end: f64,
    stop: S,
) -> Result<Vec<LipmSample>, LipmError>
where
    C: Fn(f64, &PhasePoint) -> f64,
    S: Fn(&LipmSample) -> bool,
{
    if !(dt.is_finite() && dt > 0.0 && t_end.is_finite() && t_end >= 0.0) {
        return Err(LipmError::InvalidStep { dt, t_end });
    }
    let w2 = params.omega * params.omega;
    let mut state = initial;
    let mut t = 0.0;
    let mut p = foot.clamp(cop(t, &state));
    let mut out = vec![LipmSample {
        t,
        x: state.x,
        xdot: state.xdot,
        p,
    }];
    if stop(&out[0]) {
        return Ok(out);
    }
    for h in step_schedule(dt, t_end) {
        let rhs = |_t: f64, y: &[f64]| vec![y[1], w2 * (y[0] - p)];
        let y = rk4_step(&rhs, t, &[state.x, state.xdot], h);
        t += h;
        state = PhasePoint::new(y[0], y[1]);
        if !(state.x.is_finite() && state.xdot.is_finite()) {
            return Err(LipmError::NonFinite { t });
        }
        p = foot.clamp(cop(t, &state));
        let sample = LipmSample {
            t,
            x: state.x,
            xdot: state.xdot,
            p,
        };
        out.push(sample);
        if stop(&sample) {
            break;
        }
    }
    Ok(out)
}

pub fn simulate_lipm<C>(
    params: &LipmParams,
    foot: &FootGeometry,
    initial: PhasePoint,
    cop: C,
    dt: f64,
    t_end: f64,
) -> Result<Vec<LipmSample>, LipmError>
where
    C: Fn(f64, &PhasePoint) -> f64,
{
    simulate_lipm_until(params, foot, initial, cop, dt, t_end, |_| false)
}

/// Closed-form state under a constant CoP `p`.
pub fn closed_form(params: &LipmParams, initial: PhasePoint, p: f64, t: f64) -> PhasePoint {
    let w = params.omega;
    let (c, s) = ((w * t).cosh(), (w * t).sinh());
    let dx = initial.x - p;
    PhasePoint::new(
        p + dx * c + initial.xdot / w * s,
        dx * w * s + initial.xdot * c,
    )
}

pub fn apply_push(params: &LipmParams, state: PhasePoint, impulse: f64) -> PhasePoint {
    PhasePoint::new(state.x, state.xdot + impulse / params.mass)
}

pub fn capture_point(params: &LipmParams, state: PhasePoint) -> f64 {
    state.x + state.xdot / params.omega
}

/// Orbital energy per unit mass about a constant CoP.
pub fn orbital_energy(params: &LipmParams, state: PhasePoint, p: f64) -> f64 {
    let w2 = params.omega * params.omega;
    0.5 * state.xdot * state.xdot - 0.5 * w2 * (state.x - p).powi(2)
}

/// Forward-fall line `ẋ = ω(cop_max − x)` and its backward mirror through `cop_min`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecisionBoundary {
    pub omega: f64,
    pub cop_min: f64,
    pub cop_max: f64,
}

impl DecisionBoundary {
    pub fn slope(&self) -> f64 {
        -self.omega
    }

    /// Velocity on the forward boundary line at position `x`.
    pub fn xdot_at(&self, x: f64) -> f64 {
        self.omega * (self.cop_max - x)
    }

    /// Velocity on the backward boundary line at position `x`.
    pub fn lower_xdot_at(&self, x: f64) -> f64 {
        self.omega * (self.cop_min - x)
    }

    /// Signed distance in ẋ inside the recoverable band; negative outside.
    pub fn margin(&self, state: PhasePoint) -> f64 {
        (self.xdot_at(state.x) - state.xdot).min(state.xdot - self.lower_xdot_at(state.x))
    }

    pub fn is_recoverable(&self, state: PhasePoint) -> bool {
        self.margin(state) >= 0.0
    }
}

pub fn decision_boundary(params: &LipmParams, foot: &FootGeometry) -> DecisionBoundary {
    DecisionBoundary {
        omega: params.omega,
        cop_min: foot.cop_min,
        cop_max: foot.cop_max,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Recoverable,
    Fall,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Recoverable => "recoverable",
            Verdict::Fall => "fall",
        })
    }
}

fn verdict_for(margin: f64) -> Verdict {
    if margin >= 0.0 {
        Verdict::Recoverable
    } else {
        Verdict::Fall
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecoveryReport {
    pub verdict: Verdict,
    pub capture_point: f64,
    pub boundary_margin: f64,
    /// Time at which the simulated CoM left the escape radius, if it did.
    pub escape_time: Option<f64>,
    pub trajectory: Vec<LipmSample>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimOptions {
    pub dt: f64,
    pub t_end: f64,
    pub escape_radius: f64,
}

impl Default for SimOptions {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            t_end: 3.0,
            escape_radius: DEFAULT_ESCAPE_RADIUS,
        }
    }
}

fn escape_stop(foot: FootGeometry, radius: f64) -> impl Fn(&LipmSample) -> bool {
    move |s: &LipmSample| (s.x - foot.midpoint()).abs() > radius
}

fn escape_time(traj: &[LipmSample], foot: &FootGeometry, radius: f64) -> Option<f64> {
    traj.iter()
        .find(|s| (s.x - foot.midpoint()).abs() > radius)
        .map(|s| s.t)
}

/// Classify by the capture-point criterion, inclusive at the foot edges:
/// recoverable iff `cop_min ≤ x + ẋ/ω ≤ cop_max`. A
/// recoverable report carries the trajectory with the CoP held at the capture
/// point; a fall report carries the run with the CoP saturated at the
/// nearest foot edge.
pub fn classify_recovery(
    params: &LipmParams,
    foot: &FootGeometry,
    state: PhasePoint,
    options: &SimOptions,
) -> Result<RecoveryReport, LipmError> {
    let boundary = decision_boundary(params, foot);
    let xc = capture_point(params, state);
    let margin = boundary.margin(state);
    let verdict = verdict_for(margin);
    let p = foot.clamp(xc);
    let trajectory = simulate_lipm_until(
        params,
        foot,
        state,
        |_, _| p,
        options.dt,
        options.t_end,
        escape_stop(*foot, options.escape_radius),
    )?;
    Ok(RecoveryReport {
        verdict,
        capture_point: xc,
        boundary_margin: margin,
        escape_time: escape_time(&trajectory, foot, options.escape_radius),
        trajectory,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CopController {
    /// CoP held at a fixed point (clamped into the foot).
    Fixed(f64),
    /// CoP tracks the clamped capture point.
    Capture,
    /// CoP at the toe when the capture point is ahead of the foot midpoint,
    /// at the heel otherwise.
    BangBang,
}

impl CopController {
    pub fn cop(&self, params: &LipmParams, foot: &FootGeometry, state: &PhasePoint) -> f64 {
        match *self {
            CopController::Fixed(p) => foot.clamp(p),
            CopController::Capture => foot.clamp(capture_point(params, *state)),
            CopController::BangBang => {
                if capture_point(params, *state) > foot.midpoint() {
                    foot.cop_max
                } else {
                    foot.cop_min
                }
            }
        }
    }
}

impl std::str::FromStr for CopController {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s.trim() {
            "capture" | "capture_cop" => Ok(CopController::Capture),
            "bang-bang" | "bang_bang" => Ok(CopController::BangBang),
            "fixed" | "fixed_cop" => Ok(CopController::Fixed(0.0)),
            other => other
                .strip_prefix("fixed:")
                .and_then(|p| p.parse().ok())
                .map(CopController::Fixed)
                .ok_or_else(|| {
                    format!("expected fixed[:<p>], capture or bang-bang, got `{other}`")
                }),
        }
    }
}

/// Apply a push, then simulate under the chosen CoP policy. The verdict is the
/// capture-point classification of the post-push state; the simulated run
/// stops when the CoM leaves the escape radius around the foot midpoint.
pub fn phase_trajectory(
    params: &LipmParams,
    foot: &FootGeometry,
    initial: PhasePoint,
    impulse: f64,
    controller: CopController,
    options: &SimOptions,
) -> Result<RecoveryReport, LipmError> {
    let pushed = apply_push(params, initial, impulse);
    let margin = decision_boundary(params, foot).margin(pushed);
    let xc = capture_point(params, pushed);
    let trajectory = simulate_lipm_until(
        params,
        foot,
        pushed,
        |_, s| controller.cop(params, foot, s),
        options.dt,
        options.t_end,
        escape_stop(*foot, options.escape_radius),
    )?;
    Ok(RecoveryReport {
        verdict: verdict_for(margin),
        capture_point: xc,
        boundary_margin: margin,
        escape_time: escape_time(&trajectory, foot, options.escape_radius),
        trajectory,
    })
}

/// `t,x,xdot,p`
pub fn phase_csv(trajectory: &[LipmSample]) -> String {
    use std::fmt::Write;
    let mut out = String::from("t,x,xdot,p\n");
    for s in trajectory {
        let _ = writeln!(out, "{:.6},{:.9},{:.9},{:.9}", s.t, s.x, s.xdot, s.p);
    }
    out
}

/// `x,xdot_boundary` sampled uniformly over `[x_min, x_max]`.
pub fn boundary_csv(boundary: &DecisionBoundary, x_min: f64, x_max: f64, points: usize) -> String {
    use std::fmt::Write;
    let mut out = String::from("x,xdot_boundary\n");
    let points = points.max(2);
    for k in 0..points {
        let x = x_min + (x_max - x_min) * k as f64 / (points - 1) as f64;
        let _ = writeln!(out, "{x:.9},{:.9}", boundary.xdot_at(x));
    }
    out
}
