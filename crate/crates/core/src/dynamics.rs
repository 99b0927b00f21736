//! Planar n-link rigid-body dynamics, `τ = M(θ)θ̈ + C(θ, θ̇) + G(θ)`.
//!
//! The chain is pinned at the ankle. Joint angles are relative: `θ[0]` is the
//! first link's lean from upright vertical and `θ[i]` the angle of link `i`
//! relative to link `i − 1`, positive forward. Friction is not modelled.

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use thiserror::Error;

use crate::ingest::SubjectMeta;
use crate::ode::{rk4_step, step_schedule};

pub const DEFAULT_GRAVITY: f64 = 9.8;

pub type TorqueVector = DVector<f64>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error("invalid link {index}: {reason}")]
    InvalidLink { index: usize, reason: String },
    #[error("chain must contain at least one link")]
    EmptyChain,
    #[error("vector length {got} does not match chain length {expected}")]
    Dimension { expected: usize, got: usize },
    #[error("mass matrix factorization failed")]
    Factorization,
    #[error("state became non-finite at t = {t}")]
    NonFinite { t: f64 },
    #[error("invalid step: dt = {dt}, t_end = {t_end}")]
    InvalidStep { dt: f64, t_end: f64 },
    #[error("chain file line {line}: {message}")]
    ChainFile { line: usize, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkParams {
    pub mass: f64,
    pub length: f64,
    /// Distance from the proximal joint to the link CoM.
    pub com_offset: f64,
    /// Moment of inertia about the link CoM.
    pub inertia: f64,
}

impl LinkParams {
    pub fn point_mass(mass: f64, length: f64) -> Self {
        Self {
            mass,
            length,
            com_offset: length,
            inertia: 0.0,
        }
    }
}

/// Segment fractions for a sagittal shank/thigh/trunk model: both legs are
/// lumped into one chain. Lengths and masses are fractions of body height and
/// weight, CoM offsets are measured from the distal (ankle-side) end of each
/// leg segment and from the hip for the trunk, and gyration radii are about
/// the segment CoM as a fraction of segment length.
pub mod anthropometry {
    pub const SHANK_LENGTH: f64 = 0.246;
    pub const THIGH_LENGTH: f64 = 0.245;
    pub const TRUNK_LENGTH: f64 = 0.288;
    pub const SHANK_MASS: f64 = 2.0 * 0.0465;
    pub const THIGH_MASS: f64 = 2.0 * 0.100;
    pub const TRUNK_MASS: f64 = 0.678;
    pub const SHANK_COM: f64 = 1.0 - 0.433;
    pub const THIGH_COM: f64 = 1.0 - 0.433;
    pub const TRUNK_COM: f64 = 0.626;
    pub const SHANK_GYRATION: f64 = 0.302;
    pub const THIGH_GYRATION: f64 = 0.323;
    pub const TRUNK_GYRATION: f64 = 0.496;
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinkChain {
    pub links: Vec<LinkParams>,
    pub gravity: f64,
}

impl LinkChain {
    pub fn new(links: Vec<LinkParams>, gravity: f64) -> Result<Self, DynamicsError> {
        let chain = Self { links, gravity };
        chain.validate()?;
        Ok(chain)
    }

    pub fn validate(&self) -> Result<(), DynamicsError> {
        if self.links.is_empty() {
            return Err(DynamicsError::EmptyChain);
        }
        for (index, l) in self.links.iter().enumerate() {
            let bad = |reason: &str| DynamicsError::InvalidLink {
                index,
                reason: reason.into(),
            };
            if !(l.mass.is_finite() && l.mass > 0.0) {
                return Err(bad("mass must be positive"));
            }
            if !(l.length.is_finite() && l.length > 0.0) {
                return Err(bad("length must be positive"));
            }
            if !(0.0..=l.length).contains(&l.com_offset) {
                return Err(bad("com_offset must lie within the link"));
            }
            if !(l.inertia.is_finite() && l.inertia >= 0.0) {
                return Err(bad("inertia must be non-negative"));
            }
        }
        if !self.gravity.is_finite() {
            return Err(DynamicsError::InvalidLink {
                index: 0,
                reason: "gravity must be finite".into(),
            });
        }
        Ok(())
    }

    /// Shank, thigh and trunk scaled from body height (m) and weight (kg).
    pub fn anthropometric(height: f64, weight: f64) -> Self {
        use anthropometry::*;
        let seg = |len_frac: f64, mass_frac: f64, com_frac: f64, gyr: f64| {
            let length = len_frac * height;
            let mass = mass_frac * weight;
            LinkParams {
                mass,
                length,
                com_offset: com_frac * length,
                inertia: mass * (gyr * length).powi(2),
            }
        };
        Self {
            links: vec![
                seg(SHANK_LENGTH, SHANK_MASS, SHANK_COM, SHANK_GYRATION),
                seg(THIGH_LENGTH, THIGH_MASS, THIGH_COM, THIGH_GYRATION),
                seg(TRUNK_LENGTH, TRUNK_MASS, TRUNK_COM, TRUNK_GYRATION),
            ],
            gravity: DEFAULT_GRAVITY,
        }
    }

    pub fn for_subject(meta: &SubjectMeta) -> Self {
        Self::anthropometric(meta.height, meta.weight)
    }

    pub fn dof(&self) -> usize {
        self.links.len()
    }

    fn check(&self, v: &DVector<f64>) -> Result<(), DynamicsError> {
        if v.len() != self.dof() {
            return Err(DynamicsError::Dimension {
                expected: self.dof(),
                got: v.len(),
            });
        }
        Ok(())
    }
}

impl Default for LinkChain {
    /// 1.70 m, 70 kg adult.
    fn default() -> Self {
        Self::anthropometric(1.70, 70.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct JointState {
    pub theta: DVector<f64>,
    pub theta_dot: DVector<f64>,
    pub theta_ddot: Option<DVector<f64>>,
}

impl JointState {
    pub fn new(theta: DVector<f64>, theta_dot: DVector<f64>) -> Self {
        Self {
            theta,
            theta_dot,
            theta_ddot: None,
        }
    }

    pub fn with_accel(mut self, theta_ddot: DVector<f64>) -> Self {
        self.theta_ddot = Some(theta_ddot);
        self
    }

    pub fn rest(n: usize) -> Self {
        Self::new(DVector::zeros(n), DVector::zeros(n))
    }
}

/// Trig sums over absolute link angles.
struct Pose<'a> {
    chain: &'a LinkChain,
    cos: Vec<f64>,
    sin: Vec<f64>,
}

impl<'a> Pose<'a> {
    fn new(chain: &'a LinkChain, theta: &DVector<f64>) -> Self {
        let mut phi = 0.0;
        let mut cos = Vec::with_capacity(theta.len());
        let mut sin = Vec::with_capacity(theta.len());
        for &q in theta.iter() {
            phi += q;
            cos.push(phi.cos());
            sin.push(phi.sin());
        }
        Self { chain, cos, sin }
    }

    /// `Σ_{j=r}^{i-1} l_j cos φ_j + c_i cos φ_i`: equals ∂x_i/∂θ_r, and the
    /// CoM height of link `i` when `r = 0`.
    fn cos_sum(&self, i: usize, r: usize) -> f64 {
        let links = &self.chain.links;
        (r..i).map(|j| links[j].length * self.cos[j]).sum::<f64>()
            + links[i].com_offset * self.cos[i]
    }

    /// `Σ_{j=r}^{i-1} l_j sin φ_j + c_i sin φ_i`: equals −∂z_i/∂θ_r, and the
    /// horizontal CoM position of link `i` when `r = 0`.
    fn sin_sum(&self, i: usize, r: usize) -> f64 {
        let links = &self.chain.links;
        (r..i).map(|j| links[j].length * self.sin[j]).sum::<f64>()
            + links[i].com_offset * self.sin[i]
    }
}

pub fn mass_matrix(chain: &LinkChain, theta: &DVector<f64>) -> DMatrix<f64> {
    let n = chain.dof();
    let pose = Pose::new(chain, theta);
    let mut m = DMatrix::zeros(n, n);
    for k in 0..n {
        for j in k..n {
            let mut acc = 0.0;
            for i in j..n {
                let link = &chain.links[i];
                acc += link.mass
                    * (pose.cos_sum(i, k) * pose.cos_sum(i, j)
                        + pose.sin_sum(i, k) * pose.sin_sum(i, j))
                    + link.inertia;
            }
            m[(k, j)] = acc;
            m[(j, k)] = acc;
        }
    }
    m
}

/// `∂M/∂θ_q` for every `q`, analytically.
pub fn mass_matrix_partials(chain: &LinkChain, theta: &DVector<f64>) -> Vec<DMatrix<f64>> {
    let n = chain.dof();
    let pose = Pose::new(chain, theta);
    (0..n)
        .map(|q| {
            let mut dm = DMatrix::zeros(n, n);
            for k in 0..n {
                for j in k..n {
                    let mut acc = 0.0;
                    for i in j.max(q)..n {
                        let kq = k.max(q);
                        let jq = j.max(q);
                        acc += chain.links[i].mass
                            * (-pose.sin_sum(i, kq) * pose.cos_sum(i, j)
                                - pose.cos_sum(i, k) * pose.sin_sum(i, jq)
                                + pose.cos_sum(i, kq) * pose.sin_sum(i, j)
                                + pose.sin_sum(i, k) * pose.cos_sum(i, jq));
                    }
                    dm[(k, j)] = acc;
                    dm[(j, k)] = acc;
                }
            }
            dm
        })
        .collect()
}

/// Coriolis matrix from Christoffel symbols of `M`, so that `C_mat·θ̇ = C`
/// and `Ṁ − 2·C_mat` is skew-symmetric.
pub fn coriolis_matrix(
    chain: &LinkChain,
    theta: &DVector<f64>,
    theta_dot: &DVector<f64>,
) -> DMatrix<f64> {
    let n = chain.dof();
    let dm = mass_matrix_partials(chain, theta);
    DMatrix::from_fn(n, n, |k, j| {
        (0..n)
            .map(|q| 0.5 * (dm[q][(k, j)] + dm[j][(k, q)] - dm[k][(j, q)]) * theta_dot[q])
            .sum()
    })
}

pub fn coriolis_vector(
    chain: &LinkChain,
    theta: &DVector<f64>,
    theta_dot: &DVector<f64>,
) -> DVector<f64> {
    coriolis_matrix(chain, theta, theta_dot) * theta_dot
}

pub fn gravity_vector(chain: &LinkChain, theta: &DVector<f64>) -> DVector<f64> {
    let n = chain.dof();
    let pose = Pose::new(chain, theta);
    DVector::from_fn(n, |k, _| {
        -chain.gravity
            * (k..n)
                .map(|i| chain.links[i].mass * pose.sin_sum(i, k))
                .sum::<f64>()
    })
}

pub fn potential_energy(chain: &LinkChain, theta: &DVector<f64>) -> f64 {
    let pose = Pose::new(chain, theta);
    (0..chain.dof())
        .map(|i| chain.links[i].mass * chain.gravity * pose.cos_sum(i, 0))
        .sum()
}

pub fn kinetic_energy(chain: &LinkChain, theta: &DVector<f64>, theta_dot: &DVector<f64>) -> f64 {
    0.5 * theta_dot.dot(&(mass_matrix(chain, theta) * theta_dot))
}

pub fn total_energy(chain: &LinkChain, state: &JointState) -> f64 {
    kinetic_energy(chain, &state.theta, &state.theta_dot) + potential_energy(chain, &state.theta)
}

/// Horizontal and vertical CoM position of the whole chain.
pub fn center_of_mass(chain: &LinkChain, theta: &DVector<f64>) -> (f64, f64) {
    let pose = Pose::new(chain, theta);
    let total: f64 = chain.links.iter().map(|l| l.mass).sum();
    let (mut x, mut z) = (0.0, 0.0);
    for (i, l) in chain.links.iter().enumerate() {
        x += l.mass * pose.sin_sum(i, 0);
        z += l.mass * pose.cos_sum(i, 0);
    }
    (x / total, z / total)
}

pub fn inverse_dynamics(
    chain: &LinkChain,
    state: &JointState,
) -> Result<TorqueVector, DynamicsError> {
    chain.check(&state.theta)?;
    chain.check(&state.theta_dot)?;
    let accel = state
        .theta_ddot
        .clone()
        .unwrap_or_else(|| DVector::zeros(chain.dof()));
    chain.check(&accel)?;
    Ok(mass_matrix(chain, &state.theta) * accel
        + coriolis_vector(chain, &state.theta, &state.theta_dot)
        + gravity_vector(chain, &state.theta))
}

pub fn forward_dynamics(
    chain: &LinkChain,
    theta: &DVector<f64>,
    theta_dot: &DVector<f64>,
    tau: &TorqueVector,
) -> Result<DVector<f64>, DynamicsError> {
    chain.check(theta)?;
    chain.check(theta_dot)?;
    chain.check(tau)?;
    let rhs = tau - coriolis_vector(chain, theta, theta_dot) - gravity_vector(chain, theta);
    let chol = mass_matrix(chain, theta)
        .cholesky()
        .ok_or(DynamicsError::Factorization)?;
    Ok(chol.solve(&rhs))
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectorySample {
    pub t: f64,
    pub theta: DVector<f64>,
    pub theta_dot: DVector<f64>,
    pub tau: TorqueVector,
}

/// RK4 integration of the chain under `torque(t, state)`. The first sample is
/// the initial state; torques are recorded at each sample.
pub fn integrate<F>(
    chain: &LinkChain,
    initial: &JointState,
    torque: F,
    dt: f64,
    t_end: f64,
) -> Result<Vec<TrajectorySample>, DynamicsError>
where
    F: Fn(f64, &JointState) -> TorqueVector,
{
    if !(dt.is_finite() && dt > 0.0 && t_end.is_finite() && t_end >= 0.0) {
        return Err(DynamicsError::InvalidStep { dt, t_end });
    }
    chain.check(&initial.theta)?;
    chain.check(&initial.theta_dot)?;
    let n = chain.dof();
    let split = |y: &[f64]| {
        JointState::new(
            DVector::from_column_slice(&y[..n]),
            DVector::from_column_slice(&y[n..]),
        )
    };
    let rhs = |t: f64, y: &[f64]| -> Vec<f64> {
        let s = split(y);
        let tau = torque(t, &s);
        let acc = forward_dynamics(chain, &s.theta, &s.theta_dot, &tau)
            .unwrap_or_else(|_| DVector::from_element(n, f64::NAN));
        s.theta_dot.iter().chain(acc.iter()).copied().collect()
    };

    let sample = |t: f64, s: JointState| TrajectorySample {
        t,
        tau: torque(t, &s),
        theta: s.theta,
        theta_dot: s.theta_dot,
    };
    let mut y: Vec<f64> = initial
        .theta
        .iter()
        .chain(initial.theta_dot.iter())
        .copied()
        .collect();
    let mut t = 0.0;
    let mut out = vec![sample(t, split(&y))];
    for h in step_schedule(dt, t_end) {
        y = rk4_step(&rhs, t, &y, h);
        t += h;
        if y.iter().any(|v| !v.is_finite()) {
            return Err(DynamicsError::NonFinite { t });
        }
        out.push(sample(t, split(&y)));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gains {
    pub kp: Vec<f64>,
    pub kd: Vec<f64>,
}

impl Gains {
    pub fn uniform(n: usize, kp: f64, kd: f64) -> Self {
        Self {
            kp: vec![kp; n],
            kd: vec![kd; n],
        }
    }
}

/// Feedforward inverse dynamics of the reference plus joint-space PD feedback.
pub fn recovery_torque(
    chain: &LinkChain,
    state: &JointState,
    reference: &JointState,
    gains: &Gains,
) -> Result<TorqueVector, DynamicsError> {
    let n = chain.dof();
    if gains.kp.len() != n || gains.kd.len() != n {
        return Err(DynamicsError::Dimension {
            expected: n,
            got: gains.kp.len().min(gains.kd.len()),
        });
    }
    if gains
        .kp
        .iter()
        .chain(&gains.kd)
        .any(|g| g.is_nan() || *g < 0.0)
    {
        return Err(DynamicsError::InvalidLink {
            index: 0,
            reason: "gains must be non-negative".into(),
        });
    }
    chain.check(&state.theta)?;
    chain.check(&state.theta_dot)?;
    let ff = inverse_dynamics(chain, reference)?;
    Ok(DVector::from_fn(n, |i, _| {
        ff[i]
            + gains.kp[i] * (reference.theta[i] - state.theta[i])
            + gains.kd[i] * (reference.theta_dot[i] - state.theta_dot[i])
    }))
}

/// Parse the `link.<i>.<field> = value` chain parameter format (1-based links).
pub fn parse_chain(text: &str) -> Result<LinkChain, DynamicsError> {
    let mut gravity = DEFAULT_GRAVITY;
    let mut fields: Vec<[Option<f64>; 4]> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let err = |message: String| DynamicsError::ChainFile { line, message };
        let (key, value) = body
            .split_once('=')
            .ok_or_else(|| err(format!("expected `key = value`, found `{body}`")))?;
        let value: f64 = value
            .trim()
            .parse()
            .map_err(|_| err(format!("`{}` is not a number", value.trim())))?;
        let key = key.trim();
        if key == "gravity" {
            gravity = value;
            continue;
        }
        let parts: Vec<&str> = key.split('.').collect();
        let (i, field) = match parts.as_slice() {
            ["link", i, field] => (
                i.parse::<usize>()
                    .ok()
                    .filter(|&i| i >= 1)
                    .ok_or_else(|| err(format!("bad link index `{i}`")))?,
                *field,
            ),
            _ => return Err(err(format!("unknown key `{key}`"))),
        };
        let slot = match field {
            "mass" => 0,
            "length" => 1,
            "com_offset" => 2,
            "inertia" => 3,
            other => return Err(err(format!("unknown link field `{other}`"))),
        };
        if fields.len() < i {
            fields.resize(i, [None; 4]);
        }
        fields[i - 1][slot] = Some(value);
    }
    let links = fields
        .iter()
        .enumerate()
        .map(|(i, f)| match f {
            [Some(mass), Some(length), com, inertia] => Ok(LinkParams {
                mass: *mass,
                length: *length,
                com_offset: com.unwrap_or(*length),
                inertia: inertia.unwrap_or(0.0),
            }),
            _ => Err(DynamicsError::ChainFile {
                line: 0,
                message: format!("link {} needs at least mass and length", i + 1),
            }),
        })
        .collect::<Result<Vec<_>, _>>()?;
    LinkChain::new(links, gravity)
}

pub fn serialize_chain(chain: &LinkChain) -> String {
    let mut out = format!("gravity = {}\n", chain.gravity);
    for (i, l) in chain.links.iter().enumerate() {
        let i = i + 1;
        let _ = writeln!(out, "link.{i}.mass = {}", l.mass);
        let _ = writeln!(out, "link.{i}.length = {}", l.length);
        let _ = writeln!(out, "link.{i}.com_offset = {}", l.com_offset);
        let _ = writeln!(out, "link.{i}.inertia = {}", l.inertia);
    }
    out
}

/// `t,theta_1..n,thetadot_1..n,tau_1..n`
pub fn trajectory_csv(samples: &[TrajectorySample]) -> String {
    let n = samples.first().map_or(0, |s| s.theta.len());
    let mut out = String::from("t");
    for prefix in ["theta", "thetadot", "tau"] {
        for i in 1..=n {
            let _ = write!(out, ",{prefix}_{i}");
        }
    }
    out.push('\n');
    for s in samples {
        let _ = write!(out, "{:.6}", s.t);
        for v in s.theta.iter().chain(s.theta_dot.iter()).chain(s.tau.iter()) {
            let _ = write!(out, ",{v:.9}");
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn unit_point_link() -> LinkChain {
        LinkChain::new(vec![LinkParams::point_mass(1.0, 1.0)], 9.8).unwrap()
    }

    fn two_link() -> LinkChain {
        LinkChain::new(
            vec![
                LinkParams {
                    mass: 3.0,
                    length: 0.8,
                    com_offset: 0.45,
                    inertia: 0.12,
                },
                LinkParams {
                    mass: 5.0,
                    length: 0.6,
                    com_offset: 0.25,
                    inertia: 0.2,
                },
            ],
            9.8,
        )
        .unwrap()
    }

    fn dv(v: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(v)
    }

    fn random_state(rng: &mut ChaCha8Rng, n: usize) -> JointState {
        JointState::new(
            DVector::from_fn(n, |_, _| rng.random_range(-1.5..1.5)),
            DVector::from_fn(n, |_, _| rng.random_range(-3.0..3.0)),
        )
        .with_accel(DVector::from_fn(n, |_, _| rng.random_range(-5.0..5.0)))
    }

    /// Kinetic energy from link CoM velocities, computed by finite
    /// differences of CoM positions and absolute angles.
    fn kinetic_energy_oracle(
        chain: &LinkChain,
        theta: &DVector<f64>,
        theta_dot: &DVector<f64>,
    ) -> f64 {
        let h = 1e-6;
        let positions = |th: &DVector<f64>| {
            let mut phi = 0.0;
            let (mut bx, mut bz) = (0.0, 0.0);
            let mut out = Vec::new();
            for (i, l) in chain.links.iter().enumerate() {
                phi += th[i];
                out.push((
                    bx + l.com_offset * phi.sin(),
                    bz + l.com_offset * phi.cos(),
                    phi,
                ));
                bx += l.length * phi.sin();
                bz += l.length * phi.cos();
            }
            out
        };
        let p1 = positions(&(theta + theta_dot * h));
        let p0 = positions(&(theta - theta_dot * h));
        chain
            .links
            .iter()
            .enumerate()
            .map(|(i, l)| {
                let vx = (p1[i].0 - p0[i].0) / (2.0 * h);
                let vz = (p1[i].1 - p0[i].1) / (2.0 * h);
                let w = (p1[i].2 - p0[i].2) / (2.0 * h);
                0.5 * l.mass * (vx * vx + vz * vz) + 0.5 * l.inertia * w * w
            })
            .sum()
    }

    #[test]
    fn point_mass_inertia() {
        let c = unit_point_link();
        for th in [0.0, 0.7, -2.0] {
            assert!((mass_matrix(&c, &dv(&[th]))[(0, 0)] - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn mass_matrix_is_kinetic_energy_hessian() {
        let chain = two_link();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let s = random_state(&mut rng, 2);
            let m = mass_matrix(&chain, &s.theta);
            // polarization: M_kj = T(e_k + e_j) - T(e_k) - T(e_j) for unit velocities
            for k in 0..2 {
                for j in 0..2 {
                    let mut ek = DVector::zeros(2);
                    ek[k] = 1.0;
                    let mut ej = DVector::zeros(2);
                    ej[j] = 1.0;
                    let t = |v: &DVector<f64>| kinetic_energy_oracle(&chain, &s.theta, v);
                    let est = if k == j {
                        2.0 * t(&ek)
                    } else {
                        t(&(&ek + &ej)) - t(&ek) - t(&ej)
                    };
                    assert!((est - m[(k, j)]).abs() < 1e-6, "{est} vs {}", m[(k, j)]);
                }
            }
        }
    }

    #[test]
    fn coriolis_examples() {
        let chain = two_link();
        assert_eq!(
            coriolis_vector(&chain, &dv(&[0.3, -0.4]), &dv(&[0.0, 0.0])),
            dv(&[0.0, 0.0])
        );
        let single = unit_point_link();
        assert_eq!(coriolis_vector(&single, &dv(&[0.5]), &dv(&[4.0]))[0], 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let s = random_state(&mut rng, 2);
            let c = rng.random_range(-3.0..3.0);
            let base = coriolis_vector(&chain, &s.theta, &s.theta_dot);
            let scaled = coriolis_vector(&chain, &s.theta, &(&s.theta_dot * c));
            assert!((scaled - base * (c * c)).amax() < 1e-9);
        }
    }

    #[test]
    fn gravity_examples() {
        let chain = two_link();
        assert_eq!(gravity_vector(&chain, &dv(&[0.0, 0.0])).amax(), 0.0);
        let g = gravity_vector(&unit_point_link(), &dv(&[PI / 2.0]));
        assert!((g[0].abs() - 9.8).abs() < 1e-12);
        // finite-difference potential oracle
        let h = 1e-6;
        let v = |th: f64| potential_energy(&unit_point_link(), &dv(&[th]));
        assert!(((v(PI / 2.0 + h) - v(PI / 2.0 - h)) / (2.0 * h) - g[0]).abs() < 1e-6);
    }

    #[test]
    fn inverse_dynamics_examples() {
        let chain = two_link();
        let rest = JointState::rest(2).with_accel(DVector::zeros(2));
        assert_eq!(inverse_dynamics(&chain, &rest).unwrap().amax(), 0.0);
        let s = JointState::rest(1).with_accel(dv(&[1.0]));
        assert!((inverse_dynamics(&unit_point_link(), &s).unwrap()[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn forward_dynamics_examples() {
        let chain = two_link();
        let th = dv(&[0.2, -0.5]);
        let thd = dv(&[1.0, 2.0]);
        let tau = coriolis_vector(&chain, &th, &thd) + gravity_vector(&chain, &th);
        assert!(forward_dynamics(&chain, &th, &thd, &tau).unwrap().amax() < 1e-12);
        let acc =
            forward_dynamics(&unit_point_link(), &dv(&[0.0]), &dv(&[0.0]), &dv(&[0.0])).unwrap();
        assert_eq!(acc[0], 0.0);
        assert!(matches!(
            forward_dynamics(&chain, &dv(&[0.0]), &thd, &tau),
            Err(DynamicsError::Dimension { .. })
        ));
    }

    #[test]
    fn round_trip() {
        let chain = LinkChain::default();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let s = random_state(&mut rng, 3);
            let tau = inverse_dynamics(&chain, &s).unwrap();
            let acc = forward_dynamics(&chain, &s.theta, &s.theta_dot, &tau).unwrap();
            assert!((acc - s.theta_ddot.as_ref().unwrap()).amax() < 1e-9);
        }
    }

    #[test]
    fn free_drift_without_gravity() {
        let chain = LinkChain::new(vec![LinkParams::point_mass(2.0, 0.5)], 0.0).unwrap();
        let init = JointState::new(dv(&[0.1]), dv(&[0.7]));
        let traj = integrate(&chain, &init, |_, _| dv(&[0.0]), 0.01, 1.0).unwrap();
        for s in &traj {
            assert!((s.theta[0] - (0.1 + 0.7 * s.t)).abs() < 1e-9);
        }
        assert!((traj.last().unwrap().t - 1.0).abs() < 1e-12);
    }

    #[test]
    fn hanging_pendulum_period() {
        // physical pendulum hanging straight down (θ = π)
        let link = LinkParams {
            mass: 2.0,
            length: 1.0,
            com_offset: 0.6,
            inertia: 0.05,
        };
        let chain = LinkChain::new(vec![link], 9.8).unwrap();
        let l_eff =
            (link.inertia + link.mass * link.com_offset.powi(2)) / (link.mass * link.com_offset);
        let expected = 2.0 * PI * (l_eff / 9.8).sqrt();
        let init = JointState::new(dv(&[PI + 0.01]), dv(&[0.0]));
        let traj = integrate(&chain, &init, |_, _| dv(&[0.0]), 1e-3, 3.0 * expected).unwrap();
        // upward zero crossings of θ − π
        let crossings: Vec<f64> = traj
            .windows(2)
            .filter(|w| w[0].theta[0] - PI < 0.0 && w[1].theta[0] - PI >= 0.0)
            .map(|w| {
                let (a, b) = (w[0].theta[0] - PI, w[1].theta[0] - PI);
                w[0].t + (w[1].t - w[0].t) * (-a) / (b - a)
            })
            .collect();
        assert!(crossings.len() >= 2);
        let period = crossings[1] - crossings[0];
        assert!(
            (period / expected - 1.0).abs() < 0.005,
            "{period} vs {expected}"
        );
    }

    #[test]
    fn two_link_energy_conserved() {
        let chain = two_link();
        let init = JointState::new(dv(&[0.3, -0.2]), dv(&[0.5, 1.0]));
        let traj = integrate(&chain, &init, |_, _| dv(&[0.0, 0.0]), 1e-4, 1.0).unwrap();
        let e0 = total_energy(&chain, &init);
        let last = traj.last().unwrap();
        let e1 = total_energy(
            &chain,
            &JointState::new(last.theta.clone(), last.theta_dot.clone()),
        );
        assert!(((e1 - e0) / e0).abs() <= 1e-6);
    }

    #[test]
    fn non_finite_state_aborts() {
        let chain = unit_point_link();
        let err = integrate(
            &chain,
            &JointState::rest(1),
            |t, _| dv(&[if t > 0.05 { f64::NAN } else { 0.0 }]),
            0.01,
            1.0,
        )
        .unwrap_err();
        assert!(matches!(err, DynamicsError::NonFinite { t } if t > 0.05 && t < 0.08));
        assert!(integrate(&chain, &JointState::rest(1), |_, _| dv(&[0.0]), 0.0, 1.0).is_err());
    }

    #[test]
    fn recovery_torque_examples() {
        let chain = LinkChain::default();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let reference = random_state(&mut rng, 3);
        let ff = inverse_dynamics(&chain, &reference).unwrap();
        let same = recovery_torque(
            &chain,
            &reference,
            &reference,
            &Gains::uniform(3, 50.0, 5.0),
        )
        .unwrap();
        assert!((same - &ff).amax() < 1e-12);
        let other = random_state(&mut rng, 3);
        let zero =
            recovery_torque(&chain, &other, &reference, &Gains::uniform(3, 0.0, 0.0)).unwrap();
        assert!((zero - ff).amax() < 1e-12);
        assert!(
            recovery_torque(&chain, &other, &reference, &Gains::uniform(3, -1.0, 0.0)).is_err()
        );
    }

    #[test]
    fn chain_file_round_trip() {
        let chain = LinkChain::default();
        let parsed = parse_chain(&serialize_chain(&chain)).unwrap();
        assert_eq!(parsed, chain);
        let text = "# robot\nlink.1.mass = 1\nlink.1.length = 0.5\n";
        let c = parse_chain(text).unwrap();
        assert_eq!(c.links[0], LinkParams::point_mass(1.0, 0.5));
        assert!(matches!(
            parse_chain("link.1.mass = x"),
            Err(DynamicsError::ChainFile { line: 1, .. })
        ));
        assert!(parse_chain("link.1.mass = 1").is_err());
        assert!(parse_chain("").is_err());
    }

    #[test]
    fn trajectory_csv_header() {
        let chain = two_link();
        let traj = integrate(
            &chain,
            &JointState::rest(2),
            |_, _| dv(&[0.0, 0.0]),
            0.1,
            0.2,
        )
        .unwrap();
        let csv = trajectory_csv(&traj);
        assert!(csv.starts_with("t,theta_1,theta_2,thetadot_1,thetadot_2,tau_1,tau_2\n"));
        assert_eq!(csv.lines().count(), 4);
    }
}
