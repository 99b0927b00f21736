use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use pushrec_core::dynamics::{
    coriolis_matrix, integrate, mass_matrix, mass_matrix_partials, parse_chain, recovery_torque,
    serialize_chain, Gains, JointState, LinkChain, LinkParams, TorqueVector,
};

const SMALL_CHAIN: &str = include_str!("fixtures/small_chain.txt");

fn recover(chain: &LinkChain, perturb: f64, gains: &Gains, dt: f64, t_end: f64) -> Vec<f64> {
    let n = chain.dof();
    let reference = JointState::rest(n);
    let mut start = JointState::rest(n);
    start.theta[0] = perturb;
    let traj = integrate(
        chain,
        &start,
        |_, s| {
            recovery_torque(chain, s, &reference, gains)
                .unwrap_or_else(|_| TorqueVector::from_element(n, f64::NAN))
        },
        dt,
        t_end,
    )
    .unwrap();
    traj.iter().map(|s| s.theta.amax()).collect()
}

#[test]
fn small_chain_recovers_from_ankle_perturbation() {
    let chain = parse_chain(SMALL_CHAIN).unwrap();
    let worst = recover(&chain, 0.05, &Gains::uniform(3, 100.0, 20.0), 1e-4, 2.0);
    assert!(
        *worst.last().unwrap() <= 0.005,
        "final deviation {}",
        worst.last().unwrap()
    );
}

#[test]
fn default_chain_recovers_with_stiffer_gains() {
    let chain = LinkChain::default();
    let worst = recover(&chain, 0.05, &Gains::uniform(3, 2000.0, 400.0), 1e-3, 2.0);
    assert!(*worst.last().unwrap() <= 0.005);
}

#[test]
fn without_feedback_the_chain_falls() {
    let chain = parse_chain(SMALL_CHAIN).unwrap();
    let worst = recover(&chain, 0.05, &Gains::uniform(3, 0.0, 0.0), 1e-4, 1.0);
    assert!(*worst.last().unwrap() > 0.5);
}

#[test]
fn chain_file_round_trip() {
    let chain = LinkChain::anthropometric(1.62, 55.0);
    assert_eq!(parse_chain(&serialize_chain(&chain)).unwrap(), chain);
}

fn random_chain(masses: &[f64], lengths: &[f64]) -> LinkChain {
    let links = masses
        .iter()
        .zip(lengths)
        .map(|(&m, &l)| LinkParams {
            mass: m,
            length: l,
            com_offset: 0.45 * l,
            inertia: m * l * l / 12.0,
        })
        .collect();
    LinkChain::new(links, 9.8).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn mass_matrix_is_spd_and_m_dot_minus_2c_is_skew(
        masses in prop::collection::vec(0.1f64..20.0, 4),
        lengths in prop::collection::vec(0.1f64..1.0, 4),
        theta in prop::collection::vec(-3.0f64..3.0, 4),
        theta_dot in prop::collection::vec(-5.0f64..5.0, 4),
    ) {
        let chain = random_chain(&masses, &lengths);
        let th = DVector::from_vec(theta);
        let thd = DVector::from_vec(theta_dot);
        let m = mass_matrix(&chain, &th);
        prop_assert!((&m - m.transpose()).amax() <= 1e-12);
        prop_assert!(m.clone().cholesky().is_some());
        let m_dot = mass_matrix_partials(&chain, &th)
            .iter()
            .zip(thd.iter())
            .fold(DMatrix::zeros(4, 4), |acc, (dm, &q)| acc + dm * q);
        let n = m_dot - coriolis_matrix(&chain, &th, &thd) * 2.0;
        prop_assert!((&n + n.transpose()).amax() <= 1e-6);
    }
}
