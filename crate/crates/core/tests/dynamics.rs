mod oracle;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use synckron::dynamics::{random_initial_state, witness_check, WitnessCheckOptions};
use synckron::sweep::{generate_case, SweepConfig};
use synckron::{
    assemble_descriptor, consistent_initial_state, empirical_verdict, reduce, simulate,
    sync_verdict, witness_nonsync, CouplingNetwork, DescriptorSystem, Edge, Error, OscillatorModel,
    RMatrix, RVector, SimOptions, Tolerances,
};

fn two_dof() -> OscillatorModel {
    OscillatorModel::new(
        RMatrix::from_row_slice(2, 2, &[1.2, 0.1, 0.1, 0.8]),
        RMatrix::from_row_slice(2, 2, &[1.0, -0.2, -0.2, 5.0]),
        RVector::from_vec(vec![0.7, -0.4]),
    )
    .unwrap()
}

/// Leaves 1 and 2 hang from interior hub 4 by equal springs; node 3 is tied
/// to the hub by a damper and a spring.
fn spring_star() -> CouplingNetwork {
    CouplingNetwork::new(
        4,
        3,
        vec![Edge::new(2, 3, 1.0)],
        vec![
            Edge::new(0, 3, 1.0),
            Edge::new(1, 3, 1.0),
            Edge::new(2, 3, 0.5),
        ],
    )
    .unwrap()
}

fn start(sys: &DescriptorSystem, seed: u64) -> RVector {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_initial_state(sys, &mut rng, 1e-9).unwrap().state
}

/// `max_k |(W_{k+1} − W_{k−1})/(2h) + ż_kᵀ D ż_k|` with central differences.
fn dissipation_defect(dt: f64) -> f64 {
    let net = oracle::interior_fixture();
    let sys = assemble_descriptor(&net, &two_dof(), &Tolerances::default()).unwrap();
    let w0 = start(&sys, 3);
    let opts = SimOptions {
        horizon: 2.0,
        dt,
        record_every: 1,
        ..Default::default()
    };
    let traj = simulate(&sys, &w0, &opts).unwrap();
    let z: Vec<RVector> = traj.states.iter().map(|w| sys.node_values(w)).collect();
    (1..traj.states.len() - 1)
        .map(|k| {
            let wdot = (traj.energy[k + 1] - traj.energy[k - 1]) / (2.0 * dt);
            let zdot = (&z[k + 1] - &z[k - 1]) / (2.0 * dt);
            (wdot + sys.dissipation(&zdot)).abs()
        })
        .fold(0.0, f64::max)
}

#[test]
fn dissipation_identity_is_second_order() {
    let coarse = dissipation_defect(4e-3);
    let fine = dissipation_defect(2e-3);
    assert!(coarse < 1e-3, "{coarse}");
    let order = (coarse / fine).log2();
    assert!(
        order > 1.8,
        "observed order {order} ({coarse:e} → {fine:e})"
    );
}

#[test]
fn trapezoid_step_satisfies_discrete_dissipation_exactly() {
    let net = oracle::interior_fixture();
    let sys = assemble_descriptor(&net, &two_dof(), &Tolerances::default()).unwrap();
    let dt = 1e-2;
    let opts = SimOptions {
        horizon: 1.0,
        dt,
        record_every: 1,
        ..Default::default()
    };
    let traj = simulate(&sys, &start(&sys, 5), &opts).unwrap();
    for k in 0..traj.states.len() - 1 {
        let zdot = (sys.node_values(&traj.states[k + 1]) - sys.node_values(&traj.states[k])) / dt;
        let lhs = (traj.energy[k + 1] - traj.energy[k]) / dt;
        assert!((lhs + sys.dissipation(&zdot)).abs() < 1e-12, "step {k}");
    }
}

#[test]
fn steady_state_input_is_minus_lambda_y() {
    let net = spring_star();
    let osc = OscillatorModel::scalar(1.0, 1.0, 1.0).unwrap();
    let tol = Tolerances::default();
    let sys = assemble_descriptor(&net, &osc, &tol).unwrap();
    let lambda = reduce(&net, &tol).unwrap().lambda;
    let dt = 1e-3;
    let opts = SimOptions {
        horizon: 120.0,
        dt,
        record_every: 1,
        ..Default::default()
    };
    let traj = simulate(&sys, &start(&sys, 11), &opts).unwrap();
    let window = |range: std::ops::Range<usize>| {
        let (mut gap, mut size) = (0.0, 0.0);
        for k in range {
            let u = sys.boundary_input(&traj.states[k], &traj.states[k + 1], dt);
            let y = (sys.outputs(&traj.states[k]) + sys.outputs(&traj.states[k + 1])) * 0.5;
            gap += (&u + &lambda * y).norm();
            size += u.norm();
        }
        (gap, size)
    };
    let n = traj.states.len();
    let (head_gap, head_size) = window(0..n / 10);
    let (tail_gap, tail_size) = window(n - n / 10..n - 1);
    assert!(head_gap / head_size > 1e-2, "{head_gap} {head_size}");
    assert!(tail_gap / tail_size < 1e-4, "{tail_gap} {tail_size}");
}

#[test]
fn witness_trajectory_is_periodic_and_fails_empirically() {
    let net = spring_star();
    let osc = two_dof();
    let tol = Tolerances::default();
    let reduced = reduce(&net, &tol).unwrap();
    let verdict = sync_verdict(&reduced.gamma, None).unwrap();
    assert!(!verdict.synchronizes);
    let witness = witness_nonsync(&net, &osc, &reduced, &verdict).unwrap();
    assert!((witness.mu - 1.0).abs() < 1e-12, "{}", witness.mu);
    let b = osc.input();
    let bt_eta: f64 = (0..2).map(|i| b[i] * witness.eta[i].re).sum();
    assert!((bt_eta - 1.0).abs() < 1e-12);
    assert!(witness.eigen_residual < 1e-10 && witness.eta_residual < 1e-10);

    let sys = assemble_descriptor(&net, &osc, &tol).unwrap();
    let check = witness_check(&sys, &witness, &WitnessCheckOptions::default(), tol.dae).unwrap();
    assert!(check.min_period_ratio >= 0.5);
    assert!(check.periodic_defect <= 1e-3, "{check:?}");
    assert!(check.sync_dist_periodic_defect <= 1e-4, "{check:?}");

    let opts = SimOptions {
        horizon: 40.0,
        dt: 1e-3,
        record_every: 10,
        ..Default::default()
    };
    let traj = simulate(&sys, &witness.initial_state, &opts).unwrap();
    let empirical = empirical_verdict(&traj, 1e-3).unwrap();
    assert!(
        !empirical.synchronizes && empirical.ratio > 0.5,
        "{empirical:?}"
    );
}

#[test]
fn singular_interior_block_keeps_constraint() {
    // Interior node 3 carries springs only, so W₁ = 0 and g is algebraic.
    let net = CouplingNetwork::new(
        4,
        3,
        vec![Edge::new(0, 1, 1.0), Edge::new(1, 2, 0.5)],
        vec![
            Edge::new(0, 3, 1.0),
            Edge::new(2, 3, 2.0),
            Edge::new(1, 3, 0.3),
        ],
    )
    .unwrap();
    let osc = two_dof();
    let tol = Tolerances::default();
    let sys = assemble_descriptor(&net, &osc, &tol).unwrap();
    let x0 = RVector::from_fn(6, |i, _| (i as f64 * 0.7).sin());
    let v0 = RVector::from_fn(6, |i, _| (i as f64 * 1.3).cos());
    let init = consistent_initial_state(&sys, &x0, &v0, None, tol.dae).unwrap();
    assert!(init.residual < 1e-12);
    let opts = SimOptions {
        horizon: 20.0,
        dt: 1e-3,
        record_every: 100,
        ..Default::default()
    };
    let traj = simulate(&sys, &init.state, &opts).unwrap();
    assert!(
        traj.stats.max_constraint_residual < tol.dae,
        "{:?}",
        traj.stats
    );
    assert!(traj.stats.max_energy_increase <= 1e-12 * traj.stats.initial_energy);

    let mut bad = init.state.clone();
    let last = bad.len() - 1;
    bad[last] += 1.0;
    assert!(matches!(
        simulate(&sys, &bad, &opts),
        Err(Error::InconsistentConstraint { .. })
    ));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn energy_never_increases(index in 0usize..10_000, seed in any::<u64>()) {
        let cfg = SweepConfig { seed, ..Default::default() };
        let case = generate_case(&cfg, index).unwrap();
        let tol = Tolerances::default();
        let sys = assemble_descriptor(&case.network, &case.oscillator, &tol).unwrap();
        let w0 = start(&sys, seed ^ index as u64);
        let opts = SimOptions { horizon: 5.0, dt: 1e-3, record_every: 500, ..Default::default() };
        let traj = simulate(&sys, &w0, &opts).unwrap();
        prop_assert!(traj.stats.max_energy_increase <= 1e-7 * traj.stats.initial_energy);
        prop_assert!(traj.stats.max_constraint_residual <= tol.dae);
    }

    #[test]
    fn energy_is_a_nonnegative_form(index in 0usize..10_000, seed in any::<u64>()) {
        let cfg = SweepConfig { seed, ..Default::default() };
        let case = generate_case(&cfg, index).unwrap();
        let sys = assemble_descriptor(&case.network, &case.oscillator, &Tolerances::default()).unwrap();
        let w = start(&sys, seed);
        let e = synckron::energy(&sys, &w);
        prop_assert!(e >= 0.0);
        prop_assert!((synckron::energy(&sys, &(&w * 3.0)) - 9.0 * e).abs() <= 1e-12 * (1.0 + e));
    }
}
