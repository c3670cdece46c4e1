//! Fixtures shared by the benchmarks.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use synckron::sweep::{random_network, random_oscillator, Family};
use synckron::{CouplingNetwork, Edge, OscillatorModel};

/// Four nodes, boundary `{1, 2, 4}`, node 3 interior; one damper 1–3 and
/// springs 1–2, 2–3, 3–4.
pub fn interior_fixture() -> CouplingNetwork {
    CouplingNetwork::new(
        4,
        3,
        vec![Edge::new(0, 3, 1.0)],
        vec![
            Edge::new(0, 1, 1.0),
            Edge::new(1, 3, 1.0),
            Edge::new(3, 2, 1.0),
        ],
    )
    .expect("valid fixture")
}

/// Path of `p` nodes alternating dampers and springs, with the first `q`
/// nodes on the boundary.
pub fn ladder(p: usize, q: usize) -> CouplingNetwork {
    let mut dampers = Vec::new();
    let mut springs = Vec::new();
    for k in 0..p - 1 {
        dampers.push(Edge::new(k, k + 1, 1.0));
        if k % 2 == 0 {
            springs.push(Edge::new(k, k + 1, 0.5));
        }
    }
    CouplingNetwork::new(p, q, dampers, springs).expect("valid ladder")
}

pub fn random_case(seed: u64, max_p: usize, max_n: usize) -> (CouplingNetwork, OscillatorModel) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let net = random_network(&mut rng, max_p, Family::Mixed);
    let osc = random_oscillator(&mut rng, max_n);
    (net, osc)
}
