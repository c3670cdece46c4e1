//! The coupled array as a linear descriptor system, its trapezoidal
//! integration, the energy and sync-distance diagnostics, and explicit
//! non-synchronizing solutions.

mod descriptor;
mod empirical;
mod simulate;
mod witness;

use rand::Rng;
use rand_distr::StandardNormal;

pub use descriptor::{
    assemble_descriptor, consistent_initial_state, energy, sync_distance, DescriptorSystem,
    InitialState, Layout,
};
pub use empirical::{empirical_verdict, EmpiricalVerdict};
pub use simulate::{simulate, SimOptions, StepStats, Trajectory};
pub use witness::{
    witness_check, witness_nonsync, WitnessCheck, WitnessCheckOptions, WitnessSolution,
};

use crate::error::Result;
use crate::linalg::RVector;

/// Random `(x₀, v₀)` uniformly on the unit sphere of `ℝ^{2qn}`, completed
/// with consistent interior values.
pub fn random_initial_state<R: Rng + ?Sized>(
    sys: &DescriptorSystem,
    rng: &mut R,
    dae_tol: f64,
) -> Result<InitialState> {
    let qn = sys.layout.q * sys.layout.n;
    let mut xv = RVector::from_fn(2 * qn, |_, _| rng.sample::<f64, _>(StandardNormal));
    let norm = xv.norm();
    if norm > 0.0 {
        xv /= norm;
    }
    let x0 = xv.rows(0, qn).into_owned();
    let v0 = xv.rows(qn, qn).into_owned();
    consistent_initial_state(sys, &x0, &v0, None, dae_tol)
}

/// [`random_initial_state`] drawn from a ChaCha8 stream seeded with `seed`.
pub fn seeded_initial_state(
    sys: &DescriptorSystem,
    seed: u64,
    dae_tol: f64,
) -> Result<InitialState> {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    random_initial_state(sys, &mut rng, dae_tol)
}
