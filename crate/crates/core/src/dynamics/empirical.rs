use serde::Serialize;

use super::simulate::Trajectory;
use crate::error::{Error, Result};

/// Fraction of the horizon used for the head and tail windows.
const WINDOW: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EmpiricalVerdict {
    pub synchronizes: bool,
    pub head_max: f64,
    pub tail_max: f64,
    /// `tail_max / head_max` (zero when the head is identically zero).
    pub ratio: f64,
    pub energy_initial: f64,
    pub energy_final: f64,
}

/// Decide synchronization from a simulated trajectory by comparing the peak
/// sync distance in the last 10% of the horizon with the first 10%.
///
/// `ratio ≤ tol` synchronizes, `ratio > 10·tol` does not; the band between is
/// reported as [`Error::InconclusiveHorizon`].
pub fn empirical_verdict(traj: &Trajectory, decay_ratio_tol: f64) -> Result<EmpiricalVerdict> {
    if traj.times.len() < 2 {
        return Err(Error::InvalidParameter(
            "trajectory needs at least two samples".into(),
        ));
    }
    if !(decay_ratio_tol > 0.0) {
        return Err(Error::InvalidParameter(
            "decay_ratio_tol must be positive".into(),
        ));
    }
    let t0 = traj.times[0];
    let horizon = traj.horizon();
    let head_end = t0 + WINDOW * horizon;
    let tail_start = t0 + (1.0 - WINDOW) * horizon;
    let eps = 1e-9 * horizon;
    let max_over = |keep: &dyn Fn(f64) -> bool| {
        traj.times
            .iter()
            .zip(&traj.sync_dist)
            .filter(|(t, _)| keep(**t))
            .fold(0.0f64, |a, (_, &d)| a.max(d))
    };
    let head_max = max_over(&|t| t <= head_end + eps);
    let tail_max = max_over(&|t| t >= tail_start - eps);
    let ratio = if head_max > 0.0 {
        tail_max / head_max
    } else {
        0.0
    };
    let synchronizes = if ratio <= decay_ratio_tol {
        true
    } else if ratio > 10.0 * decay_ratio_tol {
        false
    } else {
        return Err(Error::InconclusiveHorizon { ratio });
    };
    Ok(EmpiricalVerdict {
        synchronizes,
        head_max,
        tail_max,
        ratio,
        energy_initial: traj.energy[0],
        energy_final: *traj.energy.last().unwrap(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{assemble_descriptor, simulate, SimOptions};
    use crate::linalg::RVector;
    use crate::netmodel::{CouplingNetwork, Edge, OscillatorModel};
    use crate::Tolerances;

    fn run(dampers: Vec<Edge>, springs: Vec<Edge>, horizon: f64) -> Trajectory {
        let net = CouplingNetwork::new(2, 2, dampers, springs).unwrap();
        let osc = OscillatorModel::scalar(1.0, 1.0, 1.0).unwrap();
        let sys = assemble_descriptor(&net, &osc, &Tolerances::default()).unwrap();
        let w0 = RVector::from_vec(vec![1.0, 0.2, -0.3, 0.4]);
        let opts = SimOptions {
            horizon,
            dt: 1e-3,
            record_every: 10,
            ..Default::default()
        };
        simulate(&sys, &w0, &opts).unwrap()
    }

    #[test]
    fn damped_pair_synchronizes() {
        let v = empirical_verdict(&run(vec![Edge::new(0, 1, 1.0)], vec![], 30.0), 1e-3).unwrap();
        assert!(v.synchronizes, "{v:?}");
        assert!(v.energy_final < v.energy_initial);
    }

    #[test]
    fn springs_only_does_not() {
        let v = empirical_verdict(&run(vec![], vec![Edge::new(0, 1, 1.0)], 30.0), 1e-3).unwrap();
        assert!(!v.synchronizes);
        assert!(v.ratio > 0.5 && v.ratio < 2.0, "{v:?}");
    }

    #[test]
    fn short_horizon_is_inconclusive() {
        // Decay over the window is about e^{−t}·t: pick a horizon landing in the band.
        let traj = run(vec![Edge::new(0, 1, 1.0)], vec![], 10.0);
        match empirical_verdict(&traj, 1e-3) {
            Err(Error::InconclusiveHorizon { ratio }) => assert!(ratio > 1e-3 && ratio <= 1e-2),
            Ok(v) => assert!((v.ratio <= 1e-3) == v.synchronizes),
            Err(e) => panic!("{e}"),
        }
    }

    #[test]
    fn zero_trajectory_counts_as_synchronized() {
        let net = CouplingNetwork::new(2, 2, vec![], vec![]).unwrap();
        let osc = OscillatorModel::scalar(1.0, 1.0, 1.0).unwrap();
        let sys = assemble_descriptor(&net, &osc, &Tolerances::default()).unwrap();
        let traj = simulate(&sys, &RVector::zeros(4), &SimOptions::default()).unwrap();
        assert!(empirical_verdict(&traj, 1e-3).unwrap().synchronizes);
    }
}
