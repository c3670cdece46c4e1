use std::f64::consts::PI;

use serde::Serialize;

use super::descriptor::DescriptorSystem;
use super::simulate::{simulate, SimOptions, StepStats};
use crate::error::{Error, Result};
use crate::kron::ReducedCoupling;
use crate::linalg::{self, CMatrix, CVector, RMatrix, RVector, C64, J};
use crate::netmodel::{CouplingNetwork, OscillatorModel};
use crate::spectral::SpectralVerdict;

/// Generalized eigenvalues within this relative distance are one cluster.
const CLUSTER_REL: f64 = 1e-8;

/// A non-synchronizing periodic solution `x(t) = Re(x̄ e^{jωt})` of the
/// coupled array, with `x̄ = ȳ ⊗ η`.
#[derive(Debug, Clone, PartialEq)]
pub struct WitnessSolution {
    pub omega: f64,
    pub mu: f64,
    pub period: f64,
    /// Unit eigenvector of `Γ` for `jμ`, orthogonal to `1`.
    pub ybar: CVector,
    /// Interior phasors `E ȳ`.
    pub gbar: CVector,
    /// Resonant direction with `Bᵀη = 1`.
    pub eta: CVector,
    pub xbar: CVector,
    /// `[Re x̄; −ω Im x̄; Re ḡ]`.
    pub initial_state: RVector,
    /// `‖Γȳ − jμȳ‖∞`.
    pub eigen_residual: f64,
    /// `‖(K − ω²M + μBBᵀ)η‖∞`.
    pub eta_residual: f64,
    /// `‖D z̄‖∞` with `z̄ = [ȳ; ḡ]`; zero for an exact witness.
    pub dissipation_residual: f64,
}

pub fn witness_nonsync(
    net: &CouplingNetwork,
    osc: &OscillatorModel,
    reduced: &ReducedCoupling,
    verdict: &SpectralVerdict,
) -> Result<WitnessSolution> {
    if verdict.synchronizes {
        return Err(Error::VerdictIsSync);
    }
    let gamma = &reduced.gamma;
    let q = gamma.nrows();
    if q != net.q() || verdict.eigenvalues.len() != q {
        return Err(Error::DimensionMismatch(
            "verdict does not belong to this network".into(),
        ));
    }
    let lambda2 = verdict.eigenvalues[1];
    let mu = if lambda2.norm() <= verdict.zero_tol {
        0.0
    } else {
        lambda2.im.max(0.0)
    };

    let ybar = axis_eigenvector(gamma, mu, verdict.zero_tol)?;
    let gbar = &reduced.e_complex * &ybar;

    let b = osc.input();
    let bbt = b * b.transpose();
    let shifted = osc.stiffness() + &bbt * mu;
    let (theta, modes) = linalg::generalized_symmetric_eigen(&shifted, osc.mass())?;
    let scale = theta
        .iter()
        .fold(0.0f64, |a, t| a.max(t.abs()))
        .max(f64::MIN_POSITIVE);
    let first = theta
        .iter()
        .position(|&t| t > CLUSTER_REL * scale)
        .ok_or(Error::NoResonance)?;
    let theta0 = theta[first];
    let cluster: Vec<usize> = (first..theta.len())
        .take_while(|&k| (theta[k] - theta0).abs() <= CLUSTER_REL * theta0)
        .collect();
    let basis = RMatrix::from_fn(osc.n(), cluster.len(), |r, c| modes[(r, cluster[c])]);
    let nb = basis.transpose() * b;
    let nb_norm2 = nb.norm_squared();
    if nb_norm2.sqrt() <= 1e-8 * b.norm() * basis.norm() {
        return Err(Error::EtaNotScalable);
    }
    let eta_real = &basis * nb / nb_norm2;
    let omega = theta0.sqrt();
    let eta_residual = linalg::vec_inf_norm(&((&shifted - osc.mass() * theta0) * &eta_real));
    let eta = eta_real.map(|v| C64::new(v, 0.0));

    let n = osc.n();
    let xbar = CVector::from_fn(q * n, |k, _| ybar[k / n] * eta[k % n]);
    let m = net.interior();
    let mut initial_state = RVector::zeros(2 * q * n + m);
    for k in 0..q * n {
        initial_state[k] = xbar[k].re;
        initial_state[q * n + k] = -omega * xbar[k].im;
    }
    for k in 0..m {
        initial_state[2 * q * n + k] = gbar[k].re;
    }

    let eigen_residual = linalg::vec_inf_norm(&(gamma * &ybar - &ybar * (J * mu)));
    let zbar = CVector::from_iterator(q + m, ybar.iter().chain(gbar.iter()).copied());
    let d = linalg::real_to_complex(&net.damper_laplacian());
    let dissipation_residual = linalg::vec_inf_norm(&(d * zbar));

    Ok(WitnessSolution {
        omega,
        mu,
        period: 2.0 * PI / omega,
        ybar,
        gbar,
        eta,
        xbar,
        initial_state,
        eigen_residual,
        eta_residual,
        dissipation_residual,
    })
}

/// Unit eigenvector of `Γ` for `jμ` outside `span{1}`, phase-aligned so that
/// its real part has maximal norm.
fn axis_eigenvector(gamma: &CMatrix, mu: f64, zero_tol: f64) -> Result<CVector> {
    let q = gamma.nrows();
    let shifted = gamma - CMatrix::identity(q, q) * (J * mu);
    let svd = shifted.svd(false, true);
    let v_t = svd.v_t.ok_or(Error::EigenSolverFailure)?;
    let smallest = svd.singular_values.imin();
    let candidates = (0..q).filter(|&k| k == smallest || svd.singular_values[k] <= zero_tol);

    let mut best: Option<(f64, CVector)> = None;
    for k in candidates {
        let mut y: CVector = v_t.row(k).adjoint();
        let mean = y.sum() / q as f64;
        y.add_scalar_mut(-mean);
        let norm = y.norm();
        if best.as_ref().is_none_or(|(b, _)| norm > *b) {
            best = Some((norm, y));
        }
    }
    let (norm, mut y) = best.ok_or(Error::EigenSolverFailure)?;
    if norm <= 1e-6 {
        return Err(Error::EigenSolverFailure);
    }
    y /= C64::new(norm, 0.0);
    let yty: C64 = y.iter().map(|z| z * z).sum();
    let phase = C64::from_polar(1.0, -0.5 * yty.arg());
    y *= phase;
    Ok(y)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WitnessCheckOptions {
    pub periods: usize,
    pub samples_per_period: usize,
    /// Upper bound on the step; the actual step divides the period evenly.
    pub dt_target: f64,
}

impl Default for WitnessCheckOptions {
    fn default() -> Self {
        Self {
            periods: 20,
            samples_per_period: 64,
            dt_target: 1e-3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WitnessCheck {
    pub sync_dist0: f64,
    /// `min over periods of (max sync_dist in the period) / sync_dist(0)`.
    pub min_period_ratio: f64,
    /// `min_t sync_dist(t) / sync_dist(0)`. A standing wave crosses zero
    /// twice per period, so this is informational.
    pub min_pointwise_ratio: f64,
    /// `max_t ‖w(t + 2π/ω) − w(t)‖ / max_t ‖w(t)‖`.
    pub periodic_defect: f64,
    /// Same defect measured on sync_dist alone, relative to its maximum.
    pub sync_dist_periodic_defect: f64,
    pub dt: f64,
    pub stats: StepStats,
}

/// Integrate the witness initial state over several periods and measure
/// non-decay and periodicity.
pub fn witness_check(
    sys: &DescriptorSystem,
    witness: &WitnessSolution,
    opts: &WitnessCheckOptions,
    dae_tol: f64,
) -> Result<WitnessCheck> {
    if opts.periods == 0 || opts.samples_per_period == 0 || !(opts.dt_target > 0.0) {
        return Err(Error::InvalidParameter(
            "witness check needs periods, samples and dt > 0".into(),
        ));
    }
    let s = opts.samples_per_period;
    let per_sample = (witness.period / (s as f64 * opts.dt_target))
        .ceil()
        .max(1.0) as usize;
    let steps_per_period = s * per_sample;
    let dt = witness.period / steps_per_period as f64;
    let sim = SimOptions {
        horizon: dt * (steps_per_period * opts.periods) as f64,
        dt,
        record_every: per_sample,
        dae_tol,
    };
    let traj = simulate(sys, &witness.initial_state, &sim)?;
    let total = s * opts.periods + 1;
    let states = &traj.states[..total.min(traj.states.len())];
    let dist = &traj.sync_dist[..states.len()];

    let d0 = dist[0];
    let (min_period_ratio, min_pointwise_ratio) = if d0 > 0.0 {
        let per_period = dist
            .chunks(s)
            .take(opts.periods)
            .map(|c| c.iter().fold(0.0f64, |a, &b| a.max(b)))
            .fold(f64::INFINITY, f64::min);
        let pointwise = dist.iter().fold(f64::INFINITY, |a, &b| a.min(b));
        (per_period / d0, pointwise / d0)
    } else {
        (0.0, 0.0)
    };

    let max_norm = states.iter().map(|w| w.norm()).fold(0.0, f64::max);
    let max_dist = dist.iter().copied().fold(0.0, f64::max);
    let mut defect = 0.0f64;
    let mut dist_defect = 0.0f64;
    for i in 0..states.len().saturating_sub(s) {
        defect = defect.max((&states[i + s] - &states[i]).norm());
        dist_defect = dist_defect.max((dist[i + s] - dist[i]).abs());
    }
    Ok(WitnessCheck {
        sync_dist0: d0,
        min_period_ratio,
        min_pointwise_ratio,
        periodic_defect: if max_norm > 0.0 {
            defect / max_norm
        } else {
            0.0
        },
        sync_dist_periodic_defect: if max_dist > 0.0 {
            dist_defect / max_dist
        } else {
            0.0
        },
        dt,
        stats: traj.stats,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::descriptor::assemble_descriptor;
    use crate::kron::reduce;
    use crate::netmodel::Edge;
    use crate::spectral::sync_verdict;
    use crate::Tolerances;

    fn solve(net: &CouplingNetwork, osc: &OscillatorModel) -> Result<WitnessSolution> {
        let reduced = reduce(net, &Tolerances::default())?;
        let verdict = sync_verdict(&reduced.gamma, None)?;
        witness_nonsync(net, osc, &reduced, &verdict)
    }

    #[test]
    fn two_node_springs() {
        let net = CouplingNetwork::new(2, 2, vec![], vec![Edge::new(0, 1, 0.5)]).unwrap();
        let osc = OscillatorModel::scalar(1.0, 1.0, 1.0).unwrap();
        let w = solve(&net, &osc).unwrap();
        assert!((w.mu - 1.0).abs() < 1e-12);
        assert!((w.omega - 2f64.sqrt()).abs() < 1e-12);
        assert!((w.eta[0] - C64::new(1.0, 0.0)).norm() < 1e-12);
        // ȳ = ±(1, −1)/√2 up to a real sign after phase alignment.
        let s = 0.5f64.sqrt();
        let y = &w.ybar;
        assert!(y[0].im.abs() < 1e-12 && y[1].im.abs() < 1e-12);
        assert!((y[0].re.abs() - s).abs() < 1e-12 && (y[0] + y[1]).norm() < 1e-12);
        assert!(w.eigen_residual < 1e-12 && w.eta_residual < 1e-12);
    }

    #[test]
    fn uncoupled_oscillators() {
        let net = CouplingNetwork::new(3, 3, vec![], vec![]).unwrap();
        let osc = OscillatorModel::scalar(2.0, 8.0, 1.0).unwrap();
        let w = solve(&net, &osc).unwrap();
        assert_eq!(w.mu, 0.0);
        assert!((w.omega - 2.0).abs() < 1e-12);
        assert!(w.ybar.sum().norm() < 1e-12);
        assert!((w.ybar.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn synchronizing_network_rejected() {
        let net = CouplingNetwork::new(2, 2, vec![Edge::new(0, 1, 1.0)], vec![]).unwrap();
        let osc = OscillatorModel::scalar(1.0, 1.0, 1.0).unwrap();
        assert_eq!(solve(&net, &osc), Err(Error::VerdictIsSync));
    }

    #[test]
    fn hidden_mode_is_not_scalable() {
        // Mode 2 of diag(1, 4) is invisible to B = e₁ and is the only
        // resonance once μ pushes mode 1 above it.
        let net = CouplingNetwork::new(2, 2, vec![], vec![Edge::new(0, 1, 5.0)]).unwrap();
        let osc = OscillatorModel::new(
            RMatrix::identity(2, 2),
            RMatrix::from_diagonal(&RVector::from_vec(vec![1.0, 4.0])),
            RVector::from_vec(vec![1.0, 0.0]),
        )
        .unwrap();
        assert_eq!(solve(&net, &osc), Err(Error::EtaNotScalable));
    }

    #[test]
    fn interior_springs_witness_is_periodic() {
        // Springs through an interior node, one damper between boundary 1–2;
        // node 3 is reached only by springs so its mode is undamped.
        let net = CouplingNetwork::new(
            4,
            3,
            vec![Edge::new(0, 1, 1.0)],
            vec![
                Edge::new(0, 3, 1.0),
                Edge::new(1, 3, 1.0),
                Edge::new(2, 3, 2.0),
            ],
        )
        .unwrap();
        let osc = OscillatorModel::new(
            RMatrix::from_row_slice(2, 2, &[1.0, 0.2, 0.2, 1.5]),
            RMatrix::from_row_slice(2, 2, &[2.0, -0.5, -0.5, 1.0]),
            RVector::from_vec(vec![1.0, 0.3]),
        )
        .unwrap();
        let w = solve(&net, &osc).unwrap();
        assert!(w.dissipation_residual < 1e-10);
        let sys = assemble_descriptor(&net, &osc, &Tolerances::default()).unwrap();
        let check = witness_check(&sys, &w, &WitnessCheckOptions::default(), 1e-6).unwrap();
        assert!(check.min_period_ratio >= 0.5, "{check:?}");
        assert!(check.periodic_defect <= 1e-3, "{check:?}");
        assert!(check.sync_dist_periodic_defect <= 1e-4, "{check:?}");
    }
}
