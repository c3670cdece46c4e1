use serde::Serialize;

use super::descriptor::{energy, sync_distance, DescriptorSystem, Layout};
use crate::error::{Error, Result};
use crate::linalg::{self, RVector};

/// Step matrices with `σ_min/σ_max` below this are rejected as singular.
const SINGULAR_STEP_RATIO: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimOptions {
    pub horizon: f64,
    pub dt: f64,
    /// Store every k-th step (the first and last states are always stored).
    pub record_every: usize,
    /// Maximum admissible interior constraint residual of the initial state.
    pub dae_tol: f64,
}

impl Default for SimOptions {
    fn default() -> Self {
        Self {
            horizon: 10.0,
            dt: 1e-3,
            record_every: 1,
            dae_tol: 1e-6,
        }
    }
}

/// Per-step diagnostics gathered over every step, not only recorded ones.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepStats {
    pub steps: usize,
    pub dt: f64,
    pub initial_energy: f64,
    pub final_energy: f64,
    /// `max_k (W_{k+1} − W_k)`; nonpositive for an exactly dissipative step.
    pub max_energy_increase: f64,
    /// `max_k |W_k − W_0|`.
    pub max_energy_deviation: f64,
    pub max_constraint_residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub layout: Layout,
    pub times: Vec<f64>,
    pub states: Vec<RVector>,
    pub energy: Vec<f64>,
    pub sync_dist: Vec<f64>,
    pub constraint_residual: Vec<f64>,
    pub stats: StepStats,
}

impl Trajectory {
    pub fn horizon(&self) -> f64 {
        self.times.last().copied().unwrap_or(0.0) - self.times.first().copied().unwrap_or(0.0)
    }
}

/// Implicit trapezoidal integration of `E ẇ = A w`:
/// `(E − (dt/2)A) w⁺ = (E + (dt/2)A) w`.
pub fn simulate(
    sys: &DescriptorSystem,
    initial: &RVector,
    opts: &SimOptions,
) -> Result<Trajectory> {
    let dim = sys.dim();
    if initial.len() != dim {
        return Err(Error::DimensionMismatch(format!(
            "initial state has length {}, expected {dim}",
            initial.len()
        )));
    }
    if !(opts.dt > 0.0) || !opts.dt.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "dt must be positive, got {}",
            opts.dt
        )));
    }
    if !(opts.horizon >= opts.dt) || !opts.horizon.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "horizon {} must be at least dt {}",
            opts.horizon, opts.dt
        )));
    }
    if opts.record_every == 0 {
        return Err(Error::InvalidParameter(
            "record_every must be at least 1".into(),
        ));
    }
    let residual0 = sys.constraint_residual(initial);
    if residual0 > opts.dae_tol {
        return Err(Error::InconsistentConstraint {
            residual: residual0,
            tol: opts.dae_tol,
        });
    }

    let half = 0.5 * opts.dt;
    let lhs = &sys.e - &sys.a * half;
    let rhs = &sys.e + &sys.a * half;
    let sv = linalg::singular_values(&lhs);
    if dim > 0 && !(sv.min() > SINGULAR_STEP_RATIO * sv.max()) {
        return Err(Error::SingularStepMatrix { dt: opts.dt });
    }
    let step = lhs
        .lu()
        .solve(&rhs)
        .ok_or(Error::SingularStepMatrix { dt: opts.dt })?;

    let steps = (opts.horizon / opts.dt).round() as usize;
    let capacity = steps / opts.record_every + 2;
    let (q, n) = (sys.layout.q, sys.layout.n);
    let mut traj = Trajectory {
        layout: sys.layout,
        times: Vec::with_capacity(capacity),
        states: Vec::with_capacity(capacity),
        energy: Vec::with_capacity(capacity),
        sync_dist: Vec::with_capacity(capacity),
        constraint_residual: Vec::with_capacity(capacity),
        stats: StepStats {
            steps,
            dt: opts.dt,
            initial_energy: 0.0,
            final_energy: 0.0,
            max_energy_increase: f64::NEG_INFINITY,
            max_energy_deviation: 0.0,
            max_constraint_residual: residual0,
        },
    };

    let q_form = sys.energy_form();
    let mut w = initial.clone();
    let mut next = RVector::zeros(dim);
    let mut scratch = RVector::zeros(dim);
    let quad = |w: &RVector, scratch: &mut RVector| {
        scratch.gemv(1.0, q_form, w, 0.0);
        0.5 * w.dot(scratch)
    };
    let mut w_energy = quad(&w, &mut scratch);
    traj.stats.initial_energy = w_energy;

    let record = |traj: &mut Trajectory, k: usize, w: &RVector, e: f64, residual: f64| {
        traj.times.push(k as f64 * opts.dt);
        traj.energy.push(e);
        traj.sync_dist
            .push(sync_distance(w.rows_range(sys.layout.x()).as_slice(), q, n));
        traj.constraint_residual.push(residual);
        traj.states.push(w.clone());
    };
    record(&mut traj, 0, &w, w_energy, residual0);

    for k in 1..=steps {
        next.gemv(1.0, &step, &w, 0.0);
        std::mem::swap(&mut w, &mut next);
        if w.iter().any(|x| !x.is_finite()) {
            return Err(Error::StepDiverged { step: k });
        }
        let e = quad(&w, &mut scratch);
        traj.stats.max_energy_increase = traj.stats.max_energy_increase.max(e - w_energy);
        traj.stats.max_energy_deviation = traj
            .stats
            .max_energy_deviation
            .max((e - traj.stats.initial_energy).abs());
        w_energy = e;
        let residual = sys.constraint_residual(&w);
        traj.stats.max_constraint_residual = traj.stats.max_constraint_residual.max(residual);
        if k % opts.record_every == 0 || k == steps {
            record(&mut traj, k, &w, e, residual);
        }
    }
    traj.stats.final_energy = w_energy;
    debug_assert!((energy(sys, &w) - w_energy).abs() <= 1e-9 * (1.0 + w_energy));
    Ok(traj)
}
