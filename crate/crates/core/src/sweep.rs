//! Randomized agreement harness: draw networks and oscillators, compare the
//! spectral verdict with the behaviour of a simulated trajectory.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::{
    assemble_descriptor, empirical_verdict, random_initial_state, simulate, witness_check,
    witness_nonsync, SimOptions, WitnessCheckOptions,
};
use crate::error::{Error, Result};
use crate::kron::reduce;
use crate::linalg::{RMatrix, RVector};
use crate::netmodel::{CouplingNetwork, Edge, OscillatorModel};
use crate::spectral::{sync_verdict, VerdictClass};
use crate::Tolerances;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// Random mix of dampers and springs.
    Mixed,
    SpringsOnly,
    DampersOnly,
    /// Leaves attached to a hub by equal springs only.
    SpringStar,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepConfig {
    pub cases: usize,
    pub seed: u64,
    pub max_p: usize,
    pub max_n: usize,
    pub horizon: f64,
    pub dt: f64,
    pub record_every: usize,
    pub decay_ratio_tol: f64,
    /// Synchronizing margins in `(zero_tol, gray_band]` are redrawn.
    pub gray_band: f64,
    /// Also integrate the witness for every failing case.
    pub witness: bool,
    pub tolerances: Tolerances,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            cases: 200,
            seed: 7,
            max_p: 6,
            max_n: 3,
            horizon: 200.0,
            dt: 1e-3,
            record_every: 100,
            decay_ratio_tol: 1e-3,
            gray_band: 1e-6,
            witness: false,
            tolerances: Tolerances::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SweepCase {
    pub index: usize,
    pub seed: u64,
    pub family: Family,
    pub network: CouplingNetwork,
    pub oscillator: OscillatorModel,
    /// Draws rejected for landing in the gray band.
    pub redraws: usize,
    pub margin: f64,
    pub spectral: bool,
    rng: ChaCha8Rng,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WitnessSummary {
    pub omega: f64,
    pub mu: f64,
    pub min_period_ratio: f64,
    pub min_pointwise_ratio: f64,
    pub periodic_defect: f64,
    /// `max_k (W_{k+1} − W_k) / W(0)` along the witness trajectory.
    pub energy_increase: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CaseOutcome {
    pub index: usize,
    pub seed: u64,
    pub family: Family,
    pub p: usize,
    pub q: usize,
    pub n: usize,
    pub margin: f64,
    pub spectral: bool,
    pub empirical: Option<bool>,
    pub ratio: Option<f64>,
    pub agree: bool,
    /// `max_k (W_{k+1} − W_k) / W(0)`.
    pub energy_increase: f64,
    pub max_constraint_residual: f64,
    pub error: Option<String>,
    pub witness: Option<WitnessSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HistogramBin {
    pub label: String,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    pub settings: SweepConfig,
    pub cases: usize,
    pub agreements: usize,
    /// Seeds of the cases whose verdicts disagree.
    pub disagreements: Vec<u64>,
    pub margin_histogram: Vec<HistogramBin>,
    pub outcomes: Vec<CaseOutcome>,
}

/// Seed of case `index` in a sweep seeded with `seed`.
pub fn case_seed(seed: u64, index: usize) -> u64 {
    // splitmix64 finalizer over the pair.
    let mut z = seed
        ^ (index as u64)
            .wrapping_add(1)
            .wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn weight<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.random_range(0.5..=2.0)
}

fn pick_family<R: Rng + ?Sized>(rng: &mut R) -> Family {
    match rng.random_range(0..10) {
        0..=3 => Family::Mixed,
        4 | 5 => Family::DampersOnly,
        6 | 7 => Family::SpringsOnly,
        _ => Family::SpringStar,
    }
}

fn shuffled<R: Rng + ?Sized>(rng: &mut R, nodes: &[usize]) -> Vec<usize> {
    let mut order = nodes.to_vec();
    for k in (1..order.len()).rev() {
        order.swap(k, rng.random_range(0..=k));
    }
    order
}

/// Random spanning tree over `nodes` plus extra edges with probability 0.3.
/// `tree` and `extra` decide whether an edge carries a damper, a spring or
/// both.
fn grow<R: Rng + ?Sized>(
    rng: &mut R,
    nodes: &[usize],
    dampers: &mut Vec<Edge>,
    springs: &mut Vec<Edge>,
    tree: fn(&mut R) -> (bool, bool),
    extra: fn(&mut R) -> (bool, bool),
) {
    let order = shuffled(rng, nodes);
    let mut linked = std::collections::HashSet::new();
    let mut place = |rng: &mut R, i: usize, j: usize, (d, s): (bool, bool)| {
        if d {
            dampers.push(Edge::new(i, j, weight(rng)));
        }
        if s {
            springs.push(Edge::new(i, j, weight(rng)));
        }
    };
    for k in 1..order.len() {
        let (i, j) = (order[k], order[rng.random_range(0..k)]);
        linked.insert((i.min(j), i.max(j)));
        let kind = tree(rng);
        place(rng, i, j, kind);
    }
    for (a, &i) in nodes.iter().enumerate() {
        for &j in &nodes[a + 1..] {
            if linked.contains(&(i.min(j), i.max(j))) || !rng.random_bool(0.3) {
                continue;
            }
            let kind = extra(rng);
            place(rng, i, j, kind);
        }
    }
}

fn damper_tree<R: Rng + ?Sized>(rng: &mut R) -> (bool, bool) {
    (true, rng.random_bool(0.5))
}

fn any_kind<R: Rng + ?Sized>(rng: &mut R) -> (bool, bool) {
    match rng.random_range(0..3) {
        0 => (true, false),
        1 => (false, true),
        _ => (true, true),
    }
}

/// Which kinds `(damper, spring)` a new edge carries.
type EdgeKinds<R> = fn(&mut R) -> (bool, bool);

/// Random network with `2 ≤ q ≤ p ≤ max_p`. Every family is connected, so
/// each interior node reaches the boundary.
///
/// - `Mixed`: damper spanning tree, springs and dampers on top.
/// - `DampersOnly`, `SpringsOnly`: one element type throughout.
/// - `SpringStar`: two or three boundary leaves hang from a hub by springs of
///   equal weight, the rest is a `Mixed` core. Antisymmetric leaf motion is
///   never damped.
pub fn random_network<R: Rng + ?Sized>(
    rng: &mut R,
    max_p: usize,
    family: Family,
) -> CouplingNetwork {
    let max_p = max_p.max(3);
    let mut dampers = Vec::new();
    let mut springs = Vec::new();
    let (p, q) = match family {
        Family::SpringStar => {
            let leaves = rng.random_range(2..=3.min(max_p - 1));
            let p = rng.random_range(leaves + 1..=max_p);
            let q = rng.random_range(leaves..=p);
            let core: Vec<usize> = (leaves..p).collect();
            grow(
                rng,
                &core,
                &mut dampers,
                &mut springs,
                damper_tree,
                any_kind,
            );
            let hub = core[rng.random_range(0..core.len())];
            let r = weight(rng);
            for leaf in 0..leaves {
                springs.push(Edge::new(leaf, hub, r));
            }
            (p, q)
        }
        _ => {
            let p = rng.random_range(2..=max_p);
            let q = rng.random_range(2..=p);
            let nodes: Vec<usize> = (0..p).collect();
            let (tree, extra): (EdgeKinds<R>, EdgeKinds<R>) = match family {
                Family::DampersOnly => (|_| (true, false), |_| (true, false)),
                Family::SpringsOnly => (|_| (false, true), |_| (false, true)),
                _ => (damper_tree, any_kind),
            };
            grow(rng, &nodes, &mut dampers, &mut springs, tree, extra);
            (p, q)
        }
    };
    CouplingNetwork::new(p, q, dampers, springs).expect("generated network is valid")
}

fn random_orthogonal<R: Rng + ?Sized>(rng: &mut R, n: usize) -> RMatrix {
    let g = RMatrix::from_fn(n, n, |_, _| rng.sample::<f64, _>(StandardNormal));
    g.qr().q()
}

/// Random oscillator with `1 ≤ n ≤ max_n`.
///
/// `M` has spectrum in `[0.5, 2]`. The natural frequencies start in
/// `[0.7, 1.2]` and grow by a factor in `[2, 3]`; each mode `φₖ`
/// (`M`-normalized) sees the input with `|φₖᵀB| ∈ [0.4, 0.8]`. Close
/// frequencies or a dominant input make damped arrays lock their outputs
/// and shed the remaining motion very slowly.
pub fn random_oscillator<R: Rng + ?Sized>(rng: &mut R, max_n: usize) -> OscillatorModel {
    let n = rng.random_range(1..=max_n.max(1));
    let u = random_orthogonal(rng, n);
    let spectrum = RVector::from_fn(n, |_, _| rng.random_range(0.5..=2.0));
    let m = &u * RMatrix::from_diagonal(&spectrum) * u.transpose();
    let m = (&m + m.transpose()) * 0.5;
    let l = m.clone().cholesky().expect("M is SPD").l();
    // Φ = L⁻ᵀ V is M-orthonormal; K = L V Ω² Vᵀ Lᵀ has modes Φ.
    let lv = &l * random_orthogonal(rng, n);
    let mut omega = rng.random_range(0.7..=1.2);
    let mut omega2 = Vec::with_capacity(n);
    for _ in 0..n {
        omega2.push(omega * omega);
        omega *= rng.random_range(2.0..=3.0);
    }
    let k = &lv * RMatrix::from_diagonal(&RVector::from_vec(omega2)) * lv.transpose();
    let k = (&k + k.transpose()) * 0.5;
    let visibility = RVector::from_fn(n, |_, _| {
        let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        sign * rng.random_range(0.4..=0.8)
    });
    let b = &lv * visibility;
    OscillatorModel::new(m, k, b).expect("generated oscillator is valid")
}

/// Draw case `index`. Cases whose margin lies in the gray band
/// `(1e-2·zero_tol, gray_band]` are redrawn.
pub fn generate_case(cfg: &SweepConfig, index: usize) -> Result<SweepCase> {
    let seed = case_seed(cfg.seed, index);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut redraws = 0;
    loop {
        let family = pick_family(&mut rng);
        let network = random_network(&mut rng, cfg.max_p, family);
        let oscillator = random_oscillator(&mut rng, cfg.max_n);
        let reduced = reduce(&network, &cfg.tolerances)?;
        let verdict = sync_verdict(&reduced.gamma, None)?;
        let gray = verdict.class == VerdictClass::Inconclusive
            || (verdict.synchronizes && verdict.margin <= cfg.gray_band);
        if gray {
            redraws += 1;
            continue;
        }
        return Ok(SweepCase {
            index,
            seed,
            family,
            network,
            oscillator,
            redraws,
            margin: verdict.margin,
            spectral: verdict.synchronizes,
            rng,
        });
    }
}

/// Simulate one case from a random initial state and compare verdicts.
pub fn run_case(cfg: &SweepConfig, case: &SweepCase) -> CaseOutcome {
    let mut outcome = CaseOutcome {
        index: case.index,
        seed: case.seed,
        family: case.family,
        p: case.network.p(),
        q: case.network.q(),
        n: case.oscillator.n(),
        margin: case.margin,
        spectral: case.spectral,
        empirical: None,
        ratio: None,
        agree: false,
        energy_increase: 0.0,
        max_constraint_residual: 0.0,
        error: None,
        witness: None,
    };
    if let Err(e) = evaluate(cfg, case, &mut outcome) {
        outcome.error = Some(e.to_string());
        if let Error::InconclusiveHorizon { ratio } = e {
            outcome.ratio = Some(ratio);
        }
    }
    outcome
}

fn evaluate(cfg: &SweepConfig, case: &SweepCase, out: &mut CaseOutcome) -> Result<()> {
    let tol = &cfg.tolerances;
    let sys = assemble_descriptor(&case.network, &case.oscillator, tol)?;
    let mut rng = case.rng.clone();
    let init = random_initial_state(&sys, &mut rng, tol.dae)?;
    let opts = SimOptions {
        horizon: cfg.horizon,
        dt: cfg.dt,
        record_every: cfg.record_every,
        dae_tol: tol.dae,
    };
    let traj = simulate(&sys, &init.state, &opts)?;
    let w0 = traj.stats.initial_energy;
    out.energy_increase = if w0 > 0.0 {
        traj.stats.max_energy_increase / w0
    } else {
        0.0
    };
    out.max_constraint_residual = traj.stats.max_constraint_residual;
    let verdict = empirical_verdict(&traj, cfg.decay_ratio_tol)?;
    out.empirical = Some(verdict.synchronizes);
    out.ratio = Some(verdict.ratio);
    out.agree = verdict.synchronizes == case.spectral;

    if cfg.witness && !case.spectral {
        let reduced = reduce(&case.network, tol)?;
        let spectral = sync_verdict(&reduced.gamma, None)?;
        let witness = witness_nonsync(&case.network, &case.oscillator, &reduced, &spectral)?;
        let check = witness_check(&sys, &witness, &WitnessCheckOptions::default(), tol.dae)?;
        out.witness = Some(WitnessSummary {
            omega: witness.omega,
            mu: witness.mu,
            min_period_ratio: check.min_period_ratio,
            min_pointwise_ratio: check.min_pointwise_ratio,
            periodic_defect: check.periodic_defect,
            energy_increase: check.stats.max_energy_increase / check.stats.initial_energy,
            passed: check.min_period_ratio >= 0.5 && check.periodic_defect <= 1e-3,
        });
    }
    Ok(())
}

/// Decade histogram of `Re λ₂`, with one bin for non-positive margins and
/// one for single-oscillator cases.
pub fn margin_histogram(margins: &[f64]) -> Vec<HistogramBin> {
    let mut bins: Vec<HistogramBin> = Vec::new();
    let mut add = |label: String| match bins.iter_mut().find(|b| b.label == label) {
        Some(b) => b.count += 1,
        None => bins.push(HistogramBin { label, count: 1 }),
    };
    let mut sorted = margins.to_vec();
    sorted.sort_by(f64::total_cmp);
    for m in sorted {
        if m.is_infinite() {
            add("inf".into());
        } else if m <= 0.0 || m < 1e-12 {
            add("<=0".into());
        } else {
            let e = m.log10().floor() as i32;
            add(format!("[1e{e},1e{})", e + 1));
        }
    }
    bins
}

pub fn run_sweep(cfg: &SweepConfig) -> Result<SweepReport> {
    let cases: Vec<SweepCase> = (0..cfg.cases)
        .into_par_iter()
        .map(|i| generate_case(cfg, i))
        .collect::<Result<_>>()?;
    let outcomes: Vec<CaseOutcome> = cases.par_iter().map(|c| run_case(cfg, c)).collect();
    let agreements = outcomes.iter().filter(|o| o.agree).count();
    let disagreements = outcomes
        .iter()
        .filter(|o| !o.agree)
        .map(|o| o.seed)
        .collect();
    let margins: Vec<f64> = outcomes.iter().map(|o| o.margin).collect();
    Ok(SweepReport {
        settings: *cfg,
        cases: cfg.cases,
        agreements,
        disagreements,
        margin_histogram: margin_histogram(&margins),
        outcomes,
    })
}
