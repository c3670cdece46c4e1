//! JSON and CSV formats used by the command-line front end.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dynamics::{Trajectory, WitnessSolution};
use crate::error::{Error, Result};
use crate::kron::ReducedCoupling;
use crate::linalg::{CMatrix, CVector, RMatrix, RVector, C64};
use crate::netmodel::{
    validate_network, CouplingNetwork, OscillatorModel, RawNetwork, RawOscillator,
};

/// Complex number as `{"re": .., "im": ..}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JsonComplex {
    pub re: f64,
    pub im: f64,
}

impl From<C64> for JsonComplex {
    fn from(z: C64) -> Self {
        Self { re: z.re, im: z.im }
    }
}

impl From<JsonComplex> for C64 {
    fn from(z: JsonComplex) -> Self {
        C64::new(z.re, z.im)
    }
}

pub fn complex_rows(m: &CMatrix) -> Vec<Vec<JsonComplex>> {
    m.row_iter()
        .map(|r| r.iter().map(|&z| z.into()).collect())
        .collect()
}

pub fn real_rows(m: &RMatrix) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

pub fn complex_vec(v: &CVector) -> Vec<JsonComplex> {
    v.iter().map(|&z| z.into()).collect()
}

/// Serde helper writing complex numbers as `{"re", "im"}` objects.
pub fn serialize_complex_slice<S: serde::Serializer>(
    v: &[C64],
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|&z| JsonComplex::from(z)))
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

fn parse_json<T: for<'de> Deserialize<'de>>(text: &str, what: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse(format!("{what}: {e}")))
}

pub fn parse_network(text: &str) -> Result<CouplingNetwork> {
    let raw: RawNetwork = parse_json(text, "network")?;
    validate_network(&raw)
}

pub fn load_network(path: &Path) -> Result<CouplingNetwork> {
    parse_network(&read(path)?)
}

pub fn parse_oscillator(text: &str) -> Result<OscillatorModel> {
    let raw: RawOscillator = parse_json(text, "oscillator")?;
    OscillatorModel::from_raw(&raw)
}

pub fn load_oscillator(path: &Path) -> Result<OscillatorModel> {
    parse_oscillator(&read(path)?)
}

/// Initial-state file `{"x": [..], "v": [..], "g": [..]}`; `g` is optional.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitialStateFile {
    pub x: Vec<f64>,
    pub v: Vec<f64>,
    #[serde(default)]
    pub g: Option<Vec<f64>>,
}

impl InitialStateFile {
    pub fn parts(&self) -> (RVector, RVector, Option<RVector>) {
        (
            RVector::from_vec(self.x.clone()),
            RVector::from_vec(self.v.clone()),
            self.g.clone().map(RVector::from_vec),
        )
    }
}

pub fn load_initial_state(path: &Path) -> Result<InitialStateFile> {
    parse_json(&read(path)?, "initial state")
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReductionReport {
    pub labels: Vec<String>,
    pub q: usize,
    pub gamma: Vec<Vec<JsonComplex>>,
    pub lambda: Vec<Vec<f64>>,
    /// Interior lift of the complex reduction, `m × q`.
    pub e_complex: Vec<Vec<JsonComplex>>,
    /// Interior lift of the spring-only reduction.
    pub e_real: Vec<Vec<JsonComplex>>,
    pub residual_gamma: f64,
    pub residual_lambda: f64,
}

impl ReductionReport {
    pub fn new(net: &CouplingNetwork, reduced: &ReducedCoupling) -> Self {
        Self {
            labels: net.labels()[..net.q()].to_vec(),
            q: net.q(),
            gamma: complex_rows(&reduced.gamma),
            lambda: real_rows(&reduced.lambda),
            e_complex: complex_rows(&reduced.e_complex),
            e_real: complex_rows(&reduced.e_real),
            residual_gamma: reduced.residual_gamma,
            residual_lambda: reduced.residual_lambda,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WitnessReport {
    pub omega: f64,
    pub mu: f64,
    pub period: f64,
    pub ybar: Vec<JsonComplex>,
    pub gbar: Vec<JsonComplex>,
    pub eta: Vec<JsonComplex>,
    pub xbar: Vec<JsonComplex>,
    pub initial_state: InitialStateFile,
    pub eigen_residual: f64,
    pub eta_residual: f64,
    pub dissipation_residual: f64,
}

impl From<&WitnessSolution> for WitnessReport {
    fn from(w: &WitnessSolution) -> Self {
        let qn = w.xbar.len();
        let s = w.initial_state.as_slice();
        Self {
            omega: w.omega,
            mu: w.mu,
            period: w.period,
            ybar: complex_vec(&w.ybar),
            gbar: complex_vec(&w.gbar),
            eta: complex_vec(&w.eta),
            xbar: complex_vec(&w.xbar),
            initial_state: InitialStateFile {
                x: s[..qn].to_vec(),
                v: s[qn..2 * qn].to_vec(),
                g: Some(s[2 * qn..].to_vec()),
            },
            eigen_residual: w.eigen_residual,
            eta_residual: w.eta_residual,
            dissipation_residual: w.dissipation_residual,
        }
    }
}

/// CSV header `t,x_1_1..x_q_n,v_1_1..v_q_n,g_1..g_m,W,sync_dist,residual`.
pub fn csv_header(q: usize, n: usize, interior: usize) -> String {
    let mut cols = vec!["t".to_string()];
    for prefix in ["x", "v"] {
        for i in 1..=q {
            for k in 1..=n {
                cols.push(format!("{prefix}_{i}_{k}"));
            }
        }
    }
    cols.extend((1..=interior).map(|k| format!("g_{k}")));
    cols.extend(["W", "sync_dist", "residual"].map(String::from));
    cols.join(",")
}

pub fn write_trajectory_csv<W: Write>(out: &mut W, traj: &Trajectory) -> std::io::Result<()> {
    let l = traj.layout;
    writeln!(out, "{}", csv_header(l.q, l.n, l.interior))?;
    for (k, w) in traj.states.iter().enumerate() {
        write!(out, "{}", traj.times[k])?;
        for value in w.iter() {
            write!(out, ",{value}")?;
        }
        writeln!(
            out,
            ",{},{},{}",
            traj.energy[k], traj.sync_dist[k], traj.constraint_residual[k]
        )?;
    }
    Ok(())
}
