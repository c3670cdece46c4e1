//! Coupling networks, oscillator models, Laplacians and their
//! boundary/interior partition.
//!
//! Nodes are stored in canonical order: the `q` boundary nodes (those with an
//! oscillator attached) occupy indices `0..q`, interior nodes `q..p`.

use std::collections::{HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, RMatrix, RVector};
use crate::Tolerances;

/// Node label as it appears in a network file: either an integer or a string.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Label {
    Int(i64),
    Str(String),
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Int(i) => write!(f, "{i}"),
            Label::Str(s) => f.write_str(s),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NodeSpec {
    /// `p` nodes labelled `1..=p`.
    Count(usize),
    Labels(Vec<Label>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawEdge {
    pub i: Label,
    pub j: Label,
    pub w: f64,
}

/// Network description as read from JSON, before validation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawNetwork {
    pub nodes: NodeSpec,
    /// Boundary labels; all nodes when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boundary: Option<Vec<Label>>,
    #[serde(default)]
    pub dampers: Vec<RawEdge>,
    #[serde(default)]
    pub springs: Vec<RawEdge>,
}

/// Weighted undirected edge between canonical node indices.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub i: usize,
    pub j: usize,
    pub w: f64,
}

impl Edge {
    pub fn new(i: usize, j: usize, w: f64) -> Self {
        Self { i, j, w }
    }
}

/// A validated damper/spring network in canonical node order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CouplingNetwork {
    p: usize,
    q: usize,
    labels: Vec<String>,
    dampers: Vec<Edge>,
    springs: Vec<Edge>,
}

impl CouplingNetwork {
    /// Build from canonical 0-based indices; nodes `0..q` are the boundary.
    /// Labels default to `1..=p`.
    pub fn new(p: usize, q: usize, dampers: Vec<Edge>, springs: Vec<Edge>) -> Result<Self> {
        let labels = (1..=p).map(|i| i.to_string()).collect();
        Self::with_labels(q, labels, dampers, springs)
    }

    fn with_labels(
        q: usize,
        labels: Vec<String>,
        dampers: Vec<Edge>,
        springs: Vec<Edge>,
    ) -> Result<Self> {
        let p = labels.len();
        if q == 0 {
            return Err(Error::EmptyBoundary);
        }
        if q > p {
            return Err(Error::BadIndex(format!(
                "boundary size {q} exceeds node count {p}"
            )));
        }
        check_edges("damper", &dampers, &labels)?;
        check_edges("spring", &springs, &labels)?;
        Ok(Self {
            p,
            q,
            labels,
            dampers,
            springs,
        })
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn interior(&self) -> usize {
        self.p - self.q
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn dampers(&self) -> &[Edge] {
        &self.dampers
    }

    pub fn springs(&self) -> &[Edge] {
        &self.springs
    }

    /// `D = lap(d)`.
    pub fn damper_laplacian(&self) -> RMatrix {
        build_laplacian(self.p, &self.dampers)
    }

    /// `R = lap(r)`.
    pub fn spring_laplacian(&self) -> RMatrix {
        build_laplacian(self.p, &self.springs)
    }

    pub fn blocks(&self) -> BlockPartition {
        partition_blocks(&self.damper_laplacian(), &self.spring_laplacian(), self.q)
            .expect("Laplacians of a validated network partition cleanly")
    }

    /// Same network with every weight multiplied by `c ≥ 0`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        let scale = |es: &[Edge]| es.iter().map(|e| Edge::new(e.i, e.j, e.w * c)).collect();
        Self::with_labels(
            self.q,
            self.labels.clone(),
            scale(&self.dampers),
            scale(&self.springs),
        )
    }

    /// Relabel boundary nodes by `perm` (new index of old boundary node `k`
    /// is `perm[k]`); interior nodes stay put.
    pub fn permute_boundary(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.q {
            return Err(Error::DimensionMismatch(format!(
                "permutation has {} entries, boundary has {}",
                perm.len(),
                self.q
            )));
        }
        let map = |k: usize| if k < self.q { perm[k] } else { k };
        let mut labels = self.labels.clone();
        for (k, &target) in perm.iter().enumerate() {
            labels[target] = self.labels[k].clone();
        }
        let remap = |es: &[Edge]| {
            es.iter()
                .map(|e| Edge::new(map(e.i), map(e.j), e.w))
                .collect()
        };
        Self::with_labels(self.q, labels, remap(&self.dampers), remap(&self.springs))
    }

    /// Serializable form using the canonical labels.
    pub fn to_raw(&self) -> RawNetwork {
        let lab = |k: usize| Label::Str(self.labels[k].clone());
        let edges = |es: &[Edge]| {
            es.iter()
                .map(|e| RawEdge {
                    i: lab(e.i),
                    j: lab(e.j),
                    w: e.w,
                })
                .collect()
        };
        RawNetwork {
            nodes: NodeSpec::Labels((0..self.p).map(lab).collect()),
            boundary: Some((0..self.q).map(lab).collect()),
            dampers: edges(&self.dampers),
            springs: edges(&self.springs),
        }
    }
}

fn check_edges(kind: &'static str, edges: &[Edge], labels: &[String]) -> Result<()> {
    let p = labels.len();
    let mut seen = HashSet::new();
    for e in edges {
        if e.i >= p {
            return Err(Error::BadIndex(format!("{kind} endpoint {}", e.i + 1)));
        }
        if e.j >= p {
            return Err(Error::BadIndex(format!("{kind} endpoint {}", e.j + 1)));
        }
        let (li, lj) = (labels[e.i].clone(), labels[e.j].clone());
        if e.i == e.j {
            return Err(Error::SelfLoop { kind, node: li });
        }
        if !e.w.is_finite() {
            return Err(Error::NonFiniteWeight { kind, i: li, j: lj });
        }
        if e.w < 0.0 {
            return Err(Error::NegativeWeight {
                kind,
                i: li,
                j: lj,
                weight: e.w,
            });
        }
        if !seen.insert((e.i.min(e.j), e.i.max(e.j))) {
            return Err(Error::DuplicateEdge { kind, i: li, j: lj });
        }
    }
    Ok(())
}

/// Validate a raw network description and canonicalize it so that the
/// boundary nodes come first, in the order the boundary list gives them.
pub fn validate_network(raw: &RawNetwork) -> Result<CouplingNetwork> {
    let node_labels: Vec<String> = match &raw.nodes {
        NodeSpec::Count(p) => (1..=*p).map(|i| i.to_string()).collect(),
        NodeSpec::Labels(ls) => ls.iter().map(Label::to_string).collect(),
    };
    let mut position = HashMap::new();
    for (k, l) in node_labels.iter().enumerate() {
        if position.insert(l.clone(), k).is_some() {
            return Err(Error::DuplicateLabel(l.clone()));
        }
    }
    let boundary: Vec<String> = match &raw.boundary {
        Some(b) => b.iter().map(Label::to_string).collect(),
        None => node_labels.clone(),
    };
    if boundary.is_empty() {
        return Err(Error::EmptyBoundary);
    }
    let mut in_boundary = HashSet::new();
    for l in &boundary {
        if !position.contains_key(l) {
            return Err(Error::BadIndex(l.clone()));
        }
        if !in_boundary.insert(l.clone()) {
            return Err(Error::DuplicateLabel(l.clone()));
        }
    }
    let mut canonical = boundary.clone();
    canonical.extend(
        node_labels
            .iter()
            .filter(|l| !in_boundary.contains(*l))
            .cloned(),
    );
    let index: HashMap<&str, usize> = canonical
        .iter()
        .enumerate()
        .map(|(k, l)| (l.as_str(), k))
        .collect();

    let convert = |kind: &'static str, es: &[RawEdge]| -> Result<Vec<Edge>> {
        es.iter()
            .map(|e| {
                let look = |l: &Label| {
                    index
                        .get(l.to_string().as_str())
                        .copied()
                        .ok_or_else(|| Error::BadIndex(format!("{kind} endpoint {l}")))
                };
                Ok(Edge::new(look(&e.i)?, look(&e.j)?, e.w))
            })
            .collect()
    };
    let dampers = convert("damper", &raw.dampers)?;
    let springs = convert("spring", &raw.springs)?;
    CouplingNetwork::with_labels(boundary.len(), canonical, dampers, springs)
}

/// Laplacian of a weighted undirected graph on `p` nodes:
/// `L_ij = −w_ij` off the diagonal, `L_ii = Σ_j w_ij`.
pub fn build_laplacian(p: usize, edges: &[Edge]) -> RMatrix {
    let mut l = RMatrix::zeros(p, p);
    for e in edges {
        l[(e.i, e.j)] -= e.w;
        l[(e.j, e.i)] -= e.w;
        l[(e.i, e.i)] += e.w;
        l[(e.j, e.j)] += e.w;
    }
    l
}

/// `D` and `R` split as `[[U, V], [Vᵀ, W]]` with `U` on the `q` boundary nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockPartition {
    pub q: usize,
    pub d: RMatrix,
    pub r: RMatrix,
    pub u1: RMatrix,
    pub u2: RMatrix,
    pub v1: RMatrix,
    pub v2: RMatrix,
    pub w1: RMatrix,
    pub w2: RMatrix,
}

impl BlockPartition {
    pub fn p(&self) -> usize {
        self.d.nrows()
    }

    pub fn interior(&self) -> usize {
        self.p() - self.q
    }

    /// Rebuild `(D, R)` from the blocks.
    pub fn reassemble(&self) -> (RMatrix, RMatrix) {
        let glue = |u: &RMatrix, v: &RMatrix, w: &RMatrix| {
            let p = self.p();
            let mut m = RMatrix::zeros(p, p);
            m.view_mut((0, 0), (self.q, self.q)).copy_from(u);
            m.view_mut((0, self.q), v.shape()).copy_from(v);
            m.view_mut((self.q, 0), (v.ncols(), v.nrows()))
                .copy_from(&v.transpose());
            m.view_mut((self.q, self.q), w.shape()).copy_from(w);
            m
        };
        (
            glue(&self.u1, &self.v1, &self.w1),
            glue(&self.u2, &self.v2, &self.w2),
        )
    }
}

pub fn partition_blocks(d: &RMatrix, r: &RMatrix, q: usize) -> Result<BlockPartition> {
    let p = d.nrows();
    if !d.is_square() || r.shape() != d.shape() {
        return Err(Error::DimensionMismatch(format!(
            "D is {:?}, R is {:?}",
            d.shape(),
            r.shape()
        )));
    }
    if q == 0 || q > p {
        return Err(Error::DimensionMismatch(format!("q = {q} with p = {p}")));
    }
    let m = p - q;
    Ok(BlockPartition {
        q,
        d: d.clone(),
        r: r.clone(),
        u1: linalg::block(d, 0, 0, q, q),
        u2: linalg::block(r, 0, 0, q, q),
        v1: linalg::block(d, 0, q, q, m),
        v2: linalg::block(r, 0, q, q, m),
        w1: linalg::block(d, q, q, m, m),
        w2: linalg::block(r, q, q, m, m),
    })
}

/// Oscillator file contents: row-major `M`, `K` and the vector `B`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RawOscillator {
    #[serde(rename = "M")]
    pub m: Vec<Vec<f64>>,
    #[serde(rename = "K")]
    pub k: Vec<Vec<f64>>,
    #[serde(rename = "B")]
    pub b: Vec<f64>,
}

/// `M ẍ + K x = B u`, `y = Bᵀx` with `M, K ≻ 0` and `B ≠ 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct OscillatorModel {
    m: RMatrix,
    k: RMatrix,
    b: RVector,
}

impl OscillatorModel {
    pub fn new(m: RMatrix, k: RMatrix, b: RVector) -> Result<Self> {
        Self::with_tolerance(m, k, b, Tolerances::default().symmetry)
    }

    pub fn with_tolerance(m: RMatrix, k: RMatrix, b: RVector, sym_tol: f64) -> Result<Self> {
        let n = b.len();
        if n == 0 {
            return Err(Error::DimensionMismatch("B is empty".into()));
        }
        for (name, x) in [("M", &m), ("K", &k)] {
            if x.shape() != (n, n) {
                return Err(Error::DimensionMismatch(format!(
                    "{name} is {:?}, expected {n}x{n}",
                    x.shape()
                )));
            }
            if x.iter().any(|v| !v.is_finite()) {
                return Err(Error::Parse(format!("{name} has non-finite entries")));
            }
        }
        if b.iter().any(|v| !v.is_finite()) {
            return Err(Error::Parse("B has non-finite entries".into()));
        }
        let m = linalg::symmetrize_checked(&m, sym_tol, "M")?;
        let k = linalg::symmetrize_checked(&k, sym_tol, "K")?;
        if !linalg::is_positive_definite(&m) {
            return Err(Error::NotPositiveDefinite("M"));
        }
        if !linalg::is_positive_definite(&k) {
            return Err(Error::NotPositiveDefinite("K"));
        }
        if b.iter().all(|&v| v == 0.0) {
            return Err(Error::ZeroInput);
        }
        Ok(Self { m, k, b })
    }

    /// Scalar oscillator `m ẍ + k x = b u`.
    pub fn scalar(m: f64, k: f64, b: f64) -> Result<Self> {
        Self::new(
            RMatrix::from_element(1, 1, m),
            RMatrix::from_element(1, 1, k),
            RVector::from_element(1, b),
        )
    }

    pub fn from_raw(raw: &RawOscillator) -> Result<Self> {
        let n = raw.b.len();
        let mat = |name: &str, rows: &[Vec<f64>]| -> Result<RMatrix> {
            if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                return Err(Error::DimensionMismatch(format!("{name} must be {n}x{n}")));
            }
            Ok(RMatrix::from_fn(n, n, |i, j| rows[i][j]))
        };
        Self::new(
            mat("M", &raw.m)?,
            mat("K", &raw.k)?,
            RVector::from_vec(raw.b.clone()),
        )
    }

    pub fn to_raw(&self) -> RawOscillator {
        let rows = |x: &RMatrix| x.row_iter().map(|r| r.iter().copied().collect()).collect();
        RawOscillator {
            m: rows(&self.m),
            k: rows(&self.k),
            b: self.b.iter().copied().collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.b.len()
    }

    pub fn mass(&self) -> &RMatrix {
        &self.m
    }

    pub fn stiffness(&self) -> &RMatrix {
        &self.k
    }

    pub fn input(&self) -> &RVector {
        &self.b
    }

    /// Same oscillator with input direction `c·B`.
    pub fn with_input_scaled(&self, c: f64) -> Result<Self> {
        Self::new(self.m.clone(), self.k.clone(), &self.b * c)
    }
}

/// Result of the rank test `rank [K − ω²M; Bᵀ] = n` at every natural frequency.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ObservabilityReport {
    pub observable: bool,
    /// Distinct `ω > 0` with `det(K − ω²M) = 0`, ascending.
    pub natural_frequencies: Vec<f64>,
    /// Frequencies at which the stacked matrix loses rank.
    pub violations: Vec<f64>,
    /// `σ_min/σ_max` of the scaled stacked matrix at each natural frequency.
    pub rank_margins: Vec<f64>,
}

/// Relative gap below which two generalized eigenvalues are treated as one.
const FREQUENCY_MERGE_TOL: f64 = 1e-8;

/// Stacked observability matrix `[(K − ω²M)/s; Bᵀ/‖B‖]` with
/// `s = ‖K‖∞ + ω²‖M‖∞`. The scaling makes the test independent of the
/// magnitude of `B`.
pub fn observability_matrix(osc: &OscillatorModel, omega: f64) -> RMatrix {
    let n = osc.n();
    let w2 = omega * omega;
    let s = linalg::inf_norm(&osc.k) + w2 * linalg::inf_norm(&osc.m);
    let mut stacked = RMatrix::zeros(n + 1, n);
    stacked
        .view_mut((0, 0), (n, n))
        .copy_from(&((&osc.k - &osc.m * w2) / s));
    let b = &osc.b / osc.b.norm();
    stacked.row_mut(n).copy_from(&b.transpose());
    stacked
}

pub fn check_observability(osc: &OscillatorModel, tol: f64) -> Result<ObservabilityReport> {
    let (thetas, _) = linalg::generalized_symmetric_eigen(&osc.k, &osc.m)?;
    if thetas.iter().any(|&t| t <= 0.0) {
        return Err(Error::NotPositiveDefinite("K"));
    }
    let top = thetas.iter().copied().fold(0.0, f64::max);
    let mut clusters: Vec<Vec<f64>> = Vec::new();
    for &t in &thetas {
        match clusters.last_mut() {
            Some(c) if (t - c[0]).abs() <= FREQUENCY_MERGE_TOL * top => c.push(t),
            _ => clusters.push(vec![t]),
        }
    }
    let mut natural_frequencies = Vec::new();
    let mut violations = Vec::new();
    let mut rank_margins = Vec::new();
    for c in clusters {
        let theta = c.iter().sum::<f64>() / c.len() as f64;
        let omega = theta.sqrt();
        let sv = linalg::singular_values(&observability_matrix(osc, omega));
        let ratio = sv.min() / sv.max();
        natural_frequencies.push(omega);
        rank_margins.push(ratio);
        if ratio <= tol {
            violations.push(omega);
        }
    }
    Ok(ObservabilityReport {
        observable: violations.is_empty(),
        natural_frequencies,
        violations,
        rank_margins,
    })
}
