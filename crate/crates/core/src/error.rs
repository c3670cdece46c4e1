use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{kind} edge ({i}, {j}) has negative weight {weight}")]
    NegativeWeight {
        kind: &'static str,
        i: String,
        j: String,
        weight: f64,
    },
    #[error("{kind} edge ({i}, {j}) has a non-finite weight")]
    NonFiniteWeight {
        kind: &'static str,
        i: String,
        j: String,
    },
    #[error("{kind} edge ({i}, {j}) appears more than once")]
    DuplicateEdge {
        kind: &'static str,
        i: String,
        j: String,
    },
    #[error("{kind} edge connects node {node} to itself")]
    SelfLoop { kind: &'static str, node: String },
    #[error("unknown or out-of-range node {0}")]
    BadIndex(String),
    #[error("node label {0} is listed more than once")]
    DuplicateLabel(String),
    #[error("the boundary node set is empty")]
    EmptyBoundary,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("{0} is not symmetric")]
    NotSymmetric(&'static str),
    #[error("{0} is not positive definite")]
    NotPositiveDefinite(&'static str),
    #[error("input vector B is zero")]
    ZeroInput,
    #[error("Schur complement residual {residual:e} exceeds {threshold:e}")]
    CertificationFailed { residual: f64, threshold: f64 },
    #[error("eigenvalue iteration did not converge")]
    EigenSolverFailure,
    #[error("step matrix E - (dt/2)A is singular at dt = {dt}; try halving dt")]
    SingularStepMatrix { dt: f64 },
    #[error("integration produced non-finite values at step {step}")]
    StepDiverged { step: usize },
    #[error("interior constraint residual {residual:e} exceeds {tol:e}")]
    InconsistentConstraint { residual: f64, tol: f64 },
    #[error("network synchronizes; no non-synchronizing solution exists")]
    VerdictIsSync,
    #[error("no positive generalized eigenvalue of (K + μBBᵀ, M)")]
    NoResonance,
    #[error("every resonant null vector is orthogonal to B")]
    EtaNotScalable,
    #[error("decay ratio {ratio:e} falls inside the inconclusive band")]
    InconclusiveHorizon { ratio: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// Malformed input as opposed to a numerical breakdown.
    pub fn is_input_error(&self) -> bool {
        !matches!(
            self,
            Error::CertificationFailed { .. }
                | Error::EigenSolverFailure
                | Error::SingularStepMatrix { .. }
                | Error::StepDiverged { .. }
                | Error::InconsistentConstraint { .. }
                | Error::NoResonance
                | Error::EtaNotScalable
                | Error::InconclusiveHorizon { .. }
        )
    }
}
