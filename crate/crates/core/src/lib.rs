//! Synchronization analysis for arrays of identical linear oscillators
//! `M ẍᵢ + K xᵢ = B uᵢ` coupled through a network of dampers and springs
//! that may contain interior nodes (nodes without an oscillator attached).
//!
//! The pipeline is:
//!
//! 1. [`netmodel`]: validate the network and oscillator, build the damper
//!    Laplacian `D` and spring Laplacian `R`, partition them into
//!    boundary/interior blocks.
//! 2. [`kron`]: Kron-reduce the complex Laplacian `D + jR` onto the boundary
//!    nodes, giving `Γ`, and `R` alone, giving `Λ`.
//! 3. [`spectral`]: the array synchronizes iff `Re λ₂(Γ) > 0`, with the
//!    eigenvalues ordered by real part.
//! 4. [`dynamics`]: assemble and integrate the coupled descriptor system,
//!    monitor energy and distance to the synchronization subspace, and build
//!    explicit non-synchronizing periodic solutions when the verdict fails.
//! 5. [`sweep`]: randomized agreement harness between the spectral verdict
//!    and simulation.

// Negated comparisons are deliberate: they reject NaN along with bad values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod error;
pub mod io;
pub mod kron;
pub mod linalg;
pub mod netmodel;
pub mod spectral;
pub mod sweep;

pub use dynamics::{
    assemble_descriptor, consistent_initial_state, empirical_verdict, energy, simulate,
    sync_distance, witness_nonsync, DescriptorSystem, EmpiricalVerdict, SimOptions, Trajectory,
    WitnessSolution,
};
pub use error::{Error, Result};
pub use kron::{reduce, schur_complement_complex, schur_complement_real, ReducedCoupling};
pub use linalg::{CMatrix, CVector, RMatrix, RVector, C64};
pub use netmodel::{
    build_laplacian, check_observability, partition_blocks, validate_network, BlockPartition,
    CouplingNetwork, Edge, ObservabilityReport, OscillatorModel, RawNetwork,
};
pub use spectral::{eigenvalues_sorted, sync_verdict, SpectralVerdict, VerdictClass};

/// Numerical tolerances shared across the pipeline.
///
/// All values are relative unless noted.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Tolerances {
    /// Accept `X` as symmetric when `‖X − Xᵀ‖∞ ≤ symmetry · max(1, ‖X‖∞)`.
    pub symmetry: f64,
    /// Singular values below `rank · σ_max` count as zero.
    pub rank: f64,
    /// Defining-equation residual must stay below `certify · (1 + ‖X‖∞)`.
    pub certify: f64,
    /// Eigenvalues within `zero · max(1, ‖Γ‖∞)` of the imaginary axis count as on it.
    pub zero: f64,
    /// Absolute bound on the interior algebraic-constraint residual.
    pub dae: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            symmetry: 1e-9,
            rank: 1e-10,
            certify: 1e-8,
            zero: 1e-8,
            dae: 1e-6,
        }
    }
}
