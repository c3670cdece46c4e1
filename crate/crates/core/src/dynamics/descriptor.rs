use std::ops::Range;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, RMatrix, RVector};
use crate::netmodel::{
    check_observability, BlockPartition, CouplingNetwork, ObservabilityReport, OscillatorModel,
};
use crate::Tolerances;

/// State layout `w = [x; v; g]`: oscillator positions (`q·n`), velocities
/// (`q·n`), interior node variables (`p − q`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Layout {
    pub q: usize,
    pub n: usize,
    pub interior: usize,
}

impl Layout {
    pub fn dim(&self) -> usize {
        2 * self.q * self.n + self.interior
    }

    pub fn x(&self) -> Range<usize> {
        0..self.q * self.n
    }

    pub fn v(&self) -> Range<usize> {
        self.q * self.n..2 * self.q * self.n
    }

    pub fn g(&self) -> Range<usize> {
        2 * self.q * self.n..self.dim()
    }
}

/// The coupled array as `E ẇ = A w`.
///
/// ```text
/// ẋ = v
/// (I⊗M) v̇ + (I⊗B) V₁ ġ = −(I⊗K) x − (I⊗B)(U₁ y' + U₂ y + V₂ g)
///              W₁ ġ      = −V₁ᵀ y' − V₂ᵀ y − W₂ g
/// ```
///
/// with `y = (I⊗Bᵀ) x` and `y' = (I⊗Bᵀ) v`. `E` is singular exactly when
/// `W₁` is.
#[derive(Debug, Clone)]
pub struct DescriptorSystem {
    pub e: RMatrix,
    pub a: RMatrix,
    pub layout: Layout,
    pub network: CouplingNetwork,
    pub oscillator: OscillatorModel,
    pub blocks: BlockPartition,
    pub observability: ObservabilityReport,
    /// `I_q ⊗ Bᵀ`.
    output: RMatrix,
    /// `W = ½ wᵀ Q w`.
    energy_form: RMatrix,
    /// Orthonormal basis of `null(W₁)`: the directions in which the interior
    /// rows are purely algebraic.
    interior_null: RMatrix,
}

pub fn assemble_descriptor(
    net: &CouplingNetwork,
    osc: &OscillatorModel,
    tol: &Tolerances,
) -> Result<DescriptorSystem> {
    let blocks = net.blocks();
    let observability = check_observability(osc, tol.rank)?;
    let (q, n, m) = (net.q(), osc.n(), net.interior());
    let layout = Layout { q, n, interior: m };
    if blocks.q != q || blocks.interior() != m {
        return Err(Error::DimensionMismatch(
            "network blocks do not match layout".into(),
        ));
    }
    let iq = RMatrix::identity(q, q);
    let b_col = RMatrix::from_column_slice(n, 1, osc.input().as_slice());
    let input = linalg::kron(&iq, &b_col); // qn × q
    let output = input.transpose(); // q × qn
    let mass = linalg::kron(&iq, osc.mass());
    let stiff = linalg::kron(&iq, osc.stiffness());

    let dim = layout.dim();
    let (xr, vr, gr) = (layout.x(), layout.v(), layout.g());
    let qn = q * n;
    let mut e = RMatrix::zeros(dim, dim);
    let mut a = RMatrix::zeros(dim, dim);

    e.view_mut((xr.start, xr.start), (qn, qn))
        .copy_from(&RMatrix::identity(qn, qn));
    a.view_mut((xr.start, vr.start), (qn, qn))
        .copy_from(&RMatrix::identity(qn, qn));

    e.view_mut((vr.start, vr.start), (qn, qn)).copy_from(&mass);
    a.view_mut((vr.start, xr.start), (qn, qn))
        .copy_from(&(-(&stiff + &input * &blocks.u2 * &output)));
    a.view_mut((vr.start, vr.start), (qn, qn))
        .copy_from(&(-(&input * &blocks.u1 * &output)));
    if m > 0 {
        e.view_mut((vr.start, gr.start), (qn, m))
            .copy_from(&(&input * &blocks.v1));
        a.view_mut((vr.start, gr.start), (qn, m))
            .copy_from(&(-(&input * &blocks.v2)));
        e.view_mut((gr.start, gr.start), (m, m))
            .copy_from(&blocks.w1);
        a.view_mut((gr.start, xr.start), (m, qn))
            .copy_from(&(-(blocks.v2.transpose() * &output)));
        a.view_mut((gr.start, vr.start), (m, qn))
            .copy_from(&(-(blocks.v1.transpose() * &output)));
        a.view_mut((gr.start, gr.start), (m, m))
            .copy_from(&(-&blocks.w2));
    }

    let mut energy_form = RMatrix::zeros(dim, dim);
    energy_form
        .view_mut((xr.start, xr.start), (qn, qn))
        .copy_from(&(&stiff + &input * &blocks.u2 * &output));
    energy_form
        .view_mut((vr.start, vr.start), (qn, qn))
        .copy_from(&mass);
    if m > 0 {
        let cross = &input * &blocks.v2;
        energy_form
            .view_mut((xr.start, gr.start), (qn, m))
            .copy_from(&cross);
        energy_form
            .view_mut((gr.start, xr.start), (m, qn))
            .copy_from(&cross.transpose());
        energy_form
            .view_mut((gr.start, gr.start), (m, m))
            .copy_from(&blocks.w2);
    }

    let interior_null = linalg::null_space(&blocks.w1, tol.rank);

    Ok(DescriptorSystem {
        e,
        a,
        layout,
        network: net.clone(),
        oscillator: osc.clone(),
        blocks,
        observability,
        output,
        energy_form,
        interior_null,
    })
}

impl DescriptorSystem {
    pub fn dim(&self) -> usize {
        self.layout.dim()
    }

    pub fn x<'a>(&self, w: &'a RVector) -> nalgebra::DVectorView<'a, f64> {
        w.rows_range(self.layout.x())
    }

    pub fn v<'a>(&self, w: &'a RVector) -> nalgebra::DVectorView<'a, f64> {
        w.rows_range(self.layout.v())
    }

    pub fn g<'a>(&self, w: &'a RVector) -> nalgebra::DVectorView<'a, f64> {
        w.rows_range(self.layout.g())
    }

    /// `y = (I⊗Bᵀ) x`.
    pub fn outputs(&self, w: &RVector) -> RVector {
        &self.output * self.x(w)
    }

    /// `z = [y; g]`.
    pub fn node_values(&self, w: &RVector) -> RVector {
        let y = self.outputs(w);
        let g = self.g(w);
        RVector::from_iterator(y.len() + g.len(), y.iter().chain(g.iter()).copied())
    }

    /// Assemble `[x; v; g]`.
    pub fn pack(&self, x: &RVector, v: &RVector, g: &RVector) -> Result<RVector> {
        let l = self.layout;
        if x.len() != l.q * l.n || v.len() != l.q * l.n || g.len() != l.interior {
            return Err(Error::DimensionMismatch(format!(
                "state parts have lengths ({}, {}, {}), expected ({}, {}, {})",
                x.len(),
                v.len(),
                g.len(),
                l.q * l.n,
                l.q * l.n,
                l.interior
            )));
        }
        Ok(RVector::from_iterator(
            l.dim(),
            x.iter().chain(v.iter()).chain(g.iter()).copied(),
        ))
    }

    pub fn energy_form(&self) -> &RMatrix {
        &self.energy_form
    }

    /// Residual of the algebraic part of the interior rows,
    /// `‖Nᵀ(V₂ᵀ y + W₂ g)‖∞` with `N` spanning `null(W₁)`. Zero when `W₁` is
    /// nonsingular.
    pub fn constraint_residual(&self, w: &RVector) -> f64 {
        if self.interior_null.ncols() == 0 {
            return 0.0;
        }
        let rows = self.blocks.v2.transpose() * self.outputs(w) + &self.blocks.w2 * self.g(w);
        linalg::vec_inf_norm(&(self.interior_null.transpose() * rows))
    }

    /// Basis of the directions in which `g` is algebraically constrained.
    pub fn interior_null(&self) -> &RMatrix {
        &self.interior_null
    }

    /// Boundary inputs `u = −(D ż + R z)` restricted to the boundary rows,
    /// reconstructed at the midpoint of two consecutive states `dt` apart.
    pub fn boundary_input(&self, w0: &RVector, w1: &RVector, dt: f64) -> RVector {
        let z0 = self.node_values(w0);
        let z1 = self.node_values(w1);
        let zdot = (&z1 - &z0) / dt;
        let zmid = (z0 + z1) * 0.5;
        let full = &self.blocks.d * zdot + &self.blocks.r * zmid;
        -full.rows(0, self.layout.q).into_owned()
    }

    /// `żᵀ D ż`.
    pub fn dissipation(&self, zdot: &RVector) -> f64 {
        zdot.dot(&(&self.blocks.d * zdot))
    }
}

/// `W = ½xᵀ(I⊗K)x + ½ẋᵀ(I⊗M)ẋ + ½zᵀRz`.
pub fn energy(sys: &DescriptorSystem, state: &RVector) -> f64 {
    0.5 * state.dot(&(&sys.energy_form * state))
}

/// Distance of `x` (q blocks of length n) to the synchronization subspace:
/// `‖[(I − 11ᵀ/q) ⊗ I] x‖`.
pub fn sync_distance(x: &[f64], q: usize, n: usize) -> f64 {
    assert_eq!(x.len(), q * n, "x must hold q blocks of length n");
    let mut mean = vec![0.0; n];
    for block in x.chunks(n) {
        for (m, xi) in mean.iter_mut().zip(block) {
            *m += xi / q as f64;
        }
    }
    x.chunks(n)
        .flat_map(|block| block.iter().zip(&mean).map(|(xi, m)| (xi - m) * (xi - m)))
        .sum::<f64>()
        .sqrt()
}

/// A full initial state and how well it satisfies the interior constraint.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialState {
    pub state: RVector,
    pub residual: f64,
}

/// Complete `(x₀, v₀)` with interior values `g₀`. When `W₁` is nonsingular
/// every `g₀` is admissible and the hint (or zero) is returned. Otherwise the
/// hint is corrected by the minimum-norm least-squares step that zeroes the
/// algebraic rows.
pub fn consistent_initial_state(
    sys: &DescriptorSystem,
    x0: &RVector,
    v0: &RVector,
    g0_hint: Option<&RVector>,
    dae_tol: f64,
) -> Result<InitialState> {
    let m = sys.layout.interior;
    let mut g = match g0_hint {
        Some(h) if h.len() != m => {
            return Err(Error::DimensionMismatch(format!(
                "g hint has length {}, expected {m}",
                h.len()
            )))
        }
        Some(h) => h.clone(),
        None => RVector::zeros(m),
    };
    let state = sys.pack(x0, v0, &g)?;
    let null = sys.interior_null();
    if null.ncols() == 0 {
        return Ok(InitialState {
            state,
            residual: 0.0,
        });
    }
    let y = sys.outputs(&state);
    let rhs = -(null.transpose() * (sys.blocks.v2.transpose() * &y + &sys.blocks.w2 * &g));
    let coeff = null.transpose() * &sys.blocks.w2;
    g += linalg::pinv(&coeff, Tolerances::default().rank) * rhs;
    let state = sys.pack(x0, v0, &g)?;
    let residual = sys.constraint_residual(&state);
    if residual > dae_tol {
        return Err(Error::InconsistentConstraint {
            residual,
            tol: dae_tol,
        });
    }
    Ok(InitialState { state, residual })
}
