//! Kron reduction onto the boundary nodes.
//!
//! For a symmetric `X` partitioned as `[[U, V], [Vᵀ, W]]`, the Schur
//! complement `Y = schur(X, q)` is the matrix for which some lift `E`
//! satisfies
//!
//! ```text
//! X [I; E] = [Y; 0]
//! ```
//!
//! It is computed as `Y = U − V W⁺ Vᵀ` with `E = −W⁺ Vᵀ`. The transpose is
//! the plain one, not the conjugate: `D + jR` is complex symmetric, not
//! Hermitian.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, RMatrix, C64};
use crate::netmodel::{BlockPartition, CouplingNetwork};
use crate::spectral;
use crate::Tolerances;

/// Output of one reduction.
#[derive(Debug, Clone, PartialEq)]
pub struct SchurComplement<T> {
    pub reduced: T,
    pub lift: CMatrix,
    /// `‖X[I; E] − [Y; 0]‖∞`.
    pub residual: f64,
    /// The certification bound the residual was checked against.
    pub threshold: f64,
}

/// `Γ = schur(D + jR, q)` and `Λ = schur(R, q)` with their lifts.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedCoupling {
    pub gamma: CMatrix,
    pub lambda: RMatrix,
    pub e_complex: CMatrix,
    pub e_real: CMatrix,
    pub residual_gamma: f64,
    pub residual_lambda: f64,
}

/// Connected components of the graph with an edge wherever `x[i][j] ≠ 0`.
fn components(x: &CMatrix) -> Vec<Vec<usize>> {
    let p = x.nrows();
    let mut parent: Vec<usize> = (0..p).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for i in 0..p {
        for j in i + 1..p {
            if x[(i, j)] != C64::new(0.0, 0.0) || x[(j, i)] != C64::new(0.0, 0.0) {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut root_of = vec![usize::MAX; p];
    for i in 0..p {
        let r = find(&mut parent, i);
        if root_of[r] == usize::MAX {
            root_of[r] = groups.len();
            groups.push(Vec::new());
        }
        groups[root_of[r]].push(i);
    }
    groups
}

fn select(x: &CMatrix, rows: &[usize], cols: &[usize]) -> CMatrix {
    CMatrix::from_fn(rows.len(), cols.len(), |r, c| x[(rows[r], cols[c])])
}

/// Reduce `x` (symmetric, size p) onto its leading `q` rows/columns.
///
/// Each connected component is reduced on its own, so entries between
/// components are exactly zero. When `x` has zero row sums the diagonal of
/// each reduced block is reset to minus its off-diagonal row sum, which
/// keeps `Y·1 = 0` to rounding and makes a component with a single
/// boundary node reduce to exactly zero.
fn reduce_symmetric(x: &CMatrix, q: usize, tol: &Tolerances) -> Result<SchurComplement<CMatrix>> {
    let p = x.nrows();
    let m = p - q;
    let u = linalg::block(x, 0, 0, q, q);
    let norm = linalg::inf_norm(x);
    let threshold = tol.certify * (1.0 + norm);
    if m == 0 {
        return Ok(SchurComplement {
            reduced: u,
            lift: CMatrix::zeros(0, q),
            residual: 0.0,
            threshold,
        });
    }
    let ones = crate::CVector::from_element(p, C64::new(1.0, 0.0));
    let laplacian = linalg::vec_inf_norm(&(x * ones)) <= 1e-14 * norm.max(1.0) * p as f64;

    let mut reduced = CMatrix::zeros(q, q);
    let mut lift = CMatrix::zeros(m, q);
    for comp in components(x) {
        let (bnd, int): (Vec<usize>, Vec<usize>) = comp.iter().partition(|&&i| i < q);
        if bnd.is_empty() {
            continue;
        }
        let mut y = select(x, &bnd, &bnd);
        if !int.is_empty() {
            let v = select(x, &bnd, &int);
            let w = select(x, &int, &int);
            let e = -(linalg::pinv(&w, tol.rank) * v.transpose());
            y += &v * &e;
            y = (&y + y.transpose()) * C64::new(0.5, 0.0);
            if laplacian {
                for r in 0..bnd.len() {
                    let off: C64 = (0..bnd.len()).filter(|&c| c != r).map(|c| y[(r, c)]).sum();
                    y[(r, r)] = -off;
                }
            }
            for (a, &i) in int.iter().enumerate() {
                for (b, &j) in bnd.iter().enumerate() {
                    lift[(i - q, j)] = e[(a, b)];
                }
            }
        }
        for (a, &i) in bnd.iter().enumerate() {
            for (b, &j) in bnd.iter().enumerate() {
                reduced[(i, j)] = y[(a, b)];
            }
        }
    }
    let residual = defining_residual(x, &reduced, &lift);
    if !(residual <= threshold) {
        return Err(Error::CertificationFailed {
            residual,
            threshold,
        });
    }
    Ok(SchurComplement {
        reduced,
        lift,
        residual,
        threshold,
    })
}

/// `‖X[I; E] − [Y; 0]‖∞` for a candidate pair `(Y, E)`.
pub fn defining_residual(x: &CMatrix, y: &CMatrix, e: &CMatrix) -> f64 {
    let q = y.nrows();
    let p = x.nrows();
    let mut stacked = CMatrix::zeros(p, q);
    stacked
        .view_mut((0, 0), (q, q))
        .copy_from(&CMatrix::identity(q, q));
    stacked.view_mut((q, 0), (p - q, q)).copy_from(e);
    let mut lhs = x * stacked;
    let mut top = lhs.view_mut((0, 0), (q, q));
    top -= y;
    linalg::inf_norm(&lhs)
}

/// `Γ = [U₁+jU₂] − [V₁+jV₂][W₁+jW₂]⁺[V₁+jV₂]ᵀ`, certified against the
/// defining equation.
pub fn schur_complement_complex(
    blocks: &BlockPartition,
    tol: &Tolerances,
) -> Result<SchurComplement<CMatrix>> {
    let x = linalg::to_complex(&blocks.d, &blocks.r);
    reduce_symmetric(&x, blocks.q, tol)
}

/// `Λ = U₂ − V₂W₂⁺V₂ᵀ`. Computed independently of `Γ`; the two lifts differ
/// in general.
pub fn schur_complement_real(
    blocks: &BlockPartition,
    tol: &Tolerances,
) -> Result<SchurComplement<RMatrix>> {
    let x = linalg::real_to_complex(&blocks.r);
    let sc = reduce_symmetric(&x, blocks.q, tol)?;
    let imag = sc.reduced.map(|z| z.im);
    let imag_norm = linalg::inf_norm(&imag);
    if imag_norm > sc.threshold {
        return Err(Error::CertificationFailed {
            residual: imag_norm,
            threshold: sc.threshold,
        });
    }
    Ok(SchurComplement {
        reduced: sc.reduced.map(|z| z.re),
        lift: sc.lift,
        residual: sc.residual,
        threshold: sc.threshold,
    })
}

/// Both reductions for a network.
pub fn reduce(net: &CouplingNetwork, tol: &Tolerances) -> Result<ReducedCoupling> {
    let blocks = net.blocks();
    reduce_blocks(&blocks, tol)
}

pub fn reduce_blocks(blocks: &BlockPartition, tol: &Tolerances) -> Result<ReducedCoupling> {
    let g = schur_complement_complex(blocks, tol)?;
    let l = schur_complement_real(blocks, tol)?;
    Ok(ReducedCoupling {
        gamma: g.reduced,
        lambda: l.reduced,
        e_complex: g.lift,
        e_real: l.lift,
        residual_gamma: g.residual,
        residual_lambda: l.residual,
    })
}

/// Structural properties every `Γ` must have: complex symmetry, zero row
/// sums, and spectrum in the closed first quadrant.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GammaProperties {
    pub symmetric: bool,
    pub row_sums_zero: bool,
    pub re_nonnegative: bool,
    pub im_nonnegative: bool,
    pub symmetry_defect: f64,
    pub row_sum_defect: f64,
    pub min_re: f64,
    pub min_im: f64,
}

impl GammaProperties {
    pub fn all_pass(&self) -> bool {
        self.symmetric && self.row_sums_zero && self.re_nonnegative && self.im_nonnegative
    }
}

/// Check the properties of `Γ`. Symmetry and row sums are judged against
/// `tol · max(1, ‖Γ‖∞)`, eigenvalue signs against `−tol · ‖Γ‖∞`.
pub fn certify_gamma(gamma: &CMatrix, tol: f64) -> Result<GammaProperties> {
    let norm = linalg::inf_norm(gamma);
    let floor = tol * norm.max(1.0);
    let symmetry_defect = linalg::inf_norm(&(gamma - gamma.transpose()));
    let ones = crate::CVector::from_element(gamma.ncols(), C64::new(1.0, 0.0));
    let row_sum_defect = linalg::vec_inf_norm(&(gamma * ones));
    let eigs = spectral::eigenvalues_unsorted(gamma)?;
    let min_re = eigs.iter().map(|z| z.re).fold(f64::INFINITY, f64::min);
    let min_im = eigs.iter().map(|z| z.im).fold(f64::INFINITY, f64::min);
    Ok(GammaProperties {
        symmetric: symmetry_defect <= floor,
        row_sums_zero: row_sum_defect <= floor,
        re_nonnegative: min_re >= -tol * norm,
        im_nonnegative: min_im >= -tol * norm,
        symmetry_defect,
        row_sum_defect,
        min_re,
        min_im,
    })
}

/// Properties of `Λ`: real symmetric, positive semidefinite, zero row sums.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LambdaProperties {
    pub symmetric: bool,
    pub psd: bool,
    pub row_sums_zero: bool,
    pub min_eigenvalue: f64,
    pub symmetry_defect: f64,
    pub row_sum_defect: f64,
}

impl LambdaProperties {
    pub fn all_pass(&self) -> bool {
        self.symmetric && self.psd && self.row_sums_zero
    }
}

/// `psd_floor` is an absolute lower bound on the eigenvalues; symmetry and
/// row sums use `tol · max(1, ‖Λ‖∞)`.
pub fn certify_lambda(lambda: &RMatrix, tol: f64, psd_floor: f64) -> LambdaProperties {
    let floor = tol * linalg::inf_norm(lambda).max(1.0);
    let symmetry_defect = linalg::inf_norm(&(lambda - lambda.transpose()));
    let row_sum_defect = lambda.row_iter().map(|r| r.sum().abs()).fold(0.0, f64::max);
    let sym = (lambda + lambda.transpose()) * 0.5;
    let min_eigenvalue = linalg::symmetric_eigenvalues(&sym)
        .first()
        .copied()
        .unwrap_or(0.0);
    LambdaProperties {
        symmetric: symmetry_defect <= floor,
        psd: min_eigenvalue >= -psd_floor,
        row_sums_zero: row_sum_defect <= floor,
        min_eigenvalue,
        symmetry_defect,
        row_sum_defect,
    }
}
