//! Dense linear-algebra helpers on top of `nalgebra`: norms, symmetric
//! checks, SVD-based pseudoinverse and null spaces, generalized symmetric
//! eigenproblems.

use nalgebra::{ComplexField, DMatrix, DVector};
use num_complex::Complex;

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;
pub type RMatrix = DMatrix<f64>;
pub type CMatrix = DMatrix<C64>;
pub type RVector = DVector<f64>;
pub type CVector = DVector<C64>;

pub const J: C64 = C64 { re: 0.0, im: 1.0 };

/// Maximum absolute row sum.
pub fn inf_norm<T: ComplexField<RealField = f64>>(m: &DMatrix<T>) -> f64 {
    m.row_iter()
        .map(|row| row.iter().map(|x| x.clone().modulus()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn vec_inf_norm<T: ComplexField<RealField = f64>>(v: &DVector<T>) -> f64 {
    v.iter().map(|x| x.clone().modulus()).fold(0.0, f64::max)
}

/// `re + j·im`.
pub fn to_complex(re: &RMatrix, im: &RMatrix) -> CMatrix {
    assert_eq!(re.shape(), im.shape());
    re.zip_map(im, C64::new)
}

pub fn real_to_complex(re: &RMatrix) -> CMatrix {
    re.map(|x| C64::new(x, 0.0))
}

/// Accept `m` as symmetric when `‖m − mᵀ‖∞ ≤ tol · max(1, ‖m‖∞)` and return
/// `(m + mᵀ)/2`.
pub fn symmetrize_checked(m: &RMatrix, tol: f64, name: &'static str) -> Result<RMatrix> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch(format!("{name} must be square")));
    }
    let defect = inf_norm(&(m - m.transpose()));
    if defect > tol * inf_norm(m).max(1.0) {
        return Err(Error::NotSymmetric(name));
    }
    Ok((m + m.transpose()) * 0.5)
}

pub fn is_positive_definite(m: &RMatrix) -> bool {
    m.nrows() > 0 && m.clone().cholesky().is_some()
}

/// Singular values, in no particular order. Empty matrices have none.
pub fn singular_values<T: ComplexField<RealField = f64>>(m: &DMatrix<T>) -> RVector {
    if m.nrows() == 0 || m.ncols() == 0 {
        return RVector::zeros(0);
    }
    m.clone().singular_values()
}

/// Moore–Penrose pseudoinverse; singular values below `rel_tol · σ_max` are
/// treated as zero.
pub fn pinv<T: ComplexField<RealField = f64>>(m: &DMatrix<T>, rel_tol: f64) -> DMatrix<T> {
    let (r, c) = m.shape();
    if r == 0 || c == 0 {
        return DMatrix::zeros(c, r);
    }
    let svd = m.clone().svd(true, true);
    let u = svd.u.as_ref().expect("u requested");
    let v_t = svd.v_t.as_ref().expect("v_t requested");
    let s_max = svd.singular_values.max();
    let cutoff = rel_tol * s_max;
    let mut out = DMatrix::<T>::zeros(c, r);
    for (k, &s) in svd.singular_values.iter().enumerate() {
        if s <= cutoff || s == 0.0 {
            continue;
        }
        let inv = T::from_real(1.0 / s);
        // V Σ⁺ Uᴴ, one rank-one term at a time.
        let v_col = v_t.row(k).adjoint();
        let u_row = u.column(k).adjoint();
        out += (v_col * u_row) * inv;
    }
    out
}

/// Orthonormal basis (as columns) of the numerical null space of a square
/// matrix: right singular vectors with `σ ≤ rel_tol · σ_max`.
pub fn null_space<T: ComplexField<RealField = f64>>(m: &DMatrix<T>, rel_tol: f64) -> DMatrix<T> {
    let (basis, _) = null_space_with_values(m, rel_tol);
    basis
}

/// Like [`null_space`] but also returns the singular values of the kept
/// directions.
pub fn null_space_with_values<T: ComplexField<RealField = f64>>(
    m: &DMatrix<T>,
    rel_tol: f64,
) -> (DMatrix<T>, Vec<f64>) {
    assert!(m.is_square(), "null_space expects a square matrix");
    let n = m.nrows();
    if n == 0 {
        return (DMatrix::zeros(0, 0), Vec::new());
    }
    let svd = m.clone().svd(false, true);
    let v_t = svd.v_t.as_ref().expect("v_t requested");
    let cutoff = rel_tol * svd.singular_values.max();
    let keep: Vec<usize> = (0..n)
        .filter(|&k| svd.singular_values[k] <= cutoff)
        .collect();
    let mut basis = DMatrix::<T>::zeros(n, keep.len());
    for (col, &k) in keep.iter().enumerate() {
        basis.set_column(col, &v_t.row(k).adjoint());
    }
    let values = keep.iter().map(|&k| svd.singular_values[k]).collect();
    (basis, values)
}

/// Right singular vector for the smallest singular value of a square
/// matrix, together with that singular value.
pub fn smallest_singular_pair<T: ComplexField<RealField = f64>>(
    m: &DMatrix<T>,
) -> (DVector<T>, f64) {
    assert!(m.is_square() && m.nrows() > 0);
    let svd = m.clone().svd(false, true);
    let v_t = svd.v_t.as_ref().expect("v_t requested");
    let k = svd.singular_values.imin();
    (v_t.row(k).adjoint(), svd.singular_values[k])
}

/// Eigenvalues of a real symmetric matrix in ascending order.
pub fn symmetric_eigenvalues(m: &RMatrix) -> Vec<f64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    let mut values: Vec<f64> = m
        .clone()
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .copied()
        .collect();
    values.sort_by(f64::total_cmp);
    values
}

/// Generalized eigenpairs of the symmetric pencil `(k, m)` with `m ≻ 0`:
/// `k φ = θ m φ`. Eigenvalues ascending; eigenvectors are `m`-orthonormal
/// columns in matching order.
pub fn generalized_symmetric_eigen(k: &RMatrix, m: &RMatrix) -> Result<(Vec<f64>, RMatrix)> {
    let chol = m
        .clone()
        .cholesky()
        .ok_or(Error::NotPositiveDefinite("M"))?;
    let l = chol.l();
    let lk = l
        .solve_lower_triangular(k)
        .ok_or(Error::NotPositiveDefinite("M"))?;
    let c = l
        .solve_lower_triangular(&lk.transpose())
        .ok_or(Error::NotPositiveDefinite("M"))?;
    let c = (&c + c.transpose()) * 0.5;
    let eig = c.symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let lt = l.transpose();
    let mut vectors = RMatrix::zeros(k.nrows(), order.len());
    for (col, &idx) in order.iter().enumerate() {
        let y = eig.eigenvectors.column(idx).into_owned();
        let phi = lt
            .solve_upper_triangular(&y)
            .ok_or(Error::NotPositiveDefinite("M"))?;
        vectors.set_column(col, &phi);
    }
    Ok((order.iter().map(|&i| eig.eigenvalues[i]).collect(), vectors))
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &RMatrix, b: &RMatrix) -> RMatrix {
    a.kronecker(b)
}

/// Block-select rows `r0..r0+nr`, columns `c0..c0+nc` into an owned matrix.
pub fn block<T: nalgebra::Scalar + Copy>(
    m: &DMatrix<T>,
    r0: usize,
    c0: usize,
    nr: usize,
    nc: usize,
) -> DMatrix<T> {
    m.view((r0, c0), (nr, nc)).into_owned()
}
