//! Spectrum of `Γ` and the synchronization verdict `Re λ₂(Γ) > 0`.
//!
//! `Γ` is complex symmetric, not Hermitian, so a general complex eigensolver
//! (Hessenberg reduction + shifted QR, via `nalgebra::Schur`) is used.

use std::cmp::Ordering;

use nalgebra::Schur;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, C64};
use crate::Tolerances;

/// Margins in `(INCONCLUSIVE_FRACTION · zero_tol, zero_tol]` are reported as
/// inconclusive; below that band the verdict is a plain failure.
pub const INCONCLUSIVE_FRACTION: f64 = 1e-2;

const MAX_SWEEPS_PER_ROW: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictClass {
    Synchronizes,
    Fails,
    /// Margin is positive but not above the decision tolerance; the boolean
    /// verdict is `false`.
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralVerdict {
    /// Eigenvalues of `Γ` ascending by real part (ties by imaginary part).
    #[serde(serialize_with = "crate::io::serialize_complex_slice")]
    pub eigenvalues: Vec<C64>,
    /// `Re λ₂(Γ)`; `+∞` for a single oscillator.
    pub margin: f64,
    pub synchronizes: bool,
    pub class: VerdictClass,
    pub zero_tol: f64,
    /// Eigenvalues with `|λ| ≤ zero_tol`.
    pub multiplicity_at_origin: usize,
    /// Eigenvalues with `|Re λ| ≤ zero_tol`, the origin included.
    pub imaginary_axis_count: usize,
}

/// `rel · max(1, ‖Γ‖∞)`.
pub fn default_zero_tol(gamma: &CMatrix, rel: f64) -> f64 {
    rel * linalg::inf_norm(gamma).max(1.0)
}

/// Full spectrum in solver order.
pub fn eigenvalues_unsorted(m: &CMatrix) -> Result<Vec<C64>> {
    let n = m.nrows();
    if n == 0 {
        return Ok(Vec::new());
    }
    if n == 1 {
        return Ok(vec![m[(0, 0)]]);
    }
    let schur = Schur::try_new(m.clone(), f64::EPSILON, MAX_SWEEPS_PER_ROW * n)
        .ok_or(Error::EigenSolverFailure)?;
    let (_, t) = schur.unpack();
    let values: Vec<C64> = (0..n).map(|k| t[(k, k)]).collect();
    if values
        .iter()
        .any(|z| !z.re.is_finite() || !z.im.is_finite())
    {
        return Err(Error::EigenSolverFailure);
    }
    Ok(values)
}

/// Spectrum sorted by `(Re, Im)` with real parts within `tie_tol` of zero
/// treated as exactly zero, so rounding noise cannot push the structural zero
/// eigenvalue behind another imaginary-axis eigenvalue.
pub fn eigenvalues_sorted_with(gamma: &CMatrix, tie_tol: f64) -> Result<Vec<C64>> {
    let mut values = eigenvalues_unsorted(gamma)?;
    let key = |z: &C64| if z.re.abs() <= tie_tol { 0.0 } else { z.re };
    values.sort_by(|a, b| match key(a).total_cmp(&key(b)) {
        Ordering::Equal => a.im.total_cmp(&b.im),
        o => o,
    });
    Ok(values)
}

/// Spectrum sorted with the default tie tolerance `1e-8 · max(1, ‖Γ‖∞)`.
pub fn eigenvalues_sorted(gamma: &CMatrix) -> Result<Vec<C64>> {
    let tie = default_zero_tol(gamma, Tolerances::default().zero);
    eigenvalues_sorted_with(gamma, tie)
}

/// Synchronization verdict. `zero_tol` defaults to `1e-8 · max(1, ‖Γ‖∞)`.
pub fn sync_verdict(gamma: &CMatrix, zero_tol: Option<f64>) -> Result<SpectralVerdict> {
    if gamma.nrows() == 0 || !gamma.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "Γ must be square and non-empty, got {:?}",
            gamma.shape()
        )));
    }
    let zero_tol = zero_tol.unwrap_or_else(|| default_zero_tol(gamma, Tolerances::default().zero));
    let eigenvalues = eigenvalues_sorted_with(gamma, zero_tol)?;
    let margin = eigenvalues.get(1).map_or(f64::INFINITY, |z| z.re);
    let synchronizes = margin > zero_tol;
    let class = if synchronizes {
        VerdictClass::Synchronizes
    } else if margin > INCONCLUSIVE_FRACTION * zero_tol {
        VerdictClass::Inconclusive
    } else {
        VerdictClass::Fails
    };
    let multiplicity_at_origin = eigenvalues.iter().filter(|z| z.norm() <= zero_tol).count();
    let imaginary_axis_count = eigenvalues
        .iter()
        .filter(|z| z.re.abs() <= zero_tol)
        .count();
    Ok(SpectralVerdict {
        eigenvalues,
        margin,
        synchronizes,
        class,
        zero_tol,
        multiplicity_at_origin,
        imaginary_axis_count,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kron::reduce;
    use crate::netmodel::{CouplingNetwork, Edge};
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn path2(scale: C64) -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[scale, -scale, -scale, scale])
    }

    #[test]
    fn real_two_node() {
        let e = eigenvalues_sorted(&path2(c(1., 0.))).unwrap();
        assert!(e[0].norm() < 1e-14);
        assert!((e[1] - c(2., 0.)).norm() < 1e-14);
    }

    #[test]
    fn imaginary_tie_broken_by_im() {
        let e = eigenvalues_sorted(&path2(c(0., 1.))).unwrap();
        assert!(e[0].norm() < 1e-14);
        assert!((e[1] - c(0., 2.)).norm() < 1e-14);
    }

    /// Coefficients of det(λI − A) for a 3×3 matrix via Faddeev–LeVerrier.
    fn charpoly3(a: &CMatrix) -> [C64; 4] {
        let id = CMatrix::identity(3, 3);
        let mut m = CMatrix::zeros(3, 3);
        let mut coeffs = [c(1., 0.); 4];
        for k in 1..=3 {
            m = a * &m + &id * coeffs[k - 1];
            coeffs[k] = -(a * &m).trace() / c(k as f64, 0.);
        }
        coeffs
    }

    #[test]
    fn interior_fixture_spectrum() {
        let gamma = CMatrix::from_row_slice(
            3,
            3,
            &[
                c(0.8, 1.4),
                c(-0.4, -1.2),
                c(-0.4, -0.2),
                c(-0.4, -1.2),
                c(0.2, 1.6),
                c(0.2, -0.4),
                c(-0.4, -0.2),
                c(0.2, -0.4),
                c(0.2, 0.6),
            ],
        );
        // Frozen from the characteristic-polynomial oracle: the nonzero roots
        // of λ² − tr(Γ)λ + c₂ are (1 + 3j)(0.6 ∓ √6/10).
        let s6 = 6f64.sqrt() / 10.0;
        let fixture = [c(0., 0.), c(1., 3.) * (0.6 - s6), c(1., 3.) * (0.6 + s6)];
        let coeffs = charpoly3(&gamma);
        for z in fixture {
            let val = ((z + coeffs[1]) * z + coeffs[2]) * z + coeffs[3];
            assert!(val.norm() < 1e-13, "charpoly({z}) = {val}");
        }
        let e = eigenvalues_sorted(&gamma).unwrap();
        for (got, want) in e.iter().zip(fixture) {
            assert!((got - want).norm() < 1e-12, "{got} vs {want}");
        }
        assert!(e[1].re > 0.0 && e[2].re > 0.0);
    }

    #[test]
    fn single_damper_synchronizes() {
        let v = sync_verdict(&path2(c(1., 0.)), None).unwrap();
        assert!(v.synchronizes);
        assert_eq!(v.class, VerdictClass::Synchronizes);
        assert!((v.margin - 2.0).abs() < 1e-12);
        assert_eq!(v.multiplicity_at_origin, 1);
    }

    #[test]
    fn springs_only_fails() {
        let net = CouplingNetwork::new(
            4,
            3,
            vec![],
            vec![
                Edge::new(0, 3, 1.0),
                Edge::new(1, 3, 2.0),
                Edge::new(2, 3, 0.5),
            ],
        )
        .unwrap();
        let red = reduce(&net, &Default::default()).unwrap();
        let v = sync_verdict(&red.gamma, None).unwrap();
        assert!(!v.synchronizes);
        assert_eq!(v.class, VerdictClass::Fails);
        assert!(v.eigenvalues.iter().all(|z| z.re.abs() <= v.zero_tol));
        assert_eq!(v.imaginary_axis_count, 3);
    }

    #[test]
    fn disconnected_damper_graph_fails() {
        // Two 2-node damper components, no springs across: block-diagonal Γ
        // with one zero eigenvalue per block.
        let net = CouplingNetwork::new(
            4,
            4,
            vec![Edge::new(0, 1, 1.0), Edge::new(2, 3, 1.0)],
            vec![],
        )
        .unwrap();
        let red = reduce(&net, &Default::default()).unwrap();
        let v = sync_verdict(&red.gamma, None).unwrap();
        assert!(!v.synchronizes);
        assert!(v.multiplicity_at_origin >= 2);
        let nonzero: Vec<_> = v.eigenvalues.iter().filter(|z| z.norm() > 1e-9).collect();
        assert_eq!(nonzero.len(), 2);
        assert!(nonzero.iter().all(|z| (**z - c(2., 0.)).norm() < 1e-12));
    }

    #[test]
    fn single_oscillator_trivially_synchronizes() {
        let v = sync_verdict(&CMatrix::zeros(1, 1), None).unwrap();
        assert!(v.synchronizes);
        assert!(v.margin.is_infinite());
    }

    #[test]
    fn inconclusive_band() {
        let g = path2(c(0.0, 1.0)) + CMatrix::identity(2, 2) * c(0.0, 0.0);
        let mut g2 = g.clone();
        // Margin of 0.5·zero_tol: positive but not above the tolerance.
        let zt = default_zero_tol(&g, 1e-8);
        g2 += path2(c(0.25 * zt, 0.0));
        let v = sync_verdict(&g2, None).unwrap();
        assert!(!v.synchronizes);
        assert_eq!(v.class, VerdictClass::Inconclusive);
    }

    fn arb_network() -> impl Strategy<Value = CouplingNetwork> {
        (2usize..=7)
            .prop_flat_map(|p| (Just(p), 1..=p))
            .prop_flat_map(|(p, q)| {
                let edges =
                    proptest::collection::vec((0..p, 0..p, 0.1f64..2.0, 0u8..3), 0..(2 * p));
                (Just(p), Just(q), edges)
            })
            .prop_map(|(p, q, raw)| {
                let mut seen = std::collections::HashSet::new();
                let (mut d, mut r) = (Vec::new(), Vec::new());
                for (i, j, w, kind) in raw {
                    if i == j || !seen.insert((i.min(j), i.max(j))) {
                        continue;
                    }
                    if kind != 1 {
                        d.push(Edge::new(i, j, w));
                    }
                    if kind != 0 {
                        r.push(Edge::new(i, j, w * 0.7));
                    }
                }
                CouplingNetwork::new(p, q, d, r).unwrap()
            })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn verdict_invariant_under_scaling(net in arb_network(), scale in 0.05f64..20.0) {
            let tol = Tolerances::default();
            let v1 = sync_verdict(&reduce(&net, &tol).unwrap().gamma, None).unwrap();
            let v2 = sync_verdict(&reduce(&net.scaled(scale).unwrap(), &tol).unwrap().gamma, None).unwrap();
            // Only margins clear of the tolerance band are expected to agree.
            prop_assume!(v1.margin > 1e-6 || v1.margin <= v1.zero_tol * INCONCLUSIVE_FRACTION);
            prop_assert_eq!(v1.synchronizes, v2.synchronizes);
            prop_assert!(v1.multiplicity_at_origin >= 1);
        }

        #[test]
        fn verdict_invariant_under_boundary_permutation(
            net in arb_network(),
            seed in any::<u64>(),
        ) {
            use rand::{seq::SliceRandom, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let mut perm: Vec<usize> = (0..net.q()).collect();
            perm.shuffle(&mut rng);
            let tol = Tolerances::default();
            let v1 = sync_verdict(&reduce(&net, &tol).unwrap().gamma, None).unwrap();
            let permuted = net.permute_boundary(&perm).unwrap();
            let v2 = sync_verdict(&reduce(&permuted, &tol).unwrap().gamma, None).unwrap();
            prop_assume!(v1.margin > 1e-6 || v1.margin <= v1.zero_tol * INCONCLUSIVE_FRACTION);
            prop_assert_eq!(v1.synchronizes, v2.synchronizes);
            if v1.margin.is_finite() {
                prop_assert!((v1.margin - v2.margin).abs() <= 1e-9 * (1.0 + v1.margin.abs()));
            }
        }

        #[test]
        fn no_interior_axis_count_matches_verdict(net in arb_network()) {
            let full = CouplingNetwork::new(
                net.p(), net.p(), net.dampers().to_vec(), net.springs().to_vec()).unwrap();
            let red = reduce(&full, &Tolerances::default()).unwrap();
            let v = sync_verdict(&red.gamma, None).unwrap();
            prop_assume!(v.class != VerdictClass::Inconclusive);
            prop_assert_eq!(v.synchronizes, v.imaginary_axis_count == 1);
        }
    }
}
