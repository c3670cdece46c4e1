//! Reference computations that share no code with the library's SVD path.

#![allow(dead_code)]

use rand::Rng;
use synckron::{CMatrix, CouplingNetwork, Edge, C64};

/// Solve `W E = −Vᵀ` for `E` by Gaussian elimination with full pivoting,
/// leaving free variables at zero, and return `U + V E` for the complex
/// matrix `X = [[U, V], [Vᵀ, W]]`.
pub fn schur_by_elimination(x: &CMatrix, q: usize) -> CMatrix {
    let p = x.nrows();
    let m = p - q;
    let u = x.view((0, 0), (q, q)).into_owned();
    if m == 0 {
        return u;
    }
    let v = x.view((0, q), (q, m)).into_owned();
    let mut a = x.view((q, q), (m, m)).into_owned();
    let mut rhs = -v.transpose();
    let scale = a.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let mut col_perm: Vec<usize> = (0..m).collect();
    let mut rank = 0;
    for k in 0..m {
        let mut best = (0.0, k, k);
        for r in k..m {
            for c in k..m {
                let mag = a[(r, c)].norm();
                if mag > best.0 {
                    best = (mag, r, c);
                }
            }
        }
        if best.0 <= 1e-12 * scale.max(f64::MIN_POSITIVE) {
            break;
        }
        a.swap_rows(k, best.1);
        rhs.swap_rows(k, best.1);
        a.swap_columns(k, best.2);
        col_perm.swap(k, best.2);
        for r in k + 1..m {
            let f = a[(r, k)] / a[(k, k)];
            if f == C64::new(0.0, 0.0) {
                continue;
            }
            for c in k..m {
                let t = a[(k, c)];
                a[(r, c)] -= f * t;
            }
            for c in 0..q {
                let t = rhs[(k, c)];
                rhs[(r, c)] -= f * t;
            }
        }
        rank += 1;
    }
    // Back substitution over the pivot block; free variables stay zero.
    let mut sol = CMatrix::zeros(m, q);
    for k in (0..rank).rev() {
        for c in 0..q {
            let mut acc = rhs[(k, c)];
            for j in k + 1..rank {
                acc -= a[(k, j)] * sol[(j, c)];
            }
            sol[(k, c)] = acc / a[(k, k)];
        }
    }
    let mut e = CMatrix::zeros(m, q);
    for (k, &orig) in col_perm.iter().enumerate() {
        e.set_row(orig, &sol.row(k));
    }
    u + v * e
}

/// Characteristic polynomial coefficients of a square complex matrix by
/// Faddeev–LeVerrier: `det(λI − A) = λⁿ + c₁λⁿ⁻¹ + … + cₙ`.
pub fn charpoly(a: &CMatrix) -> Vec<C64> {
    let n = a.nrows();
    let mut coeffs = vec![C64::new(1.0, 0.0)];
    let mut mk = CMatrix::zeros(n, n);
    for k in 1..=n {
        mk = a * &mk + CMatrix::identity(n, n) * coeffs[k - 1];
        let am = a * &mk;
        coeffs.push(-am.trace() / k as f64);
    }
    coeffs
}

/// Random network for the reduction suites: up to `max_p` nodes, any
/// boundary size, edges of either kind with weights in `[0.1, 10]`, and
/// occasional zero weights, isolated nodes and disconnected pieces.
pub fn random_network<R: Rng>(rng: &mut R, max_p: usize) -> CouplingNetwork {
    let p = rng.random_range(1..=max_p);
    let q = rng.random_range(1..=p);
    let density = rng.random_range(0.1..0.8);
    let mut dampers = Vec::new();
    let mut springs = Vec::new();
    let weight = |rng: &mut R| {
        if rng.random_bool(0.05) {
            0.0
        } else {
            10f64.powf(rng.random_range(-1.0..=1.0))
        }
    };
    for i in 0..p {
        for j in i + 1..p {
            if rng.random_bool(density) {
                dampers.push(Edge::new(i, j, weight(rng)));
            }
            if rng.random_bool(density) {
                springs.push(Edge::new(i, j, weight(rng)));
            }
        }
    }
    CouplingNetwork::new(p, q, dampers, springs).unwrap()
}

/// Random network with no interior nodes.
pub fn random_boundary_only<R: Rng>(rng: &mut R, max_p: usize) -> CouplingNetwork {
    let net = random_network(rng, max_p);
    CouplingNetwork::new(
        net.p(),
        net.p(),
        net.dampers().to_vec(),
        net.springs().to_vec(),
    )
    .unwrap()
}

/// Unit weights on four nodes with boundary `{1, 2, 4}` and interior `{3}`:
/// damper 1–3, springs 1–2, 2–3, 3–4. Canonical order is `[1, 2, 4, 3]`.
pub fn interior_fixture() -> CouplingNetwork {
    CouplingNetwork::new(
        4,
        3,
        vec![Edge::new(0, 3, 1.0)],
        vec![
            Edge::new(0, 1, 1.0),
            Edge::new(1, 3, 1.0),
            Edge::new(3, 2, 1.0),
        ],
    )
    .unwrap()
}

/// `Γ` of [`interior_fixture`], worked by hand: with `w = 1 + 2j` the
/// interior diagonal, `Γ = U − v vᵀ / w`.
pub fn interior_fixture_gamma() -> CMatrix {
    let c = C64::new;
    CMatrix::from_row_slice(
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
    )
}
