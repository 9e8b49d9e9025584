//! Differential-polynomial engine for the KdV hierarchy: the `f̂` recursion,
//! the flows `2∂ₓf̂ₙ₊₁`, the Lax-type matrices and the zero-curvature residual.

mod diffpoly;
mod fd;
mod zpoly;

pub use diffpoly::{DiffPoly, Monomial};
pub use fd::{centered_stencil, derivative_at, eval_diffpoly, fd_weights, stencil_points};
pub use zpoly::{ZPoly, ZPolyMatrix};

use diffpoly::rat;

/// `[f̂₀, …, f̂_L]`.
pub fn fhat_table(max: usize) -> Vec<DiffPoly> {
    let q = DiffPoly::u(0);
    let mut f = vec![DiffPoly::one()];
    if max == 0 {
        return f;
    }
    f.push(q.scale(&rat(1, 2)));
    for l in 1..max {
        let first: DiffPoly = (1..=l).fold(DiffPoly::zero(), |acc, k| &acc + &(&f[k] * &f[l + 1 - k]));
        let mut second = DiffPoly::zero();
        for k in 0..=l {
            let a = &f[k];
            let b = &f[l - k];
            let term = &(&(&q * a) * b) + &(&a.dx() * &b.dx()).scale(&rat(1, 4));
            let term = &term - &(&a.dx().dx() * b).scale(&rat(1, 2));
            second = &second + &term;
        }
        let next = &first.scale(&rat(-1, 2)) + &second.scale(&rat(1, 2));
        f.push(next);
    }
    f
}

/// `f̂ₗ`.
pub fn fhat(l: usize) -> DiffPoly {
    fhat_table(l).pop().expect("table is non-empty")
}

/// Right-hand side `2∂ₓf̂ₙ₊₁` of the n-th hierarchy equation.
pub fn kdv_rhs(n: usize) -> DiffPoly {
    fhat(n + 1).dx().scale(&rat(2, 1))
}

/// `F̂ₙ(z) = Σ_{ℓ=0}^n f̂_{n−ℓ} z^ℓ`.
pub fn fhat_polynomial(n: usize) -> ZPoly {
    let f = fhat_table(n);
    ZPoly::new((0..=n).map(|l| f[n - l].clone()).collect())
}

/// `Q = [[0, 1], [u₀ − z, 0]]` and
/// `P = [[−½∂ₓF̂ₙ, F̂ₙ], [(u₀ − z)F̂ₙ − ½∂ₓ²F̂ₙ, ½∂ₓF̂ₙ]]`.
pub fn pq_matrices(n: usize) -> (ZPolyMatrix, ZPolyMatrix) {
    let f = fhat_polynomial(n);
    let half = ZPoly::constant(DiffPoly::constant(rat(1, 2)));
    let q_minus_z = &ZPoly::constant(DiffPoly::u(0)) - &ZPoly::z();
    let fx = f.dx();
    let fxx = fx.dx();
    let p = ZPolyMatrix::new(
        -&(&half * &fx),
        f.clone(),
        &(&q_minus_z * &f) - &(&half * &fxx),
        &half * &fx,
    );
    let q = ZPolyMatrix::new(ZPoly::zero(), ZPoly::constant(DiffPoly::one()), q_minus_z, ZPoly::zero());
    (p, q)
}

/// `∂ₜQ − ∂ₓP + QP − PQ`, with `∂ₜq` kept as the symbol `qt`.
///
/// This is the compatibility condition of `∂ₓν = Qν`, `∂ₜν = Pν`.
pub fn zero_curvature_residual(n: usize) -> ZPolyMatrix {
    let (p, q) = pq_matrices(n);
    let dt_q = ZPolyMatrix::new(ZPoly::zero(), ZPoly::zero(), ZPoly::constant(DiffPoly::qt(0)), ZPoly::zero());
    let commutator = q.mul(&p).sub(&p.mul(&q));
    dt_q.sub(&p.dx()).add(&commutator)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn low_order_fhat() {
        assert_eq!(fhat(0), DiffPoly::one());
        assert_eq!(fhat(1).to_string(), "1/2·u0");
        assert_eq!(fhat(2).to_string(), "3/8·u0^2 − 1/8·u2");
    }

    #[test]
    fn kdv_flows() {
        assert_eq!(kdv_rhs(0).to_string(), "u1");
        assert_eq!(kdv_rhs(1).to_string(), "3/2·u0·u1 − 1/4·u3");
    }

    #[test]
    fn jet_orders() {
        for l in 1..=4 {
            assert_eq!(fhat(l).jet_order(), Some(2 * l - 2));
        }
    }

    #[test]
    fn p_equals_q_for_translation() {
        let (p, q) = pq_matrices(0);
        assert_eq!(p, q);
        let (p1, _) = pq_matrices(1);
        assert_eq!(p1.get(1, 2).to_string(), "(1)·z + 1/2·u0");
    }

    #[test]
    fn opposite_commutator_leaves_diagonal() {
        let (p, q) = pq_matrices(1);
        let pq = p.mul(&q).sub(&q.mul(&p));
        let r = p.dx().map(|e| -e).add(&pq);
        assert_eq!(r.get(1, 1), &fhat_polynomial(1).dx().dx());
    }

    #[test]
    fn residual_pattern() {
        for n in 0..=3 {
            let r = zero_curvature_residual(n);
            assert!(r.get(1, 1).is_zero());
            assert!(r.get(1, 2).is_zero());
            assert!(r.get(2, 2).is_zero());
            let expect = &DiffPoly::qt(0) - &kdv_rhs(n);
            assert_eq!(r.get(2, 1), &ZPoly::constant(expect), "n = {n}");
            assert!(pq_matrices(n).0.trace().is_zero());
            assert!(pq_matrices(n).0.max_degree().unwrap() <= n + 1);
        }
    }
}
