//! Centered finite differences with exact-rational weights.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use super::DiffPoly;
use crate::error::{Error, Result};

/// Fornberg weights for the `deriv`-th derivative at 0 on integer `offsets`.
pub fn fd_weights(deriv: usize, offsets: &[i64]) -> Vec<BigRational> {
    let n = offsets.len();
    let x: Vec<BigRational> = offsets.iter().map(|&o| BigRational::from_integer(BigInt::from(o))).collect();
    // c[j][k]: weight of node j for derivative k
    let mut c = vec![vec![BigRational::zero(); deriv + 1]; n];
    c[0][0] = BigRational::from_integer(1.into());
    let mut c1 = BigRational::from_integer(1.into());
    for i in 1..n {
        let mut c2 = BigRational::from_integer(1.into());
        let mk = i.min(deriv);
        for j in 0..i {
            let c3 = &x[i] - &x[j];
            c2 = &c2 * &c3;
            for k in (0..=mk).rev() {
                let kk = BigRational::from_integer(BigInt::from(k));
                if j == i - 1 {
                    let prev_j = if k > 0 { c[j][k - 1].clone() } else { BigRational::zero() };
                    c[i][k] = &(&c1 / &c2) * &(&(&kk * &prev_j) - &(&x[j] * &c[j][k]));
                }
                let prev_jk = if k > 0 { c[j][k - 1].clone() } else { BigRational::zero() };
                c[j][k] = &(&(&x[i] * &c[j][k]) - &(&kk * &prev_jk)) / &c3;
            }
        }
        c1 = c2;
    }
    c.into_iter().map(|w| w[deriv].clone()).collect()
}

/// Number of nodes of the centered stencil for derivative `deriv` at even accuracy `order`.
pub fn stencil_points(deriv: usize, order: usize) -> usize {
    if deriv == 0 {
        return 1;
    }
    2 * ((deriv + 1) / 2) - 1 + order
}

/// Centered stencil: offsets and weights (per unit spacing).
pub fn centered_stencil(deriv: usize, order: usize) -> (Vec<i64>, Vec<f64>) {
    let pts = stencil_points(deriv, order) as i64;
    let r = (pts - 1) / 2;
    let offsets: Vec<i64> = (-r..=r).collect();
    let w = fd_weights(deriv, &offsets).iter().map(|c| c.to_f64().unwrap_or(f64::NAN)).collect();
    (offsets, w)
}

/// Applies the centered stencil for `deriv` at node `i` if it fits.
pub fn derivative_at(samples: &[f64], i: usize, dx: f64, deriv: usize, order: usize) -> Option<f64> {
    let (offsets, w) = centered_stencil(deriv, order);
    derivative_with(samples, i, dx, deriv, &offsets, &w)
}

fn derivative_with(samples: &[f64], i: usize, dx: f64, deriv: usize, offsets: &[i64], w: &[f64]) -> Option<f64> {
    let r = *offsets.last().unwrap_or(&0) as usize;
    if i < r || i + r >= samples.len() {
        return None;
    }
    let mut acc = 0.0;
    for (o, c) in offsets.iter().zip(w) {
        acc += c * samples[(i as i64 + o) as usize];
    }
    Some(acc / dx.powi(deriv as i32))
}

/// Evaluates `p` pointwise on a uniformly sampled field using centered
/// differences of accuracy `order` (even). Nodes too close to the boundary
/// for the widest stencil are `None`.
pub fn eval_diffpoly(p: &DiffPoly, samples: &[f64], dx: f64, order: usize) -> Result<Vec<Option<f64>>> {
    if order == 0 || order % 2 == 1 {
        return Err(Error::InvalidParameter("finite-difference order must be even and positive".into()));
    }
    if !(dx > 0.0) {
        return Err(Error::InvalidParameter("grid spacing must be positive".into()));
    }
    let k = p.jet_order().unwrap_or(0);
    let stencils: Vec<(Vec<i64>, Vec<f64>)> = (0..=k).map(|d| centered_stencil(d, order)).collect();
    let needed = stencils.iter().map(|(o, _)| o.len()).max().unwrap_or(1);
    if samples.len() < needed {
        return Err(Error::GridTooShort { needed, have: samples.len() });
    }
    let r = (needed - 1) / 2;
    let mut out = Vec::with_capacity(samples.len());
    let mut jets = vec![0.0; k + 1];
    for i in 0..samples.len() {
        if i < r || i + r >= samples.len() {
            out.push(None);
            continue;
        }
        for (d, (o, w)) in stencils.iter().enumerate() {
            jets[d] = derivative_with(samples, i, dx, d, o, w).expect("stencil fits");
        }
        out.push(Some(p.eval(&jets)?));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hierarchy::diffpoly::rat;

    #[test]
    fn classic_weights() {
        assert_eq!(fd_weights(1, &[-1, 0, 1]), vec![rat(-1, 2), rat(0, 1), rat(1, 2)]);
        assert_eq!(fd_weights(2, &[-1, 0, 1]), vec![rat(1, 1), rat(-2, 1), rat(1, 1)]);
        assert_eq!(
            fd_weights(1, &[-2, -1, 0, 1, 2]),
            vec![rat(1, 12), rat(-2, 3), rat(0, 1), rat(2, 3), rat(-1, 12)]
        );
    }

    #[test]
    fn stencil_sizes() {
        assert_eq!(stencil_points(1, 4), 5);
        assert_eq!(stencil_points(2, 4), 5);
        assert_eq!(stencil_points(3, 4), 7);
        assert_eq!(stencil_points(4, 2), 5);
    }

    #[test]
    fn second_derivative_of_quadratic() {
        let dx = 0.1;
        let q: Vec<f64> = (0..20).map(|i| (i as f64 * dx).powi(2)).collect();
        let v = eval_diffpoly(&DiffPoly::u(2), &q, dx, 4).unwrap();
        for x in v.iter().flatten() {
            assert!((x - 2.0).abs() < 1e-11);
        }
        assert!(v[0].is_none() && v[19].is_none());
    }

    #[test]
    fn too_short() {
        assert!(matches!(
            eval_diffpoly(&DiffPoly::u(3), &[1.0; 6], 0.1, 4),
            Err(Error::GridTooShort { needed: 7, have: 6 })
        ));
    }
}
