use std::collections::BTreeMap;

use dubrovin::hierarchy::{eval_diffpoly, fhat, kdv_rhs, zero_curvature_residual, DiffPoly, Monomial, ZPoly};
use num_rational::{BigRational, Ratio};
use num_traits::{ToPrimitive, Zero};
use proptest::prelude::*;

type Q = Ratio<i128>;

/// Independent jet-polynomial algebra: exponent vector over u0, u1, … → coefficient.
#[derive(Clone, Debug, PartialEq, Default)]
struct Jet(BTreeMap<Vec<u32>, Q>);

fn norm(mut e: Vec<u32>) -> Vec<u32> {
    while e.last() == Some(&0) {
        e.pop();
    }
    e
}

impl Jet {
    fn var(i: usize) -> Jet {
        let mut e = vec![0; i + 1];
        e[i] = 1;
        Jet(BTreeMap::from([(e, Q::from(1))]))
    }

    fn add(&self, o: &Jet) -> Jet {
        let mut m = self.0.clone();
        for (e, c) in &o.0 {
            *m.entry(e.clone()).or_insert_with(Q::zero) += c;
        }
        m.retain(|_, c| !c.is_zero());
        Jet(m)
    }

    fn scale(&self, s: Q) -> Jet {
        let mut m: BTreeMap<_, _> = self.0.iter().map(|(e, c)| (e.clone(), c * s)).collect();
        m.retain(|_, c: &mut Q| !c.is_zero());
        Jet(m)
    }

    fn mul(&self, o: &Jet) -> Jet {
        let mut out = Jet::default();
        for (a, ca) in &self.0 {
            for (b, cb) in &o.0 {
                let n = a.len().max(b.len());
                let e = (0..n).map(|i| a.get(i).unwrap_or(&0) + b.get(i).unwrap_or(&0)).collect();
                out = out.add(&Jet(BTreeMap::from([(norm(e), ca * cb)])));
            }
        }
        out
    }

    /// Total derivative: uᵢ ↦ uᵢ₊₁ by the product rule.
    fn dx(&self) -> Jet {
        let mut out = Jet::default();
        for (e, c) in &self.0 {
            for (i, &k) in e.iter().enumerate() {
                if k == 0 {
                    continue;
                }
                let mut f = e.clone();
                f[i] -= 1;
                if f.len() < i + 2 {
                    f.resize(i + 2, 0);
                }
                f[i + 1] += 1;
                out = out.add(&Jet(BTreeMap::from([(norm(f), c * Q::from(k as i128))])));
            }
        }
        out
    }

    fn from_diffpoly(p: &DiffPoly) -> Jet {
        let mut m = BTreeMap::new();
        for (mono, c) in p.terms() {
            assert!(mono.qt_exponents().is_empty());
            m.insert(mono.u_exponents().to_vec(), to_q(c));
        }
        Jet(m)
    }
}

fn to_q(c: &BigRational) -> Q {
    Q::new(c.numer().to_i128().unwrap(), c.denom().to_i128().unwrap())
}

fn r(a: i128, b: i128) -> BigRational {
    BigRational::new(a.into(), b.into())
}

#[test]
fn closed_forms() {
    let f2 = fhat(2);
    assert_eq!(f2.len(), 2);
    assert_eq!(f2.coefficient(&Monomial::new(&[2], &[])), r(3, 8));
    assert_eq!(f2.coefficient(&Monomial::new(&[0, 0, 1], &[])), r(-1, 8));
    let k1 = kdv_rhs(1);
    assert_eq!(k1.len(), 2);
    assert_eq!(k1.coefficient(&Monomial::new(&[1, 1], &[])), r(3, 2));
    assert_eq!(k1.coefficient(&Monomial::new(&[0, 0, 0, 1], &[])), r(-1, 4));
    // q⁗/32 − 5qq″/16 − 5q′²/32 + 5q³/16
    let f3 = fhat(3);
    assert_eq!(f3.len(), 4);
    assert_eq!(f3.coefficient(&Monomial::new(&[3], &[])), r(5, 16));
    assert_eq!(f3.coefficient(&Monomial::new(&[1, 0, 1], &[])), r(-5, 16));
    assert_eq!(f3.coefficient(&Monomial::new(&[0, 2], &[])), r(-5, 32));
    assert_eq!(f3.coefficient(&Monomial::new(&[0, 0, 0, 0, 1], &[])), r(1, 32));
}

#[test]
fn lenard_relation() {
    // ∂f̂ₗ₊₁ = −¼∂³f̂ₗ + q∂f̂ₗ + ½q′f̂ₗ
    let q = Jet::var(0);
    let q1 = Jet::var(1);
    for l in 0..=5 {
        let f = Jet::from_diffpoly(&fhat(l));
        let next = Jet::from_diffpoly(&fhat(l + 1));
        let rhs = f
            .dx()
            .dx()
            .dx()
            .scale(Q::new(-1, 4))
            .add(&q.mul(&f.dx()))
            .add(&q1.mul(&f).scale(Q::new(1, 2)));
        assert_eq!(next.dx(), rhs, "l = {l}");
    }
}

#[test]
fn constant_potential() {
    // q ≡ c: Σ f̂ₗ z^{−ℓ} = (1 − c/z)^{−½}, so f̂ₗ = binom(2ℓ, ℓ)/4^ℓ · cˡ
    let mut binom = Q::from(1);
    for l in 0..=6u32 {
        if l > 0 {
            binom = binom * Q::from((2 * l * (2 * l - 1)) as i128) / Q::from((l * l) as i128);
        }
        let expect = binom / Q::from(4i128.pow(l));
        let got = to_q(&fhat(l as usize).coefficient(&Monomial::new(&[l], &[])));
        assert_eq!(got, expect, "l = {l}");
    }
}

#[test]
fn zero_curvature_pattern() {
    for n in 0..=3 {
        let res = zero_curvature_residual(n);
        let flow = Jet::from_diffpoly(&fhat(n + 1)).dx().scale(Q::from(2));
        assert_eq!(Jet::from_diffpoly(&kdv_rhs(n)), flow);
        for (i, j) in [(1, 1), (1, 2), (2, 2)] {
            assert!(res.get(i, j).is_zero(), "n = {n}, entry ({i},{j})");
        }
        let expect = &DiffPoly::qt(0) - &kdv_rhs(n);
        assert_eq!(res.get(2, 1), &ZPoly::constant(expect));
    }
}

#[test]
fn fd_evaluation_converges() {
    // f̂₂ on q = sin x: 3/8 sin² x + 1/8 sin x
    let p = fhat(2);
    let x0 = 0.4f64;
    let exact = 3.0 / 8.0 * x0.sin().powi(2) + x0.sin() / 8.0;
    let err = |dx: f64| {
        let samples: Vec<f64> = (-10..=10).map(|i| (x0 + i as f64 * dx).sin()).collect();
        (eval_diffpoly(&p, &samples, dx, 4).unwrap()[10].unwrap() - exact).abs()
    };
    let (e1, e2) = (err(0.04), err(0.02));
    assert!(e2 < 1e-7);
    assert!((e1 / e2).log2() > 3.5, "order {}", (e1 / e2).log2());
}

fn small_jet() -> impl Strategy<Value = DiffPoly> {
    prop::collection::vec((0usize..3, 0u32..3, -4i64..5), 1..4).prop_map(|terms| {
        terms.into_iter().fold(DiffPoly::zero(), |acc, (i, e, c)| {
            let mut ex = vec![0; i + 1];
            ex[i] = e;
            &acc + &DiffPoly::monomial(Monomial::new(&ex, &[]), BigRational::from_integer(c.into()))
        })
    })
}

proptest! {
    #[test]
    fn dx_is_a_derivation(a in small_jet(), b in small_jet()) {
        let lhs = (&a * &b).dx();
        let rhs = &(&a.dx() * &b) + &(&a * &b.dx());
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn algebra_matches_oracle(a in small_jet(), b in small_jet()) {
        let ja = Jet::from_diffpoly(&a);
        let jb = Jet::from_diffpoly(&b);
        prop_assert_eq!(Jet::from_diffpoly(&(&a * &b)), ja.mul(&jb));
        prop_assert_eq!(Jet::from_diffpoly(&a.dx()), ja.dx());
    }

    #[test]
    fn eval_matches_oracle(jets in prop::collection::vec(-2.0f64..2.0, 8)) {
        let p = fhat(3);
        let direct = p.eval(&jets).unwrap();
        let oracle: f64 = Jet::from_diffpoly(&p).0.iter().map(|(e, c)| {
            let mut v = c.to_f64().unwrap();
            for (i, &k) in e.iter().enumerate() {
                v *= jets[i].powi(k as i32);
            }
            v
        }).sum();
        prop_assert!((direct - oracle).abs() <= 1e-12 * (1.0 + oracle.abs()));
    }
}
