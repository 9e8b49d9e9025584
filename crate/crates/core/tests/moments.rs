use dubrovin::dirichlet::{dist, mu_of_phi, phi_of_mu_sigma, sigma_of_phi, DirichletState};
use dubrovin::flows::psi;
use dubrovin::moments::{partitions, q_k, r_from_q, r_m, trace_q};
use dubrovin::spectrum::{c_j, GapSet};
use num_rational::BigRational;
use num_traits::{One, Zero};
use proptest::prelude::*;

fn r(a: i64, b: i64) -> BigRational {
    BigRational::new(a.into(), b.into())
}

/// All α with αₖ ≤ m/k, filtered by Σ k·αₖ = m.
fn brute_partitions(m: usize) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let bounds: Vec<usize> = (1..=m).map(|k| m / k).collect();
    let mut alpha = vec![0u32; m];
    loop {
        if alpha.iter().enumerate().map(|(i, &a)| (i + 1) * a as usize).sum::<usize>() == m {
            out.push(alpha.clone());
        }
        let mut i = 0;
        loop {
            if i == m {
                return out;
            }
            if (alpha[i] as usize) < bounds[i] {
                alpha[i] += 1;
                break;
            }
            alpha[i] = 0;
            i += 1;
        }
    }
}

/// Rₘ from `m Rₘ = ½ Σₖ Qₖ Rₘ₋ₖ` (coefficients of `exp Σ Qₖ zᵏ/(2k)`).
fn series_r(qs: &[BigRational], m: usize) -> BigRational {
    let mut rs = vec![BigRational::one()];
    for j in 1..=m {
        let s = (1..=j).fold(BigRational::zero(), |acc, k| acc + &qs[k - 1] * &rs[j - k]);
        rs.push(s / r(2 * j as i64, 1));
    }
    rs[m].clone()
}

fn exact_r(qs: &[BigRational], m: usize) -> BigRational {
    partitions(m)
        .iter()
        .map(|p| {
            p.alpha.iter().enumerate().fold(p.weight.clone(), |acc, (i, &a)| {
                (0..a).fold(acc, |acc, _| acc * &qs[i])
            })
        })
        .fold(BigRational::zero(), |a, b| a + b)
}

#[test]
fn hand_closed_forms() {
    let qs = [r(3, 1), r(-5, 2), r(7, 3)];
    let (q1, q2, q3) = (qs[0].clone(), qs[1].clone(), qs[2].clone());
    assert_eq!(exact_r(&qs, 0), r(1, 1));
    assert_eq!(exact_r(&qs, 1), &q1 / r(2, 1));
    assert_eq!(exact_r(&qs, 2), &q2 / r(4, 1) + &q1 * &q1 / r(8, 1));
    let r3 = &q3 / r(6, 1) + &q1 * &q2 / r(8, 1) + &q1 * &q1 * &q1 / r(48, 1);
    assert_eq!(exact_r(&qs, 3), r3);
}

#[test]
fn partitions_match_brute_force() {
    for m in 0..=6 {
        let mut got: Vec<Vec<u32>> = partitions(m).iter().map(|p| p.alpha.clone()).collect();
        let mut want = brute_partitions(m);
        got.sort();
        want.sort();
        assert_eq!(got, want, "m = {m}");
        for p in partitions(m).iter() {
            let mut w = BigRational::one();
            for (i, &a) in p.alpha.iter().enumerate() {
                for j in 1..=a as i64 {
                    w /= r(2 * (i as i64 + 1) * j, 1);
                }
            }
            assert_eq!(p.weight, w);
        }
    }
    let counts: Vec<usize> = (0..=6).map(|m| partitions(m).len()).collect();
    assert_eq!(counts, [1, 1, 2, 3, 5, 7, 11]);
}

#[test]
fn exponential_series_oracle() {
    let qs: Vec<BigRational> = [2, -3, 5, 1, -7, 4].iter().enumerate().map(|(i, &v)| r(v, i as i64 + 2)).collect();
    for m in 0..=6 {
        assert_eq!(exact_r(&qs, m), series_r(&qs, m), "m = {m}");
    }
}

#[test]
fn no_gaps_constant_moments() {
    let s = GapSet::finite(1.5, &[]).unwrap();
    let st = DirichletState::new(&s, vec![]).unwrap();
    for k in 1..=4 {
        assert_eq!(q_k(&s, &st, k).unwrap().value, 1.5f64.powi(k as i32));
    }
    assert_eq!(trace_q(&s, &st).unwrap().value, 1.5);
}

fn three_gaps() -> GapSet {
    GapSet::finite(0.0, &[(1.0, 2.0), (3.0, 3.5), (5.0, 5.25)]).unwrap()
}

proptest! {
    #[test]
    fn float_r_matches_exact(vals in prop::collection::vec(-3i64..4, 6), m in 0usize..=6) {
        let qs: Vec<BigRational> = vals.iter().map(|&v| r(v, 2)).collect();
        let qf: Vec<f64> = vals.iter().map(|&v| v as f64 / 2.0).collect();
        let exact: f64 = num_traits::ToPrimitive::to_f64(&series_r(&qs, m)).unwrap();
        prop_assert!((r_from_q(&qf, m) - exact).abs() <= 1e-12 * (1.0 + exact.abs()));
    }

    #[test]
    fn angle_round_trip(phi in 0.0f64..std::f64::consts::TAU) {
        let s = three_gaps();
        for j in 0..3 {
            let mu = mu_of_phi(&s, j, phi).unwrap();
            let g = s.gap(j).unwrap();
            prop_assert!(g.lower <= mu && mu <= g.upper);
            let back = phi_of_mu_sigma(&s, j, mu, sigma_of_phi(phi)).unwrap();
            let d = (back - phi).abs();
            prop_assert!(d.min(std::f64::consts::TAU - d) < 1e-6);
        }
    }

    #[test]
    fn trace_q_is_first_moment(phi in prop::collection::vec(0.0f64..6.28, 3)) {
        let s = three_gaps();
        let st = DirichletState::new(&s, phi).unwrap();
        let q = trace_q(&s, &st).unwrap().value;
        prop_assert_eq!(q, q_k(&s, &st, 1).unwrap().value);
        prop_assert!((2.0 * r_m(&s, &st, 1).unwrap().value - q).abs() < 1e-14);
        // each gap contributes E⁻ + E⁺ − 2μ ∈ [−γ, γ]
        prop_assert!(q.abs() <= 1.75 + 1e-12);
    }

    #[test]
    fn psi_positive_and_bounded(phi in prop::collection::vec(0.01f64..6.27, 3)) {
        let s = three_gaps();
        let st = DirichletState::new(&s, phi).unwrap();
        let p = psi(&s, &st).unwrap();
        for j in 0..3 {
            let c = c_j(&s, j, 1e-12).unwrap().value;
            prop_assert!(p.values[j] > 0.0);
            prop_assert!(p.values[j] <= 2.0 * c * (1.0 + 1e-12));
        }
    }

    #[test]
    fn distance_is_a_metric(
        a in prop::collection::vec(0.0f64..6.28, 3),
        b in prop::collection::vec(0.0f64..6.28, 3),
        c in prop::collection::vec(0.0f64..6.28, 3),
    ) {
        let s = three_gaps();
        let (a, b, c) = (
            DirichletState::new(&s, a).unwrap(),
            DirichletState::new(&s, b).unwrap(),
            DirichletState::new(&s, c).unwrap(),
        );
        let d = |x: &DirichletState, y: &DirichletState| dist(&s, 1, x, y).unwrap().value;
        prop_assert_eq!(d(&a, &a), 0.0);
        prop_assert_eq!(d(&a, &b), d(&b, &a));
        prop_assert!(d(&a, &c) <= d(&a, &b) + d(&b, &c) + 1e-15);
    }

    #[test]
    fn spectrum_json_round_trip(
        e_low in -2.0f64..0.0,
        gaps in prop::collection::vec((0.1f64..1.0, 0.05f64..0.5), 1..5),
    ) {
        let mut raw = Vec::new();
        let mut at = 0.5;
        for (skip, len) in gaps {
            at += skip;
            raw.push((at, at + len));
            at += len;
        }
        let s = GapSet::finite(e_low, &raw).unwrap();
        let back = GapSet::from_json(&s.to_json()).unwrap();
        prop_assert_eq!(back.len(), s.len());
        for j in 0..s.len() {
            prop_assert_eq!(back.gap(j).unwrap(), s.gap(j).unwrap());
        }
    }
}
