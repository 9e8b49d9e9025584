//! Moment fields `Qₖ`, their partition polynomials `Rₘ`, trace reconstruction
//! of `q`, and the bound constants used by the Lipschitz estimate.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use serde::Serialize;

use crate::dirichlet::DirichletState;
use crate::error::{Error, Result};
use crate::numeric::{halton, CompensatedSum};
use crate::spectrum::{Bounded, Envelope, GapSet, TailModel};

/// One term `∏ Qₖ^{αₖ} / (αₖ!(2k)^{αₖ})` of `Rₘ`; `alpha[k-1] = αₖ`.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    pub alpha: Vec<u32>,
    pub weight: BigRational,
    weight_f64: f64,
}

impl Partition {
    fn new(alpha: Vec<u32>) -> Self {
        let mut w = BigRational::one();
        for (i, &a) in alpha.iter().enumerate() {
            let k = BigInt::from(2 * (i + 1));
            for r in 1..=a {
                w /= BigRational::from_integer(&k * BigInt::from(r));
            }
        }
        let weight_f64 = w.to_f64().unwrap_or(f64::NAN);
        Self { alpha, weight: w, weight_f64 }
    }

    pub fn weight_f64(&self) -> f64 {
        self.weight_f64
    }

    /// Evaluates the term at `qs[k-1] = Qₖ`.
    pub fn eval(&self, qs: &[f64]) -> f64 {
        self.alpha.iter().enumerate().fold(self.weight_f64, |acc, (i, &a)| acc * qs[i].powi(a as i32))
    }
}

fn enumerate(m: usize) -> Vec<Partition> {
    fn rec(k: usize, rem: usize, alpha: &mut Vec<u32>, out: &mut Vec<Partition>) {
        if k == 0 {
            if rem == 0 {
                out.push(Partition::new(alpha.clone()));
            }
            return;
        }
        for a in 0..=rem / k {
            alpha[k - 1] = a as u32;
            rec(k - 1, rem - a * k, alpha, out);
        }
        alpha[k - 1] = 0;
    }
    let mut out = Vec::new();
    let mut alpha = vec![0; m];
    rec(m, m, &mut alpha, &mut out);
    out
}

/// Multi-indices `α ∈ ℕ₀ᵐ` with `Σ k·αₖ = m`, memoized per `m`.
pub fn partitions(m: usize) -> Arc<Vec<Partition>> {
    static TABLE: OnceLock<Mutex<HashMap<usize, Arc<Vec<Partition>>>>> = OnceLock::new();
    let table = TABLE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = table.lock().expect("partition table lock");
    guard.entry(m).or_insert_with(|| Arc::new(enumerate(m))).clone()
}

/// `Rₘ` from moment values `qs[k-1] = Qₖ` (needs `qs.len() ≥ m`).
pub fn r_from_q(qs: &[f64], m: usize) -> f64 {
    assert!(qs.len() >= m, "need Q₁..Q_{m}");
    partitions(m).iter().map(|p| p.eval(qs)).collect::<CompensatedSum>().value()
}

/// Bound on `|Rₘ(Q+δ) − Rₘ(Q)|` for `|δₖ| ≤ errs[k-1]`.
fn r_error(qs: &[f64], errs: &[f64], m: usize) -> f64 {
    partitions(m)
        .iter()
        .map(|p| {
            let mut hi = p.weight_f64;
            let mut lo = p.weight_f64;
            for (i, &a) in p.alpha.iter().enumerate() {
                hi *= (qs[i].abs() + errs[i]).powi(a as i32);
                lo *= qs[i].abs().powi(a as i32);
            }
            hi - lo
        })
        .sum()
}

/// Upper envelope of `2k(|Ē|+ηⱼ,₀+γⱼ)^{k−1}γⱼ` on the tail.
fn q_tail_envelope(t: &TailModel, e_low: f64, k: u32) -> Envelope {
    let span = e_low.abs() + t.position.coefficient + t.gamma_sup();
    let p = (k - 1) as f64;
    t.gamma_envelope().mul(Envelope::new(2.0 * k as f64 * span.powf(p), t.position.exponent * p, 0.0))
}

fn q_tail_bound(set: &GapSet, k: u32) -> Result<f64> {
    match set.tail() {
        None => Ok(0.0),
        Some(t) => q_tail_envelope(t, set.e_low(), k)
            .sum_from(t.start)
            .ok_or_else(|| Error::Divergent(format!("moment Q{k} tail is not summable"))),
    }
}

/// `Qₖ = Ēᵏ + Σⱼ((Eⱼ⁻)ᵏ + (Eⱼ⁺)ᵏ − 2μⱼᵏ)` over explicit gaps; the tail bound
/// covers every unlisted gap whatever its Dirichlet point.
pub fn q_k(set: &GapSet, state: &DirichletState, k: u32) -> Result<Bounded> {
    if k == 0 {
        return Err(Error::InvalidParameter("moment index starts at 1".into()));
    }
    state.check(set)?;
    let mus = state.mus(set);
    Ok(Bounded { value: q_value(set, &mus, k), tail_bound: q_tail_bound(set, k)? })
}

pub(crate) fn q_value(set: &GapSet, mus: &[f64], k: u32) -> f64 {
    let ki = k as i32;
    let mut s = CompensatedSum::new();
    s.add(set.e_low().powi(ki));
    for (g, &mu) in set.gaps().iter().zip(mus) {
        s.add(g.lower.powi(ki));
        s.add(g.upper.powi(ki));
        s.add(-2.0 * mu.powi(ki));
    }
    s.value()
}

/// `[Q₁, …, Q_kmax]` at the given Dirichlet points.
pub(crate) fn q_values(set: &GapSet, mus: &[f64], kmax: usize) -> Vec<f64> {
    (1..=kmax as u32).map(|k| q_value(set, mus, k)).collect()
}

/// `[R₀, …, R_mmax]` at the given Dirichlet points.
pub(crate) fn r_values(set: &GapSet, mus: &[f64], mmax: usize) -> Vec<f64> {
    let qs = q_values(set, mus, mmax);
    (0..=mmax).map(|m| r_from_q(&qs, m)).collect()
}

/// `Rₘ = Σ_α ∏ Qₖ^{αₖ}/(αₖ!(2k)^{αₖ})`, with the moment tail bounds propagated.
pub fn r_m(set: &GapSet, state: &DirichletState, m: usize) -> Result<Bounded> {
    state.check(set)?;
    if m == 0 {
        return Ok(Bounded { value: 1.0, tail_bound: 0.0 });
    }
    let mus = state.mus(set);
    let qs = q_values(set, &mus, m);
    let errs = (1..=m as u32).map(|k| q_tail_bound(set, k)).collect::<Result<Vec<_>>>()?;
    Ok(Bounded { value: r_from_q(&qs, m), tail_bound: r_error(&qs, &errs, m) })
}

/// Trace formula `q = Ē + Σⱼ(Eⱼ⁻ + Eⱼ⁺ − 2μⱼ)`; tail bound `Σ γₖ` over unlisted gaps.
pub fn trace_q(set: &GapSet, state: &DirichletState) -> Result<Bounded> {
    state.check(set)?;
    let value = q_value(set, &state.mus(set), 1);
    let tail_bound = match set.tail() {
        None => 0.0,
        Some(t) => t
            .gamma_envelope()
            .sum_from(t.start)
            .ok_or_else(|| Error::Divergent("tail gap lengths are not summable".into()))?,
    };
    Ok(Bounded { value, tail_bound })
}

/// Constants of the moment-derivative estimate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundConstants {
    pub n: u32,
    /// Sampled sup of `|Rₘ|` over `0 ≤ m ≤ n` plus the tail allowance (not certified).
    pub m1: f64,
    pub m2: f64,
    pub m3: f64,
    /// `D₁, …, Dₙ`
    pub d: Vec<f64>,
    pub samples: usize,
}

/// Number of quasi-random torus points used for `M₁`.
pub const M1_SAMPLES: u64 = 1000;

fn binomial(n: u64, k: u64) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `M₁`, `M₂`, `M₃` for hierarchy index `n`.
pub fn bound_constants(set: &GapSet, n: u32) -> Result<BoundConstants> {
    let nn = n as usize;
    let e = set.e_low().abs();
    let ni = n as i32;
    let gamma_sup = set
        .gaps()
        .iter()
        .map(|g| g.length())
        .chain(set.tail().map(|t| t.gamma_sup()))
        .fold(0.0f64, f64::max);

    // sampled sup of |R_m|, m = 0..n
    let dim = set.len();
    let mut points: Vec<Vec<f64>> =
        (0..M1_SAMPLES).map(|i| halton(i, dim).into_iter().map(|u| u * std::f64::consts::TAU).collect()).collect();
    if dim <= 10 {
        for mask in 0u64..(1 << dim) {
            points.push((0..dim).map(|j| if mask >> j & 1 == 1 { std::f64::consts::PI } else { 0.0 }).collect());
        }
    }
    let errs = (1..=n).map(|k| q_tail_bound(set, k)).collect::<Result<Vec<_>>>()?;
    let mut m1 = 1.0f64;
    for phi in &points {
        let st = DirichletState::new(set, phi.clone())?;
        let mus = st.mus(set);
        let qs = q_values(set, &mus, nn);
        for m in 1..=nn {
            m1 = m1.max(r_from_q(&qs, m).abs() + r_error(&qs, &errs, m));
        }
    }

    let d: Vec<f64> = (1..=n)
        .map(|k| {
            let kk = k as i32;
            2.0 * k as f64 / 3.0
                * 3f64.powi((kk - 2).max(0))
                * (1.0 + e.powi(kk - 1))
                * (1.0 + gamma_sup.powi(kk - 1))
        })
        .collect();
    let c = d.iter().copied().fold(0.0f64, f64::max);
    let moment_sum = if n == 0 {
        0.0
    } else {
        let explicit: f64 =
            (0..set.len()).map(|j| set.gamma(j) * (1.0 + set.eta0(j).powi(ni - 1))).sum();
        let tail = match set.tail() {
            None => 0.0,
            Some(t) => {
                let env = t.gamma_envelope().mul(crate::spectrum::moment_envelope_for(t, n - 1));
                env.sum_from(t.start).ok_or_else(|| {
                    Error::Divergent("moment condition fails on the tail".into())
                })?
            }
        };
        explicit + tail
    };
    let m2 = 3f64.powi(ni)
        * (1.0 + e.powi(ni)).powi(ni)
        * (1.0 + 2.0 * c * moment_sum).powi(ni)
        * (binomial(2 * n as u64, n as u64) - 1.0);
    let m3 = (n * (n + 1)) as f64 / 2.0 * 2f64.powi(ni) * (1.0 + e.powi(ni)) * m2;
    Ok(BoundConstants { n, m1, m2, m3, d, samples: points.len() })
}
