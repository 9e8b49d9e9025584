//! Small quasiperiodic data: Diophantine check, sampling functions, synthetic
//! gap models obeying the small-coupling bounds, and the bound chain showing
//! those models satisfy the Craig-type conditions.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::ls_slope;
use crate::spectrum::{
    c_j, check_craig, Anchor, Gap, CraigCondition, CraigReport, DecayLaw, Envelope, GapSet, PositionLaw, TailModel,
};

/// Parameters of a quasiperiodic sampling function and its gap model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QPData {
    pub nu: usize,
    pub omega: Vec<f64>,
    pub epsilon: f64,
    pub kappa0: f64,
    pub a0: f64,
    pub b0: f64,
    /// Constant in `ηₘ,₀ ≤ c|m|²`.
    pub c: f64,
    /// Constants in `ηₘ,ₙ ≥ a|m|^{−b}`; fitted when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    /// Constant in `Cₘ ≤ F·exp(F log|m| log log|m|)`; fitted when absent.
    #[serde(default, rename = "F", skip_serializing_if = "Option::is_none")]
    pub f: Option<f64>,
    pub mmax: u64,
}

impl QPData {
    /// One frequency `(√5−1)/2`, `ε = 0.01`, `κ₀ = 1`, `a₀ = 0.3`, `b₀ = 1.5`, `c = 10`.
    pub fn example(mmax: u64) -> Self {
        Self {
            nu: 1,
            omega: vec![(5f64.sqrt() - 1.0) / 2.0],
            epsilon: 0.01,
            kappa0: 1.0,
            a0: 0.3,
            b0: 1.5,
            c: 10.0,
            a: None,
            b: None,
            f: None,
            mmax,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.to_string()));
        if self.nu == 0 || self.omega.len() != self.nu {
            return bad("omega must have nu components");
        }
        if self.omega.iter().any(|w| !w.is_finite()) {
            return Err(Error::NonFinite("omega"));
        }
        if !(self.a0 > 0.0 && self.a0 < 1.0) {
            return bad("a0 must lie in (0, 1)");
        }
        if !(self.b0 > self.nu as f64 && self.b0.is_finite()) {
            return bad("b0 must exceed nu");
        }
        if !(0.0..=1.0).contains(&self.kappa0) {
            return bad("kappa0 must lie in [0, 1]");
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return bad("epsilon must be positive");
        }
        if !(self.c > 0.0 && self.c.is_finite()) {
            return bad("c must be positive");
        }
        if self.mmax == 0 {
            return bad("mmax must be at least 1");
        }
        for (name, v) in [("a", self.a), ("b", self.b), ("F", self.f)] {
            if v.is_some_and(|x| !(x > 0.0 && x.is_finite())) {
                return bad(&format!("{name} must be positive"));
            }
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let d: QPData = serde_json::from_str(text)?;
        d.validate()?;
        Ok(d)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes")
    }
}

/// All integer vectors with `0 < |m|∞ ≤ mmax`, one of each `±m` pair.
fn lattice(nu: usize, mmax: u64) -> Result<Vec<Vec<i64>>> {
    let side = 2 * mmax + 1;
    let total = (side as f64).powi(nu as i32);
    if total > 5e7 {
        return Err(Error::InvalidParameter("label range too large to enumerate".into()));
    }
    let m = mmax as i64;
    let mut out = Vec::new();
    let mut v = vec![-m; nu];
    loop {
        // keep m whose first nonzero entry is positive
        if let Some(&first) = v.iter().find(|&&x| x != 0) {
            if first > 0 {
                out.push(v.clone());
            }
        }
        let mut i = 0;
        loop {
            if i == nu {
                return Ok(out);
            }
            if v[i] < m {
                v[i] += 1;
                break;
            }
            v[i] = -m;
            i += 1;
        }
    }
}

fn sup_norm(m: &[i64]) -> i64 {
    m.iter().map(|x| x.abs()).max().unwrap_or(0)
}

/// Outcome of the small-divisor check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiophantineReport {
    pub pass: bool,
    /// Minimizer of `|m·ω|·|m|^{b₀}/a₀`.
    pub worst_m: Vec<i64>,
    /// Minimum of `|m·ω|·|m|^{b₀}/a₀` (pass iff ≥ 1).
    pub margin: f64,
    pub nearest_integer: bool,
    pub checked: usize,
}

/// Checks `|m·ω| ≥ a₀|m|^{−b₀}` for `0 < |m| ≤ mmax` (sup norm); with
/// `nearest_integer`, `|m·ω|` is replaced by its distance to `ℤ`.
pub fn diophantine_check(omega: &[f64], a0: f64, b0: f64, mmax: u64, nearest_integer: bool) -> Result<DiophantineReport> {
    if mmax == 0 {
        return Err(Error::InvalidParameter("mmax must be at least 1".into()));
    }
    if omega.is_empty() {
        return Err(Error::InvalidParameter("omega must be nonempty".into()));
    }
    let ms = lattice(omega.len(), mmax)?;
    let mut worst = (f64::INFINITY, Vec::new());
    for m in &ms {
        let dot: f64 = m.iter().zip(omega).map(|(&k, w)| k as f64 * w).sum();
        let s = if nearest_integer { (dot - dot.round()).abs() } else { dot.abs() };
        let r = s * (sup_norm(m) as f64).powf(b0) / a0;
        if r < worst.0 {
            worst = (r, m.clone());
        }
    }
    Ok(DiophantineReport { pass: worst.0 >= 1.0, worst_m: worst.1, margin: worst.0, nearest_integer, checked: ms.len() })
}

/// One Fourier coefficient `c(m)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Coefficient {
    pub m: Vec<i64>,
    pub value: Complex64,
}

/// Samples of `V(x) = Σ c(m)e^{2πi m·ω x}` with a bound on the omitted terms.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialSample {
    pub values: Vec<Complex64>,
    /// `ε·Σ_{|m|>mmax} e^{−κ₀|m|}`
    pub tail_bound: f64,
}

pub fn sample_potential(
    coeffs: &[Coefficient],
    omega: &[f64],
    epsilon: f64,
    kappa0: f64,
    mmax: u64,
    xs: &[f64],
) -> Result<PotentialSample> {
    let nu = omega.len();
    for c in coeffs {
        if c.m.len() != nu {
            return Err(Error::InvalidParameter("coefficient label has the wrong dimension".into()));
        }
        let bound = epsilon * (-kappa0 * sup_norm(&c.m) as f64).exp();
        if c.value.norm() > bound {
            return Err(Error::CoefficientBound { m: c.m.clone(), value: c.value.norm(), bound });
        }
    }
    let kept: Vec<&Coefficient> = coeffs.iter().filter(|c| sup_norm(&c.m) as u64 <= mmax).collect();
    let values = xs
        .iter()
        .map(|&x| {
            kept.iter().fold(Complex64::new(0.0, 0.0), |acc, c| {
                let phase: f64 = c.m.iter().zip(omega).map(|(&k, w)| k as f64 * w).sum::<f64>() * 2.0 * PI * x;
                acc + c.value * Complex64::from_polar(1.0, phase)
            })
        })
        .collect();
    // #{m : |m|∞ = k} ≤ 2ν·3^{ν−1}k^{ν−1}
    let nu_i = nu as i32;
    let count = Envelope::new(epsilon * 2.0 * nu as f64 * 3f64.powi(nu_i - 1), (nu_i - 1) as f64, kappa0);
    let tail_bound = count.sum_from(mmax + 1).unwrap_or(f64::INFINITY);
    Ok(PotentialSample { values, tail_bound })
}

/// Pass/fail of one of the three small-coupling inequalities.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InequalityCheck {
    pub name: &'static str,
    pub pass: bool,
    /// Smallest slack `rhs/lhs` (or `lhs/rhs` for lower bounds) and where it occurs.
    pub margin: f64,
    pub worst: (u64, u64),
}

/// A synthesized gap model with its constants.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Synthesis {
    #[serde(skip)]
    pub model: GapSet,
    pub epsilon: f64,
    pub kappa0: f64,
    pub c: f64,
    pub a: f64,
    pub b: f64,
    #[serde(rename = "F")]
    pub f: f64,
    pub mmax: u64,
    /// Labels listed explicitly in `model`; the rest follow the tail law.
    pub explicit: usize,
    /// `Cₘ` upper bounds, `m = 1..=mmax`.
    pub c_m: Vec<f64>,
    pub checks: Vec<InequalityCheck>,
}

const SHRINK: f64 = 1.0 - 1e-3;
/// Smallest gap length, relative to its position, listed explicitly.
const RESOLVABLE: f64 = 1e-11;

fn gamma_bound(eps: f64, kappa0: f64, m: u64) -> f64 {
    2.0 * eps * (-0.5 * kappa0 * m as f64).exp()
}

/// Largest root `F` of `F·exp(F·L) = C` (`L > 0`).
fn solve_f(c: f64, l: f64) -> f64 {
    if !c.is_finite() {
        return f64::INFINITY;
    }
    // log F + F·L = log C is increasing in F
    let target = c.ln();
    let g = |f: f64| f.ln() + f * l - target;
    let (mut lo, mut hi) = (f64::MIN_POSITIVE, 1.0);
    while g(hi) < 0.0 {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

fn log_loglog(m: u64) -> f64 {
    let l = (m as f64).ln();
    l * l.ln()
}

/// Places gap `m` at `(πmω)²` with length `2ε·e^{−κ₀m/2}(1 − 10⁻³)`, `1 ≤ m ≤ mmax`,
/// attaches the matching exponential tail and checks the three inequalities.
pub fn synthesize_gapmodel(qp: &QPData) -> Result<Synthesis> {
    qp.validate()?;
    if qp.nu != 1 {
        return Err(Error::InvalidParameter("gap-model synthesis supports one frequency only".into()));
    }
    let w = qp.omega[0].abs();
    if w == 0.0 {
        return Err(Error::InvalidParameter("omega must be nonzero".into()));
    }
    let (eps, k0) = (qp.epsilon, qp.kappa0);
    let e_low = 0.0;
    let labeled: Vec<Gap> = (1..=qp.mmax)
        .map(|m| {
            let centre = (PI * m as f64 * w).powi(2);
            let g = gamma_bound(eps, k0, m) * SHRINK;
            Gap::with_length(centre - 0.5 * g, g)
        })
        .collect();
    if labeled[0].lower <= e_low {
        return Err(Error::ModelInconsistent(format!(
            "gap m = 1 reaches below the spectrum base ({})",
            labeled[0].lower
        )));
    }
    for i in 1..labeled.len() {
        if labeled[i].lower <= labeled[i - 1].upper {
            return Err(Error::ModelInconsistent(format!("gaps m = {} and m = {} overlap", i, i + 1)));
        }
    }
    // gaps too narrow to resolve next to their position are left to the tail law
    let explicit = labeled.iter().take_while(|g| g.length() >= RESOLVABLE * g.lower).count();
    let raw: Vec<(f64, f64)> = labeled[..explicit].iter().map(|g| (g.lower, g.upper)).collect();
    let tail = TailModel {
        decay: DecayLaw::Exponential { amplitude: 2.0 * eps * SHRINK, rate: 0.5 * k0 },
        position: PositionLaw { coefficient: (PI * w).powi(2), exponent: 2.0, anchor: Anchor::Center },
        start: explicit as u64 + 1,
    };
    let model = GapSet::new(e_low, &raw, Some(tail))?;

    let eta0 = |j: usize| labeled[j].lower - e_low;
    let eta = |j: usize, l: usize| labeled[j].distance(&labeled[l]);
    // nearest-lower-label distances dₘ = min_{n<m or n=0} ηₘ,ₙ
    let d: Vec<f64> = (0..labeled.len()).map(|j| (0..j).map(|l| eta(j, l)).fold(eta0(j), f64::min)).collect();
    let b = qp.b.unwrap_or_else(|| {
        if d.len() < 2 {
            return 0.1;
        }
        let xs: Vec<f64> = (1..=d.len()).map(|m| (m as f64).ln()).collect();
        let ys: Vec<f64> = d.iter().map(|x| x.ln()).collect();
        (-ls_slope(&xs, &ys)).max(0.1)
    });
    let a = qp.a.unwrap_or_else(|| {
        d.iter().enumerate().map(|(j, x)| x * ((j + 1) as f64).powf(b)).fold(f64::INFINITY, f64::min) * (1.0 - 1e-12)
    });

    let c_m: Vec<f64> = (0..labeled.len())
        .map(|j| match c_j(&model, j, 1e-12) {
            Ok(c) => Ok(c.value + c.tail_bound),
            Err(Error::Divergent(_)) => Ok(f64::INFINITY),
            Err(e) => Err(e),
        })
        .collect::<Result<_>>()?;
    let f = qp.f.unwrap_or_else(|| {
        (3..=qp.mmax).map(|m| solve_f(c_m[m as usize - 1], log_loglog(m))).fold(f64::MIN_POSITIVE, f64::max)
    });

    let mut checks = Vec::new();
    let mut worst = |name: &'static str, items: &mut dyn Iterator<Item = ((u64, u64), f64)>| {
        let (at, margin) = items.fold(((0, 0), f64::INFINITY), |acc, x| if x.1 < acc.1 { x } else { acc });
        checks.push(InequalityCheck { name, pass: margin > 1.0 || (margin == 1.0 && name != "gap-length"), margin, worst: at });
    };
    worst(
        "gap-length",
        &mut (1..=qp.mmax).map(|m| ((m, 0), gamma_bound(eps, k0, m) / labeled[m as usize - 1].length())),
    );
    worst(
        "base-distance",
        &mut (1..=qp.mmax).map(|m| ((m, 0), qp.c * (m * m) as f64 / eta0(m as usize - 1))),
    );
    worst(
        "separation",
        &mut (1..=qp.mmax).flat_map(|m| {
            let j = m as usize - 1;
            let lower = a * (m as f64).powf(-b);
            std::iter::once(((m, 0), eta0(j) / lower)).chain((1..m).map(move |n| ((m, n), eta(j, n as usize - 1) / lower)))
        }),
    );
    if let Some(bad) = checks.iter().find(|c| !c.pass) {
        return Err(Error::ModelInconsistent(format!(
            "{} bound violated at m = {}, n = {} (margin {:e})",
            bad.name, bad.worst.0, bad.worst.1, bad.margin
        )));
    }
    Ok(Synthesis { model, epsilon: eps, kappa0: k0, c: qp.c, a, b, f, mmax: qp.mmax, explicit, c_m, checks })
}

/// One quantity of the label-based bound chain.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainBound {
    pub condition: CraigCondition,
    /// The bound, or `None` when the comparison series diverges.
    pub value: Option<f64>,
    /// `log₁₀` of the bound (finite even if the bound overflows).
    pub log10: Option<f64>,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CraigAppReport {
    pub n: u32,
    pub chain: Vec<ChainBound>,
    pub chain_pass: bool,
    pub direct: CraigReport,
    pub pass: bool,
}

/// Upper limit on labels scanned for a supremum.
const SUP_SCAN: u64 = 10_000_000;

/// `max_m log g(m)` for `m ≥ 1`, where `g` is dominated for `m ≥ 3` by a function
/// whose log-derivative is at most `(F(log log m + 1) + k)/m − κ₀/4`.
fn log_sup(syn: &Synthesis, k: f64, log_g: impl Fn(u64) -> f64) -> Option<f64> {
    let mut best = f64::NEG_INFINITY;
    let mut m = 1;
    loop {
        best = best.max(log_g(m));
        if m >= 3 {
            let mf = m as f64;
            if !syn.f.is_finite() {
                return None;
            }
            let slope = (syn.f * (mf.ln().ln() + 1.0) + k) / mf - 0.25 * syn.kappa0;
            if slope < 0.0 {
                return Some(best);
            }
        }
        m += 1;
        if m > SUP_SCAN {
            return None;
        }
    }
}

/// Evaluates the label-based bound chain for the four Craig-type conditions and
/// the direct checker on the same model.
pub fn check_craig_app(syn: &Synthesis, n: u32) -> CraigAppReport {
    let ni = n as i32;
    let (eps, k0, c, a, b, f) = (syn.epsilon, syn.kappa0, syn.c, syn.a, syn.b, syn.f);
    let root = (2.0 * eps).sqrt();
    let nf = n as f64;
    // log of (1 + cⁿm²ⁿ)
    let lw = move |m: u64| (c.powi(ni) * (m as f64).powi(2 * ni)).ln_1p();
    // log Cₘ bound: explicit for m = 1, 2; F·exp(F log m log log m) otherwise
    let log_c = |m: u64| {
        if m < 3 {
            syn.c_m.get(m as usize - 1).map_or(f64::INFINITY, |x| x.ln())
        } else {
            f.ln() + f * log_loglog(m)
        }
    };
    let mut chain = Vec::new();
    let to_bound = |condition, log: Option<f64>, note: &str| ChainBound {
        condition,
        value: log.map(f64::exp),
        log10: log.map(|l| l / std::f64::consts::LN_10),
        note: note.to_string(),
    };

    // Σ γ^½(1+ηⁿ)^½ ≤ √(2ε)Σ e^{−κ₀m/4}(1 + c^{n/2}mⁿ)
    let series = Envelope::new(1.0, 0.0, 0.25 * k0)
        .sum_from(1)
        .zip(Envelope::new(c.powf(0.5 * nf), nf, 0.25 * k0).sum_from(1))
        .map(|(x, y)| root * (x + y));
    chain.push(to_bound(
        CraigCondition::RootMoment,
        series.map(f64::ln),
        if series.is_some() { "geometric comparison series" } else { "comparison series diverges (no decay)" },
    ));

    // Σ_{k≠m} γₖ^½/ηₘₖ ≤ (√(2ε)/a)·S_b·(1 + mᵇ), S_b = Σ kᵇe^{−κ₀k/4}
    let s_b = Envelope::new(1.0, b, 0.25 * k0).sum_from(1);
    let weighted_log = |m: u64| root.ln() + log_c(m) - 0.25 * k0 * m as f64 + 1.5 * lw(m);
    let interaction = s_b.and_then(|s| {
        log_sup(syn, 3.0 * nf + b, |m| weighted_log(m) + (m as f64).powf(b).ln_1p())
            .map(|l| l + (root * s / a).ln())
    });
    chain.push(to_bound(
        CraigCondition::Interaction,
        interaction,
        if interaction.is_some() { "sup of product bound" } else { "supremum not attained (no decay)" },
    ));
    let base = log_sup(syn, 2.0 * nf + b, |m| {
        (2.0 * eps / a).ln() + log_c(m) - 0.5 * k0 * m as f64 + lw(m) + b * (m as f64).ln()
    });
    chain.push(to_bound(
        CraigCondition::BaseDistance,
        base,
        if base.is_some() { "sup of label bound" } else { "supremum not attained (no decay)" },
    ));
    let weighted = log_sup(syn, 3.0 * nf, weighted_log);
    chain.push(to_bound(
        CraigCondition::Weighted,
        weighted,
        if weighted.is_some() { "sup of label bound" } else { "supremum not attained (no decay)" },
    ));
    let chain_pass = chain.iter().all(|b| b.value.is_some());
    let direct = check_craig(&syn.model, n);
    let pass = chain_pass && direct.pass;
    CraigAppReport { n, chain, chain_pass, direct, pass }
}
