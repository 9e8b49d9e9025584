//! Dubrovin-type vector fields `Ψ` (translation) and `Ξ` (n-th hierarchy flow)
//! on the torus of Dirichlet data, with the bounds behind their Lipschitz estimate.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::dirichlet::DirichletState;
use crate::error::{Error, Result};
use crate::moments::{bound_constants, r_values, BoundConstants};
use crate::numeric::CompensatedSum;
use crate::spectrum::{check_craig, moment_envelope_for, CraigCondition, Envelope, GapSet, Geometry};

/// Components indexed by explicit gap, each with a bound on the effect of unlisted gaps.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VectorFieldValue {
    pub values: Vec<f64>,
    pub bounds: Vec<f64>,
}

/// `log(Ψⱼ/2)` contributions; `μⱼ = Ē` gives `−∞`.
fn log_half_psi(set: &GapSet, mus: &[f64], j: usize) -> f64 {
    let mu = mus[j];
    let mut s = CompensatedSum::new();
    s.add(0.5 * (mu - set.e_low()).ln());
    for (l, g) in set.gaps().iter().enumerate() {
        if l == j {
            continue;
        }
        let d = mus[l] - mu;
        s.add(0.5 * ((g.lower - mu) / d).ln());
        s.add(0.5 * ((g.upper - mu) / d).ln());
    }
    s.value()
}

/// `Ψⱼ` at Dirichlet points `mus` (explicit gaps only).
pub(crate) fn psi_at(set: &GapSet, mus: &[f64]) -> Vec<f64> {
    (0..set.len()).map(|j| 2.0 * log_half_psi(set, mus, j).exp()).collect()
}

/// `Σ_{ℓ=0}^n R_{n−ℓ} μ^ℓ` from `rs = [R₀, …, Rₙ]`.
pub(crate) fn xi_factor(rs: &[f64], n: usize, mu: f64) -> f64 {
    (0..=n).rev().fold(0.0, |acc, l| acc * mu + rs[n - l])
}

/// `Ξⱼ` at Dirichlet points `mus` (explicit gaps only).
pub(crate) fn xi_at(set: &GapSet, n: usize, mus: &[f64]) -> Vec<f64> {
    let rs = r_values(set, mus, n);
    psi_at(set, mus).into_iter().zip(mus).map(|(p, &mu)| xi_factor(&rs, n, mu) * p).collect()
}

/// Relative effect of the unlisted tail on each `Ψⱼ`.
pub(crate) fn psi_tail_factors(set: &GapSet) -> Result<Vec<f64>> {
    let Some(t) = set.tail() else {
        return Ok(vec![0.0; set.len()]);
    };
    let total = t
        .gamma_envelope()
        .sum_from(t.start)
        .ok_or_else(|| Error::Divergent("tail gap lengths are not summable".into()))?;
    let first = t.gap(set.e_low(), t.start).lower;
    Ok(set.gaps().iter().map(|g| (0.5 * total / (first - g.upper)).exp_m1()).collect())
}

/// The translation field `Ψⱼ = 2·sqrt((μⱼ−Ē)∏_{ℓ≠j}(Eₗ⁻−μⱼ)(Eₗ⁺−μⱼ)/(μₗ−μⱼ)²)`.
pub fn psi(set: &GapSet, state: &DirichletState) -> Result<VectorFieldValue> {
    state.check(set)?;
    let values = psi_at(set, &state.mus(set));
    let rel = psi_tail_factors(set)?;
    let bounds = values.iter().zip(&rel).map(|(v, r)| v * r).collect();
    Ok(VectorFieldValue { values, bounds })
}

/// The hierarchy field `Ξⱼ = (Σ_{ℓ=0}^n R_{n−ℓ}μⱼ^ℓ)Ψⱼ`.
pub fn xi(set: &GapSet, n: u32, state: &DirichletState) -> Result<VectorFieldValue> {
    let p = psi(set, state)?;
    let nn = n as usize;
    let mus = state.mus(set);
    let rs = r_values(set, &mus, nn);
    let r_err: Vec<f64> = (0..=nn)
        .map(|m| crate::moments::r_m(set, state, m).map(|b| b.tail_bound))
        .collect::<Result<_>>()?;
    let mut values = Vec::with_capacity(set.len());
    let mut bounds = Vec::with_capacity(set.len());
    for (j, &mu) in mus.iter().enumerate() {
        let f = xi_factor(&rs, nn, mu);
        let f_err: f64 = (0..=nn).map(|l| r_err[nn - l] * mu.abs().powi(l as i32)).sum();
        values.push(f * p.values[j]);
        bounds.push(f.abs() * p.bounds[j] + f_err * (p.values[j] + p.bounds[j]));
    }
    Ok(VectorFieldValue { values, bounds })
}

/// Constants shared by the Jacobian and Lipschitz bounds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LipschitzConstants {
    pub moments: BoundConstants,
    pub m1_tilde: f64,
    pub m3_tilde: f64,
    pub m_tilde: f64,
    pub gamma_sup: f64,
}

fn constants(set: &GapSet, n: u32) -> Result<LipschitzConstants> {
    if n == 0 {
        return Err(Error::InvalidParameter(
            "the Jacobian and Lipschitz bounds are defined for n ≥ 1".into(),
        ));
    }
    let b = bound_constants(set, n)?;
    let ni = n as i32;
    let e = 1.0 + set.e_low().abs().powi(ni);
    let gamma_sup = (0..set.len())
        .map(|j| set.gamma(j))
        .chain(set.tail().map(|t| t.gamma_sup()))
        .fold(0.0f64, f64::max);
    let m1_tilde = 2f64.powi(ni - 1) * (n + 1) as f64 * b.m1 * e;
    let m3_tilde = 2f64.powi(ni + 2) * n as f64 * b.m3 * e;
    let m_tilde = 2f64.powi(2 * ni - 2) * m1_tilde.max(m3_tilde) * (1.0 + gamma_sup.powi(ni)).powi(2);
    Ok(LipschitzConstants { moments: b, m1_tilde, m3_tilde, m_tilde, gamma_sup })
}

/// Entrywise bounds `|∂Ξⱼ/∂φₖ| ≤ B[j][k]` over explicit gaps.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JacobianBounds {
    pub matrix: Vec<Vec<f64>>,
    pub constants: LipschitzConstants,
}

/// Upper bounds on `Cⱼ` for explicit gaps, including the unlisted tail.
fn c_upper(geo: &Geometry, count: usize) -> Result<Vec<f64>> {
    (0..count).map(|j| geo.row(j).map(|r| r.c_upper())).collect()
}

/// Extra diagonal term from differentiating `μⱼ^n` inside the `Ξ` prefactor:
/// `n·Cⱼγⱼ(|Ē|+ηⱼ,₀+γⱼ)^{n−1}`.
fn leading_power_term(n: u32, c: f64, gamma: f64, eta0: f64, e_low: f64) -> f64 {
    n as f64 * c * gamma * (e_low.abs() + eta0 + gamma).powi(n as i32 - 1)
}

pub fn jacobian_bounds(set: &GapSet, n: u32) -> Result<JacobianBounds> {
    let k = constants(set, n)?;
    let geo = Geometry::auto(set);
    let count = set.len();
    let cs = c_upper(&geo, count)?;
    let ni = n as i32;
    let mt = k.m_tilde;
    let mut matrix = vec![vec![0.0; count]; count];
    for j in 0..count {
        let gj = set.gamma(j);
        let ej = set.eta0(j);
        let wj = 1.0 + ej.powi(ni);
        for (l, entry) in matrix[j].iter_mut().enumerate() {
            if l == j {
                let row = geo.row(j)?;
                *entry = if ej > 0.0 {
                    2.0 * n as f64 * mt * cs[j] * gj * wj * (1.0 + 1.0 / ej + row.t)
                        + leading_power_term(n, cs[j], gj, ej, set.e_low())
                } else {
                    f64::INFINITY
                };
            } else {
                let gl = set.gamma(l);
                let el = set.eta0(l);
                *entry = mt * cs[j] * wj * (gl / set.eta(j, l) + gl * (1.0 + el.powi(ni)));
            }
        }
    }
    Ok(JacobianBounds { matrix, constants: k })
}

/// `L₁ + L₂` with its two parts.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LipschitzEstimate {
    pub l1: f64,
    pub l2: f64,
    pub total: f64,
    pub constants: LipschitzConstants,
}

/// Lipschitz constant of `Ξ` in the weighted sup metric.
pub fn lipschitz_estimate(set: &GapSet, n: u32) -> Result<LipschitzEstimate> {
    let report = check_craig(set, n);
    if !report.pass {
        let failing: Vec<&str> = report
            .conditions
            .iter()
            .filter(|c| !c.status.is_finite())
            .map(|c| c.condition.label())
            .collect();
        return Err(Error::Divergent(format!("Craig-type conditions fail: {}", failing.join(", "))));
    }
    let k = constants(set, n)?;
    let geo = Geometry::auto(set);
    let ni = n as i32;
    let mt = k.m_tilde;
    let upper = |c: CraigCondition, is_sum: bool| report.status(c).upper(is_sum).expect("finite");
    let tail = |c: CraigCondition| match report.status(c) {
        crate::spectrum::ConditionStatus::Finite { tail_bound, .. } => *tail_bound,
        _ => unreachable!("report passed"),
    };

    // explicit sups over listed gaps
    let mut interaction = 0.0f64;
    let mut plain = 0.0f64;
    let mut squared = 0.0f64;
    let mut leading = 0.0f64;
    for j in 0..geo.len() {
        let row = geo.row(j)?;
        let c = row.c_upper();
        let g = geo.gamma(j);
        let e0 = geo.eta0(j);
        let w = 1.0 + e0.powi(ni);
        let mut s = CompensatedSum::new();
        for l in 0..geo.len() {
            if l != j {
                let wl = 1.0 + geo.eta0(l).powi(ni);
                s.add(geo.gamma(l).sqrt() / (geo.gaps[j].distance(&geo.gaps[l]) * wl.sqrt()));
            }
        }
        if let Some(r) = geo.rest {
            let d = r.first_lower - geo.gaps[j].upper;
            s.add(r.sqrt_gamma_sum.unwrap_or(f64::INFINITY) / d);
        }
        interaction = interaction.max(c * w.powf(1.5) * g.sqrt() * s.value());
        plain = plain.max(c * g * w);
        squared = squared.max(c * w * g * row.v);
        leading = leading.max(leading_power_term(n, c, g, e0, set.e_low()));
    }
    // tail gaps that were not listed
    if let (Some(r), Some(tc)) = (geo.rest, geo.tail_constants) {
        let t = r.tail;
        let gamma = t.gamma_envelope();
        let moment = moment_envelope_for(&t, n);
        let sup = |e: Envelope| e.sup_from(t.start).unwrap_or(f64::INFINITY);
        interaction = interaction.max(tail(CraigCondition::Interaction));
        plain = plain.max(sup(tc.c_env.mul(gamma).mul(moment)));
        squared = squared.max(sup(tc.c_env.mul(moment).mul(gamma).scale(tc.v)));
        let span = set.e_low().abs() + t.position.coefficient + t.gamma_sup();
        let lead = tc
            .c_env
            .mul(gamma)
            .mul(Envelope::new(n as f64 * span.powi(ni - 1), t.position.exponent * (ni - 1) as f64, 0.0));
        leading = leading.max(sup(lead));
    }
    let l1 = mt * interaction
        + mt * upper(CraigCondition::RootMoment, true) * upper(CraigCondition::Weighted, false);
    let l2 = 2.0 * n as f64 * mt * (plain + upper(CraigCondition::BaseDistance, false) + squared) + leading;
    if !(l1.is_finite() && l2.is_finite()) {
        return Err(Error::Divergent("Lipschitz estimate is not finite".into()));
    }
    Ok(LipschitzEstimate { l1, l2, total: l1 + l2, constants: k })
}

/// Outcome of comparing sampled derivatives of `Ξ` with the analytic bounds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundSampleReport {
    pub n: u32,
    pub samples: usize,
    pub seed: u64,
    /// Entries with `|∂Ξⱼ/∂φₖ|` (central difference) above `Bⱼₖ`.
    pub jacobian_violations: usize,
    /// Largest `|∂Ξⱼ/∂φₖ| / Bⱼₖ` seen.
    pub jacobian_ratio: f64,
    /// Pairs whose weighted difference quotient exceeds `L₁+L₂`.
    pub lipschitz_violations: usize,
    /// Largest difference quotient over `L₁+L₂`.
    pub lipschitz_ratio: f64,
    pub lipschitz: f64,
    pub pass: bool,
}

/// Samples `samples` uniform states (seeded) and checks the central-difference
/// Jacobian of `Ξ` (step `h`) against [`jacobian_bounds`], and the quotient
/// `sup wⱼ|Ξⱼ(φ)−Ξⱼ(ψ)| / dist(φ,ψ)` over independent pairs against
/// [`lipschitz_estimate`]. Explicit gaps only.
pub fn sample_bounds(set: &GapSet, n: u32, samples: usize, seed: u64, h: f64) -> Result<BoundSampleReport> {
    if !(h > 0.0 && h < 0.1) {
        return Err(Error::InvalidParameter("difference step must lie in (0, 0.1)".into()));
    }
    let jb = jacobian_bounds(set, n)?;
    let lip = lipschitz_estimate(set, n)?;
    let count = set.len();
    let weights: Vec<f64> = (0..count).map(|j| crate::spectrum::metric_weight(set, n, j)).collect::<Result<_>>()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draw = |rng: &mut ChaCha8Rng| -> Vec<f64> { (0..count).map(|_| rng.gen_range(0.0..2.0 * PI)).collect() };
    let field = |phi: &[f64]| -> Vec<f64> {
        let mus: Vec<f64> = set.gaps().iter().zip(phi).map(|(g, p)| g.midpoint() + 0.5 * g.length() * p.cos()).collect();
        xi_at(set, n as usize, &mus)
    };
    let mut report = BoundSampleReport {
        n,
        samples,
        seed,
        jacobian_violations: 0,
        jacobian_ratio: 0.0,
        lipschitz_violations: 0,
        lipschitz_ratio: 0.0,
        lipschitz: lip.total,
        pass: false,
    };
    for _ in 0..samples {
        let phi = draw(&mut rng);
        for k in 0..count {
            let mut up = phi.clone();
            let mut down = phi.clone();
            up[k] += h;
            down[k] -= h;
            let (fu, fd) = (field(&up), field(&down));
            for j in 0..count {
                let d = ((fu[j] - fd[j]) / (2.0 * h)).abs();
                let r = d / jb.matrix[j][k];
                report.jacobian_ratio = report.jacobian_ratio.max(r);
                if !(d <= jb.matrix[j][k]) {
                    report.jacobian_violations += 1;
                }
            }
        }
        let psi = draw(&mut rng);
        let a = DirichletState::new(set, phi.clone())?;
        let b = DirichletState::new(set, psi.clone())?;
        let d = crate::dirichlet::dist(set, n, &a, &b)?.value;
        if d > 0.0 {
            let (fa, fb) = (field(&phi), field(&psi));
            let num = (0..count).map(|j| weights[j] * (fa[j] - fb[j]).abs()).fold(0.0, f64::max);
            let r = num / d / lip.total;
            report.lipschitz_ratio = report.lipschitz_ratio.max(r);
            if !(r <= 1.0) {
                report.lipschitz_violations += 1;
            }
        }
    }
    report.pass = report.jacobian_violations == 0 && report.lipschitz_violations == 0;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn psi_one_gap() {
        let s = GapSet::finite(0.0, &[(1.0, 2.0)]).unwrap();
        let st = DirichletState::new(&s, vec![FRAC_PI_2]).unwrap();
        let p = psi(&s, &st).unwrap();
        assert!((p.values[0] - 2.0 * 1.5f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn psi_two_gaps() {
        let s = GapSet::finite(0.0, &[(1.0, 2.0), (3.0, 4.0)]).unwrap();
        let st = DirichletState::new(&s, vec![FRAC_PI_2, FRAC_PI_2]).unwrap();
        let p = psi(&s, &st).unwrap();
        assert!((p.values[0] - 2.0 * 1.40625f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn psi_vanishes_at_base() {
        let s = GapSet::finite(0.0, &[(0.0, 1.0)]).unwrap();
        let st = DirichletState::new(&s, vec![std::f64::consts::PI]).unwrap();
        assert!(psi(&s, &st).unwrap().values[0] < 1e-7);
    }

    #[test]
    fn xi_examples() {
        let s = GapSet::finite(0.0, &[(1.0, 2.0)]).unwrap();
        let st = DirichletState::new(&s, vec![FRAC_PI_2]).unwrap();
        assert_eq!(xi(&s, 0, &st).unwrap().values, psi(&s, &st).unwrap().values);
        let x = xi(&s, 1, &st).unwrap();
        assert!((x.values[0] - 1.5 * 2.0 * 1.5f64.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn xi_root_of_prefactor() {
        // n = 1: prefactor μ + R₁ = μ + Q₁/2 with Q₁ = Ē + E⁻ + E⁺ − 2μ
        let s = GapSet::finite(-3.0, &[(1.0, 2.0)]).unwrap();
        // μ + (−3 + 3 − 2μ)/2 = 0 has no interior root; shift base instead
        let st = DirichletState::new(&s, vec![0.3]).unwrap();
        let mu = st.mus(&s)[0];
        let f = mu + (-3.0 + 3.0 - 2.0 * mu) / 2.0;
        let x = xi(&s, 1, &st).unwrap();
        let p = psi(&s, &st).unwrap();
        assert!((x.values[0] - f * p.values[0]).abs() < 1e-14);
    }

    #[test]
    fn bounds_finite_for_finite_sets() {
        let s = GapSet::finite(0.0, &[(1.0, 2.0), (3.0, 3.5)]).unwrap();
        let jb = jacobian_bounds(&s, 1).unwrap();
        assert!(jb.matrix.iter().flatten().all(|v| v.is_finite() && *v > 0.0));
        let l = lipschitz_estimate(&s, 1).unwrap();
        assert!(l.total.is_finite() && l.total > 0.0);
        assert!(lipschitz_estimate(&s, 0).is_err());
    }

    #[test]
    fn sampled_bounds_hold() {
        let s = GapSet::finite(0.0, &[(1.0, 2.0), (3.0, 3.5), (5.0, 5.25)]).unwrap();
        let r = sample_bounds(&s, 1, 50, 7, 1e-5).unwrap();
        assert!(r.pass, "{r:?}");
        assert_eq!(sample_bounds(&s, 1, 50, 7, 1e-5).unwrap(), r);
    }
}
