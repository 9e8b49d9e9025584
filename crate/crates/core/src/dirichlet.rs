//! Angular coordinates on the torus of Dirichlet data.
//!
//! Angle `φⱼ` encodes the Dirichlet eigenvalue `μⱼ = Eⱼ⁻ + γⱼcos²(φⱼ/2)` and the
//! sheet `σⱼ = −sgn sin φⱼ`. At gap edges (`φⱼ ∈ {0, π}`) the sheet is 0.

use std::f64::consts::{PI, TAU};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::{arc_distance, wrap_angle};
use crate::spectrum::{metric_weight, moment_envelope_for, GapSet};

/// One angle per explicit gap, each in `[0, 2π)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DirichletState {
    phi: Vec<f64>,
}

impl DirichletState {
    /// Normalizes angles and checks the length against the gap set.
    pub fn new(set: &GapSet, phi: Vec<f64>) -> Result<Self> {
        if phi.len() != set.len() {
            return Err(Error::StateLength { expected: set.len(), got: phi.len() });
        }
        Self::from_angles(phi)
    }

    /// Normalizes angles without reference to a gap set.
    pub fn from_angles(phi: Vec<f64>) -> Result<Self> {
        if phi.iter().any(|p| !p.is_finite()) {
            return Err(Error::NonFinite("angle"));
        }
        Ok(Self { phi: phi.into_iter().map(wrap_angle).collect() })
    }

    pub fn uniform(set: &GapSet, phi: f64) -> Result<Self> {
        Self::new(set, vec![phi; set.len()])
    }

    pub fn angles(&self) -> &[f64] {
        &self.phi
    }

    pub fn len(&self) -> usize {
        self.phi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phi.is_empty()
    }

    pub fn check(&self, set: &GapSet) -> Result<()> {
        if self.phi.len() != set.len() {
            return Err(Error::StateLength { expected: set.len(), got: self.phi.len() });
        }
        Ok(())
    }

    /// Dirichlet eigenvalues `μⱼ`.
    pub fn mus(&self, set: &GapSet) -> Vec<f64> {
        set.gaps().iter().zip(&self.phi).map(|(g, &p)| g.lower + g.length() * cos2_half(p)).collect()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let phi: Vec<f64> = serde_json::from_str(text)?;
        Self::from_angles(phi)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.phi).expect("angles serialize")
    }
}

fn cos2_half(phi: f64) -> f64 {
    let c = (0.5 * phi).cos();
    c * c
}

/// `μ = E⁻ + γcos²(φ/2)`.
pub fn mu_of_phi(set: &GapSet, j: usize, phi: f64) -> Result<f64> {
    let g = set.gap(j)?;
    Ok(g.lower + g.length() * cos2_half(phi))
}

/// `σ = −sgn sin φ`, and 0 at the gap edges `φ ∈ {0, π}`.
pub fn sigma_of_phi(phi: f64) -> i8 {
    let p = wrap_angle(phi);
    if p == 0.0 || p == PI {
        return 0;
    }
    if p < PI {
        -1
    } else {
        1
    }
}

/// Inverse of `(mu_of_phi, sigma_of_phi)`; `sigma` is ignored at the edges.
pub fn phi_of_mu_sigma(set: &GapSet, j: usize, mu: f64, sigma: i8) -> Result<f64> {
    let g = set.gap(j)?;
    if !(mu >= g.lower && mu <= g.upper) {
        return Err(Error::OutsideGap { mu, lower: g.lower, upper: g.upper });
    }
    if mu == g.upper {
        return Ok(0.0);
    }
    if mu == g.lower {
        return Ok(PI);
    }
    let c = ((mu - g.lower) / g.length()).clamp(0.0, 1.0);
    let phi0 = 2.0 * c.sqrt().acos();
    match sigma {
        -1 => Ok(phi0),
        1 => Ok(wrap_angle(TAU - phi0)),
        _ => Err(Error::InvalidParameter("interior Dirichlet point needs sigma = ±1".into())),
    }
}

/// Distance in the weighted sup metric.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Distance {
    /// Sup over explicit gaps of `wⱼ‖φⱼ − ψⱼ‖`.
    pub value: f64,
    /// `π·sup wₖ` over tail gaps (unlisted angles may differ arbitrarily); 0 without a tail.
    pub tail_bound: f64,
}

/// Weighted sup distance `sup_j wⱼ‖φⱼ − ψⱼ‖_𝕋` with `wⱼ = γⱼ^½(1+ηⱼ,₀ⁿ)^½`.
pub fn dist(set: &GapSet, n: u32, a: &DirichletState, b: &DirichletState) -> Result<Distance> {
    a.check(set)?;
    b.check(set)?;
    let mut value = 0.0f64;
    for j in 0..set.len() {
        let w = metric_weight(set, n, j)?;
        value = value.max(w * arc_distance(a.phi[j], b.phi[j]));
    }
    let tail_bound = match set.tail() {
        None => 0.0,
        Some(t) => {
            let env = t.gamma_envelope().mul(moment_envelope_for(t, n)).powf(0.5);
            PI * env.sup_from(t.start).unwrap_or(f64::INFINITY)
        }
    };
    Ok(Distance { value, tail_bound })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one_gap() -> GapSet {
        GapSet::finite(0.0, &[(1.0, 2.0)]).unwrap()
    }

    #[test]
    fn mu_examples() {
        let s = one_gap();
        assert_eq!(mu_of_phi(&s, 0, 0.0).unwrap(), 2.0);
        assert!((mu_of_phi(&s, 0, PI).unwrap() - 1.0).abs() < 1e-15);
        assert!((mu_of_phi(&s, 0, PI / 2.0).unwrap() - 1.5).abs() < 1e-15);
    }

    #[test]
    fn sigma_examples() {
        assert_eq!(sigma_of_phi(PI / 2.0), -1);
        assert_eq!(sigma_of_phi(3.0 * PI / 2.0), 1);
        assert_eq!(sigma_of_phi(0.0), 0);
        assert_eq!(sigma_of_phi(PI), 0);
    }

    #[test]
    fn inverse_examples() {
        let s = one_gap();
        assert!((phi_of_mu_sigma(&s, 0, 1.5, -1).unwrap() - PI / 2.0).abs() < 1e-15);
        assert_eq!(phi_of_mu_sigma(&s, 0, 2.0, 1).unwrap(), 0.0);
        assert!((phi_of_mu_sigma(&s, 0, 1.5, 1).unwrap() - 1.5 * PI).abs() < 1e-15);
        assert!(matches!(phi_of_mu_sigma(&s, 0, 2.5, 1), Err(Error::OutsideGap { .. })));
    }

    #[test]
    fn distance_examples() {
        let s = one_gap();
        let a = DirichletState::new(&s, vec![0.0]).unwrap();
        let b = DirichletState::new(&s, vec![PI]).unwrap();
        assert_eq!(dist(&s, 1, &a, &a).unwrap().value, 0.0);
        let d = dist(&s, 1, &a, &b).unwrap();
        assert!((d.value - 2f64.sqrt() * PI).abs() < 1e-14);
        assert_eq!(d.tail_bound, 0.0);
    }

    #[test]
    fn length_mismatch() {
        assert!(matches!(
            DirichletState::new(&one_gap(), vec![0.0, 1.0]),
            Err(Error::StateLength { expected: 1, got: 2 })
        ));
    }

    #[test]
    fn json_round_trip() {
        let s = DirichletState::from_json("[0.5, 7.0]").unwrap();
        assert!((s.angles()[1] - (7.0 - TAU)).abs() < 1e-15);
        assert_eq!(DirichletState::from_json(&s.to_json()).unwrap(), s);
    }
}
