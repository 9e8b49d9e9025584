//! Spectral sets `S = [Ē, ∞) \ ∪ (E⁻ⱼ, E⁺ⱼ)`: gap geometry, tail models for
//! infinitely many gaps, the weights `Cⱼ`, and the Craig-type condition checker.
//!
//! Gaps are stored in energy order and addressed by zero-based position in
//! the Rust API. Reports and file formats use 1-based labels.

mod craig;
mod envelope;

pub use craig::{
    c_j, check_craig, metric_weight, Bounded, ConditionReport, ConditionStatus, CraigCondition, CraigReport,
};
pub(crate) use craig::{moment_envelope as moment_envelope_for, Geometry};
pub use envelope::Envelope;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An open gap `(lower, upper)` in the spectrum.
///
/// The length is kept separately so gaps narrower than the spacing of floats
/// near `lower` keep their exact size.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gap {
    pub lower: f64,
    pub upper: f64,
    length: f64,
}

impl Gap {
    pub fn new(lower: f64, upper: f64) -> Self {
        Self { lower, upper, length: upper - lower }
    }

    pub fn with_length(lower: f64, length: f64) -> Self {
        Self { lower, upper: lower + length, length }
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    /// Distance between two gaps (zero if they intersect).
    pub fn distance(&self, other: &Gap) -> f64 {
        if self.upper <= other.lower {
            other.lower - self.upper
        } else if other.upper <= self.lower {
            self.lower - other.upper
        } else {
            0.0
        }
    }

    pub fn contains_closed(&self, e: f64) -> bool {
        e >= self.lower && e <= self.upper
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lower + self.upper)
    }
}

/// Gap-length law of a tail family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DecayLaw {
    /// `γₖ = A·e^(−rate·k)`
    Exponential { amplitude: f64, rate: f64 },
    /// `γₖ = A·k^(−exponent)`
    Power { amplitude: f64, exponent: f64 },
}

/// Which point of a tail gap sits at `Ē + c·k^d`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Anchor {
    #[default]
    Lower,
    Center,
}

/// Position law `Ē + c·k^d` for tail gap `k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PositionLaw {
    pub coefficient: f64,
    pub exponent: f64,
    pub anchor: Anchor,
}

/// Parametric description of the gaps that are not listed explicitly.
///
/// Tail gaps carry labels `start, start+1, …` and sit above every explicit gap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailModel {
    pub decay: DecayLaw,
    pub position: PositionLaw,
    pub start: u64,
}

impl TailModel {
    pub fn gamma(&self, k: u64) -> f64 {
        let k = k as f64;
        match self.decay {
            DecayLaw::Exponential { amplitude, rate } => amplitude * (-rate * k).exp(),
            DecayLaw::Power { amplitude, exponent } => amplitude * k.powf(-exponent),
        }
    }

    /// Largest tail gap length (the families are non-increasing).
    pub fn gamma_sup(&self) -> f64 {
        self.gamma(self.start)
    }

    fn anchor_offset(&self) -> f64 {
        match self.position.anchor {
            Anchor::Lower => 0.0,
            Anchor::Center => 0.5,
        }
    }

    /// The gap with label `k` above base energy `e_low`.
    pub fn gap(&self, e_low: f64, k: u64) -> Gap {
        let g = self.gamma(k);
        let p = self.position.coefficient * (k as f64).powf(self.position.exponent);
        let lower = e_low + p - self.anchor_offset() * g;
        Gap::with_length(lower, g)
    }

    /// Upper envelope of `γₖ`.
    pub fn gamma_envelope(&self) -> Envelope {
        match self.decay {
            DecayLaw::Exponential { amplitude, rate } => Envelope::new(amplitude, 0.0, rate),
            DecayLaw::Power { amplitude, exponent } => Envelope::new(amplitude, -exponent, 0.0),
        }
    }

    /// `c − (offset)·γ_sup`: lower bound on `ηₖ,₀ / k^d` for every tail label.
    pub(crate) fn eta0_lower_coefficient(&self) -> f64 {
        self.position.coefficient - self.anchor_offset() * self.gamma_sup()
    }

    /// Lower bound on the distance between tail gaps per unit label difference.
    pub(crate) fn spacing_lower(&self) -> f64 {
        self.position.coefficient - self.gamma_sup()
    }

    fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidTail(m.to_string()));
        match self.decay {
            DecayLaw::Exponential { amplitude, rate } => {
                if !(amplitude > 0.0 && amplitude.is_finite()) {
                    return bad("amplitude must be positive");
                }
                if !(rate >= 0.0 && rate.is_finite()) {
                    return bad("exponential rate must be non-negative");
                }
            }
            DecayLaw::Power { amplitude, exponent } => {
                if !(amplitude > 0.0 && amplitude.is_finite()) {
                    return bad("amplitude must be positive");
                }
                if !(exponent > 0.0 && exponent.is_finite()) {
                    return bad("power exponent must be positive");
                }
            }
        }
        let pos = self.position;
        if !(pos.coefficient > 0.0 && pos.coefficient.is_finite()) {
            return bad("position coefficient must be positive");
        }
        if !(pos.exponent >= 1.0 && pos.exponent.is_finite()) {
            return bad("position exponent must be at least 1");
        }
        if self.start == 0 {
            return bad("tail labels start at 1");
        }
        if self.spacing_lower() <= 0.0 {
            return bad("position coefficient must exceed the largest tail gap length");
        }
        Ok(())
    }
}

/// A validated spectral set.
#[derive(Debug, Clone, PartialEq)]
pub struct GapSet {
    e_low: f64,
    gaps: Vec<Gap>,
    tail: Option<TailModel>,
}

impl GapSet {
    /// Validates raw input: sorts gaps, rejects empty, overlapping or touching
    /// gaps and gaps starting below `e_low`.
    pub fn new(e_low: f64, raw: &[(f64, f64)], tail: Option<TailModel>) -> Result<Self> {
        if !e_low.is_finite() {
            return Err(Error::NonFinite("e_low"));
        }
        let mut gaps = Vec::with_capacity(raw.len());
        for (i, &(lower, upper)) in raw.iter().enumerate() {
            if !lower.is_finite() || !upper.is_finite() {
                return Err(Error::NonFinite("gap edge"));
            }
            if lower >= upper {
                return Err(Error::EmptyGap { index: i + 1, lower, upper });
            }
            if lower < e_low {
                return Err(Error::GapBelowBase { index: i + 1, lower, e_low });
            }
            gaps.push((i + 1, Gap::new(lower, upper)));
        }
        gaps.sort_by(|a, b| a.1.lower.total_cmp(&b.1.lower));
        for w in gaps.windows(2) {
            if w[1].1.lower <= w[0].1.upper {
                let (a, b) = (w[0].0.min(w[1].0), w[0].0.max(w[1].0));
                return Err(Error::OverlappingGaps { first: a, second: b });
            }
        }
        let gaps: Vec<Gap> = gaps.into_iter().map(|(_, g)| g).collect();
        if let Some(t) = &tail {
            t.validate()?;
            let first = t.gap(e_low, t.start);
            let top = gaps.last().map_or(e_low, |g| g.upper);
            if first.lower <= top {
                return Err(Error::InvalidTail(format!(
                    "first tail gap ({}, {}) is not above the explicit gaps",
                    first.lower, first.upper
                )));
            }
        }
        Ok(Self { e_low, gaps, tail })
    }

    /// A set with finitely many gaps.
    pub fn finite(e_low: f64, raw: &[(f64, f64)]) -> Result<Self> {
        Self::new(e_low, raw, None)
    }

    pub fn e_low(&self) -> f64 {
        self.e_low
    }

    pub fn gaps(&self) -> &[Gap] {
        &self.gaps
    }

    pub fn gap(&self, j: usize) -> Result<&Gap> {
        self.gaps.get(j).ok_or(Error::IndexOutOfRange { index: j, count: self.gaps.len() })
    }

    pub fn tail(&self) -> Option<&TailModel> {
        self.tail.as_ref()
    }

    /// Number of explicit gaps.
    pub fn len(&self) -> usize {
        self.gaps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gaps.is_empty()
    }

    pub fn is_finite_gap(&self) -> bool {
        self.tail.is_none()
    }

    /// `γⱼ`
    pub fn gamma(&self, j: usize) -> f64 {
        self.gaps[j].length()
    }

    /// `ηⱼ,₀ = dist(Ē, gap j)`
    pub fn eta0(&self, j: usize) -> f64 {
        self.gaps[j].lower - self.e_low
    }

    /// `ηⱼ,ₖ = dist(gap j, gap k)`
    pub fn eta(&self, j: usize, k: usize) -> f64 {
        self.gaps[j].distance(&self.gaps[k])
    }

    /// Highest explicit upper edge, or `Ē` when there are no explicit gaps.
    pub(crate) fn explicit_top(&self) -> f64 {
        self.gaps.last().map_or(self.e_low, |g| g.upper)
    }

    /// Copy of this set with the next `count` tail gaps listed explicitly.
    pub fn materialize(&self, count: u64) -> GapSet {
        let Some(tail) = self.tail else {
            return self.clone();
        };
        let mut gaps = self.gaps.clone();
        for k in tail.start..tail.start + count {
            gaps.push(tail.gap(self.e_low, k));
        }
        GapSet { e_low: self.e_low, gaps, tail: Some(TailModel { start: tail.start + count, ..tail }) }
    }

    /// Is `e` in the spectrum?
    pub fn contains_energy(&self, e: f64) -> bool {
        if e < self.e_low {
            return false;
        }
        if self.gaps.iter().any(|g| e > g.lower && e < g.upper) {
            return false;
        }
        if let Some(t) = &self.tail {
            // tail gaps are increasing; scan until they pass e
            let mut k = t.start;
            loop {
                let g = t.gap(self.e_low, k);
                if g.lower >= e {
                    break;
                }
                if e < g.upper {
                    return false;
                }
                k += 1;
            }
        }
        true
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: SpectrumFile = serde_json::from_str(text)?;
        file.into_gapset()
    }

    pub fn to_json(&self) -> String {
        let file = SpectrumFile::from(self);
        serde_json::to_string_pretty(&file).expect("spectrum file serializes")
    }
}

/// On-disk spectrum document.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectrumFile {
    pub e_low: f64,
    pub gaps: Vec<[f64; 2]>,
    #[serde(default)]
    pub tail: Option<TailFile>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TailFile {
    pub kind: TailKind,
    #[serde(rename = "A")]
    pub amplitude: f64,
    pub rate: f64,
    pub position: PositionFile,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TailKind {
    Exp,
    Pow,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PositionFile {
    pub kind: PositionKind,
    pub c: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exponent: Option<f64>,
    #[serde(default, skip_serializing_if = "is_lower")]
    pub anchor: Anchor,
}

fn is_lower(a: &Anchor) -> bool {
    *a == Anchor::Lower
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PositionKind {
    Quadratic,
    Power,
}

impl SpectrumFile {
    pub fn into_gapset(self) -> Result<GapSet> {
        let raw: Vec<(f64, f64)> = self.gaps.iter().map(|g| (g[0], g[1])).collect();
        let tail = match self.tail {
            None => None,
            Some(t) => {
                let decay = match t.kind {
                    TailKind::Exp => DecayLaw::Exponential { amplitude: t.amplitude, rate: t.rate },
                    TailKind::Pow => DecayLaw::Power { amplitude: t.amplitude, exponent: t.rate },
                };
                let exponent = match (t.position.kind, t.position.exponent) {
                    (PositionKind::Quadratic, None) => 2.0,
                    (PositionKind::Quadratic, Some(_)) => {
                        return Err(Error::InvalidTail(
                            "quadratic position law takes no exponent".into(),
                        ))
                    }
                    (PositionKind::Power, Some(d)) => d,
                    (PositionKind::Power, None) => {
                        return Err(Error::InvalidTail("power position law needs an exponent".into()))
                    }
                };
                Some(TailModel {
                    decay,
                    position: PositionLaw {
                        coefficient: t.position.c,
                        exponent,
                        anchor: t.position.anchor,
                    },
                    start: t.start.unwrap_or(raw.len() as u64 + 1),
                })
            }
        };
        GapSet::new(self.e_low, &raw, tail)
    }
}

impl From<&GapSet> for SpectrumFile {
    fn from(s: &GapSet) -> Self {
        let tail = s.tail.map(|t| {
            let (kind, amplitude, rate) = match t.decay {
                DecayLaw::Exponential { amplitude, rate } => (TailKind::Exp, amplitude, rate),
                DecayLaw::Power { amplitude, exponent } => (TailKind::Pow, amplitude, exponent),
            };
            let (pkind, exponent) = if t.position.exponent == 2.0 {
                (PositionKind::Quadratic, None)
            } else {
                (PositionKind::Power, Some(t.position.exponent))
            };
            TailFile {
                kind,
                amplitude,
                rate,
                position: PositionFile {
                    kind: pkind,
                    c: t.position.coefficient,
                    exponent,
                    anchor: t.position.anchor,
                },
                start: Some(t.start),
            }
        });
        SpectrumFile { e_low: s.e_low, gaps: s.gaps.iter().map(|g| [g.lower, g.upper]).collect(), tail }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_gap_geometry() {
        let s = GapSet::finite(0.0, &[(1.0, 2.0)]).unwrap();
        assert_eq!(s.gamma(0), 1.0);
        assert_eq!(s.eta0(0), 1.0);
    }

    #[test]
    fn overlapping_rejected() {
        let err = GapSet::finite(0.0, &[(1.0, 2.0), (1.5, 3.0)]).unwrap_err();
        assert_eq!(err, Error::OverlappingGaps { first: 1, second: 2 });
    }

    #[test]
    fn touching_rejected() {
        assert!(matches!(
            GapSet::finite(0.0, &[(1.0, 2.0), (2.0, 3.0)]),
            Err(Error::OverlappingGaps { .. })
        ));
    }

    #[test]
    fn below_base_rejected() {
        assert!(matches!(GapSet::finite(0.0, &[(-1.0, 0.0)]), Err(Error::GapBelowBase { .. })));
    }

    #[test]
    fn empty_interval_rejected() {
        assert!(matches!(GapSet::finite(0.0, &[(1.0, 1.0)]), Err(Error::EmptyGap { .. })));
    }

    #[test]
    fn gaps_get_sorted() {
        let s = GapSet::finite(0.0, &[(3.0, 4.0), (1.0, 2.0)]).unwrap();
        assert_eq!(s.gaps()[0].lower, 1.0);
        assert_eq!(s.eta(0, 1), 1.0);
        assert_eq!(s.eta(1, 0), 1.0);
    }

    #[test]
    fn json_round_trip_with_tail() {
        let text = r#"{ "e_low": 0.0, "gaps": [[1.0, 1.5]],
            "tail": {"kind": "exp", "A": 0.02, "rate": 0.5,
                     "position": {"kind": "quadratic", "c": 1.0}, "start": 2} }"#;
        let s = GapSet::from_json(text).unwrap();
        let t = s.tail().unwrap();
        assert_eq!(t.start, 2);
        assert_eq!(t.position.exponent, 2.0);
        let again = GapSet::from_json(&s.to_json()).unwrap();
        assert_eq!(s, again);
    }

    #[test]
    fn null_tail_parses() {
        let s = GapSet::from_json(r#"{"e_low": 0, "gaps": [[1,2]], "tail": null}"#).unwrap();
        assert!(s.is_finite_gap());
    }

    #[test]
    fn tail_below_explicit_rejected() {
        let text = r#"{ "e_low": 0.0, "gaps": [[1.0, 5.0]],
            "tail": {"kind": "exp", "A": 0.02, "rate": 0.5,
                     "position": {"kind": "quadratic", "c": 1.0}} }"#;
        assert!(matches!(GapSet::from_json(text), Err(Error::InvalidTail(_))));
    }

    #[test]
    fn contains_energy_respects_tail() {
        let text = r#"{ "e_low": 0.0, "gaps": [],
            "tail": {"kind": "exp", "A": 0.5, "rate": 0.1,
                     "position": {"kind": "quadratic", "c": 1.0}} }"#;
        let s = GapSet::from_json(text).unwrap();
        assert!(!s.contains_energy(4.1));
        assert!(s.contains_energy(3.0));
        assert!(!s.contains_energy(-1.0));
    }

    #[test]
    fn materialize_moves_tail_labels() {
        let text = r#"{ "e_low": 0.0, "gaps": [],
            "tail": {"kind": "pow", "A": 0.1, "rate": 2.0,
                     "position": {"kind": "quadratic", "c": 1.0}} }"#;
        let s = GapSet::from_json(text).unwrap();
        let m = s.materialize(3);
        assert_eq!(m.len(), 3);
        assert_eq!(m.tail().unwrap().start, 4);
        assert!((m.gaps()[2].lower - 9.0).abs() < 1e-15);
    }
}
