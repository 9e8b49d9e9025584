//! Weights `Cⱼ`, metric weights and the Craig-type condition checker.

use serde::Serialize;

use super::{Envelope, Gap, GapSet, TailModel};
use crate::error::{Error, Result};
use crate::numeric::CompensatedSum;

/// Cap on how many tail gaps are listed explicitly for a single evaluation.
const MAX_MATERIALIZED: u64 = 1500;

/// Per-gap sums over the other gaps, each an upper bound including the unlisted tail.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Row {
    /// `log Cⱼ` over listed gaps only.
    pub log_c: f64,
    /// Upper bound on the missing part of `log Cⱼ`.
    pub log_c_rest: f64,
    /// `Σ_{k≠j} γₖ^½ / ηⱼₖ`
    pub s: f64,
    /// `Σ_{k≠j} γₖ / (ηⱼₖ(ηⱼₖ+γₖ))`
    pub t: f64,
    /// `Σ_{k≠j} γₖ / ηⱼₖ²`
    pub v: f64,
}

impl Row {
    pub fn c_upper(&self) -> f64 {
        (self.log_c + self.log_c_rest).exp()
    }
}

/// Tail sums beyond the listed gaps.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Remainder {
    pub tail: TailModel,
    pub first_lower: f64,
    pub gamma_sum: Option<f64>,
    pub sqrt_gamma_sum: Option<f64>,
}

/// Label-independent bounds valid for every tail gap of the original set.
#[derive(Debug, Clone, Copy)]
pub(crate) struct TailConstants {
    /// Envelope dominating `Cₖ` on the tail.
    pub c_env: Envelope,
    /// Bound on `Σ_{l≠k} γₗ^½/ηₖₗ`.
    pub s: f64,
    /// Bound on `Σ_{l≠k} γₗ/ηₖₗ²` (and on the `T` sum).
    pub v: f64,
}

/// Listed gaps (explicit plus materialized tail gaps) and what remains.
#[derive(Debug, Clone)]
pub(crate) struct Geometry {
    pub e_low: f64,
    pub gaps: Vec<Gap>,
    pub rest: Option<Remainder>,
    pub tail_constants: Option<TailConstants>,
}

impl Geometry {
    /// Lists `extra` further tail gaps.
    pub fn new(set: &GapSet, extra: u64) -> Geometry {
        let m = set.materialize(extra);
        let rest = m.tail().map(|t| {
            let g = t.gamma_envelope();
            Remainder {
                tail: *t,
                first_lower: t.gap(set.e_low(), t.start).lower,
                gamma_sum: g.sum_from(t.start),
                sqrt_gamma_sum: g.powf(0.5).sum_from(t.start),
            }
        });
        Geometry {
            e_low: set.e_low(),
            gaps: m.gaps().to_vec(),
            rest,
            tail_constants: tail_constants(set),
        }
    }

    /// Lists tail gaps until their lengths are negligible (or a size cap is hit).
    pub fn auto(set: &GapSet) -> Geometry {
        let Some(t) = set.tail() else {
            return Geometry::new(set, 0);
        };
        let scale = set.gaps().iter().map(Gap::length).sum::<f64>().max(t.gamma_sup()).max(1.0);
        let mut extra = 0;
        while extra < MAX_MATERIALIZED && t.gamma(t.start + extra) > 1e-17 * scale {
            extra += 1;
        }
        Geometry::new(set, extra)
    }

    pub fn len(&self) -> usize {
        self.gaps.len()
    }

    pub fn gamma(&self, j: usize) -> f64 {
        self.gaps[j].length()
    }

    pub fn eta0(&self, j: usize) -> f64 {
        self.gaps[j].lower - self.e_low
    }

    /// Distance from gap `j` to every unlisted gap.
    fn rest_distance(&self, j: usize) -> Option<f64> {
        self.rest.map(|r| r.first_lower - self.gaps[j].upper)
    }

    pub fn row(&self, j: usize) -> Result<Row> {
        let gj = self.gaps[j];
        let mut log_c = CompensatedSum::new();
        let mut s = CompensatedSum::new();
        let mut t = CompensatedSum::new();
        let mut v = CompensatedSum::new();
        log_c.add(0.5 * (self.eta0(j) + gj.length()).ln());
        for (l, gl) in self.gaps.iter().enumerate() {
            if l == j {
                continue;
            }
            let eta = gj.distance(gl);
            let gamma = gl.length();
            log_c.add(0.5 * (gamma / eta).ln_1p());
            s.add(gamma.sqrt() / eta);
            t.add(gamma / (eta * (eta + gamma)));
            v.add(gamma / (eta * eta));
        }
        let mut row = Row { log_c: log_c.value(), log_c_rest: 0.0, s: s.value(), t: t.value(), v: v.value() };
        if let (Some(r), Some(d)) = (self.rest, self.rest_distance(j)) {
            let gs = r.gamma_sum.ok_or_else(|| {
                Error::Divergent("tail gap lengths are not summable".into())
            })?;
            row.log_c_rest = 0.5 * gs / d;
            row.t += gs / (d * d);
            row.v += gs / (d * d);
            row.s += match r.sqrt_gamma_sum {
                Some(q) => q / d,
                None => f64::INFINITY,
            };
        }
        Ok(row)
    }
}

fn tail_constants(set: &GapSet) -> Option<TailConstants> {
    let t = set.tail()?;
    let g = t.gamma_envelope();
    let all = g.sum_from(t.start)?;
    let all_sqrt = g.powf(0.5).sum_from(t.start).unwrap_or(f64::INFINITY);
    let user: f64 = set.gaps().iter().map(Gap::length).sum();
    let user_sqrt: f64 = set.gaps().iter().map(|g| g.length().sqrt()).sum();
    let gap_to_user = t.gap(set.e_low(), t.start).lower - set.explicit_top();
    let spacing = t.spacing_lower();
    let b = user / gap_to_user + all / spacing;
    let c = t.position.coefficient + t.gamma_sup();
    Some(TailConstants {
        c_env: Envelope::new((0.5 * b).exp() * c.sqrt(), 0.5 * t.position.exponent, 0.0),
        s: user_sqrt / gap_to_user + all_sqrt / spacing,
        v: user / (gap_to_user * gap_to_user) + all / (spacing * spacing),
    })
}

/// Upper envelope of `1 + ηₖ,₀ⁿ` on the tail.
pub(crate) fn moment_envelope(t: &TailModel, n: u32) -> Envelope {
    let c = t.position.coefficient;
    Envelope::new(1.0 + c.powi(n as i32), t.position.exponent * n as f64, 0.0)
}

/// A value together with a bound on its truncation error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Bounded {
    pub value: f64,
    pub tail_bound: f64,
}

/// `Cⱼ = (ηⱼ,₀+γⱼ)^½ ∏_{l≠j} (1+γₗ/ηⱼₗ)^½`.
///
/// Tail gaps are listed until the remaining factor is within `tol` (relative).
/// The returned value is the truncated product, which never exceeds the true
/// `Cⱼ`; `tail_bound` bounds the difference.
pub fn c_j(set: &GapSet, j: usize, tol: f64) -> Result<Bounded> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter("tol must be positive".into()));
    }
    let Some(t) = set.tail() else {
        set.gap(j)?;
        let row = Geometry::new(set, 0).row(j)?;
        return Ok(Bounded { value: row.log_c.exp(), tail_bound: 0.0 });
    };
    if t.gamma_envelope().sum_from(t.start).is_none() {
        return Err(Error::Divergent("tail gap lengths are not summable".into()));
    }
    let mut extra = (j as u64 + 1).saturating_sub(set.len() as u64).max(16);
    loop {
        let geo = Geometry::new(set, extra);
        let row = geo.row(j)?;
        let rel = row.log_c_rest.exp_m1();
        if rel < tol || extra >= (1 << 22) {
            let value = row.log_c.exp();
            return Ok(Bounded { value, tail_bound: value * rel });
        }
        extra *= 2;
    }
}

/// Metric weight `wⱼ = γⱼ^½ (1+ηⱼ,₀ⁿ)^½`.
pub fn metric_weight(set: &GapSet, n: u32, j: usize) -> Result<f64> {
    let g = if j < set.len() {
        *set.gap(j)?
    } else {
        let t = set.tail().ok_or(Error::IndexOutOfRange { index: j, count: set.len() })?;
        t.gap(set.e_low(), t.start + (j - set.len()) as u64)
    };
    let eta0 = g.lower - set.e_low();
    Ok((g.length() * (1.0 + eta0.powi(n as i32))).sqrt())
}

/// The five quantities checked by [`check_craig`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CraigCondition {
    /// `Σ γₖ(1+ηₖ,₀ⁿ)`
    Moment,
    /// `Σ γₖ^½(1+ηₖ,₀ⁿ)^½`
    RootMoment,
    /// `sup Cⱼ(1+ηⱼ,₀ⁿ)^{3/2} Σ_{k≠j} γₖ^½γⱼ^½/ηⱼₖ`
    Interaction,
    /// `sup γⱼ(1+ηⱼ,₀ⁿ)Cⱼ/ηⱼ,₀`
    BaseDistance,
    /// `sup Cⱼγⱼ^½(1+ηⱼ,₀ⁿ)^{3/2}`
    Weighted,
}

impl CraigCondition {
    pub const ALL: [CraigCondition; 5] = [
        CraigCondition::Moment,
        CraigCondition::RootMoment,
        CraigCondition::Interaction,
        CraigCondition::BaseDistance,
        CraigCondition::Weighted,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            CraigCondition::Moment => "moment",
            CraigCondition::RootMoment => "root-moment",
            CraigCondition::Interaction => "interaction",
            CraigCondition::BaseDistance => "base-distance",
            CraigCondition::Weighted => "weighted",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "lowercase")]
pub enum ConditionStatus {
    /// Explicit part `value`; the unlisted tail adds at most `tail_bound`
    /// (to a sum) or is dominated by `tail_bound` (for a supremum).
    Finite { value: f64, tail_bound: f64 },
    Divergent { certificate: String },
    Uncertified { reason: String },
}

impl ConditionStatus {
    pub fn is_finite(&self) -> bool {
        matches!(self, ConditionStatus::Finite { .. })
    }

    /// Certified upper bound on the full quantity.
    pub fn upper(&self, is_sum: bool) -> Option<f64> {
        match self {
            ConditionStatus::Finite { value, tail_bound } => {
                Some(if is_sum { value + tail_bound } else { value.max(*tail_bound) })
            }
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionReport {
    pub condition: CraigCondition,
    #[serde(flatten)]
    pub status: ConditionStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CraigReport {
    pub n: u32,
    pub conditions: Vec<ConditionReport>,
    pub pass: bool,
    pub explicit_gaps: usize,
    pub listed_gaps: usize,
    pub note: &'static str,
}

impl CraigReport {
    pub fn status(&self, c: CraigCondition) -> &ConditionStatus {
        &self.conditions.iter().find(|r| r.condition == c).expect("all conditions present").status
    }
}

const TAIL_NOTE: &str = "tail contributions certified by geometric-series or integral comparison";

/// Evaluates the moment condition and the four Craig-type conditions.
pub fn check_craig(set: &GapSet, n: u32) -> CraigReport {
    let geo = Geometry::auto(set);
    let ni = n as i32;
    let mut moment = CompensatedSum::new();
    let mut root = CompensatedSum::new();
    let mut interaction = 0.0f64;
    let mut base = 0.0f64;
    let mut weighted = 0.0f64;
    let mut touching: Option<usize> = None;
    let mut row_error: Option<String> = None;
    for j in 0..geo.len() {
        let gamma = geo.gamma(j);
        let eta0 = geo.eta0(j);
        let w = 1.0 + eta0.powi(ni);
        moment.add(gamma * w);
        root.add((gamma * w).sqrt());
        match geo.row(j) {
            Ok(row) => {
                let c = row.c_upper();
                interaction = interaction.max(c * w.powf(1.5) * gamma.sqrt() * row.s);
                if eta0 > 0.0 {
                    base = base.max(gamma * w * c / eta0);
                } else if touching.is_none() {
                    touching = Some(j);
                }
                weighted = weighted.max(c * gamma.sqrt() * w.powf(1.5));
            }
            Err(e) => row_error = Some(e.to_string()),
        }
    }

    let explicit = [moment.value(), root.value(), interaction, base, weighted];
    let mut conditions = Vec::with_capacity(5);
    for (i, cond) in CraigCondition::ALL.into_iter().enumerate() {
        let status = if cond == CraigCondition::BaseDistance && touching.is_some() {
            ConditionStatus::Divergent {
                certificate: format!(
                    "gap {} touches the spectrum base (ηⱼ,₀ = 0)",
                    touching.unwrap() + 1
                ),
            }
        } else if matches!(cond, CraigCondition::Moment | CraigCondition::RootMoment) {
            tail_status(&geo, cond, n, explicit[i])
        } else if let Some(msg) = &row_error {
            ConditionStatus::Uncertified { reason: msg.clone() }
        } else {
            tail_status(&geo, cond, n, explicit[i])
        };
        conditions.push(ConditionReport { condition: cond, status });
    }
    let pass = conditions.iter().all(|c| c.status.is_finite());
    CraigReport {
        n,
        conditions,
        pass,
        explicit_gaps: set.len(),
        listed_gaps: geo.len(),
        note: TAIL_NOTE,
    }
}

fn tail_status(geo: &Geometry, cond: CraigCondition, n: u32, value: f64) -> ConditionStatus {
    let Some(rest) = geo.rest else {
        return ConditionStatus::Finite { value, tail_bound: 0.0 };
    };
    let t = rest.tail;
    let k0 = t.start;
    let gamma = t.gamma_envelope();
    let moment = moment_envelope(&t, n);
    let is_sum = matches!(cond, CraigCondition::Moment | CraigCondition::RootMoment);

    let upper: Option<Envelope> = match cond {
        CraigCondition::Moment => Some(gamma.mul(moment)),
        CraigCondition::RootMoment => Some(gamma.mul(moment).powf(0.5)),
        _ => geo.tail_constants.and_then(|tc| {
            let base = tc.c_env.mul(moment.powf(1.5)).mul(gamma.powf(0.5));
            match cond {
                CraigCondition::Interaction => Some(base.scale(tc.s)),
                CraigCondition::Weighted => Some(base),
                CraigCondition::BaseDistance => {
                    let lo = t.eta0_lower_coefficient();
                    (lo > 0.0).then(|| {
                        tc.c_env.mul(moment).mul(gamma).mul(Envelope::new(1.0 / lo, -t.position.exponent, 0.0))
                    })
                }
                _ => None,
            }
        }),
    };
    let bound = upper.and_then(|e| if is_sum { e.sum_from(k0) } else { e.sup_from(k0) });
    if let Some(b) = bound {
        if b.is_finite() && value.is_finite() {
            return ConditionStatus::Finite { value, tail_bound: b };
        }
    }
    match divergence_certificate(&t, cond, n, is_sum) {
        Some(certificate) => ConditionStatus::Divergent { certificate },
        None => ConditionStatus::Uncertified {
            reason: "tail comparison inconclusive".to_string(),
        },
    }
}

/// Lower envelopes of the tail terms; divergence of these certifies divergence.
fn divergence_certificate(t: &TailModel, cond: CraigCondition, n: u32, is_sum: bool) -> Option<String> {
    let lo = t.eta0_lower_coefficient();
    if lo <= 0.0 {
        return None;
    }
    let d = t.position.exponent;
    let nf = n as f64;
    let gamma = t.gamma_envelope();
    // 1+ηⁿ ≥ loⁿ k^{dn},  Cₖ ≥ (ηₖ,₀+γₖ)^½ ≥ lo^½ k^{d/2}
    let moment = Envelope::new(lo.powf(nf), d * nf, 0.0);
    let c = Envelope::new(lo.sqrt(), 0.5 * d, 0.0);
    let lower = match cond {
        CraigCondition::Moment => gamma.mul(moment),
        CraigCondition::RootMoment => gamma.mul(moment).powf(0.5),
        CraigCondition::Weighted => c.mul(gamma.powf(0.5)).mul(moment.powf(1.5)),
        CraigCondition::BaseDistance => {
            c.mul(gamma).mul(moment).mul(Envelope::new(1.0 / t.position.coefficient, -d, 0.0))
        }
        CraigCondition::Interaction => {
            // neighbour term: γₖ₊₁^½/ηₖ,ₖ₊₁ with ηₖ,ₖ₊₁ ≤ (c·d·2^{d−1} + γ_sup)·k^{d−1}
            let next = match gamma {
                Envelope { coef, power, decay } if decay > 0.0 => {
                    Envelope::new(coef * (-decay).exp(), power, decay)
                }
                Envelope { coef, power, decay } => Envelope::new(coef * 2f64.powf(power), power, decay),
            };
            let spread = t.position.coefficient * d * 2f64.powf(d - 1.0) + t.gamma_sup();
            c.mul(moment.powf(1.5))
                .mul(gamma.powf(0.5))
                .mul(next.powf(0.5))
                .mul(Envelope::new(1.0 / spread, 1.0 - d, 0.0))
        }
    };
    let k0 = t.start;
    if is_sum && lower.sum_diverges() {
        Some(format!(
            "tail terms are bounded below by {} for k ≥ {k0}; the comparison series diverges",
            lower.describe()
        ))
    } else if !is_sum && lower.unbounded() {
        Some(format!(
            "tail terms are bounded below by {} for k ≥ {k0}, which is unbounded",
            lower.describe()
        ))
    } else {
        None
    }
}
