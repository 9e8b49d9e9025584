//! Diagonal Green's function from Dirichlet data, Weyl m-functions and
//! M-matrix, the M-matrix time evolution and boundary-value checks.

use std::cell::RefCell;

use num_complex::Complex64;
use serde::Serialize;

use crate::dirichlet::DirichletState;
use crate::error::{Error, Result};
use crate::flows::{psi_at, psi_tail_factors};
use crate::hierarchy::{centered_stencil, derivative_at};
use crate::integrator::{chain, mus_of, Direction, FlowOptions, Stepper};
use crate::moments::{q_value, r_values};
use crate::numeric::{ls_slope, wrap_angle};
use crate::spectrum::GapSet;

/// A complex value with a bound on the contribution of unlisted gaps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GreenValue {
    #[serde(serialize_with = "ser_complex")]
    pub value: Complex64,
    pub tail_bound: f64,
}

fn ser_complex<S: serde::Serializer>(z: &Complex64, s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeTuple;
    let mut t = s.serialize_tuple(2)?;
    t.serialize_element(&z.re)?;
    t.serialize_element(&z.im)?;
    t.end()
}

/// `ln(1 + w)` without cancellation for small `w`.
fn ln_1p(w: Complex64) -> Complex64 {
    let re = 0.5 * (2.0 * w.re + w.re * w.re + w.im * w.im).ln_1p();
    Complex64::new(re, w.im.atan2(1.0 + w.re))
}

/// `eʷ − 1` without cancellation for small `w`.
fn expm1(w: Complex64) -> Complex64 {
    let s = (0.5 * w.im).sin();
    Complex64::new(w.re.exp_m1() * w.im.cos() - 2.0 * s * s, w.re.exp() * w.im.sin())
}

/// Rejects real `z` on the spectrum (or beyond the listed gaps).
fn check_point(set: &GapSet, z: Complex64) -> Result<()> {
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(Error::NonFinite("spectral point"));
    }
    if z.im != 0.0 {
        return Ok(());
    }
    let x = z.re;
    let in_gap = x < set.e_low() || set.gaps().iter().any(|g| g.lower < x && x < g.upper);
    let below_tail = set.tail().is_none_or(|t| x < t.gap(set.e_low(), t.start).lower);
    if in_gap && below_tail {
        Ok(())
    } else {
        Err(Error::OnSpectrum { re: z.re, im: z.im })
    }
}

/// Relative effect of the unlisted gaps on `G(z)` and the sum `Σₖ|μₖ'|/|μₖ−z|` over them.
fn tail_effect(set: &GapSet, z: Complex64) -> (f64, f64) {
    let Some(t) = set.tail() else {
        return (0.0, 0.0);
    };
    let first = t.gap(set.e_low(), t.start).lower;
    let d = if z.re <= first { (z - first).norm() } else { z.im.abs() };
    let gamma = t.gamma_envelope();
    let total = gamma.sum_from(t.start).unwrap_or(f64::INFINITY);
    let eps = total / d + t.gamma_sup() * total / (d * d);
    let rel = if eps <= 0.5 { eps.exp_m1() } else { f64::INFINITY };
    let speed = crate::spectrum::Geometry::auto(set)
        .tail_constants
        .and_then(|tc| tc.c_env.mul(gamma).sum_from(t.start))
        .map_or(f64::INFINITY, |s| s / d);
    (rel, speed)
}

/// `G`, `∂ₓG` and `Σⱼ|term j of ∂ₓG|` from the listed gaps.
fn green_parts(set: &GapSet, phi: &[f64], z: Complex64) -> (Complex64, Complex64, f64) {
    let count = phi.len();
    let mut mus = vec![0.0; count];
    mus_of(set, phi, &mut mus);
    let base = 0.5 / (set.e_low() - z).sqrt();
    // r_l = (μₗ − z)/(√(Eₗ⁻ − z)√(Eₗ⁺ − z)), d_l = 1/(√(Eₗ⁻ − z)√(Eₗ⁺ − z))
    let mut r = Vec::with_capacity(count);
    let mut d = Vec::with_capacity(count);
    for (g, &mu) in set.gaps().iter().zip(&mus) {
        let den = (g.lower - z).sqrt() * (g.upper - z).sqrt();
        r.push((mu - z) / den);
        d.push(den.inv());
    }
    let psi = psi_at(set, &mus);
    let mut prefix = vec![Complex64::new(1.0, 0.0); count + 1];
    for l in 0..count {
        prefix[l + 1] = prefix[l] * r[l];
    }
    let mut suffix = Complex64::new(1.0, 0.0);
    let mut dx = Complex64::new(0.0, 0.0);
    let mut abs_sum = 0.0;
    for j in (0..count).rev() {
        let speed = -0.5 * set.gamma(j) * phi[j].sin() * psi[j];
        let term = base * speed * d[j] * prefix[j] * suffix;
        dx += term;
        abs_sum += term.norm();
        suffix *= r[j];
    }
    (base * prefix[count], dx, abs_sum)
}

/// `G(z) = ½(Ē−z)^{−½}∏ₗ(μₗ−z)(Eₗ⁻−z)^{−½}(Eₗ⁺−z)^{−½}`, principal root per factor.
pub fn green_diag(set: &GapSet, state: &DirichletState, z: Complex64) -> Result<GreenValue> {
    state.check(set)?;
    check_point(set, z)?;
    let (g, _, _) = green_parts(set, state.angles(), z);
    let (rel, _) = tail_effect(set, z);
    Ok(GreenValue { value: g, tail_bound: g.norm() * rel })
}

/// `∂ₓG` through `dμⱼ/dx = −½γⱼ sin φⱼ Ψⱼ`.
pub fn green_dx(set: &GapSet, state: &DirichletState, z: Complex64) -> Result<GreenValue> {
    state.check(set)?;
    check_point(set, z)?;
    let (g, gx, abs_sum) = green_parts(set, state.angles(), z);
    let (rel, speed) = tail_effect(set, z);
    let psi_rel = psi_tail_factors(set)?.into_iter().fold(0.0f64, f64::max);
    let bound = if rel == 0.0 && speed == 0.0 {
        0.0
    } else {
        abs_sum * ((1.0 + rel) * (1.0 + psi_rel) - 1.0) + g.norm() * (1.0 + rel) * speed
    };
    Ok(GreenValue { value: gx, tail_bound: bound })
}

/// `(m₋, m₊)` with `G = −1/(m₋+m₊)` and `∂ₓG = (m₋−m₊)/(m₋+m₊)`.
pub fn m_functions(set: &GapSet, state: &DirichletState, z: Complex64) -> Result<(Complex64, Complex64)> {
    let g = green_diag(set, state, z)?.value;
    if g.norm() == 0.0 {
        return Err(Error::DirichletPole);
    }
    let gx = green_dx(set, state, z)?.value;
    Ok((-(1.0 + gx) / (2.0 * g), (gx - 1.0) / (2.0 * g)))
}

/// Symmetric matrix `[[m₁, m₃], [m₃, m₂]]` at spectral point `z`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeylMatrix {
    #[serde(serialize_with = "ser_complex")]
    pub z: Complex64,
    #[serde(serialize_with = "ser_complex")]
    pub m1: Complex64,
    #[serde(serialize_with = "ser_complex")]
    pub m2: Complex64,
    #[serde(serialize_with = "ser_complex")]
    pub m3: Complex64,
}

impl WeylMatrix {
    /// From `G` and `∂ₓG`: `m₁ = G`, `m₃ = ∂ₓG/2`, `m₂ = ((∂ₓG)² − 1)/(4G)`.
    pub fn from_green(z: Complex64, g: Complex64, gx: Complex64) -> Result<Self> {
        if g.norm() == 0.0 {
            return Err(Error::DirichletPole);
        }
        Ok(Self { z, m1: g, m2: (gx * gx - 1.0) / (4.0 * g), m3: 0.5 * gx })
    }

    pub fn from_m_functions(z: Complex64, m_minus: Complex64, m_plus: Complex64) -> Self {
        let s = m_minus + m_plus;
        Self { z, m1: -1.0 / s, m2: m_minus * m_plus / s, m3: 0.5 * (m_minus - m_plus) / s }
    }

    pub fn entries(&self) -> [[Complex64; 2]; 2] {
        [[self.m1, self.m3], [self.m3, self.m2]]
    }

    /// `|m₁m₂ − m₃² + ¼|`
    pub fn determinant_defect(&self) -> f64 {
        (self.m1 * self.m2 - self.m3 * self.m3 + 0.25).norm()
    }

    /// Entrywise complex conjugate (the conjugate transpose, by symmetry).
    pub fn conj(&self) -> Self {
        Self { z: self.z.conj(), m1: self.m1.conj(), m2: self.m2.conj(), m3: self.m3.conj() }
    }

    pub fn max_difference(&self, o: &WeylMatrix) -> f64 {
        [(self.m1 - o.m1).norm(), (self.m2 - o.m2).norm(), (self.m3 - o.m3).norm()]
            .into_iter()
            .fold(0.0, f64::max)
    }

    fn to_vec(self) -> [f64; 6] {
        [self.m1.re, self.m1.im, self.m2.re, self.m2.im, self.m3.re, self.m3.im]
    }

    fn from_slice(z: Complex64, y: &[f64]) -> Self {
        Self {
            z,
            m1: Complex64::new(y[0], y[1]),
            m2: Complex64::new(y[2], y[3]),
            m3: Complex64::new(y[4], y[5]),
        }
    }
}

pub fn weyl_matrix(set: &GapSet, state: &DirichletState, z: Complex64) -> Result<WeylMatrix> {
    let g = green_diag(set, state, z)?.value;
    let gx = green_dx(set, state, z)?.value;
    WeylMatrix::from_green(z, g, gx)
}

/// Settings for [`evolve_m`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EvolveOptions {
    pub flow: FlowOptions,
    /// Spacing of the x-flow probes used for `∂ₓF̂` and `∂ₓ²F̂`.
    pub probe: f64,
    /// Tolerance of the probe integrations.
    pub probe_tol: f64,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self { flow: FlowOptions::default(), probe: 1e-3, probe_tol: 1e-13 }
    }
}

const PROBE_ORDER: usize = 4;

/// Entries `(P₁₁, P₁₂, P₂₁)` of the time-evolution matrix at `φ`, with
/// `F̂ₙ(z) = Σ R_{n−ℓ} z^ℓ` and its x-derivatives by centered differences.
pub fn p_entries(set: &GapSet, n: u32, phi: &DirichletState, z: Complex64, opts: &EvolveOptions) -> Result<[Complex64; 3]> {
    let nn = n as usize;
    let (offsets, _) = centered_stencil(2, PROBE_ORDER);
    let xs: Vec<f64> = offsets.iter().map(|&k| k as f64 * opts.probe).collect();
    let probe_opts = FlowOptions { rtol: opts.probe_tol, atol: opts.probe_tol };
    let (states, _) = chain(set, n, Direction::X, phi, &xs, probe_opts)?;
    let centre = offsets.len() / 2;
    let rs: Vec<Vec<f64>> = states.iter().map(|s| r_values(set, &s.mus(set), nn)).collect();
    let poly = |k: usize| -> Complex64 {
        (0..=nn).rev().fold(Complex64::new(0.0, 0.0), |acc, l| acc * z + rs[k][nn - l])
    };
    let mut fx = Complex64::new(0.0, 0.0);
    let mut fxx = Complex64::new(0.0, 0.0);
    let mut zl = Complex64::new(1.0, 0.0);
    for l in 0..=nn {
        let col: Vec<f64> = rs.iter().map(|r| r[nn - l]).collect();
        let d1 = derivative_at(&col, centre, opts.probe, 1, PROBE_ORDER).expect("stencil fits");
        let d2 = derivative_at(&col, centre, opts.probe, 2, PROBE_ORDER).expect("stencil fits");
        fx += zl * d1;
        fxx += zl * d2;
        zl *= z;
    }
    let f = poly(centre);
    let q = q_value(set, &phi.mus(set), 1);
    Ok([-0.5 * fx, f, (q - z) * f - 0.5 * fxx])
}

/// One point of an M-matrix trajectory.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MSample {
    pub t: f64,
    pub matrix: WeylMatrix,
    pub phi: Vec<f64>,
}

/// Integrates `∂ₜM = PM + MPᵀ` jointly with the t-flow of `φ`; returns `samples`
/// equally spaced points on `[0, t_end]` (the first is `t = 0`).
pub fn evolve_m(
    set: &GapSet,
    n: u32,
    phi0: &DirichletState,
    z: Complex64,
    t_end: f64,
    samples: usize,
    opts: EvolveOptions,
) -> Result<Vec<MSample>> {
    phi0.check(set)?;
    if samples == 0 {
        return Err(Error::InvalidParameter("need at least one sample".into()));
    }
    if !(opts.probe > 0.0 && opts.probe_tol > 0.0) {
        return Err(Error::InvalidParameter("probe width and tolerance must be positive".into()));
    }
    let m0 = weyl_matrix(set, phi0, z)?;
    let count = set.len();
    let mut y0 = phi0.angles().to_vec();
    y0.extend(m0.to_vec());
    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let rhs = |_: f64, y: &[f64], dy: &mut [f64]| {
        let phi = match DirichletState::from_angles(y[..count].to_vec()) {
            Ok(p) => p,
            Err(e) => {
                *failure.borrow_mut() = Some(e);
                dy.fill(f64::NAN);
                return;
            }
        };
        let mut mus = vec![0.0; count];
        mus_of(set, phi.angles(), &mut mus);
        dy[..count].copy_from_slice(&crate::flows::xi_at(set, n as usize, &mus));
        match p_entries(set, n, &phi, z, &opts) {
            Ok([a, b, c]) => {
                let m = WeylMatrix::from_slice(z, &y[count..]);
                let d1 = 2.0 * a * m.m1 + 2.0 * b * m.m3;
                let d2 = -2.0 * a * m.m2 + 2.0 * c * m.m3;
                let d3 = c * m.m1 + b * m.m2;
                dy[count..].copy_from_slice(&[d1.re, d1.im, d2.re, d2.im, d3.re, d3.im]);
            }
            Err(e) => {
                *failure.borrow_mut() = Some(e);
                dy.fill(f64::NAN);
            }
        }
    };
    let post = |y: &mut [f64]| {
        for p in &mut y[..count] {
            *p = wrap_angle(*p);
        }
    };
    let mut st = Stepper::new(rhs, post, 0.0, y0, opts.flow.rtol, opts.flow.atol)?;
    let mut out = Vec::with_capacity(samples);
    for i in 0..samples {
        let t = if samples == 1 { 0.0 } else { t_end * i as f64 / (samples - 1) as f64 };
        let r = st.advance_to(t);
        if let Some(e) = failure.borrow_mut().take() {
            return Err(e);
        }
        r?;
        out.push(MSample { t, matrix: WeylMatrix::from_slice(z, &st.y[count..]), phi: st.y[..count].to_vec() });
    }
    Ok(out)
}

/// `|−2G∂ₓ²G + (∂ₓG)² + 4(q−z)G² − 1|` with `∂ₓ²G` from x-flow samples at spacing `h`.
pub fn green_identity_residual(set: &GapSet, state: &DirichletState, z: Complex64, h: f64, opts: FlowOptions) -> Result<f64> {
    state.check(set)?;
    check_point(set, z)?;
    if !(h > 0.0) {
        return Err(Error::InvalidParameter("probe width must be positive".into()));
    }
    let (offsets, w) = centered_stencil(2, PROBE_ORDER);
    let xs: Vec<f64> = offsets.iter().map(|&k| k as f64 * h).collect();
    let (states, _) = chain(set, 0, Direction::X, state, &xs, opts)?;
    let gs: Vec<Complex64> = states.iter().map(|s| green_parts(set, s.angles(), z).0).collect();
    let gxx = gs.iter().zip(&w).fold(Complex64::new(0.0, 0.0), |acc, (g, c)| acc + g * *c) / (h * h);
    let (g, gx, _) = green_parts(set, state.angles(), z);
    let q = q_value(set, &state.mus(set), 1);
    Ok((-2.0 * g * gxx + gx * gx + 4.0 * (q - z) * g * g - 1.0).norm())
}

/// Boundary-value trend of `|Re G|/|G|` at `λ + iδ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReflectionlessReport {
    pub lambda: f64,
    /// `λ` is in a gap or below the spectrum (control case).
    pub in_gap: bool,
    /// `(δ, |Re G|/|G|)`
    pub rows: Vec<(f64, f64)>,
    /// Log-log slope of the ratio against `δ`.
    pub slope: Option<f64>,
    /// Linear extrapolation of the ratio to `δ = 0` from the two smallest `δ`.
    pub extrapolated: f64,
    pub pass: bool,
}

impl ReflectionlessReport {
    pub fn to_csv(&self) -> String {
        report_csv("delta,ratio", &self.rows, self)
    }
}

fn report_csv<T: Serialize>(header: &str, rows: &[(f64, f64)], summary: &T) -> String {
    let mut out = format!("{header}\n");
    for (a, b) in rows {
        out.push_str(&format!("{a},{b}\n"));
    }
    let mut v = serde_json::to_value(summary).unwrap_or(serde_json::Value::Null);
    if let Some(o) = v.as_object_mut() {
        o.remove("rows");
        o.remove("series");
    }
    out.push_str(&v.to_string());
    out.push('\n');
    out
}

/// Default `δ` sequence for [`verify_reflectionless`].
pub const DEFAULT_DELTAS: [f64; 6] = [1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 5e-7];

/// Checks that `Re G(λ+iδ) → 0` linearly as `δ ↓ 0` inside a band (and stays
/// away from 0 in a gap).
pub fn verify_reflectionless(set: &GapSet, state: &DirichletState, lambda: f64, deltas: &[f64]) -> Result<ReflectionlessReport> {
    state.check(set)?;
    if deltas.len() < 2 || deltas.iter().any(|d| !(*d > 0.0)) {
        return Err(Error::InvalidParameter("need at least two positive δ values".into()));
    }
    if !lambda.is_finite() {
        return Err(Error::NonFinite("lambda"));
    }
    if let Some(t) = set.tail() {
        if lambda >= t.gap(set.e_low(), t.start).lower {
            return Err(Error::InvalidParameter("λ lies among the unlisted tail gaps".into()));
        }
    }
    let dmax = deltas.iter().cloned().fold(0.0, f64::max);
    let edge = set
        .gaps()
        .iter()
        .flat_map(|g| [g.lower, g.upper])
        .chain([set.e_low()])
        .map(|e| (lambda - e).abs())
        .fold(f64::INFINITY, f64::min);
    if edge < 10.0 * dmax {
        return Err(Error::NearEdge { lambda, distance: edge });
    }
    let in_gap = lambda < set.e_low() || set.gaps().iter().any(|g| g.lower < lambda && lambda < g.upper);
    let rows: Vec<(f64, f64)> = deltas
        .iter()
        .map(|&d| {
            let g = green_parts(set, state.angles(), Complex64::new(lambda, d)).0;
            (d, g.re.abs() / g.norm())
        })
        .collect();
    let mut sorted = rows.clone();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (d1, r1) = sorted[0];
    let (d2, r2) = sorted[1];
    let extrapolated = r1 - d1 * (r2 - r1) / (d2 - d1);
    let positive: Vec<&(f64, f64)> = rows.iter().filter(|r| r.1 > 0.0).collect();
    let slope = (positive.len() >= 2).then(|| {
        let xs: Vec<f64> = positive.iter().map(|r| r.0.ln()).collect();
        let ys: Vec<f64> = positive.iter().map(|r| r.1.ln()).collect();
        ls_slope(&xs, &ys)
    });
    let pass = if in_gap {
        r1 >= 0.5
    } else {
        extrapolated.abs() <= 1e-6 && slope.is_none_or(|s| s >= 0.8)
    };
    Ok(ReflectionlessReport { lambda, in_gap, rows, slope, extrapolated, pass })
}

/// Decay of the large-`|z|` expansion residual along `z = −r`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AsymptoticsReport {
    pub n: u32,
    /// `(r, ε(r))` with `ε = |2√(Ē−z)G·exp(−Σₖ(Qₖ−Ēᵏ)/(2kzᵏ)) − 1|`.
    pub rows: Vec<(f64, f64)>,
    /// `−d log ε/d log r`; absent when `ε` vanishes identically.
    pub exponent: Option<f64>,
    /// `(r, |2√r·G − Σ_{ℓ≤n}(−1)^ℓ Rₗ r^{−ℓ}|)`
    pub series: Vec<(f64, f64)>,
    pub series_exponent: Option<f64>,
    pub pass: bool,
}

impl AsymptoticsReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("r,residual,series_residual\n");
        for ((r, e), (_, s)) in self.rows.iter().zip(&self.series) {
            out.push_str(&format!("{r},{e},{s}\n"));
        }
        let mut v = serde_json::to_value(self).unwrap_or(serde_json::Value::Null);
        if let Some(o) = v.as_object_mut() {
            o.remove("rows");
            o.remove("series");
        }
        out.push_str(&v.to_string());
        out.push('\n');
        out
    }
}

fn decay_exponent(rows: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<&(f64, f64)> = rows.iter().filter(|r| r.1 > 0.0).collect();
    (pts.len() >= 2).then(|| {
        let xs: Vec<f64> = pts.iter().map(|r| r.0.ln()).collect();
        let ys: Vec<f64> = pts.iter().map(|r| r.1.ln()).collect();
        -ls_slope(&xs, &ys)
    })
}

/// Default radii for [`verify_green_asymptotics`]: 9 points log-spaced on `[10², 10⁴]`.
pub fn default_radii() -> Vec<f64> {
    (0..9).map(|i| 10f64.powf(2.0 + 0.25 * i as f64)).collect()
}

pub fn verify_green_asymptotics(set: &GapSet, n: u32, state: &DirichletState, radii: &[f64]) -> Result<AsymptoticsReport> {
    state.check(set)?;
    if radii.len() < 2 || radii.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
        return Err(Error::InvalidParameter("need at least two positive radii".into()));
    }
    let mus = state.mus(set);
    let rs = r_values(set, &mus, n as usize);
    let e = set.e_low();
    let mut rows = Vec::with_capacity(radii.len());
    let mut series = Vec::with_capacity(radii.len());
    for &r in radii {
        let z = Complex64::new(-r, 0.0);
        check_point(set, z)?;
        // log(2√(Ē−z)G) = Σₗ ln(1 + (μₗ−Eₗ⁻)/(Eₗ⁻−z)) − ½ln(1 + γₗ/(Eₗ⁻−z))
        let mut log_n = Complex64::new(0.0, 0.0);
        let mut expansion = Complex64::new(0.0, 0.0);
        for (g, &mu) in set.gaps().iter().zip(&mus) {
            let a = g.lower - z;
            log_n += ln_1p((mu - g.lower) / a) - 0.5 * ln_1p(g.length() / a);
            for k in 1..=n as i32 {
                let term = g.lower.powi(k) + g.upper.powi(k) - 2.0 * mu.powi(k);
                expansion += term / (2.0 * k as f64 * z.powi(k));
            }
        }
        let eps = expm1(log_n - expansion).norm();
        rows.push((r, eps));
        // 2√r·G − 1 = expm1(log N − ½ln(1 + Ē/r))
        let w = log_n - 0.5 * ln_1p(Complex64::new(e / r, 0.0));
        let lhs = expm1(w);
        let rhs: f64 = (1..=n as usize).map(|l| if l % 2 == 0 { 1.0 } else { -1.0 } * rs[l] / r.powi(l as i32)).sum();
        series.push((r, (lhs - rhs).norm()));
    }
    let exponent = decay_exponent(&rows);
    let series_exponent = decay_exponent(&series);
    let pass = exponent.is_none_or(|x| x >= n as f64 + 0.8);
    Ok(AsymptoticsReport { n, rows, exponent, series, series_exponent, pass })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn one_gap() -> GapSet {
        GapSet::finite(0.0, &[(1.0, 2.0)]).unwrap()
    }

    #[test]
    fn free_green() {
        let s = GapSet::finite(0.0, &[]).unwrap();
        let st = DirichletState::new(&s, vec![]).unwrap();
        let g = green_diag(&s, &st, c(-1.0, 0.0)).unwrap();
        assert_eq!(g.value, c(0.5, 0.0));
        let (mm, mp) = m_functions(&s, &st, c(-1.0, 0.0)).unwrap();
        assert_eq!((mm, mp), (c(-1.0, 0.0), c(-1.0, 0.0)));
    }

    #[test]
    fn green_zero_at_dirichlet_point() {
        let s = one_gap();
        let st = DirichletState::new(&s, vec![PI / 2.0]).unwrap();
        let mu = st.mus(&s)[0];
        assert_eq!(green_diag(&s, &st, c(mu, 0.0)).unwrap().value.norm(), 0.0);
        let gx = green_dx(&s, &st, c(mu, 0.0)).unwrap().value;
        assert!((gx * gx - 1.0).norm() < 1e-12);
    }

    #[test]
    fn green_real_in_gap_and_rejected_on_band() {
        let s = one_gap();
        let st = DirichletState::new(&s, vec![PI / 2.0]).unwrap();
        let g = green_diag(&s, &st, c(1.2, 0.0)).unwrap().value;
        assert_eq!(g.im, 0.0);
        assert!(matches!(green_diag(&s, &st, c(0.5, 0.0)), Err(Error::OnSpectrum { .. })));
        assert!(green_diag(&s, &st, c(1.0, 0.0)).is_err());
    }

    #[test]
    fn edges_have_zero_derivative() {
        let s = GapSet::finite(0.0, &[(1.0, 2.0), (3.0, 4.0)]).unwrap();
        let st = DirichletState::new(&s, vec![0.0, PI]).unwrap();
        assert!(green_dx(&s, &st, c(-1.0, 0.5)).unwrap().value.norm() < 1e-15);
    }

    #[test]
    fn matrix_determinant_and_reconstruction() {
        let s = one_gap();
        let st = DirichletState::new(&s, vec![2.2]).unwrap();
        let z = c(-0.7, 0.4);
        let m = weyl_matrix(&s, &st, z).unwrap();
        assert!(m.determinant_defect() < 1e-14);
        let (mm, mp) = m_functions(&s, &st, z).unwrap();
        let r = WeylMatrix::from_m_functions(z, mm, mp);
        assert!(r.max_difference(&m) < 1e-14);
        assert!(((mm + mp) + 1.0 / m.m1).norm() < 1e-14);
    }

    #[test]
    fn herglotz_upper_half_plane() {
        let s = one_gap();
        let st = DirichletState::new(&s, vec![4.0]).unwrap();
        for k in 0..20 {
            let z = c(-2.0 + 0.3 * k as f64, 0.05 + 0.1 * (k % 5) as f64);
            let (_, mp) = m_functions(&s, &st, z).unwrap();
            assert!(mp.im > 0.0, "{z}");
        }
    }

    #[test]
    fn reflectionless_free_case() {
        let s = GapSet::finite(0.0, &[]).unwrap();
        let st = DirichletState::new(&s, vec![]).unwrap();
        let r = verify_reflectionless(&s, &st, 1.0, &DEFAULT_DELTAS).unwrap();
        assert!(r.pass && !r.in_gap);
        assert!((r.slope.unwrap() - 1.0).abs() < 0.05);
        assert!(verify_reflectionless(&s, &st, 1e-5, &DEFAULT_DELTAS).is_err());
    }

    #[test]
    fn asymptotics_free_case_exact() {
        let s = GapSet::finite(0.3, &[]).unwrap();
        let st = DirichletState::new(&s, vec![]).unwrap();
        let r = verify_green_asymptotics(&s, 2, &st, &default_radii()).unwrap();
        assert!(r.rows.iter().all(|x| x.1 == 0.0));
        assert!(r.exponent.is_none() && r.pass);
    }

    #[test]
    fn csv_has_summary_line() {
        let s = one_gap();
        let st = DirichletState::new(&s, vec![1.0]).unwrap();
        let r = verify_reflectionless(&s, &st, 3.0, &DEFAULT_DELTAS).unwrap();
        let csv = r.to_csv();
        let last = csv.lines().last().unwrap();
        let v: serde_json::Value = serde_json::from_str(last).unwrap();
        assert!(v.get("pass").is_some());
        assert_eq!(csv.lines().count(), DEFAULT_DELTAS.len() + 2);
    }
}
