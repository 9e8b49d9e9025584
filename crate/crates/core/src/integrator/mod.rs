//! Integration of the translation and hierarchy flows on the Dirichlet torus,
//! the two-parameter flow sheet and the numerical identity checks built on it.

mod dopri;

use rayon::prelude::*;
use serde::Serialize;

use crate::dirichlet::{dist, DirichletState};
use crate::error::{Error, Result};
use crate::flows::{psi_at, xi_at};
use crate::hierarchy::{derivative_at, eval_diffpoly, stencil_points};
use crate::hierarchy::{fhat, kdv_rhs};
use crate::moments::{q_value, r_m};
use crate::numeric::wrap_angle;
use crate::spectrum::{check_craig, GapSet};

pub use dopri::{Stats, Stepper};

/// Which flow parameter is advanced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Direction {
    /// Translation: `dφ/dx = Ψ(φ)`.
    X,
    /// Hierarchy time: `dφ/dt = Ξ(φ)`.
    T,
}

/// Tolerances for the adaptive integrator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FlowOptions {
    pub rtol: f64,
    pub atol: f64,
}

impl Default for FlowOptions {
    fn default() -> Self {
        Self { rtol: 1e-10, atol: 1e-10 }
    }
}

pub(crate) fn mus_of(set: &GapSet, phi: &[f64], out: &mut [f64]) {
    for ((m, g), p) in out.iter_mut().zip(set.gaps()).zip(phi) {
        let c = (0.5 * p).cos();
        *m = g.lower + g.length() * c * c;
    }
}

fn wrap_all(y: &mut [f64]) {
    for p in y {
        *p = wrap_angle(*p);
    }
}

/// Right-hand side of the angular flow.
pub(crate) fn field(set: &GapSet, n: u32, dir: Direction) -> impl Fn(&[f64], &mut [f64]) + '_ {
    move |phi: &[f64], out: &mut [f64]| {
        let mut mus = vec![0.0; phi.len()];
        mus_of(set, phi, &mut mus);
        let v = match dir {
            Direction::X => psi_at(set, &mus),
            Direction::T => xi_at(set, n as usize, &mus),
        };
        out.copy_from_slice(&v);
    }
}

/// A stepper for the angular flow starting at parameter 0.
pub(crate) fn stepper<'a>(
    set: &'a GapSet,
    n: u32,
    dir: Direction,
    phi0: &DirichletState,
    opts: FlowOptions,
) -> Result<Stepper<impl FnMut(f64, &[f64], &mut [f64]) + 'a, fn(&mut [f64])>> {
    let f = field(set, n, dir);
    Stepper::new(move |_, y: &[f64], dy: &mut [f64]| f(y, dy), wrap_all as fn(&mut [f64]), 0.0, phi0.angles().to_vec(), opts.rtol, opts.atol)
}

fn require_flow(set: &GapSet, n: u32, dir: Direction) -> Result<()> {
    if dir == Direction::T && !set.is_finite_gap() {
        let r = check_craig(set, n);
        if !r.pass {
            return Err(Error::Divergent(format!("Craig-type conditions fail for n = {n}")));
        }
    }
    Ok(())
}

/// Advances `phi0` by `span` along one flow; also returns step statistics.
pub fn flow_with_stats(
    set: &GapSet,
    n: u32,
    phi0: &DirichletState,
    dir: Direction,
    span: f64,
    opts: FlowOptions,
) -> Result<(DirichletState, Stats)> {
    phi0.check(set)?;
    if !span.is_finite() {
        return Err(Error::NonFinite("flow span"));
    }
    require_flow(set, n, dir)?;
    let mut st = stepper(set, n, dir, phi0, opts)?;
    st.advance_to(span)?;
    Ok((DirichletState::from_angles(st.y)?, st.stats))
}

pub fn flow(set: &GapSet, n: u32, phi0: &DirichletState, dir: Direction, span: f64, opts: FlowOptions) -> Result<DirichletState> {
    flow_with_stats(set, n, phi0, dir, span, opts).map(|r| r.0)
}

/// States at each of `points`, integrating outward from parameter 0 in both directions.
pub(crate) fn chain(set: &GapSet, n: u32, dir: Direction, phi0: &DirichletState, points: &[f64], opts: FlowOptions) -> Result<(Vec<DirichletState>, Stats)> {
    let mut out: Vec<Option<DirichletState>> = vec![None; points.len()];
    let mut stats = Stats::default();
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| points[a].total_cmp(&points[b]));
    let (neg, pos): (Vec<usize>, Vec<usize>) = order.into_iter().partition(|&i| points[i] < 0.0);
    for idx in [pos, neg.into_iter().rev().collect()] {
        let mut st = stepper(set, n, dir, phi0, opts)?;
        for i in idx {
            st.advance_to(points[i])?;
            out[i] = Some(DirichletState::from_angles(st.y.clone())?);
        }
        stats.merge(&st.stats);
    }
    Ok((out.into_iter().map(|s| s.expect("every point visited")).collect(), stats))
}

/// Uniform grid `start + i·step`, `i < count`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Grid {
    pub start: f64,
    pub step: f64,
    pub count: usize,
}

impl Grid {
    /// `count` points from `start` to `end` inclusive.
    pub fn new(start: f64, end: f64, count: usize) -> Result<Self> {
        if count == 0 {
            return Err(Error::InvalidParameter("grid needs at least one point".into()));
        }
        if !start.is_finite() || !end.is_finite() {
            return Err(Error::NonFinite("grid range"));
        }
        let step = if count == 1 { 0.0 } else { (end - start) / (count - 1) as f64 };
        if count > 1 && !(step > 0.0) {
            return Err(Error::InvalidParameter("grid range must be increasing".into()));
        }
        Ok(Self { start, step, count })
    }

    pub fn single(x: f64) -> Self {
        Self { start: x, step: 0.0, count: 1 }
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.count).map(|i| self.start + i as f64 * self.step).collect()
    }
}

/// Dirichlet data and reconstructed field on an `(x, t)` grid, stored t-major.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowSheet {
    pub n: u32,
    pub x: Grid,
    pub t: Grid,
    pub states: Vec<DirichletState>,
    pub q: Vec<f64>,
    pub stats: Stats,
}

impl FlowSheet {
    pub fn index(&self, ix: usize, it: usize) -> usize {
        it * self.x.count + ix
    }

    pub fn q_at(&self, ix: usize, it: usize) -> f64 {
        self.q[self.index(ix, it)]
    }

    pub fn state_at(&self, ix: usize, it: usize) -> &DirichletState {
        &self.states[self.index(ix, it)]
    }

    /// CSV with columns `x,t,q,phi_1,…`, one row per node, t-major.
    pub fn to_csv(&self) -> String {
        let gaps = self.states.first().map_or(0, |s| s.len());
        let mut out = String::from("x,t,q");
        for j in 1..=gaps {
            out.push_str(&format!(",phi_{j}"));
        }
        out.push('\n');
        let xs = self.x.points();
        for (it, t) in self.t.points().into_iter().enumerate() {
            for (ix, x) in xs.iter().enumerate() {
                let k = self.index(ix, it);
                out.push_str(&format!("{x},{t},{}", self.q[k]));
                for p in self.states[k].angles() {
                    out.push_str(&format!(",{p}"));
                }
                out.push('\n');
            }
        }
        out
    }
}

/// Integrates the t-flow along `x = 0`, then the x-flow along each row.
pub fn solve_sheet(set: &GapSet, n: u32, phi00: &DirichletState, x: Grid, t: Grid, opts: FlowOptions) -> Result<FlowSheet> {
    phi00.check(set)?;
    require_flow(set, n, Direction::T)?;
    let (spine, mut stats) = chain(set, n, Direction::T, phi00, &t.points(), opts)?;
    let xs = x.points();
    let rows: Vec<(Vec<DirichletState>, Stats)> = spine
        .par_iter()
        .map(|s| chain(set, n, Direction::X, s, &xs, opts))
        .collect::<Result<_>>()?;
    let mut states = Vec::with_capacity(x.count * t.count);
    for (row, st) in rows {
        stats.merge(&st);
        states.extend(row);
    }
    let q = states.iter().map(|s| q_value(set, &s.mus(set), 1)).collect();
    Ok(FlowSheet { n, x, t, states, q, stats })
}

/// Distance between the endpoints of (x then t) and (t then x).
pub fn verify_commute(set: &GapSet, n: u32, phi00: &DirichletState, x: f64, t: f64, opts: FlowOptions) -> Result<f64> {
    let a = flow(set, n, &flow(set, n, phi00, Direction::X, x, opts)?, Direction::T, t, opts)?;
    let b = flow(set, n, &flow(set, n, phi00, Direction::T, t, opts)?, Direction::X, x, opts)?;
    Ok(dist(set, n, &a, &b)?.value)
}

/// Finite-difference accuracy orders used by [`verify_pde`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PdeOptions {
    pub x_order: usize,
    pub t_order: usize,
}

impl Default for PdeOptions {
    fn default() -> Self {
        Self { x_order: 4, t_order: 4 }
    }
}

/// Norms of `∂ₜq − K_n[q]` over nodes where every stencil fits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PdeResidual {
    pub max: f64,
    /// `(Σ r² dx dt)^½`
    pub l2: f64,
    pub nodes: usize,
}

pub fn verify_pde(sheet: &FlowSheet, opts: PdeOptions) -> Result<PdeResidual> {
    if opts.t_order == 0 || opts.t_order % 2 == 1 {
        return Err(Error::InvalidParameter("finite-difference order must be even and positive".into()));
    }
    let (nx, nt) = (sheet.x.count, sheet.t.count);
    let t_needed = stencil_points(1, opts.t_order);
    if nt < t_needed {
        return Err(Error::GridTooShort { needed: t_needed, have: nt });
    }
    let rhs = kdv_rhs(sheet.n as usize);
    let rows: Vec<Vec<Option<f64>>> = (0..nt)
        .map(|it| eval_diffpoly(&rhs, &sheet.q[it * nx..(it + 1) * nx], sheet.x.step.max(f64::MIN_POSITIVE), opts.x_order))
        .collect::<Result<_>>()?;
    let mut max = 0.0f64;
    let mut sq = 0.0;
    let mut nodes = 0;
    let mut column = vec![0.0; nt];
    for ix in 0..nx {
        for (it, c) in column.iter_mut().enumerate() {
            *c = sheet.q_at(ix, it);
        }
        for it in 0..nt {
            let (Some(k), Some(qt)) = (rows[it][ix], derivative_at(&column, it, sheet.t.step, 1, opts.t_order)) else {
                continue;
            };
            let r = (qt - k).abs();
            max = max.max(r);
            sq += r * r;
            nodes += 1;
        }
    }
    if nodes == 0 {
        return Err(Error::GridTooShort { needed: t_needed, have: nt });
    }
    Ok(PdeResidual { max, l2: (sq * sheet.x.step * sheet.t.step).sqrt(), nodes })
}

/// `|f̂ₘ − Rₘ|` for `m = 1..=n`, with `f̂ₘ` from finite differences of `q` sampled
/// along the x-flow at spacing `h` around `phi`.
pub fn verify_trace_identity(set: &GapSet, n: u32, phi: &DirichletState, h: f64, opts: FlowOptions) -> Result<Vec<f64>> {
    phi.check(set)?;
    if !(h > 0.0) {
        return Err(Error::InvalidParameter("probe width must be positive".into()));
    }
    const ORDER: usize = 4;
    let radius = (1..=n as usize).map(|m| stencil_points(2 * m - 2, ORDER)).max().unwrap_or(1) / 2;
    let offsets: Vec<f64> = (-(radius as i64)..=radius as i64).map(|k| k as f64 * h).collect();
    let (states, _) = chain(set, n, Direction::X, phi, &offsets, opts)?;
    let q: Vec<f64> = states.iter().map(|s| q_value(set, &s.mus(set), 1)).collect();
    (1..=n as usize)
        .map(|m| {
            let fd = eval_diffpoly(&fhat(m), &q, h, ORDER)?[radius].ok_or(Error::GridTooShort { needed: 2 * radius + 1, have: q.len() })?;
            Ok((fd - r_m(set, phi, m)?.value).abs())
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn one_gap() -> GapSet {
        GapSet::finite(0.0, &[(1.0, 2.0)]).unwrap()
    }

    #[test]
    fn zero_span_is_identity() {
        let s = one_gap();
        let p = DirichletState::new(&s, vec![0.7]).unwrap();
        assert_eq!(flow(&s, 1, &p, Direction::X, 0.0, FlowOptions::default()).unwrap(), p);
    }

    #[test]
    fn x_flow_monotone_and_reversible() {
        let s = one_gap();
        let p = DirichletState::new(&s, vec![0.3]).unwrap();
        let o = FlowOptions::default();
        let a = flow(&s, 0, &p, Direction::X, 0.1, o).unwrap();
        assert!(a.angles()[0] > 0.3);
        let b = flow(&s, 0, &a, Direction::X, -0.1, o).unwrap();
        assert!((b.angles()[0] - 0.3).abs() < 10.0 * (o.rtol + o.atol));
    }

    #[test]
    fn one_gap_t_flow_is_translation() {
        // n = 1: Ξ/Ψ = (Ē + E⁻ + E⁺)/2 = 1.5
        let s = one_gap();
        let p = DirichletState::new(&s, vec![1.1]).unwrap();
        let o = FlowOptions { rtol: 1e-12, atol: 1e-12 };
        let a = flow(&s, 1, &p, Direction::T, 0.4, o).unwrap();
        let b = flow(&s, 1, &p, Direction::X, 0.6, o).unwrap();
        assert!((a.angles()[0] - b.angles()[0]).abs() < 1e-10);
    }

    #[test]
    fn sheet_small() {
        let s = one_gap();
        let p = DirichletState::new(&s, vec![PI / 3.0]).unwrap();
        let sh = solve_sheet(&s, 1, &p, Grid::single(0.0), Grid::single(0.0), FlowOptions::default()).unwrap();
        assert_eq!(sh.states, vec![p.clone()]);
        assert_eq!(sh.q.len(), 1);
        let csv = sh.to_csv();
        assert!(csv.starts_with("x,t,q,phi_1\n0,0,"));
    }

    #[test]
    fn zero_gap_sheet_constant() {
        let s = GapSet::finite(-0.5, &[]).unwrap();
        let p = DirichletState::new(&s, vec![]).unwrap();
        let g = Grid::new(0.0, 1.0, 12).unwrap();
        let sh = solve_sheet(&s, 1, &p, g, g, FlowOptions::default()).unwrap();
        assert!(sh.q.iter().all(|&q| q == -0.5));
        assert!(verify_pde(&sh, PdeOptions::default()).unwrap().max < 1e-12);
    }

    #[test]
    fn commute_trivial() {
        let s = one_gap();
        let p = DirichletState::new(&s, vec![2.0]).unwrap();
        assert!(verify_commute(&s, 1, &p, 0.0, 1.0, FlowOptions::default()).unwrap() < 1e-14);
    }

    #[test]
    fn grid_validation() {
        assert!(Grid::new(0.0, 1.0, 0).is_err());
        assert!(Grid::new(1.0, 0.0, 3).is_err());
        assert_eq!(Grid::new(0.0, 1.0, 3).unwrap().points(), vec![0.0, 0.5, 1.0]);
    }
}
