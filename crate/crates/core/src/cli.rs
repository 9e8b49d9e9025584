//! Command-line front end. Every command writes one artifact (to `--out` or
//! stdout) and a one-line status to stderr. Exit status: 0 pass, 2 failed
//! check, 1 usage or input error.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::json;

use crate::dirichlet::DirichletState;
use crate::error::{Error, Result};
use crate::flows::sample_bounds;
use crate::hierarchy::{fhat, kdv_rhs, zero_curvature_residual};
use crate::integrator::{flow, solve_sheet, verify_commute, verify_pde, verify_trace_identity};
use crate::integrator::{Direction, FlowOptions, Grid, PdeOptions};
use crate::qpmodel::{check_craig_app, diophantine_check, synthesize_gapmodel, QPData};
use crate::spectrum::{check_craig, GapSet, SpectrumFile};
use crate::weyl::{default_radii, evolve_m, verify_green_asymptotics, verify_reflectionless, weyl_matrix};
use crate::weyl::{EvolveOptions, DEFAULT_DELTAS};

/// Determinant defect allowed along an evolved Weyl matrix.
pub const DET_TOL: f64 = 1e-12;
/// Seed used by sampled checks when none is given.
pub const DEFAULT_SEED: u64 = 1;

#[derive(Debug, Parser)]
#[command(name = "dubrovin", version, about = "Reflectionless KdV-hierarchy flows on Dirichlet data")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print f̂ₙ₊₁, the n-th flow and the zero-curvature residual.
    Hierarchy {
        #[arg(long, default_value_t = 1)]
        n: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate the moment and Craig-type conditions.
    CheckCraig {
        spectrum: PathBuf,
        #[arg(long, default_value_t = 1)]
        n: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Flow φ₀ by x, then by t; writes the final angles.
    Flow {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        x: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        t: f64,
    },
    /// Solve on an (x, t) grid and write the sheet CSV.
    Sheet {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Numerical checks; exit 0 on pass, 2 on fail
    #[command(subcommand)]
    Verify(Verify),
    /// Quasi-periodic gap model tools
    #[command(subcommand)]
    Qp(Qp),
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Spectrum JSON file.
    pub spectrum: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub n: u32,
    /// Initial angles: an inline JSON array or a file holding one.
    #[arg(long, allow_hyphen_values = true)]
    pub phi0: Option<String>,
    #[arg(long)]
    pub rtol: Option<f64>,
    #[arg(long)]
    pub atol: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct GridArgs {
    /// `start,end`
    #[arg(long, allow_hyphen_values = true)]
    pub x_range: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub t_range: Option<String>,
    #[arg(long)]
    pub nx: Option<usize>,
    #[arg(long)]
    pub nt: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Verify {
    /// FD residual of the n-th equation on a sheet.
    Pde {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Distance between the two orders of flowing to (x, t).
    Commute {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        x: f64,
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        t: f64,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Compare FD values of f̂ₘ with Rₘ for m = 1..=n.
    Trace {
        #[command(flatten)]
        common: Common,
        /// FD spacing in x.
        #[arg(long)]
        h: Option<f64>,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Evolve the Weyl matrix at z and z̄ over [0, t].
    WeylSym {
        #[command(flatten)]
        common: Common,
        /// `re,im`
        #[arg(long, default_value = "-1,0", allow_hyphen_values = true)]
        z: String,
        #[arg(long, default_value_t = 1.0)]
        t: f64,
        #[arg(long, default_value_t = 11)]
        samples: usize,
        /// Probe width for the P entries.
        #[arg(long)]
        h: Option<f64>,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Re G(λ+iδ) as δ decreases.
    Reflectionless {
        #[command(flatten)]
        common: Common,
        #[arg(long, allow_hyphen_values = true)]
        lambda: f64,
        /// Comma-separated δ values.
        #[arg(long)]
        deltas: Option<String>,
    },
    /// Residual of the large-|z| expansion of G along z = −r.
    Asymptotics {
        #[command(flatten)]
        common: Common,
    },
    /// Sampled Jacobian and Lipschitz checks of Ξ.
    Bounds {
        spectrum: PathBuf,
        #[arg(long, default_value_t = 1)]
        n: u32,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long, default_value_t = 1e-5)]
        h: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Args)]
pub struct QpArgs {
    /// QPData JSON; the built-in example when omitted.
    pub data: Option<PathBuf>,
    /// Overrides the label cutoff.
    #[arg(long)]
    pub mmax: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Qp {
    /// Small-divisor condition on the frequency vector.
    Dio {
        #[command(flatten)]
        args: QpArgs,
        /// Use the distance to the nearest integer.
        #[arg(long)]
        nearest: bool,
    },
    /// Build the gap model and run its inequality checks.
    Synth {
        #[command(flatten)]
        args: QpArgs,
    },
    /// Bound chain and direct checker for the synthesized model.
    CraigApp {
        #[command(flatten)]
        args: QpArgs,
        #[arg(long, default_value_t = 1)]
        n: u32,
    },
}

/// Result of a command that ran to completion.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub artifact: String,
    pub pass: bool,
    pub status: String,
}

impl Report {
    fn new(artifact: String, pass: bool, status: String) -> Self {
        Report { artifact, pass, status }
    }

    fn info(artifact: String, status: String) -> Self {
        Report { artifact, pass: true, status }
    }
}

/// Parses `args` (including the program name), runs the command and returns
/// the exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let out = output_path(&cli.command).map(Path::to_path_buf);
    match run(&cli.command) {
        Ok(r) => {
            if let Err(e) = emit(out.as_deref(), &r.artifact) {
                eprintln!("error: {e}");
                return 1;
            }
            eprintln!("{} {}", if r.pass { "PASS" } else { "FAIL" }, r.status);
            if r.pass {
                0
            } else {
                2
            }
        }
        Err(Error::ModelInconsistent(msg)) => {
            eprintln!("FAIL gap model inconsistent: {msg}");
            2
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn output_path(c: &Command) -> Option<&Path> {
    let p = match c {
        Command::Hierarchy { out, .. } | Command::CheckCraig { out, .. } => out,
        Command::Flow { common, .. } | Command::Sheet { common, .. } => &common.out,
        Command::Verify(v) => match v {
            Verify::Pde { common, .. }
            | Verify::Commute { common, .. }
            | Verify::Trace { common, .. }
            | Verify::WeylSym { common, .. }
            | Verify::Reflectionless { common, .. }
            | Verify::Asymptotics { common } => &common.out,
            Verify::Bounds { out, .. } => out,
        },
        Command::Qp(q) => match q {
            Qp::Dio { args, .. } | Qp::Synth { args } | Qp::CraigApp { args, .. } => &args.out,
        },
    };
    p.as_deref()
}

/// Writes `content` to `path` through a sibling temporary file and a rename,
/// or to stdout.
pub fn emit(path: Option<&Path>, content: &str) -> Result<()> {
    let Some(path) = path else {
        let mut s = std::io::stdout().lock();
        s.write_all(content.as_bytes())?;
        return Ok(s.flush()?);
    };
    let name = path.file_name().ok_or_else(|| Error::Io(format!("not a file path: {}", path.display())))?;
    let mut tmp_name = std::ffi::OsString::from(".");
    tmp_name.push(name);
    tmp_name.push(format!(".{}.tmp", std::process::id()));
    let tmp = path.with_file_name(tmp_name);
    fs::write(&tmp, content)?;
    fs::rename(&tmp, path).inspect_err(|_| {
        let _ = fs::remove_file(&tmp);
    })?;
    Ok(())
}

/// Runs one command without touching the filesystem beyond reading inputs.
pub fn run(command: &Command) -> Result<Report> {
    match command {
        Command::Hierarchy { n, .. } => Ok(hierarchy_text(*n)),
        Command::CheckCraig { spectrum, n, .. } => {
            let set = load_spectrum(spectrum)?;
            let r = check_craig(&set, *n);
            let status = format!("craig-type conditions at n = {n}");
            Ok(Report::new(to_json(&r), r.pass, status))
        }
        Command::Flow { common, x, t } => {
            let ctx = Context::load(common, 1e-10)?;
            let mid = flow(&ctx.set, ctx.n, &ctx.phi0, Direction::X, *x, ctx.opts)?;
            let end = flow(&ctx.set, ctx.n, &mid, Direction::T, *t, ctx.opts)?;
            Ok(Report::info(end.to_json() + "\n", format!("flowed to x = {x}, t = {t}")))
        }
        Command::Sheet { common, grid } => {
            let ctx = Context::load(common, 1e-10)?;
            let (gx, gt) = grid.grids((0.0, 1.0, 64), (0.0, 1.0, 16))?;
            let sheet = solve_sheet(&ctx.set, ctx.n, &ctx.phi0, gx, gt, ctx.opts)?;
            let status = format!("{} × {} sheet, {} steps", gx.count, gt.count, sheet.stats.steps);
            Ok(Report::info(sheet.to_csv(), status))
        }
        Command::Verify(v) => run_verify(v),
        Command::Qp(q) => run_qp(q),
    }
}

fn hierarchy_text(n: u32) -> Report {
    let n = n as usize;
    let r = zero_curvature_residual(n);
    let mut s = String::new();
    s.push_str(&format!("fhat_{} = {}\n", n + 1, fhat(n + 1)));
    s.push_str(&format!("kdv_rhs_{n} = {}\n", kdv_rhs(n)));
    for i in 1..=2 {
        for j in 1..=2 {
            s.push_str(&format!("residual[{i},{j}] = {}\n", r.get(i, j)));
        }
    }
    Report::info(s, format!("hierarchy at n = {n}"))
}

fn run_verify(v: &Verify) -> Result<Report> {
    match v {
        Verify::Pde { common, grid, tol } => {
            let ctx = Context::load(common, 1e-12)?;
            let tol = positive(tol.unwrap_or(1e-4), "tol")?;
            let (gx, gt) = grid.grids((0.0, 10.22, 512), (0.0, 0.315, 64))?;
            let sheet = solve_sheet(&ctx.set, ctx.n, &ctx.phi0, gx, gt, ctx.opts)?;
            let r = verify_pde(&sheet, PdeOptions::default())?;
            let pass = r.max <= tol;
            let art = json!({ "residual": r, "threshold": tol, "pass": pass });
            Ok(Report::new(art.to_string() + "\n", pass, format!("pde residual {:.3e} (threshold {tol:e})", r.max)))
        }
        Verify::Commute { common, x, t, tol } => {
            let ctx = Context::load(common, 1e-10)?;
            let tol = positive(tol.unwrap_or(1e-8), "tol")?;
            let d = verify_commute(&ctx.set, ctx.n, &ctx.phi0, *x, *t, ctx.opts)?;
            let pass = d <= tol;
            let art = json!({ "x": x, "t": t, "discrepancy": d, "threshold": tol, "pass": pass });
            Ok(Report::new(art.to_string() + "\n", pass, format!("commute discrepancy {d:.3e} (threshold {tol:e})")))
        }
        Verify::Trace { common, h, tol } => {
            let ctx = Context::load(common, 1e-13)?;
            let tol = positive(tol.unwrap_or(1e-5), "tol")?;
            let h = positive(h.unwrap_or(1e-3), "h")?;
            let d = verify_trace_identity(&ctx.set, ctx.n, &ctx.phi0, h, ctx.opts)?;
            let worst = d.iter().copied().fold(0.0, f64::max);
            let pass = d.iter().all(|x| *x <= tol);
            let art = json!({ "discrepancy": d, "threshold": tol, "pass": pass });
            Ok(Report::new(art.to_string() + "\n", pass, format!("trace discrepancy {worst:.3e} (threshold {tol:e})")))
        }
        Verify::WeylSym { common, z, t, samples, h, tol } => {
            let ctx = Context::load(common, 1e-12)?;
            let z = parse_complex(z)?;
            let tol = positive(tol.unwrap_or(1e-6), "tol")?;
            let mut opts = EvolveOptions { flow: ctx.opts, ..EvolveOptions::default() };
            if let Some(h) = h {
                opts.probe = positive(*h, "h")?;
            }
            if *samples == 0 {
                return Err(Error::InvalidParameter("samples must be positive".into()));
            }
            weyl_sym(&ctx, z, *t, *samples, opts, tol)
        }
        Verify::Reflectionless { common, lambda, deltas } => {
            let ctx = Context::load(common, 1e-10)?;
            let ds = match deltas {
                Some(s) => parse_list(s)?,
                None => DEFAULT_DELTAS.to_vec(),
            };
            let r = verify_reflectionless(&ctx.set, &ctx.phi0, *lambda, &ds)?;
            let where_ = if r.in_gap { "gap" } else { "band" };
            let status = format!("reflectionless at λ = {lambda} ({where_}), extrapolated {:.3e}", r.extrapolated);
            Ok(Report::new(r.to_csv(), r.pass, status))
        }
        Verify::Asymptotics { common } => {
            let ctx = Context::load(common, 1e-10)?;
            let r = verify_green_asymptotics(&ctx.set, ctx.n, &ctx.phi0, &default_radii())?;
            let status = match r.exponent {
                Some(e) => format!("asymptotic residual exponent {e:.3} (need ≥ {})", ctx.n as f64 + 0.8),
                None => "asymptotic residual vanishes".to_string(),
            };
            Ok(Report::new(r.to_csv(), r.pass, status))
        }
        Verify::Bounds { spectrum, n, samples, seed, h, .. } => {
            let set = load_spectrum(spectrum)?;
            let r = sample_bounds(&set, *n, *samples, *seed, *h)?;
            let status = format!(
                "{} jacobian and {} lipschitz violations over {} samples",
                r.jacobian_violations, r.lipschitz_violations, r.samples
            );
            Ok(Report::new(to_json(&r), r.pass, status))
        }
    }
}

#[derive(Serialize)]
struct WeylRow {
    t: f64,
    symmetry: f64,
    flowed: f64,
    det_defect: f64,
}

fn weyl_sym(ctx: &Context, z: Complex64, t_end: f64, samples: usize, opts: EvolveOptions, tol: f64) -> Result<Report> {
    let fwd = evolve_m(&ctx.set, ctx.n, &ctx.phi0, z, t_end, samples, opts)?;
    let bwd = evolve_m(&ctx.set, ctx.n, &ctx.phi0, z.conj(), t_end, samples, opts)?;
    let mut rows = Vec::with_capacity(samples);
    for (a, b) in fwd.iter().zip(&bwd) {
        let state = DirichletState::new(&ctx.set, a.phi.clone())?;
        let direct = weyl_matrix(&ctx.set, &state, z)?;
        rows.push(WeylRow {
            t: a.t,
            symmetry: b.matrix.conj().max_difference(&a.matrix),
            flowed: direct.max_difference(&a.matrix),
            det_defect: a.matrix.determinant_defect(),
        });
    }
    let worst = |f: fn(&WeylRow) -> f64| rows.iter().map(f).fold(0.0, f64::max);
    let (sym, flowed, det) = (worst(|r| r.symmetry), worst(|r| r.flowed), worst(|r| r.det_defect));
    let pass = sym <= tol && flowed <= tol && det <= DET_TOL;
    let mut csv = String::from("t,symmetry,flowed,det_defect\n");
    for r in &rows {
        csv.push_str(&format!("{},{},{},{}\n", r.t, r.symmetry, r.flowed, r.det_defect));
    }
    let summary = json!({
        "z": [z.re, z.im], "n": ctx.n, "symmetry": sym, "flowed": flowed,
        "det_defect": det, "threshold": tol, "det_threshold": DET_TOL, "pass": pass,
    });
    csv.push_str(&summary.to_string());
    csv.push('\n');
    let status = format!("weyl symmetry {sym:.3e}, flowed {flowed:.3e}, det {det:.3e}");
    Ok(Report::new(csv, pass, status))
}

fn run_qp(q: &Qp) -> Result<Report> {
    match q {
        Qp::Dio { args, nearest } => {
            let qp = args.load()?;
            let r = diophantine_check(&qp.omega, qp.a0, qp.b0, qp.mmax, *nearest)?;
            let status = format!("diophantine margin {:.3e} over {} vectors", r.margin, r.checked);
            Ok(Report::new(to_json(&r), r.pass, status))
        }
        Qp::Synth { args } => {
            let qp = args.load()?;
            let s = synthesize_gapmodel(&qp)?;
            let pass = s.checks.iter().all(|c| c.pass);
            let art = json!({ "synthesis": s, "spectrum": SpectrumFile::from(&s.model) });
            let status = format!("gap model a = {:.4}, b = {:.4}, F = {:.4}", s.a, s.b, s.f);
            Ok(Report::new(pretty(&art), pass, status))
        }
        Qp::CraigApp { args, n } => {
            let qp = args.load()?;
            let s = synthesize_gapmodel(&qp)?;
            let r = check_craig_app(&s, *n);
            let status = format!("application chain at n = {n}");
            Ok(Report::new(to_json(&r), r.pass, status))
        }
    }
}

impl QpArgs {
    fn load(&self) -> Result<QPData> {
        let mut qp = match &self.data {
            Some(p) => QPData::from_json(&read(p)?)?,
            None => QPData::example(50),
        };
        if let Some(m) = self.mmax {
            qp.mmax = m;
        }
        qp.validate()?;
        Ok(qp)
    }
}

/// Loaded inputs shared by the flow-based commands.
struct Context {
    set: GapSet,
    n: u32,
    phi0: DirichletState,
    opts: FlowOptions,
}

impl Context {
    fn load(c: &Common, default_tol: f64) -> Result<Self> {
        let set = load_spectrum(&c.spectrum)?;
        let phi0 = match &c.phi0 {
            Some(s) => parse_phi(&set, s)?,
            None => DirichletState::uniform(&set, 1.0)?,
        };
        let opts = FlowOptions {
            rtol: positive(c.rtol.unwrap_or(default_tol), "rtol")?,
            atol: positive(c.atol.unwrap_or(default_tol), "atol")?,
        };
        Ok(Context { set, n: c.n, phi0, opts })
    }
}

impl GridArgs {
    fn grids(&self, x: (f64, f64, usize), t: (f64, f64, usize)) -> Result<(Grid, Grid)> {
        let axis = |range: &Option<String>, count: Option<usize>, d: (f64, f64, usize)| -> Result<Grid> {
            let (a, b) = match range {
                Some(s) => parse_pair(s)?,
                None => (d.0, d.1),
            };
            let n = count.unwrap_or(d.2);
            if n == 1 {
                return Ok(Grid::single(a));
            }
            Grid::new(a, b, n)
        };
        Ok((axis(&self.x_range, self.nx, x)?, axis(&self.t_range, self.nt, t)?))
    }
}

fn read(p: &Path) -> Result<String> {
    fs::read_to_string(p).map_err(|e| Error::Io(format!("{}: {e}", p.display())))
}

fn load_spectrum(p: &Path) -> Result<GapSet> {
    GapSet::from_json(&read(p)?)
}

/// Inline JSON array, or a path to a file holding one.
fn parse_phi(set: &GapSet, s: &str) -> Result<DirichletState> {
    let text = if s.trim_start().starts_with('[') { s.to_string() } else { read(Path::new(s))? };
    let st = DirichletState::from_json(&text)?;
    st.check(set)?;
    Ok(st)
}

fn parse_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| Error::Parse(format!("{p:?}: {e}"))))
        .collect()
}

fn parse_pair(s: &str) -> Result<(f64, f64)> {
    match parse_list(s)?.as_slice() {
        [a, b] if a.is_finite() && b.is_finite() => Ok((*a, *b)),
        _ => Err(Error::Parse(format!("expected two finite numbers, got {s:?}"))),
    }
}

fn parse_complex(s: &str) -> Result<Complex64> {
    let (re, im) = parse_pair(s)?;
    Ok(Complex64::new(re, im))
}

fn positive(x: f64, name: &str) -> Result<f64> {
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(Error::InvalidParameter(format!("{name} must be positive, got {x}")))
    }
}

fn to_json<T: Serialize>(v: &T) -> String {
    pretty(&serde_json::to_value(v).expect("report serializes"))
}

fn pretty(v: &serde_json::Value) -> String {
    serde_json::to_string_pretty(v).expect("value serializes") + "\n"
}
