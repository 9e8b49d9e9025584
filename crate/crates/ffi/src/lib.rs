//! C ABI over the `dubrovin` crate.
//!
//! Every entry point returns a [`DubrovinStatus`]. On failure the message is
//! kept per thread and can be copied out with [`dubrovin_last_error`]. Gap sets
//! are opaque handles created by the constructors below and released with
//! [`dubrovin_gapset_free`].

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};

use dubrovin::dirichlet::DirichletState;
use dubrovin::integrator::{flow, Direction, FlowOptions};
use dubrovin::moments::trace_q;
use dubrovin::spectrum::{check_craig, GapSet};
use dubrovin::weyl::green_diag;
use dubrovin::Error;
use num_complex::Complex64;

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DubrovinStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    Divergent = 3,
    NumericalFailure = 4,
    Panic = 5,
}

/// Opaque gap set.
pub struct DubrovinGapSet {
    inner: GapSet,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(e: &Error) -> DubrovinStatus {
    match e {
        Error::Divergent(_) => DubrovinStatus::Divergent,
        Error::StepUnderflow { .. } => DubrovinStatus::NumericalFailure,
        _ => DubrovinStatus::InvalidInput,
    }
}

/// Runs `f`, recording errors and converting panics.
fn guard(f: impl FnOnce() -> Result<(), (DubrovinStatus, String)>) -> DubrovinStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error(String::new());
            DubrovinStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            DubrovinStatus::Panic
        }
    }
}

fn lib<T>(r: dubrovin::Result<T>) -> Result<T, (DubrovinStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (DubrovinStatus, String) {
    (DubrovinStatus::NullPointer, format!("{what} is null"))
}

/// # Safety
/// `ptr` must be null or valid for `len` reads.
unsafe fn slice<'a>(ptr: *const f64, len: usize, what: &str) -> Result<&'a [f64], (DubrovinStatus, String)> {
    if len == 0 {
        return Ok(&[]);
    }
    if ptr.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(ptr, len))
}

/// # Safety
/// `ptr` must be null or valid for `len` writes.
unsafe fn slice_mut<'a>(ptr: *mut f64, len: usize, what: &str) -> Result<&'a mut [f64], (DubrovinStatus, String)> {
    if len == 0 {
        return Ok(&mut []);
    }
    if ptr.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts_mut(ptr, len))
}

/// # Safety
/// `set` must be null or a live handle.
unsafe fn handle<'a>(set: *const DubrovinGapSet) -> Result<&'a GapSet, (DubrovinStatus, String)> {
    set.as_ref().map(|h| &h.inner).ok_or_else(|| null("gap set"))
}

fn angles(set: &GapSet, phi: &[f64]) -> Result<DirichletState, (DubrovinStatus, String)> {
    lib(DirichletState::new(set, phi.to_vec()))
}

/// Copies the calling thread's last error message (NUL-terminated) into `buf`.
/// Returns the buffer size needed including the terminator; nothing is written
/// when `len` is smaller than that.
///
/// # Safety
/// `buf` must be null or valid for `len` writes.
#[no_mangle]
pub unsafe extern "C" fn dubrovin_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let need = e.len() + 1;
        if !buf.is_null() && len >= need {
            std::ptr::copy_nonoverlapping(e.as_ptr(), buf.cast::<u8>(), e.len());
            *buf.add(e.len()) = 0;
        }
        need
    })
}

/// Builds a gap set from spectrum JSON.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn dubrovin_gapset_from_json(json: *const c_char, out: *mut *mut DubrovinGapSet) -> DubrovinStatus {
    guard(|| {
        if json.is_null() {
            return Err(null("json"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let text = CStr::from_ptr(json)
            .to_str()
            .map_err(|e| (DubrovinStatus::InvalidInput, format!("json is not UTF-8: {e}")))?;
        let inner = lib(GapSet::from_json(text))?;
        *out = Box::into_raw(Box::new(DubrovinGapSet { inner }));
        Ok(())
    })
}

/// Builds a finite gap set from `count` pairs `edges[2j], edges[2j+1]`.
///
/// # Safety
/// `edges` must be valid for `2·count` reads; `out` must be valid for one write.
#[no_mangle]
pub unsafe extern "C" fn dubrovin_gapset_new(
    e_low: f64,
    edges: *const f64,
    count: usize,
    out: *mut *mut DubrovinGapSet,
) -> DubrovinStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let e = slice(edges, 2 * count, "edges")?;
        let raw: Vec<(f64, f64)> = e.chunks_exact(2).map(|p| (p[0], p[1])).collect();
        let inner = lib(GapSet::finite(e_low, &raw))?;
        *out = Box::into_raw(Box::new(DubrovinGapSet { inner }));
        Ok(())
    })
}

/// Releases a handle; null is ignored.
///
/// # Safety
/// `set` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn dubrovin_gapset_free(set: *mut DubrovinGapSet) {
    if !set.is_null() {
        drop(Box::from_raw(set));
    }
}

/// Number of explicit gaps (the length of a Dirichlet angle vector).
///
/// # Safety
/// `set` must be a live handle; `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn dubrovin_gapset_len(set: *const DubrovinGapSet, out: *mut usize) -> DubrovinStatus {
    guard(|| {
        let s = handle(set)?;
        let o = out.as_mut().ok_or_else(|| null("out"))?;
        *o = s.len();
        Ok(())
    })
}

/// Potential `q` from Dirichlet angles; `tail_bound` may be null.
///
/// # Safety
/// `phi` valid for `count` reads; `q` valid for one write; `tail_bound` null or valid.
#[no_mangle]
pub unsafe extern "C" fn dubrovin_trace_q(
    set: *const DubrovinGapSet,
    phi: *const f64,
    count: usize,
    q: *mut f64,
    tail_bound: *mut f64,
) -> DubrovinStatus {
    guard(|| {
        let s = handle(set)?;
        let st = angles(s, slice(phi, count, "phi")?)?;
        let out = q.as_mut().ok_or_else(|| null("q"))?;
        let b = lib(trace_q(s, &st))?;
        *out = b.value;
        if let Some(t) = tail_bound.as_mut() {
            *t = b.tail_bound;
        }
        Ok(())
    })
}

/// Advances angles along the translation flow (`direction` 0) or the n-th
/// hierarchy flow (`direction` 1) by `span`.
///
/// # Safety
/// `phi_in` and `phi_out` valid for `count` elements (they may alias).
#[no_mangle]
pub unsafe extern "C" fn dubrovin_flow(
    set: *const DubrovinGapSet,
    n: u32,
    direction: c_int,
    span: f64,
    rtol: f64,
    atol: f64,
    phi_in: *const f64,
    phi_out: *mut f64,
    count: usize,
) -> DubrovinStatus {
    guard(|| {
        let s = handle(set)?;
        let dir = match direction {
            0 => Direction::X,
            1 => Direction::T,
            d => return Err((DubrovinStatus::InvalidInput, format!("direction must be 0 or 1, got {d}"))),
        };
        let st = angles(s, slice(phi_in, count, "phi_in")?)?;
        let end = lib(flow(s, n, &st, dir, span, FlowOptions { rtol, atol }))?;
        slice_mut(phi_out, count, "phi_out")?.copy_from_slice(end.angles());
        Ok(())
    })
}

/// Diagonal Green's function `G(z)` at the given angles.
///
/// # Safety
/// `phi` valid for `count` reads; `re` and `im` valid for one write each.
#[no_mangle]
pub unsafe extern "C" fn dubrovin_green(
    set: *const DubrovinGapSet,
    phi: *const f64,
    count: usize,
    z_re: f64,
    z_im: f64,
    re: *mut f64,
    im: *mut f64,
) -> DubrovinStatus {
    guard(|| {
        let s = handle(set)?;
        let st = angles(s, slice(phi, count, "phi")?)?;
        let (r, i) = (re.as_mut().ok_or_else(|| null("re"))?, im.as_mut().ok_or_else(|| null("im"))?);
        let g = lib(green_diag(s, &st, Complex64::new(z_re, z_im)))?.value;
        *r = g.re;
        *i = g.im;
        Ok(())
    })
}

/// Writes 1 to `pass` when the moment and Craig-type conditions hold at `n`, else 0.
///
/// # Safety
/// `pass` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn dubrovin_check_craig(set: *const DubrovinGapSet, n: u32, pass: *mut c_int) -> DubrovinStatus {
    guard(|| {
        let s = handle(set)?;
        let p = pass.as_mut().ok_or_else(|| null("pass"))?;
        *p = c_int::from(check_craig(s, n).pass);
        Ok(())
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn dubrovin_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
