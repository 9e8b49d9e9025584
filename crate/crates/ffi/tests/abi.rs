use std::ffi::{c_char, c_int, CStr, CString};
use std::process::Command;
use std::ptr;

use dubrovin_ffi::*;

fn last_error() -> String {
    unsafe {
        let need = dubrovin_last_error(ptr::null_mut(), 0);
        let mut buf = vec![0 as c_char; need];
        assert_eq!(dubrovin_last_error(buf.as_mut_ptr(), need), need);
        CStr::from_ptr(buf.as_ptr()).to_string_lossy().into_owned()
    }
}

fn one_gap() -> *mut DubrovinGapSet {
    let mut set = ptr::null_mut();
    let edges = [1.0, 2.0];
    assert_eq!(unsafe { dubrovin_gapset_new(0.0, edges.as_ptr(), 1, &mut set) }, DubrovinStatus::Ok);
    set
}

#[test]
fn round_trip_through_handles() {
    let set = one_gap();
    unsafe {
        let mut len = 0;
        assert_eq!(dubrovin_gapset_len(set, &mut len), DubrovinStatus::Ok);
        assert_eq!(len, 1);

        // φ = π/2 puts μ at the gap midpoint: q = 0 + 1 + 2 − 3 = 0
        let phi = [std::f64::consts::FRAC_PI_2];
        let mut q = f64::NAN;
        assert_eq!(dubrovin_trace_q(set, phi.as_ptr(), 1, &mut q, ptr::null_mut()), DubrovinStatus::Ok);
        assert_eq!(q, 0.0);

        // n = 0 time flow equals the x flow
        let mut a = [0.7];
        let mut b = [0.7];
        assert_eq!(dubrovin_flow(set, 0, 0, 0.5, 1e-11, 1e-11, a.as_ptr(), a.as_mut_ptr(), 1), DubrovinStatus::Ok);
        assert_eq!(dubrovin_flow(set, 0, 1, 0.5, 1e-11, 1e-11, b.as_ptr(), b.as_mut_ptr(), 1), DubrovinStatus::Ok);
        assert!((a[0] - b[0]).abs() < 1e-12 && a[0] != 0.7);

        // G(−1) = ½·(1)^{−½}·(μ+1)/(√2·√3) with μ = 1.5
        let (mut re, mut im) = (0.0, 0.0);
        assert_eq!(dubrovin_green(set, phi.as_ptr(), 1, -1.0, 0.0, &mut re, &mut im), DubrovinStatus::Ok);
        assert!((re - 0.5 * 2.5 / 6f64.sqrt()).abs() < 1e-15 && im == 0.0);

        let mut pass: c_int = -1;
        assert_eq!(dubrovin_check_craig(set, 2, &mut pass), DubrovinStatus::Ok);
        assert_eq!(pass, 1);
        dubrovin_gapset_free(set);
    }
}

#[test]
fn errors_are_reported() {
    unsafe {
        let mut set = ptr::null_mut();
        let bad = [2.0, 1.0];
        assert_eq!(dubrovin_gapset_new(0.0, bad.as_ptr(), 1, &mut set), DubrovinStatus::InvalidInput);
        assert!(set.is_null());
        assert!(last_error().contains("empty or inverted"));

        let json = CString::new(r#"{"e_low": 0, "gaps": [[1, 2]"#).unwrap();
        assert_eq!(dubrovin_gapset_from_json(json.as_ptr(), &mut set), DubrovinStatus::InvalidInput);
        assert!(last_error().starts_with("parse error"));

        assert_eq!(dubrovin_gapset_len(ptr::null(), &mut 0), DubrovinStatus::NullPointer);
        assert_eq!(last_error(), "gap set is null");

        let set = one_gap();
        let phi = [0.1, 0.2];
        let mut q = 0.0;
        assert_eq!(dubrovin_trace_q(set, phi.as_ptr(), 2, &mut q, ptr::null_mut()), DubrovinStatus::InvalidInput);
        let mut out = [0.0];
        assert_eq!(dubrovin_flow(set, 1, 7, 1.0, 1e-10, 1e-10, phi.as_ptr(), out.as_mut_ptr(), 1), DubrovinStatus::InvalidInput);
        let (mut re, mut im) = (0.0, 0.0);
        assert_eq!(dubrovin_green(set, phi.as_ptr(), 1, 0.5, 0.0, &mut re, &mut im), DubrovinStatus::InvalidInput);
        assert!(last_error().contains("on the spectrum"));

        // success clears the message
        let mut len = 0;
        assert_eq!(dubrovin_gapset_len(set, &mut len), DubrovinStatus::Ok);
        assert_eq!(last_error(), "");
        dubrovin_gapset_free(set);
        dubrovin_gapset_free(ptr::null_mut());
    }
}

#[test]
fn divergent_tail_status() {
    let json = CString::new(
        r#"{"e_low": 0, "gaps": [], "tail": {"kind": "pow", "A": 1, "rate": 0.5,
            "position": {"kind": "power", "c": 1, "exponent": 1}, "start": 2}}"#,
    )
    .unwrap();
    unsafe {
        let mut set = ptr::null_mut();
        assert_eq!(dubrovin_gapset_from_json(json.as_ptr(), &mut set), DubrovinStatus::Ok);
        let mut q = 0.0;
        assert_eq!(dubrovin_trace_q(set, ptr::null(), 0, &mut q, ptr::null_mut()), DubrovinStatus::Divergent);
        dubrovin_gapset_free(set);
    }
}

#[test]
fn version_string() {
    let v = unsafe { CStr::from_ptr(dubrovin_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn header_compiles_as_c() {
    let dir = env!("CARGO_MANIFEST_DIR");
    let header = format!("{dir}/include/dubrovin.h");
    let text = std::fs::read_to_string(&header).expect("generated header");
    for name in ["dubrovin_gapset_new", "dubrovin_flow", "dubrovin_last_error", "DUBROVIN_STATUS_DIVERGENT"] {
        assert!(text.contains(name), "{name} missing from header");
    }
    let src = format!("{}/probe.c", env!("CARGO_TARGET_TMPDIR"));
    std::fs::write(
        &src,
        "#include \"dubrovin.h\"\n\
         int probe(void) {\n\
           DubrovinGapSet *s = 0; double e[2] = {1.0, 2.0}; size_t n = 0;\n\
           if (dubrovin_gapset_new(0.0, e, 1, &s) != DUBROVIN_STATUS_OK) return 1;\n\
           dubrovin_gapset_len(s, &n); dubrovin_gapset_free(s);\n\
           return (int)n;\n\
         }\n",
    )
    .unwrap();
    let Ok(out) = Command::new("cc").args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I", &format!("{dir}/include"), &src]).output() else {
        eprintln!("no C compiler; header syntax check skipped");
        return;
    };
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}
