use std::ffi::{CStr, CString};
use std::ptr;

use herdsim_ffi::*;

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(herd_last_error()) }.to_string_lossy().into_owned()
}

fn bundled(name: &str) -> *mut HerdSession {
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { herd_session_bundled(c(name).as_ptr(), &mut s) }, HerdStatus::Ok);
    assert!(!s.is_null());
    s
}

#[test]
fn exact_probability_round_trip() {
    let s = bundled("herd-witness");
    let mut v = 0.0;
    let mut text = ptr::null_mut();
    let st = unsafe { herd_exact_probability(s, c("herd-by:3").as_ptr(), ptr::null(), 0, &mut v, &mut text) };
    assert_eq!(st, HerdStatus::Ok);
    assert_eq!(unsafe { CStr::from_ptr(text) }.to_str().unwrap(), "16553/32768");
    assert!((v - 16553.0 / 32768.0).abs() < 1e-15);
    assert_eq!(last_error(), "");
    unsafe {
        herd_string_free(text);
        herd_session_free(s);
    }
}

#[test]
fn conditional_probability() {
    let s = bundled("appendix");
    let mut v = -1.0;
    let st = unsafe {
        herd_exact_probability(s, c("informative:3").as_ptr(), c("always").as_ptr(), 0, &mut v, ptr::null_mut())
    };
    assert_eq!(st, HerdStatus::Ok);
    assert_eq!(v, 1.0);
    unsafe { herd_session_free(s) };
}

#[test]
fn session_from_toml_and_errors() {
    let toml = "[model]\nvariant = \"baseline\"\np0 = \"1/2\"\npS = \"1/16\"\nQ = \"9/256\"\nq = \"33/64\"\n";
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { herd_session_new(c(toml).as_ptr(), &mut s) }, HerdStatus::Ok);
    assert_eq!(unsafe { herd_session_horizon(s) }, 10);
    unsafe { herd_session_free(s) };

    let mut s = ptr::null_mut();
    assert_eq!(unsafe { herd_session_new(c("nonsense [").as_ptr(), &mut s) }, HerdStatus::ParseError);
    assert!(s.is_null());
    assert!(!last_error().is_empty());

    let bad = toml.replace("Q = \"9/256\"", "Q = \"1/64\"");
    assert_eq!(unsafe { herd_session_new(c(&bad).as_ptr(), &mut s) }, HerdStatus::ConstraintViolation);
    assert!(last_error().contains("Q > pS/2"), "{}", last_error());

    assert_eq!(unsafe { herd_session_new(ptr::null(), &mut s) }, HerdStatus::NullPointer);
    assert_eq!(unsafe { herd_session_new(c(toml).as_ptr(), ptr::null_mut()) }, HerdStatus::NullPointer);
    let invalid = [0xffu8, 0xfe, 0];
    assert_eq!(unsafe { herd_session_new(invalid.as_ptr().cast(), &mut s) }, HerdStatus::InvalidUtf8);
}

#[test]
fn horizon_and_argument_errors() {
    let s = bundled("example1a");
    let mut v = 0.0;
    let st = unsafe { herd_exact_probability(s, c("herd:9").as_ptr(), ptr::null(), 4, &mut v, ptr::null_mut()) };
    assert_eq!(st, HerdStatus::HorizonError);
    let st = unsafe { herd_exact_probability(s, c("bogus").as_ptr(), ptr::null(), 0, &mut v, ptr::null_mut()) };
    assert_eq!(st, HerdStatus::InvalidArgument);
    let st = unsafe { herd_discounted_correct(s, c("3/2").as_ptr(), 0, &mut v) };
    assert_eq!(st, HerdStatus::InvalidArgument);
    let st = unsafe { herd_exact_probability(ptr::null(), c("always").as_ptr(), ptr::null(), 0, &mut v, ptr::null_mut()) };
    assert_eq!(st, HerdStatus::NullPointer);
    unsafe { herd_session_free(s) };
}

#[test]
fn json_outputs_parse() {
    let s = bundled("example1a");
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { herd_check_conditions_json(s, 0, &mut out) }, HerdStatus::Ok);
    let v: serde_json::Value = serde_json::from_str(unsafe { CStr::from_ptr(out) }.to_str().unwrap()).unwrap();
    assert!(v["groups"].as_array().is_some_and(|g| !g.is_empty()));
    unsafe { herd_string_free(out) };

    assert_eq!(unsafe { herd_trace_json(s, c("LR").as_ptr(), &mut out) }, HerdStatus::Ok);
    let v: serde_json::Value = serde_json::from_str(unsafe { CStr::from_ptr(out) }.to_str().unwrap()).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 3);
    unsafe { herd_string_free(out) };

    assert_eq!(unsafe { herd_trace_json(s, c("LQ").as_ptr(), &mut out) }, HerdStatus::InvalidArgument);
    unsafe { herd_session_free(s) };
}

#[test]
fn monte_carlo_and_discounted() {
    let s = bundled("herd-witness");
    let mut r = HerdMonteCarlo::default();
    assert_eq!(unsafe { herd_monte_carlo(s, c("herd-by:3").as_ptr(), 0, 20_000, 5, &mut r) }, HerdStatus::Ok);
    assert_eq!(r.runs, 20_000);
    let p = 16553.0 / 32768.0;
    assert!((r.frequency - p).abs() < 4.0 * (p * (1.0 - p) / 20_000.0f64).sqrt());
    assert!(r.ci_low < p && p < r.ci_high);
    assert_eq!(unsafe { herd_monte_carlo(s, c("always").as_ptr(), 0, 0, 5, &mut r) }, HerdStatus::InvalidArgument);

    let mut d = 0.0;
    assert_eq!(unsafe { herd_discounted_correct(s, c("9/10").as_ptr(), 6, &mut d) }, HerdStatus::Ok);
    assert!(d > 0.5 && d < 1.0);
    unsafe { herd_session_free(s) };
}

#[test]
fn version_and_null_frees() {
    let v = unsafe { CStr::from_ptr(herd_version()) }.to_str().unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
    unsafe {
        herd_session_free(ptr::null_mut());
        herd_string_free(ptr::null_mut());
    }
    assert_eq!(unsafe { herd_session_horizon(ptr::null()) }, 0);
}

#[test]
fn header_declares_every_export() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/herdsim.h")).unwrap();
    for name in [
        "herd_session_new",
        "herd_session_bundled",
        "herd_session_free",
        "herd_session_horizon",
        "herd_exact_probability",
        "herd_check_conditions_json",
        "herd_trace_json",
        "herd_monte_carlo",
        "herd_discounted_correct",
        "herd_string_free",
        "herd_last_error",
        "herd_version",
        "HERD_STATUS_CONSTRAINT_VIOLATION = -4",
        "typedef struct HerdSession HerdSession;",
    ] {
        assert!(header.contains(name), "missing {name}");
    }
}

#[test]
fn header_compiles_as_c() {
    let Ok(status) = std::process::Command::new("cc")
        .args(["-fsyntax-only", "-Wall", "-Werror", "-x", "c"])
        .arg(concat!(env!("CARGO_MANIFEST_DIR"), "/include/herdsim.h"))
        .status()
    else {
        eprintln!("no C compiler; skipped");
        return;
    };
    assert!(status.success());
}
