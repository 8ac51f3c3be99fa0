//! The C API exercised from Rust: ownership, status codes, error messages,
//! and the generated header's shape.

use std::ffi::{CStr, CString};
use std::ptr;
use toplab_ffi::*;

fn last_error() -> String {
    unsafe { CStr::from_ptr(toplab_last_error()) }
        .to_string_lossy()
        .into_owned()
}

fn simulate(json: &str) -> (ToplabStatus, *mut ToplabTrajectory) {
    let cfg = CString::new(json).unwrap();
    let mut tr: *mut ToplabTrajectory = ptr::null_mut();
    let status = unsafe { toplab_simulate_json(cfg.as_ptr(), &mut tr) };
    (status, tr)
}

#[test]
fn simulate_exposes_times_and_states() {
    let (status, tr) = simulate(r#"{"system":"euler-top","ic":[0.1,0.1,0.2],"t1":1.0,"dt":0.1}"#);
    assert_eq!(status, ToplabStatus::Ok);
    assert!(!tr.is_null());
    unsafe {
        let len = toplab_trajectory_len(tr);
        let dim = toplab_trajectory_dim(tr);
        assert_eq!(len, 11);
        assert_eq!(dim, 3);
        let times = std::slice::from_raw_parts(toplab_trajectory_times(tr), len);
        assert_eq!(times[0], 0.0);
        assert_eq!(times[len - 1], 1.0);
        let data = std::slice::from_raw_parts(toplab_trajectory_data(tr), len * dim);
        assert!((data[0] - 0.1).abs() <= 1e-15);
        assert!((data[2] - 0.2).abs() <= 1e-15);
        assert!(data.iter().all(|v| v.is_finite()));
        toplab_trajectory_free(tr);
    }
}

#[test]
fn null_and_malformed_arguments_report_cleanly() {
    let mut tr: *mut ToplabTrajectory = ptr::null_mut();
    let status = unsafe { toplab_simulate_json(ptr::null(), &mut tr) };
    assert_eq!(status, ToplabStatus::NullArgument);
    assert!(tr.is_null());

    let bad = c"\xff\xfe";
    let status = unsafe { toplab_simulate_json(bad.as_ptr(), &mut tr) };
    assert_eq!(status, ToplabStatus::InvalidUtf8);

    let (status, tr) = simulate(r#"{"system":"euler-top","ic":[0.1,0.1,0.2],"stepsize":0.5}"#);
    assert_eq!(status, ToplabStatus::InvalidConfig);
    assert!(tr.is_null());
    assert!(last_error().contains("stepsize"), "{}", last_error());

    let (status, _) = simulate(r#"{"system":"euler-top","ic":[0.1,0.1,0.2],"tau":1.0}"#);
    assert_eq!(status, ToplabStatus::InvalidConfig);
    assert!(last_error().contains("tau"), "{}", last_error());

    // accessors shrug at null handles
    unsafe {
        assert_eq!(toplab_trajectory_len(ptr::null()), 0);
        assert_eq!(toplab_trajectory_dim(ptr::null()), 0);
        assert!(toplab_trajectory_times(ptr::null()).is_null());
        assert!(toplab_trajectory_data(ptr::null()).is_null());
        toplab_trajectory_free(ptr::null_mut());
        toplab_string_free(ptr::null_mut());
    }
}

#[test]
fn verify_returns_the_json_report() {
    let name = CString::new("determinism").unwrap();
    let mut report: *mut std::os::raw::c_char = ptr::null_mut();
    let mut all_pass: i32 = -1;
    let status = unsafe { toplab_verify_suite(name.as_ptr(), &mut report, &mut all_pass) };
    assert_eq!(status, ToplabStatus::Ok);
    assert_eq!(all_pass, 1);
    let text = unsafe { CStr::from_ptr(report) }
        .to_str()
        .unwrap()
        .to_owned();
    unsafe { toplab_string_free(report) };
    let parsed: serde_json::Value = serde_json::from_str(&text).unwrap();
    let checks = parsed.as_array().unwrap();
    assert!(!checks.is_empty());
    assert!(checks.iter().all(|c| c["suite"] == "determinism"));

    let bogus = CString::new("spectral").unwrap();
    let status = unsafe { toplab_verify_suite(bogus.as_ptr(), &mut report, ptr::null_mut()) };
    assert_eq!(status, ToplabStatus::UnknownSuite);
    assert!(last_error().contains("spectral"));
}

#[test]
fn stochastic_config_runs_through_the_bindings() {
    let (status, tr) = simulate(
        r#"{"system":"pendulum-sde","theta0":1.0,"omega0":0.8,"level":0.5,
            "t0":1.0,"t1":2.0,"dt":0.0078125,"seed":42,"scheme":"milstein"}"#,
    );
    assert_eq!(status, ToplabStatus::Ok);
    unsafe {
        assert_eq!(toplab_trajectory_len(tr), 129);
        assert_eq!(toplab_trajectory_dim(tr), 2);
        toplab_trajectory_free(tr);
    }

    let (status2, tr2) = simulate(
        r#"{"system":"pendulum-sde","theta0":1.0,"omega0":0.8,"level":0.5,
            "t0":1.0,"t1":2.0,"dt":0.0078125,"seed":42,"scheme":"milstein"}"#,
    );
    assert_eq!(status2, ToplabStatus::Ok);
    unsafe { toplab_trajectory_free(tr2) };
}

#[test]
fn generated_header_keeps_the_handle_opaque() {
    let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/toplab.h"))
        .expect("build script wrote include/toplab.h");
    for symbol in [
        "toplab_simulate_json",
        "toplab_trajectory_len",
        "toplab_trajectory_dim",
        "toplab_trajectory_times",
        "toplab_trajectory_data",
        "toplab_trajectory_free",
        "toplab_verify_suite",
        "toplab_string_free",
        "toplab_last_error",
        "toplab_version",
        "ToplabStatus",
    ] {
        assert!(header.contains(symbol), "header is missing {symbol}");
    }
    assert!(header.contains("typedef struct ToplabTrajectory ToplabTrajectory;"));
    // forward declaration only: the handle must have no C-visible body
    assert!(!header.contains("struct ToplabTrajectory {"));
    assert!(!header.contains("Vec"));
}

#[test]
fn version_is_a_static_string() {
    let v = unsafe { CStr::from_ptr(toplab_version()) }
        .to_str()
        .unwrap();
    assert_eq!(v, env!("CARGO_PKG_VERSION"));
}
