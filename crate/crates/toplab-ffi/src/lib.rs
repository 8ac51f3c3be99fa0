//! C ABI for the toplab integrators. Handles are opaque pointers, every
//! call returns a [`ToplabStatus`], and the most recent failure message on
//! the calling thread is readable through [`toplab_last_error`].
//!
//! Ownership rules: trajectories from `toplab_simulate_json` are freed with
//! `toplab_trajectory_free`; strings from `toplab_verify_suite` with
//! `toplab_string_free`. Slices returned by the accessor functions borrow
//! the handle and die with it.

use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::os::raw::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use toplab::cli::{simulate_trajectory, CliError, RunConfig};
use toplab::phase::Trajectory;
use toplab::verify::{run_all, run_suite};

/// Result code of every API call.
#[repr(i32)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ToplabStatus {
    /// Success.
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 2,
    /// The configuration was rejected; `toplab_last_error` names the field.
    InvalidConfig = 3,
    /// The integration itself failed.
    RunFailed = 4,
    /// No verification suite has the requested name.
    UnknownSuite = 5,
}

/// Opaque trajectory handle.
pub struct ToplabTrajectory(Trajectory);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let clean = msg.replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(clean).expect("nul bytes stripped");
    });
}

fn status_of(e: &CliError) -> ToplabStatus {
    match e {
        CliError::Run(_) | CliError::Io(_) => ToplabStatus::RunFailed,
        CliError::UnknownSuite(_) => ToplabStatus::UnknownSuite,
        _ => ToplabStatus::InvalidConfig,
    }
}

/// Message of the most recent failure on this thread, or an empty string.
/// The pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn toplab_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Version of the library, as a static string.
#[no_mangle]
pub extern "C" fn toplab_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

unsafe fn utf8_arg<'a>(ptr: *const c_char) -> Result<&'a str, ToplabStatus> {
    if ptr.is_null() {
        set_error("null pointer argument");
        return Err(ToplabStatus::NullArgument);
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| {
        set_error("argument is not valid UTF-8");
        ToplabStatus::InvalidUtf8
    })
}

fn guarded(body: impl FnOnce() -> ToplabStatus) -> ToplabStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(_) => {
            set_error("internal panic");
            ToplabStatus::RunFailed
        }
    }
}

/// Run the simulation described by a JSON run configuration (the same shape
/// `toplab simulate --config` reads) and hand back a trajectory.
///
/// # Safety
/// `config_json` must be a valid NUL-terminated string; `out` must point to
/// writable storage for one pointer. On success `*out` owns the trajectory
/// and must be released with [`toplab_trajectory_free`].
#[no_mangle]
pub unsafe extern "C" fn toplab_simulate_json(
    config_json: *const c_char,
    out: *mut *mut ToplabTrajectory,
) -> ToplabStatus {
    if out.is_null() {
        set_error("null output pointer");
        return ToplabStatus::NullArgument;
    }
    *out = ptr::null_mut();
    let text = match utf8_arg(config_json) {
        Ok(t) => t,
        Err(status) => return status,
    };
    guarded(|| {
        let cfg: RunConfig = match serde_json::from_str(text) {
            Ok(cfg) => cfg,
            Err(e) => {
                set_error(&e.to_string());
                return ToplabStatus::InvalidConfig;
            }
        };
        match simulate_trajectory(&cfg) {
            Ok(tr) => {
                unsafe { *out = Box::into_raw(Box::new(ToplabTrajectory(tr))) };
                ToplabStatus::Ok
            }
            Err(e) => {
                set_error(&e.to_string());
                status_of(&e)
            }
        }
    })
}

/// Number of nodes, or 0 for a null handle.
///
/// # Safety
/// `tr` must be null or a live handle from [`toplab_simulate_json`].
#[no_mangle]
pub unsafe extern "C" fn toplab_trajectory_len(tr: *const ToplabTrajectory) -> usize {
    tr.as_ref().map_or(0, |t| t.0.len())
}

/// State dimension, or 0 for a null handle.
///
/// # Safety
/// `tr` must be null or a live handle from [`toplab_simulate_json`].
#[no_mangle]
pub unsafe extern "C" fn toplab_trajectory_dim(tr: *const ToplabTrajectory) -> usize {
    tr.as_ref().map_or(0, |t| t.0.dim())
}

/// Borrowed pointer to the node times, `len` values, or null.
///
/// # Safety
/// `tr` must be null or a live handle; the slice dies with the handle.
#[no_mangle]
pub unsafe extern "C" fn toplab_trajectory_times(tr: *const ToplabTrajectory) -> *const f64 {
    tr.as_ref().map_or(ptr::null(), |t| t.0.times().as_ptr())
}

/// Borrowed pointer to the row-major states, `len * dim` values, or null.
///
/// # Safety
/// `tr` must be null or a live handle; the slice dies with the handle.
#[no_mangle]
pub unsafe extern "C" fn toplab_trajectory_data(tr: *const ToplabTrajectory) -> *const f64 {
    tr.as_ref()
        .map_or(ptr::null(), |t| t.0.states_flat().as_ptr())
}

/// Release a trajectory handle. Null is a no-op.
///
/// # Safety
/// `tr` must be null or a handle from [`toplab_simulate_json`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn toplab_trajectory_free(tr: *mut ToplabTrajectory) {
    if !tr.is_null() {
        drop(Box::from_raw(tr));
    }
}

/// Run one verification suite (or "all") and hand back the JSON report the
/// CLI would print. `out_all_pass` (nullable) receives 1 if every check
/// passed, else 0.
///
/// # Safety
/// `suite` must be a valid NUL-terminated string; `out_report_json` must
/// point to writable storage for one pointer and the returned string must be
/// released with [`toplab_string_free`].
#[no_mangle]
pub unsafe extern "C" fn toplab_verify_suite(
    suite: *const c_char,
    out_report_json: *mut *mut c_char,
    out_all_pass: *mut i32,
) -> ToplabStatus {
    if out_report_json.is_null() {
        set_error("null output pointer");
        return ToplabStatus::NullArgument;
    }
    *out_report_json = ptr::null_mut();
    let name = match utf8_arg(suite) {
        Ok(t) => t,
        Err(status) => return status,
    };
    guarded(|| {
        let results = if name == "all" {
            run_all()
        } else {
            match run_suite(name) {
                Ok(r) => r,
                Err(e) => {
                    set_error(&e.to_string());
                    return ToplabStatus::UnknownSuite;
                }
            }
        };
        let json = serde_json::to_string_pretty(&results).expect("report serializes");
        let all_pass = results.iter().all(|r| r.pass);
        unsafe {
            *out_report_json = CString::new(json.replace('\0', " "))
                .expect("nul bytes stripped")
                .into_raw();
            if !out_all_pass.is_null() {
                *out_all_pass = i32::from(all_pass);
            }
        }
        ToplabStatus::Ok
    })
}

/// Release a string returned by this library. Null is a no-op.
///
/// # Safety
/// `s` must be null or a string from [`toplab_verify_suite`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn toplab_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
