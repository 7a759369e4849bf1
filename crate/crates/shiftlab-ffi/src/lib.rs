//! C bindings for the laboratory: run a scenario (by source text or by
//! shipped name) into an opaque report handle, serialise it to JSON, parse
//! it back, and re-verify its witnesses.
//!
//! Conventions: every function that can fail returns a `ShiftlabStatus`;
//! on a nonzero status the thread-local message behind
//! `shiftlab_last_error` says why. Out-pointers are written only on
//! success. Strings returned to the caller are NUL-terminated, allocated
//! here, and must be released with `shiftlab_string_free`; report handles
//! with `shiftlab_report_free`. Panics never cross the boundary — they are
//! caught and reported as `Internal`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use shiftlab::report::AnalysisReport;
use shiftlab::runner::{verify_report, RunOptions};
use shiftlab::{corpus, Error};

/// Status codes mirroring the CLI exit codes.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ShiftlabStatus {
    Ok = 0,
    /// A panic or misuse of the interface (null pointer, invalid UTF-8).
    Internal = 1,
    /// Scenario or report text failed to parse.
    Parse = 2,
    /// A numerical precondition failed while running experiments.
    Precondition = 3,
    /// Witness re-verification found at least one failure.
    VerifyFailed = 4,
}

/// Opaque report handle.
pub struct ShiftlabReport {
    inner: AnalysisReport,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: &str) {
    let owned = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(owned));
}

fn status_of(err: &Error) -> ShiftlabStatus {
    match err.exit_code() {
        2 => ShiftlabStatus::Parse,
        _ => ShiftlabStatus::Precondition,
    }
}

fn guarded<F: FnOnce() -> ShiftlabStatus>(f: F) -> ShiftlabStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(&format!("panic: {msg}"));
            ShiftlabStatus::Internal
        }
    }
}

/// # Safety
/// `ptr` must be null or a valid NUL-terminated string.
unsafe fn read_str<'a>(ptr: *const c_char, what: &str) -> Result<&'a str, ShiftlabStatus> {
    if ptr.is_null() {
        set_error(&format!("{what} is null"));
        return Err(ShiftlabStatus::Internal);
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| {
        set_error(&format!("{what} is not valid UTF-8"));
        ShiftlabStatus::Internal
    })
}

fn give_string(s: String, out: *mut *mut c_char) -> ShiftlabStatus {
    let owned = match CString::new(s.replace('\0', " ")) {
        Ok(c) => c,
        Err(_) => {
            set_error("string contained an unremovable NUL");
            return ShiftlabStatus::Internal;
        }
    };
    unsafe { *out = owned.into_raw() };
    ShiftlabStatus::Ok
}

fn run_to_handle(source: &str, contract: bool, exact: bool) -> Result<ShiftlabReport, Error> {
    let opts = RunOptions { contract, exact };
    corpus::run_source(source, &opts).map(|inner| ShiftlabReport { inner })
}

/// Runs scenario TOML source text. On `Ok` writes a fresh handle to `out`.
///
/// # Safety
/// `source` must be a valid NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn shiftlab_run(
    source: *const c_char,
    contract: bool,
    exact: bool,
    out: *mut *mut ShiftlabReport,
) -> ShiftlabStatus {
    guarded(|| {
        if out.is_null() {
            set_error("out pointer is null");
            return ShiftlabStatus::Internal;
        }
        let text = match read_str(source, "scenario source") {
            Ok(t) => t,
            Err(s) => return s,
        };
        match run_to_handle(text, contract, exact) {
            Ok(handle) => {
                *out = Box::into_raw(Box::new(handle));
                ShiftlabStatus::Ok
            }
            Err(e) => {
                set_error(&e.to_string());
                status_of(&e)
            }
        }
    })
}

/// Runs a shipped scenario by name (see `shiftlab_scenario_list`).
///
/// # Safety
/// `name` must be a valid NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn shiftlab_run_named(
    name: *const c_char,
    contract: bool,
    exact: bool,
    out: *mut *mut ShiftlabReport,
) -> ShiftlabStatus {
    guarded(|| {
        if out.is_null() {
            set_error("out pointer is null");
            return ShiftlabStatus::Internal;
        }
        let key = match read_str(name, "scenario name") {
            Ok(t) => t,
            Err(s) => return s,
        };
        let Some(source) = corpus::find(key) else {
            set_error(&format!("no shipped scenario named `{key}`"));
            return ShiftlabStatus::Parse;
        };
        match run_to_handle(source, contract, exact) {
            Ok(handle) => {
                *out = Box::into_raw(Box::new(handle));
                ShiftlabStatus::Ok
            }
            Err(e) => {
                set_error(&e.to_string());
                status_of(&e)
            }
        }
    })
}

/// Serialises a report to its canonical JSON bytes (deterministic across
/// runs of the same scenario).
///
/// # Safety
/// `report` must come from this library; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn shiftlab_report_json(
    report: *const ShiftlabReport,
    out: *mut *mut c_char,
) -> ShiftlabStatus {
    guarded(|| {
        if report.is_null() || out.is_null() {
            set_error("report or out pointer is null");
            return ShiftlabStatus::Internal;
        }
        let bytes = (*report).inner.to_json_bytes();
        match String::from_utf8(bytes) {
            Ok(text) => give_string(text, out),
            Err(_) => {
                set_error("report serialised to invalid UTF-8");
                ShiftlabStatus::Internal
            }
        }
    })
}

/// Parses report JSON back into a handle.
///
/// # Safety
/// `json` must be a valid NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn shiftlab_report_parse(
    json: *const c_char,
    out: *mut *mut ShiftlabReport,
) -> ShiftlabStatus {
    guarded(|| {
        if out.is_null() {
            set_error("out pointer is null");
            return ShiftlabStatus::Internal;
        }
        let text = match read_str(json, "report JSON") {
            Ok(t) => t,
            Err(s) => return s,
        };
        match AnalysisReport::from_json_bytes(text.as_bytes()) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(ShiftlabReport { inner }));
                ShiftlabStatus::Ok
            }
            Err(e) => {
                set_error(&e.to_string());
                status_of(&e)
            }
        }
    })
}

/// Recomputes every witness in the report. Returns `Ok` when all residuals
/// re-check, `VerifyFailed` when any does not (the failure lines, one per
/// row, are then written to `failures` when it is non-null).
///
/// # Safety
/// `report` must come from this library; `failures` may be null.
#[no_mangle]
pub unsafe extern "C" fn shiftlab_verify(
    report: *const ShiftlabReport,
    failures: *mut *mut c_char,
) -> ShiftlabStatus {
    guarded(|| {
        if report.is_null() {
            set_error("report pointer is null");
            return ShiftlabStatus::Internal;
        }
        match verify_report(&(*report).inner) {
            Ok(outcome) if outcome.ok() => ShiftlabStatus::Ok,
            Ok(outcome) => {
                set_error("witness re-verification failed");
                if !failures.is_null() {
                    let text = outcome.failures.join("\n");
                    if give_string(text, failures) != ShiftlabStatus::Ok {
                        return ShiftlabStatus::Internal;
                    }
                }
                ShiftlabStatus::VerifyFailed
            }
            Err(e) => {
                set_error(&e.to_string());
                status_of(&e)
            }
        }
    })
}

/// Newline-separated names of the shipped scenarios. Free with
/// `shiftlab_string_free`. Returns null only on allocation failure.
#[no_mangle]
pub extern "C" fn shiftlab_scenario_list() -> *mut c_char {
    let names: Vec<&str> = corpus::SHIPPED.iter().map(|(name, _)| *name).collect();
    CString::new(names.join("\n"))
        .map(CString::into_raw)
        .unwrap_or(std::ptr::null_mut())
}

/// Message for the most recent nonzero status on this thread, or null.
/// Free with `shiftlab_string_free`.
#[no_mangle]
pub extern "C" fn shiftlab_last_error() -> *mut c_char {
    LAST_ERROR.with(|slot| {
        slot.borrow()
            .as_ref()
            .map(|msg| msg.clone().into_raw())
            .unwrap_or(std::ptr::null_mut())
    })
}

/// # Safety
/// `report` must be null or a handle produced by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn shiftlab_report_free(report: *mut ShiftlabReport) {
    if !report.is_null() {
        drop(Box::from_raw(report));
    }
}

/// # Safety
/// `s` must be null or a string produced by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn shiftlab_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
