//! C ABI over `mkp-core`.
//!
//! Objects are opaque handles created by `mkp_scenario_*`, `mkp_tau_table_compute`
//! and `mkp_run`, and released with the matching `_free`. Every fallible call
//! returns an `MkpStatus`; on failure `mkp_last_error` describes what went
//! wrong on the calling thread. Strings returned by the library are owned by
//! the caller and released with `mkp_string_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use mkp_core::cli::{run_scenario, scenario_tau_table, NegativeControl, Report, Scenario};
use mkp_core::error::Error;
use mkp_core::fermion::TauTable;

/// Status codes. 0-3 match the `mkp` exit codes.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MkpStatus {
    Ok = 0,
    /// A run completed and some residual was nonzero.
    Residual = 1,
    Config = 2,
    /// The tau table changed when the mode window was enlarged.
    Unstable = 3,
    Parse = 4,
    NullArgument = 5,
    Io = 6,
    /// A vanishing `tau^p(0)` made a division impossible.
    NonNormalizable = 7,
    Internal = 8,
}

/// Deliberate corruption applied by `mkp_run`.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MkpNegativeControl {
    None = 0,
    EpsSign = 1,
    SchurCoefficient = 2,
}

/// Opaque scenario handle.
pub struct MkpScenario(Scenario);

/// Opaque tau table handle.
pub struct MkpTauTable(TauTable);

/// Opaque report handle.
pub struct MkpReport(Report);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn status_of(e: &Error) -> MkpStatus {
    match e {
        Error::Config(_) | Error::Window { .. } | Error::Precondition(_) => MkpStatus::Config,
        Error::NonNormalizable { .. } => MkpStatus::NonNormalizable,
        Error::Parse { .. } => MkpStatus::Parse,
        Error::Io(_) => MkpStatus::Io,
    }
}

/// Runs `f`, converting errors and panics into a status plus last-error text.
fn guard(f: impl FnOnce() -> Result<MkpStatus, (MkpStatus, String)>) -> MkpStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(s)) => s,
        Ok(Err((s, msg))) => {
            set_error(msg);
            s
        }
        Err(_) => {
            set_error("internal error (panic)");
            MkpStatus::Internal
        }
    }
}

fn core_err(e: Error) -> (MkpStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (MkpStatus, String) {
    (MkpStatus::NullArgument, format!("{what} is null"))
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, (MkpStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| (MkpStatus::Parse, format!("{what} is not valid UTF-8")))
}

fn to_c_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).map_or(ptr::null_mut(), CString::into_raw)
}

unsafe fn write_out<T>(out: *mut *mut T, value: T) {
    *out = Box::into_raw(Box::new(value));
}

/// Message for the last failed call on this thread, or NULL. Valid until the
/// next library call on the same thread; do not free.
#[no_mangle]
pub extern "C" fn mkp_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Releases a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn mkp_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// The default three-component scenario with three random factors.
#[no_mangle]
pub extern "C" fn mkp_scenario_default(seed: u64) -> *mut MkpScenario {
    Box::into_raw(Box::new(MkpScenario(Scenario::default_verification(seed))))
}

/// Parses a scenario from JSON text.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mkp_scenario_from_json(json: *const c_char, out: *mut *mut MkpScenario) -> MkpStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let s = Scenario::from_json(read_str(json, "json")?).map_err(core_err)?;
        write_out(out, MkpScenario(s));
        Ok(MkpStatus::Ok)
    })
}

/// Loads a scenario file; relative Clifford files resolve against it.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mkp_scenario_load(path: *const c_char, out: *mut *mut MkpScenario) -> MkpStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let s = Scenario::load(Path::new(read_str(path, "path")?)).map_err(core_err)?;
        write_out(out, MkpScenario(s));
        Ok(MkpStatus::Ok)
    })
}

/// Checks every scenario parameter without computing anything.
///
/// # Safety
/// `s` must be a live scenario handle.
#[no_mangle]
pub unsafe extern "C" fn mkp_scenario_validate(s: *const MkpScenario) -> MkpStatus {
    guard(|| {
        let s = s.as_ref().ok_or_else(|| null("scenario"))?;
        s.0.validate().map_err(core_err)?;
        Ok(MkpStatus::Ok)
    })
}

/// # Safety
/// `s` must be a live scenario handle.
#[no_mangle]
pub unsafe extern "C" fn mkp_scenario_set_seed(s: *mut MkpScenario, seed: u64) -> MkpStatus {
    guard(|| {
        s.as_mut().ok_or_else(|| null("scenario"))?.0.seed = seed;
        Ok(MkpStatus::Ok)
    })
}

/// # Safety
/// `s` must be a live scenario handle.
#[no_mangle]
pub unsafe extern "C" fn mkp_scenario_set_degree(s: *mut MkpScenario, degree: u32) -> MkpStatus {
    guard(|| {
        s.as_mut().ok_or_else(|| null("scenario"))?.0.degree = degree;
        Ok(MkpStatus::Ok)
    })
}

/// Comma-separated check ids, or `all`.
///
/// # Safety
/// `s` must be a live scenario handle; `suite` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn mkp_scenario_set_suite(s: *mut MkpScenario, suite: *const c_char) -> MkpStatus {
    guard(|| {
        let s = s.as_mut().ok_or_else(|| null("scenario"))?;
        let ids = read_str(suite, "suite")?;
        s.0.suite = ids.split(',').map(str::trim).filter(|x| !x.is_empty()).map(String::from).collect();
        Ok(MkpStatus::Ok)
    })
}

/// The scenario as JSON, or NULL for a NULL handle.
///
/// # Safety
/// `s` must be NULL or a live scenario handle.
#[no_mangle]
pub unsafe extern "C" fn mkp_scenario_to_json(s: *const MkpScenario) -> *mut c_char {
    match s.as_ref() {
        Some(s) => to_c_string(s.0.to_json()),
        None => ptr::null_mut(),
    }
}

/// # Safety
/// `s` must be NULL or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn mkp_scenario_free(s: *mut MkpScenario) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Computes the scenario's tau table (after the window-stability gate).
///
/// # Safety
/// `s` must be a live scenario handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mkp_tau_table_compute(s: *const MkpScenario, out: *mut *mut MkpTauTable) -> MkpStatus {
    guard(|| {
        let s = s.as_ref().ok_or_else(|| null("scenario"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let t = scenario_tau_table(&s.0).map_err(|e| match e {
            Error::Window { .. } if s.0.validate().is_ok() => (MkpStatus::Unstable, e.to_string()),
            e => core_err(e),
        })?;
        write_out(out, MkpTauTable(t));
        Ok(MkpStatus::Ok)
    })
}

/// `tau^p_{alpha beta}` as text (`1 + 2*t[1,1]`), or NULL on error.
///
/// # Safety
/// `t` must be a live tau table handle.
#[no_mangle]
pub unsafe extern "C" fn mkp_tau_table_entry(t: *const MkpTauTable, p: i64, alpha: usize, beta: usize) -> *mut c_char {
    clear_error();
    let Some(t) = t.as_ref() else {
        set_error("tau table is null");
        return ptr::null_mut();
    };
    match t.0.tau_ab(p, alpha, beta) {
        Ok(x) => to_c_string(x.to_text()),
        Err(e) => {
            set_error(e.to_string());
            ptr::null_mut()
        }
    }
}

/// The whole table as JSON.
///
/// # Safety
/// `t` must be NULL or a live tau table handle.
#[no_mangle]
pub unsafe extern "C" fn mkp_tau_table_to_json(t: *const MkpTauTable) -> *mut c_char {
    match t.as_ref() {
        Some(t) => to_c_string(t.0.to_json().to_string()),
        None => ptr::null_mut(),
    }
}

/// # Safety
/// `t` must be NULL or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn mkp_tau_table_free(t: *mut MkpTauTable) {
    if !t.is_null() {
        drop(Box::from_raw(t));
    }
}

/// Runs the scenario's checks. On success `*out` holds the report and the
/// return value is its exit status (`Ok`, `Residual` or `Unstable`).
///
/// # Safety
/// `s` must be a live scenario handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mkp_run(
    s: *const MkpScenario,
    control: MkpNegativeControl,
    out: *mut *mut MkpReport,
) -> MkpStatus {
    guard(|| {
        let s = s.as_ref().ok_or_else(|| null("scenario"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let nc = match control {
            MkpNegativeControl::None => None,
            MkpNegativeControl::EpsSign => Some(NegativeControl::EpsSign),
            MkpNegativeControl::SchurCoefficient => Some(NegativeControl::SchurCoefficient),
        };
        let r = run_scenario(&s.0, nc).map_err(core_err)?;
        let status = match r.exit_code {
            0 => MkpStatus::Ok,
            1 => MkpStatus::Residual,
            _ => MkpStatus::Unstable,
        };
        write_out(out, MkpReport(r));
        Ok(status)
    })
}

/// 1 if every selected check passed, 0 otherwise (or for NULL).
///
/// # Safety
/// `r` must be NULL or a live report handle.
#[no_mangle]
pub unsafe extern "C" fn mkp_report_passed(r: *const MkpReport) -> i32 {
    r.as_ref().map_or(0, |r| i32::from(r.0.passed))
}

/// Same code the CLI would exit with; 2 for NULL.
///
/// # Safety
/// `r` must be NULL or a live report handle.
#[no_mangle]
pub unsafe extern "C" fn mkp_report_exit_code(r: *const MkpReport) -> i32 {
    r.as_ref().map_or(2, |r| r.0.exit_code)
}

/// Number of residuals that failed.
///
/// # Safety
/// `r` must be NULL or a live report handle.
#[no_mangle]
pub unsafe extern "C" fn mkp_report_failures(r: *const MkpReport) -> usize {
    r.as_ref().map_or(0, |r| {
        r.0.checks
            .iter()
            .flat_map(|c| &c.residuals)
            .filter(|x| !x.passed())
            .count()
    })
}

/// # Safety
/// `r` must be NULL or a live report handle.
#[no_mangle]
pub unsafe extern "C" fn mkp_report_to_json(r: *const MkpReport) -> *mut c_char {
    r.as_ref().map_or(ptr::null_mut(), |r| to_c_string(r.0.to_json()))
}

/// # Safety
/// `r` must be NULL or a live report handle.
#[no_mangle]
pub unsafe extern "C" fn mkp_report_to_text(r: *const MkpReport) -> *mut c_char {
    r.as_ref().map_or(ptr::null_mut(), |r| to_c_string(r.0.to_human()))
}

/// # Safety
/// `r` must be NULL or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn mkp_report_free(r: *mut MkpReport) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}
