use std::ffi::{CStr, CString};
use std::ptr;

use mkp_ffi::*;

fn take(s: *mut std::ffi::c_char) -> String {
    assert!(!s.is_null());
    let out = unsafe { CStr::from_ptr(s) }.to_string_lossy().into_owned();
    unsafe { mkp_string_free(s) };
    out
}

fn last_error() -> String {
    let p = mkp_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn scenario(json: &str) -> *mut MkpScenario {
    let text = CString::new(json).unwrap();
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { mkp_scenario_from_json(text.as_ptr(), &mut s) }, MkpStatus::Ok);
    s
}

#[test]
fn fixture_tau_through_the_abi() {
    let s = scenario(
        r#"{"components": 1, "window": [-3, 3], "p_range": [-2, 2],
            "clifford": {"text": "factor 1 0 1 -1 2"}}"#,
    );
    let mut t = ptr::null_mut();
    assert_eq!(unsafe { mkp_tau_table_compute(s, &mut t) }, MkpStatus::Ok);
    assert_eq!(take(unsafe { mkp_tau_table_entry(t, 0, 1, 1) }), "1 + 2*t[1,1]");
    assert!(unsafe { mkp_tau_table_entry(t, 9, 1, 1) }.is_null());
    assert!(!last_error().is_empty());
    assert!(take(unsafe { mkp_tau_table_to_json(t) }).contains("\"entries\""));
    unsafe {
        mkp_tau_table_free(t);
        mkp_scenario_free(s);
    }
}

#[test]
fn run_and_negative_control() {
    let s = mkp_scenario_default(3);
    let suite = CString::new("bilinear, linear-t1").unwrap();
    assert_eq!(unsafe { mkp_scenario_set_suite(s, suite.as_ptr()) }, MkpStatus::Ok);
    assert_eq!(unsafe { mkp_scenario_validate(s) }, MkpStatus::Ok);

    let mut r = ptr::null_mut();
    assert_eq!(unsafe { mkp_run(s, MkpNegativeControl::None, &mut r) }, MkpStatus::Ok);
    assert_eq!(unsafe { mkp_report_passed(r) }, 1);
    assert_eq!(unsafe { mkp_report_exit_code(r) }, 0);
    assert_eq!(unsafe { mkp_report_failures(r) }, 0);
    assert!(take(unsafe { mkp_report_to_text(r) }).contains("result: PASS"));
    unsafe { mkp_report_free(r) };

    let mut r = ptr::null_mut();
    assert_eq!(unsafe { mkp_run(s, MkpNegativeControl::SchurCoefficient, &mut r) }, MkpStatus::Residual);
    assert_eq!(unsafe { mkp_report_exit_code(r) }, 1);
    assert!(unsafe { mkp_report_failures(r) } > 0);
    let json = take(unsafe { mkp_report_to_json(r) });
    assert!(json.contains("\"negative_control\""));
    unsafe {
        mkp_report_free(r);
        mkp_scenario_free(s);
    }
}

#[test]
fn errors_and_nulls() {
    let mut s = ptr::null_mut();
    let bad = CString::new("{ nope").unwrap();
    assert_eq!(unsafe { mkp_scenario_from_json(bad.as_ptr(), &mut s) }, MkpStatus::Parse);
    assert!(s.is_null());
    assert!(last_error().contains("parse error"));

    assert_eq!(unsafe { mkp_scenario_from_json(ptr::null(), &mut s) }, MkpStatus::NullArgument);
    assert_eq!(unsafe { mkp_scenario_validate(ptr::null()) }, MkpStatus::NullArgument);
    assert_eq!(unsafe { mkp_report_exit_code(ptr::null()) }, 2);
    assert!(unsafe { mkp_scenario_to_json(ptr::null()) }.is_null());
    unsafe {
        mkp_scenario_free(ptr::null_mut());
        mkp_report_free(ptr::null_mut());
        mkp_tau_table_free(ptr::null_mut());
        mkp_string_free(ptr::null_mut());
    }

    let s = scenario(r#"{"components": 2, "window": [-3, 3], "p_range": [-2, 2], "z_max": 5}"#);
    assert_eq!(unsafe { mkp_scenario_validate(s) }, MkpStatus::Config);
    assert!(last_error().contains("Z_max"));
    let mut r = ptr::null_mut();
    assert_eq!(unsafe { mkp_run(s, MkpNegativeControl::None, &mut r) }, MkpStatus::Config);
    assert!(r.is_null());
    assert_eq!(unsafe { mkp_scenario_set_degree(s, 5) }, MkpStatus::Ok);
    // K_t follows D, so Z_max = 5 now fits.
    assert_eq!(unsafe { mkp_scenario_validate(s) }, MkpStatus::Ok);
    unsafe { mkp_scenario_free(s) };

    let path = CString::new("/nonexistent/scenario.json").unwrap();
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { mkp_scenario_load(path.as_ptr(), &mut s) }, MkpStatus::Io);
}

#[test]
fn scenario_json_round_trip() {
    let s = mkp_scenario_default(7);
    assert_eq!(unsafe { mkp_scenario_set_seed(s, 11) }, MkpStatus::Ok);
    let json = take(unsafe { mkp_scenario_to_json(s) });
    let back = scenario(&json);
    assert_eq!(take(unsafe { mkp_scenario_to_json(back) }), json);
    assert!(json.contains("\"seed\": 11"));
    unsafe {
        mkp_scenario_free(s);
        mkp_scenario_free(back);
    }
}
