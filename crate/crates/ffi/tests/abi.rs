use std::ffi::{c_char, CStr, CString};
use std::ptr;

use pf_forge_ffi::*;

fn take(s: *mut c_char) -> String {
    assert!(!s.is_null());
    let out = unsafe { CStr::from_ptr(s) }.to_str().unwrap().to_string();
    unsafe { pf_string_free(s) };
    out
}

fn last_code() -> Option<String> {
    let p = pf_last_error_code();
    (!p.is_null()).then(|| unsafe { CStr::from_ptr(p) }.to_str().unwrap().to_string())
}

fn seq_from_json(json: &str) -> (PfStatus, *mut PfSeq) {
    let js = CString::new(json).unwrap();
    let mut out = ptr::null_mut();
    let st = unsafe { pf_seq_from_json(js.as_ptr(), &mut out) };
    (st, out)
}

#[test]
fn inverse_power_passes_contiguous_check() {
    let mut seq = ptr::null_mut();
    assert_eq!(unsafe { pf_seq_inv_pow(4, 40, &mut seq) }, PfStatus::PF_OK);
    assert_eq!(unsafe { pf_seq_len(seq) }, 41);
    let mut c = ptr::null_mut();
    assert_eq!(unsafe { pf_seq_coeff(seq, 3, &mut c) }, PfStatus::PF_OK);
    assert_eq!(take(c), "20");
    let mut v = ptr::null_mut();
    assert_eq!(unsafe { pf_check_contiguous(seq, 2, 30, &mut v) }, PfStatus::PF_OK);
    assert!(take(v).contains("\"pass_strict\""));
    unsafe { pf_seq_free(seq) };
}

#[test]
fn failing_sequence_reports_witness() {
    let (st, seq) = seq_from_json(r#"{"coeffs": ["1", "0", "1"]}"#);
    assert_eq!(st, PfStatus::PF_OK);
    let mut v = ptr::null_mut();
    assert_eq!(unsafe { pf_check_all_minors(seq, 2, 2, 0, &mut v) }, PfStatus::PF_FAIL);
    let verdict = take(v);
    assert!(verdict.contains("\"fail\"") && verdict.contains("witness"));
    assert!(last_code().is_none());
    unsafe { pf_seq_free(seq) };
}

#[test]
fn errors_set_code_and_message() {
    let (st, seq) = seq_from_json("not json");
    assert_eq!(st, PfStatus::PF_ERR_INVALID);
    assert!(seq.is_null());
    assert!(last_code().unwrap().starts_with("E_"));
    assert!(!pf_last_error_message().is_null());

    let mut v = ptr::null_mut();
    assert_eq!(unsafe { pf_check_contiguous(ptr::null(), 2, 3, &mut v) }, PfStatus::PF_ERR_NULL);
    assert_eq!(last_code().as_deref(), Some("E_NULL_POINTER"));

    let bad = [0xffu8, 0];
    let mut out = ptr::null_mut();
    let st = unsafe { pf_seq_from_json(bad.as_ptr() as *const c_char, &mut out) };
    assert_eq!(st, PfStatus::PF_ERR_UTF8);

    let (_, seq) = seq_from_json(r#"{"coeffs": ["1", "1"]}"#);
    assert_eq!(unsafe { pf_check_all_minors(seq, 0, 1, 0, &mut v) }, PfStatus::PF_ERR_INVALID);
    // a budget of 1 refuses any real scan
    assert_eq!(unsafe { pf_check_all_minors(seq, 2, 1, 1, &mut v) }, PfStatus::PF_ERR_INVALID);
    unsafe { pf_seq_free(seq) };

    // success clears the previous error
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { pf_seq_inv_pow(1, 3, &mut s) }, PfStatus::PF_OK);
    assert!(last_code().is_none());
    unsafe { pf_seq_free(s) };
}

#[test]
fn perturbation_round_trip() {
    let c = CString::new("3").unwrap();
    let mut plan = ptr::null_mut();
    let st = unsafe { pf_epsilon_bound(2, 0, c.as_ptr(), PfMode::PF_MODE_CERTIFIED, 0, &mut plan) };
    assert_eq!(st, PfStatus::PF_OK);
    let plan: serde_json::Value = serde_json::from_str(&take(plan)).unwrap();
    let eps = CString::new(plan["epsilon"].as_str().unwrap()).unwrap();

    let mut g = ptr::null_mut();
    assert_eq!(unsafe { pf_seq_lacunary(60, &mut g) }, PfStatus::PF_OK);
    let mut f = ptr::null_mut();
    assert_eq!(unsafe { pf_build_perturbed(g, 2, eps.as_ptr(), 50, &mut f) }, PfStatus::PF_OK);
    let mut v = ptr::null_mut();
    assert_eq!(unsafe { pf_check_contiguous(f, 2, 48, &mut v) }, PfStatus::PF_OK);
    take(v);

    let mut js = ptr::null_mut();
    assert_eq!(unsafe { pf_seq_to_json(f, &mut js) }, PfStatus::PF_OK);
    let (st, back) = seq_from_json(&take(js));
    assert_eq!(st, PfStatus::PF_OK);
    assert_eq!(unsafe { pf_seq_len(back) }, 51);
    for p in [g, f, back] {
        unsafe { pf_seq_free(p) };
    }
}

#[test]
fn deflation_of_inverse_square_gives_ones() {
    let mut seq = ptr::null_mut();
    assert_eq!(unsafe { pf_seq_inv_pow(2, 10, &mut seq) }, PfStatus::PF_OK);
    let t = CString::new("1").unwrap();
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { pf_deflate(seq, t.as_ptr(), 1, &mut out) }, PfStatus::PF_OK);
    let mut js = ptr::null_mut();
    assert_eq!(unsafe { pf_seq_to_json(out, &mut js) }, PfStatus::PF_OK);
    let v: serde_json::Value = serde_json::from_str(&take(js)).unwrap();
    assert!(v["coeffs"].as_array().unwrap().iter().all(|c| c == "1"));
    let zero = CString::new("0").unwrap();
    let mut bad = ptr::null_mut();
    assert_eq!(unsafe { pf_deflate(seq, zero.as_ptr(), 1, &mut bad) }, PfStatus::PF_ERR_INVALID);
    unsafe {
        pf_seq_free(seq);
        pf_seq_free(out);
    }
}

#[test]
fn domain_composition() {
    let dom = CString::new(include_str!("../../core/tests/data/notch.json")).unwrap();
    let mut out = ptr::null_mut();
    assert_eq!(unsafe { pf_compose_domain(dom.as_ptr(), 2, 40, 8, &mut out) }, PfStatus::PF_OK);
    let comp: serde_json::Value = serde_json::from_str(&take(out)).unwrap();
    assert_eq!(comp["coeffs"].as_array().unwrap().len(), 41);
    assert!(comp["plan"]["epsilon"].is_string());
}

#[test]
fn null_arguments_are_tolerated_by_free_and_len() {
    unsafe {
        pf_seq_free(ptr::null_mut());
        pf_string_free(ptr::null_mut());
        assert_eq!(pf_seq_len(ptr::null()), 0);
    }
}

#[test]
fn header_declares_the_api() {
    let h = include_str!("../include/pf_forge.h");
    for name in ["pf_seq_from_json", "pf_check_contiguous", "pf_deflate", "pf_last_error_message", "PF_ERR_PANIC", "PF_MODE_WINDOWED"] {
        assert!(h.contains(name), "{name} missing from header");
    }
}
