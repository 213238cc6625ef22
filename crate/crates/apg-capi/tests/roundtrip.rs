//! Exercises the C ABI from Rust: handle lifecycle, out-parameter
//! population, JSON payload shapes, and error reporting.

use std::ffi::{CStr, CString};
use std::os::raw::c_char;
use std::ptr;

use apg_capi::*;

fn parse(text: &str) -> *mut ApgGraph {
    let c = CString::new(text).expect("test input has no NUL");
    let mut out = ptr::null_mut();
    let status = unsafe { apg_graph_parse(c.as_ptr(), &mut out) };
    assert_eq!(status, ApgStatus::Ok, "parse failed: {}", last_error());
    assert!(!out.is_null());
    out
}

fn take_string(produce: impl FnOnce(*mut *mut c_char) -> ApgStatus) -> String {
    let mut out: *mut c_char = ptr::null_mut();
    let status = produce(&mut out);
    assert_eq!(status, ApgStatus::Ok, "call failed: {}", last_error());
    assert!(!out.is_null());
    let text = unsafe { CStr::from_ptr(out) }
        .to_str()
        .expect("library strings are UTF-8")
        .to_string();
    unsafe { apg_string_free(out) };
    text
}

fn last_error() -> String {
    let ptr = apg_last_error_message();
    assert!(!ptr.is_null());
    unsafe { CStr::from_ptr(ptr) }.to_string_lossy().into_owned()
}

#[test]
fn single_vertex_lifecycle() {
    let g = parse("u a alpha=3\n");

    let mut rank = u64::MAX;
    assert_eq!(unsafe { apg_graph_rank(g, &mut rank) }, ApgStatus::Ok);
    assert_eq!(rank, 1);

    let json = take_string(|out| unsafe { apg_graph_invariants_json(g, 1, out) });
    let v: serde_json::Value = serde_json::from_str(&json).expect("valid JSON");
    assert_eq!(v["k"], 1);
    assert_eq!(v["p"][0], 12);
    assert_eq!(v["mu"][0], serde_json::json!([0, 0, 0, 3]));

    let text = take_string(|out| unsafe { apg_graph_serialize(g, out) });
    assert_eq!(text, "u a alpha=3\n");

    let dot = take_string(|out| unsafe { apg_graph_export_dot(g, out) });
    assert!(dot.starts_with("graph"));

    unsafe { apg_graph_free(g) };
}

#[test]
fn clone_is_independent() {
    let g = parse("u a alpha=5\n");
    let mut copy = ptr::null_mut();
    assert_eq!(unsafe { apg_graph_clone(g, &mut copy) }, ApgStatus::Ok);
    unsafe { apg_graph_free(g) };

    let text = take_string(|out| unsafe { apg_graph_serialize(copy, out) });
    assert_eq!(text, "u a alpha=5\n");
    unsafe { apg_graph_free(copy) };
}

#[test]
fn mirror_weights_share_a_canonical_encoding() {
    let pos = parse("u a alpha=7\n");
    let neg = parse("u b alpha=-7\n");

    let enc_pos = take_string(|out| unsafe { apg_graph_canonical_encoding(pos, out) });
    let enc_neg = take_string(|out| unsafe { apg_graph_canonical_encoding(neg, out) });
    assert_eq!(enc_pos, enc_neg);

    let verdict = take_string(|out| unsafe { apg_equivalence_json(pos, neg, 1, out) });
    let v: serde_json::Value = serde_json::from_str(&verdict).expect("valid JSON");
    assert_eq!(v["verdict"], "equivalent");

    unsafe { apg_graph_free(pos) };
    unsafe { apg_graph_free(neg) };
}

#[test]
fn reduce_merges_a_chain() {
    let g = parse("u a alpha=2\nu b alpha=5\nv d\ne a d\ne b d\n");
    let mut reduced = ptr::null_mut();
    assert_eq!(unsafe { apg_graph_reduce(g, &mut reduced) }, ApgStatus::Ok);
    unsafe { apg_graph_free(g) };

    let mut rank = 0;
    assert_eq!(unsafe { apg_graph_rank(reduced, &mut rank) }, ApgStatus::Ok);
    assert_eq!(rank, 1, "a two-weight chain collapses to one generator");
    unsafe { apg_graph_free(reduced) };
}

#[test]
fn advisory_degree_applies_when_k_is_zero() {
    let g = parse("k 2\nu a alpha=3\n");
    let json = take_string(|out| unsafe { apg_graph_betti_json(g, 0, out) });
    let v: serde_json::Value = serde_json::from_str(&json).expect("valid JSON");
    assert_eq!(v["betti"]["k"], 2);

    let json = take_string(|out| unsafe { apg_graph_betti_json(g, 1, out) });
    let v: serde_json::Value = serde_json::from_str(&json).expect("valid JSON");
    assert_eq!(v["betti"]["k"], 1);
    unsafe { apg_graph_free(g) };
}

#[test]
fn admissibility_verdict_round_trips() {
    let g = parse("u a alpha=3\n");
    let json = take_string(|out| unsafe { apg_graph_admissible_json(g, 1, out) });
    let v: serde_json::Value = serde_json::from_str(&json).expect("valid JSON");
    assert_eq!(v["admissible"], true);
    unsafe { apg_graph_free(g) };
}

#[test]
fn obstruction_report_has_the_cli_shape() {
    let g = parse("u a alpha=4\n");
    let json = take_string(|out| unsafe { apg_graph_obstructions_json(g, 1, out) });
    let v: serde_json::Value = serde_json::from_str(&json).expect("valid JSON");
    assert_eq!(v["k"], 1);
    assert!(v["sphere_bundle"].is_object());
    assert!(v["betti"].is_object());
    unsafe { apg_graph_free(g) };
}

#[test]
fn errors_set_status_and_message() {
    let mut out = ptr::null_mut();

    let bad = CString::new("u a alpha=oops\n").unwrap();
    let status = unsafe { apg_graph_parse(bad.as_ptr(), &mut out) };
    assert_eq!(status, ApgStatus::Parse);
    assert!(out.is_null(), "failed parse must not populate the handle");
    assert!(!last_error().is_empty());

    let status = unsafe { apg_graph_parse(ptr::null(), &mut out) };
    assert_eq!(status, ApgStatus::NullArgument);

    let invalid = CString::new(vec![b'u', b' ', 0xFFu8]).unwrap();
    let status = unsafe { apg_graph_parse(invalid.as_ptr(), &mut out) };
    assert_eq!(status, ApgStatus::InvalidUtf8);

    let mut rank = 0u64;
    let status = unsafe { apg_graph_rank(ptr::null(), &mut rank) };
    assert_eq!(status, ApgStatus::NullArgument);
    assert!(last_error().contains("NULL"));
}

#[test]
fn cyclic_input_is_a_domain_error_for_reduce() {
    let g = parse("u a\nu b\nv x\nv y\ne a x\ne a y\ne b x\ne b y\n");
    let mut reduced = ptr::null_mut();
    let status = unsafe { apg_graph_reduce(g, &mut reduced) };
    assert_eq!(status, ApgStatus::Domain);
    assert!(reduced.is_null());
    unsafe { apg_graph_free(g) };
}

#[test]
fn equivalence_with_conflicting_advisory_degrees_fails() {
    let a = parse("k 2\nu a alpha=3\n");
    let b = parse("u b alpha=3\n");
    let mut out = ptr::null_mut();
    let status = unsafe { apg_equivalence_json(a, b, 0, &mut out) };
    assert_eq!(status, ApgStatus::Domain);
    assert!(last_error().contains("degrees"));

    let verdict = take_string(|out| unsafe { apg_equivalence_json(a, b, 1, out) });
    let v: serde_json::Value = serde_json::from_str(&verdict).expect("valid JSON");
    assert_eq!(v["verdict"], "equivalent");

    unsafe { apg_graph_free(a) };
    unsafe { apg_graph_free(b) };
}
