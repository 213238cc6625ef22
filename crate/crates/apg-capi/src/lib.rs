//! C ABI for the algebraic plumbing graph library.
//!
//! Every function returns an [`ApgStatus`]; results come back through out
//! pointers. Graphs are opaque handles owned by this library and released
//! with [`apg_graph_free`]; strings are NUL-terminated UTF-8 allocated here
//! and released with [`apg_string_free`]. After any status other than `Ok`
//! the failing thread can read a human-readable message through
//! [`apg_last_error_message`].
//!
//! Structured results (invariant systems, Betti data, verdicts) cross the
//! boundary as JSON documents, since the underlying integers do not fit any
//! fixed-width C type. The JSON shapes match the `apg` command-line output.
//!
//! The committed header lives at `include/apg.h` and is regenerated from
//! this file by cbindgen; a test keeps the two in sync.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::fmt::Display;
use std::panic::{catch_unwind, AssertUnwindSafe};

use apg::equiv::decide_equivalence;
use apg::forms::congruence_admissible;
use apg::graph::PlumbingGraph;
use apg::invariants::{graph_rank, invariant_system};
use apg::reduce::reduce;
use apg::topology::{betti, euler_characteristic, mu_trivial_on_ker_p, sphere_bundle_exclusion};

/// Identifies the ABI described by the committed header. Bump on any
/// breaking change to the exported functions or types.
pub const APG_ABI_VERSION: u32 = 1;

/// Outcome of a call through the C ABI.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ApgStatus {
    /// The call succeeded and all out parameters are populated.
    Ok = 0,
    /// A required pointer argument was NULL.
    NullArgument = 1,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 2,
    /// The input text is not a well-formed graph description.
    Parse = 3,
    /// The arguments were readable but the operation is not defined for
    /// them, for example a cyclic graph where a forest is required.
    Domain = 4,
    /// The library caught an internal panic; the handle arguments are
    /// still valid but the out parameters are untouched.
    Panic = 5,
}

/// Opaque handle to a parsed graph.
pub struct ApgGraph {
    inner: PlumbingGraph,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let clean: String = msg.chars().map(|c| if c == '\0' { ' ' } else { c }).collect();
    let stored = CString::new(clean).expect("NUL bytes were replaced");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = stored);
}

type CallResult = Result<(), (ApgStatus, String)>;

fn domain<E: Display>(e: E) -> (ApgStatus, String) {
    (ApgStatus::Domain, e.to_string())
}

fn run_guarded(f: impl FnOnce() -> CallResult) -> ApgStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => ApgStatus::Ok,
        Ok(Err((status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            ApgStatus::Panic
        }
    }
}

unsafe fn graph_ref<'a>(handle: *const ApgGraph) -> Result<&'a PlumbingGraph, (ApgStatus, String)> {
    handle
        .as_ref()
        .map(|h| &h.inner)
        .ok_or_else(|| (ApgStatus::NullArgument, "graph handle is NULL".to_string()))
}

unsafe fn text_ref<'a>(text: *const c_char) -> Result<&'a str, (ApgStatus, String)> {
    if text.is_null() {
        return Err((ApgStatus::NullArgument, "text argument is NULL".to_string()));
    }
    CStr::from_ptr(text)
        .to_str()
        .map_err(|e| (ApgStatus::InvalidUtf8, e.to_string()))
}

unsafe fn write_graph(out: *mut *mut ApgGraph, g: PlumbingGraph) -> CallResult {
    if out.is_null() {
        return Err((ApgStatus::NullArgument, "output pointer is NULL".to_string()));
    }
    *out = Box::into_raw(Box::new(ApgGraph { inner: g }));
    Ok(())
}

unsafe fn write_string(out: *mut *mut c_char, s: String) -> CallResult {
    if out.is_null() {
        return Err((ApgStatus::NullArgument, "output pointer is NULL".to_string()));
    }
    let c = CString::new(s)
        .map_err(|_| (ApgStatus::Domain, "result contains a NUL byte".to_string()))?;
    *out = c.into_raw();
    Ok(())
}

/// Degree 0 means "use the advisory degree from the input, or 1".
fn resolve_k(g: &PlumbingGraph, k: u32) -> u32 {
    if k == 0 {
        g.advisory_k().unwrap_or(1)
    } else {
        k
    }
}

fn compact(v: serde_json::Value) -> String {
    serde_json::to_string(&v).expect("JSON values serialize")
}

/// Returns the ABI version of this library build. Compare against the
/// `APG_ABI_VERSION` constant in the header you compiled against.
#[no_mangle]
pub extern "C" fn apg_abi_version() -> u32 {
    APG_ABI_VERSION
}

/// Returns the message for the most recent non-`Ok` status on this thread.
///
/// The pointer stays valid until the next failing call on the same thread;
/// copy the string if you need to keep it. Never returns NULL.
#[no_mangle]
pub extern "C" fn apg_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Parses a graph from its text form and writes a new handle to `out`.
///
/// The text uses one declaration per line: `u ID [alpha=A] [kplus=P]
/// [kminus=M]`, `v ID`, `e UID VID`, and optionally `k N` to suggest a
/// degree for later invariant calls.
///
/// # Safety
///
/// `text` must be NULL or point to a NUL-terminated string. `out` must be
/// NULL or valid for writing a pointer. NULL arguments are reported as
/// `NullArgument`, never dereferenced.
#[no_mangle]
pub unsafe extern "C" fn apg_graph_parse(text: *const c_char, out: *mut *mut ApgGraph) -> ApgStatus {
    run_guarded(|| {
        let src = text_ref(text)?;
        let g = PlumbingGraph::parse(src).map_err(|e| (ApgStatus::Parse, e.to_string()))?;
        write_graph(out, g)
    })
}

/// Writes an independent copy of `graph` to `out`.
///
/// # Safety
///
/// `graph` must be NULL or a live handle from this library. `out` must be
/// NULL or valid for writing a pointer.
#[no_mangle]
pub unsafe extern "C" fn apg_graph_clone(
    graph: *const ApgGraph,
    out: *mut *mut ApgGraph,
) -> ApgStatus {
    run_guarded(|| {
        let g = graph_ref(graph)?;
        write_graph(out, g.clone())
    })
}

/// Releases a handle returned by this library. NULL is ignored.
///
/// # Safety
///
/// `graph` must be NULL or a handle from this library that has not been
/// freed yet; it must not be used after this call.
#[no_mangle]
pub unsafe extern "C" fn apg_graph_free(graph: *mut ApgGraph) {
    if !graph.is_null() {
        drop(Box::from_raw(graph));
    }
}

/// Releases a string returned by this library. NULL is ignored.
///
/// # Safety
///
/// `text` must be NULL or a string returned by this library that has not
/// been freed yet; it must not be used after this call.
#[no_mangle]
pub unsafe extern "C" fn apg_string_free(text: *mut c_char) {
    if !text.is_null() {
        drop(CString::from_raw(text));
    }
}

/// Writes the canonical text form of `graph` to `out`.
///
/// # Safety
///
/// `graph` must be NULL or a live handle from this library. `out` must be
/// NULL or valid for writing a pointer.
#[no_mangle]
pub unsafe extern "C" fn apg_graph_serialize(
    graph: *const ApgGraph,
    out: *mut *mut c_char,
) -> ApgStatus {
    run_guarded(|| {
        let g = graph_ref(graph)?;
        write_string(out, g.serialize())
    })
}

/// Writes a Graphviz rendering of `graph` to `out`.
///
/// # Safety
///
/// `graph` must be NULL or a live handle from this library. `out` must be
/// NULL or valid for writing a pointer.
#[no_mangle]
pub unsafe extern "C" fn apg_graph_export_dot(
    graph: *const ApgGraph,
    out: *mut *mut c_char,
) -> ApgStatus {
    run_guarded(|| {
        let g = graph_ref(graph)?;
        write_string(out, g.export_dot())
    })
}

/// Writes the rank of the lattice determined by `graph` to `out`.
///
/// # Safety
///
/// `graph` must be NULL or a live handle from this library. `out` must be
/// NULL or valid for writing a `uint64_t`.
#[no_mangle]
pub unsafe extern "C" fn apg_graph_rank(graph: *const ApgGraph, out: *mut u64) -> ApgStatus {
    run_guarded(|| {
        let g = graph_ref(graph)?;
        if out.is_null() {
            return Err((ApgStatus::NullArgument, "output pointer is NULL".to_string()));
        }
        *out = graph_rank(g) as u64;
        Ok(())
    })
}

/// Rewrites `graph` to its normal form and writes a new handle to `out`.
///
/// Fails with `Domain` if the graph is not a forest.
///
/// # Safety
///
/// `graph` must be NULL or a live handle from this library. `out` must be
/// NULL or valid for writing a pointer.
#[no_mangle]
pub unsafe extern "C" fn apg_graph_reduce(
    graph: *const ApgGraph,
    out: *mut *mut ApgGraph,
) -> ApgStatus {
    run_guarded(|| {
        let g = graph_ref(graph)?;
        let (reduced, _trace) = reduce(g).map_err(domain)?;
        write_graph(out, reduced)
    })
}

/// Writes the canonical encoding of the normal form of `graph` to `out`.
///
/// Two graphs share this string exactly when the rewriting moves connect
/// them, so it is a ready-made hash key for equivalence classes.
///
/// # Safety
///
/// `graph` must be NULL or a live handle from this library. `out` must be
/// NULL or valid for writing a pointer.
#[no_mangle]
pub unsafe extern "C" fn apg_graph_canonical_encoding(
    graph: *const ApgGraph,
    out: *mut *mut c_char,
) -> ApgStatus {
    run_guarded(|| {
        let g = graph_ref(graph)?;
        let (reduced, _trace) = reduce(g).map_err(domain)?;
        let class = reduced.canonical_reduced_class().map_err(domain)?;
        write_string(out, class.canonical_encoding)
    })
}

/// Writes the full invariant system of `graph` at degree `k` as JSON.
///
/// Pass `k = 0` to use the advisory degree from the input, defaulting to 1.
///
/// # Safety
///
/// `graph` must be NULL or a live handle from this library. `out` must be
/// NULL or valid for writing a pointer.
#[no_mangle]
pub unsafe extern "C" fn apg_graph_invariants_json(
    graph: *const ApgGraph,
    k: u32,
    out: *mut *mut c_char,
) -> ApgStatus {
    run_guarded(|| {
        let g = graph_ref(graph)?;
        let system = invariant_system(g, resolve_k(g, k)).map_err(domain)?;
        write_string(out, compact(system.to_json()))
    })
}

/// Writes the Betti numbers and Euler characteristic of the manifold
/// associated to `graph` at degree `k` as JSON. Pass `k = 0` for the
/// advisory degree.
///
/// # Safety
///
/// `graph` must be NULL or a live handle from this library. `out` must be
/// NULL or valid for writing a pointer.
#[no_mangle]
pub unsafe extern "C" fn apg_graph_betti_json(
    graph: *const ApgGraph,
    k: u32,
    out: *mut *mut c_char,
) -> ApgStatus {
    run_guarded(|| {
        let g = graph_ref(graph)?;
        let bv = betti(g, resolve_k(g, k)).map_err(domain)?;
        let doc = serde_json::json!({
            "betti": bv.to_json(),
            "euler": euler_characteristic(&bv),
        });
        write_string(out, compact(doc))
    })
}

/// Writes the mod-48 realizability verdict for `graph` as JSON. Only
/// degree 1 supports this check; pass `k = 0` for the advisory degree.
///
/// # Safety
///
/// `graph` must be NULL or a live handle from this library. `out` must be
/// NULL or valid for writing a pointer.
#[no_mangle]
pub unsafe extern "C" fn apg_graph_admissible_json(
    graph: *const ApgGraph,
    k: u32,
    out: *mut *mut c_char,
) -> ApgStatus {
    run_guarded(|| {
        let g = graph_ref(graph)?;
        let system = invariant_system(g, resolve_k(g, k)).map_err(domain)?;
        let verdict = congruence_admissible(&system).map_err(domain)?;
        write_string(out, compact(verdict.to_json()))
    })
}

/// Writes the sphere-bundle exclusion report for `graph` at degree `k`
/// as JSON. Pass `k = 0` for the advisory degree.
///
/// # Safety
///
/// `graph` must be NULL or a live handle from this library. `out` must be
/// NULL or valid for writing a pointer.
#[no_mangle]
pub unsafe extern "C" fn apg_graph_obstructions_json(
    graph: *const ApgGraph,
    k: u32,
    out: *mut *mut c_char,
) -> ApgStatus {
    run_guarded(|| {
        let g = graph_ref(graph)?;
        let k = resolve_k(g, k);
        let system = invariant_system(g, k).map_err(domain)?;
        let bv = betti(g, k).map_err(domain)?;
        let report = sphere_bundle_exclusion(&system, &bv).map_err(domain)?;
        let doc = serde_json::json!({
            "k": k,
            "betti": bv.to_json(),
            "mu_trivial_on_ker_p": mu_trivial_on_ker_p(&system),
            "sphere_bundle": report.to_json(),
        });
        write_string(out, compact(doc))
    })
}

/// Decides whether two graphs have isomorphic invariant systems and
/// writes the verdict as JSON.
///
/// With `k = 0` each graph supplies its own advisory degree; those must
/// agree. The verdict is one of `equivalent` with a witness,
/// `inequivalent` with a certificate, or `unknown` with a description of
/// the exhausted search.
///
/// # Safety
///
/// `left` and `right` must each be NULL or a live handle from this
/// library. `out` must be NULL or valid for writing a pointer.
#[no_mangle]
pub unsafe extern "C" fn apg_equivalence_json(
    left: *const ApgGraph,
    right: *const ApgGraph,
    k: u32,
    out: *mut *mut c_char,
) -> ApgStatus {
    run_guarded(|| {
        let a = graph_ref(left)?;
        let b = graph_ref(right)?;
        let (ka, kb) = (resolve_k(a, k), resolve_k(b, k));
        if ka != kb {
            return Err((
                ApgStatus::Domain,
                format!("inputs request different degrees ({ka} and {kb}); pass k explicitly"),
            ));
        }
        let sa = invariant_system(a, ka).map_err(domain)?;
        let sb = invariant_system(b, kb).map_err(domain)?;
        let verdict = decide_equivalence(&sa, &sb).map_err(domain)?;
        write_string(out, compact(verdict.to_json()))
    })
}
