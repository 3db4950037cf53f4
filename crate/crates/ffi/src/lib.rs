//! C ABI over the polysep toolkit.
//!
//! Graphs live behind an opaque [`PolysepGraph`] handle. Every fallible call
//! returns a [`PolysepStatus`]; on failure the message is available from
//! [`polysep_last_error`] until the next call on the same thread. Strings
//! handed out by the library are released with [`polysep_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::ptr;

use polysep::bounds::{self, BoundParams};
use polysep::minor;
use polysep::separator::{self, DichotomyResult};
use polysep::treewidth;
use polysep::{Error, Graph, Separator};

/// Opaque graph handle.
pub struct PolysepGraph {
    graph: Graph,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolysepStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    InvalidParameter = 4,
    SizeLimit = 5,
    Degenerate = 6,
    Validation = 7,
    Numeric = 8,
    PromiseViolated = 9,
    Internal = 10,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolysepSeparatorAlgorithm {
    /// Exhaustive minimum order; small graphs only.
    Oracle = 0,
    /// BFS level sweep.
    Sweep = 1,
    /// Region growing with `l = 2`, `h = 8`; a sweep when it finds a minor.
    RegionGrowing = 2,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior nuls removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn status_of(e: &Error) -> PolysepStatus {
    match e {
        Error::Parse { .. } => PolysepStatus::Parse,
        Error::Degenerate(_) => PolysepStatus::Degenerate,
        Error::SizeLimit { .. } => PolysepStatus::SizeLimit,
        Error::InvalidParameter(_) => PolysepStatus::InvalidParameter,
        Error::Validation(_) | Error::BoundExceeded { .. } => PolysepStatus::Validation,
        Error::ExpansionPromiseViolated { .. } => PolysepStatus::PromiseViolated,
        Error::Numeric(_) => PolysepStatus::Numeric,
        Error::InternalLimit(_) => PolysepStatus::Internal,
    }
}

fn fail(status: PolysepStatus, msg: impl Into<String>) -> PolysepStatus {
    set_error(msg.into());
    status
}

fn finish<T>(r: polysep::Result<T>, ok: impl FnOnce(T) -> PolysepStatus) -> PolysepStatus {
    match r {
        Ok(v) => {
            clear_error();
            ok(v)
        }
        Err(e) => fail(status_of(&e), e.to_string()),
    }
}

/// # Safety
/// `out` must be valid for a pointer write.
unsafe fn write_string(out: *mut *mut c_char, s: String) -> PolysepStatus {
    match CString::new(s) {
        Ok(c) => {
            *out = c.into_raw();
            PolysepStatus::Ok
        }
        Err(_) => fail(PolysepStatus::Internal, "output contained a nul byte"),
    }
}

unsafe fn graph_ref<'a>(g: *const PolysepGraph) -> Option<&'a Graph> {
    g.as_ref().map(|h| &h.graph)
}

fn separator_json(g: &Graph, sep: &Separator) -> polysep::Result<String> {
    let cert = separator::validate_separator(g, sep)?;
    serde_json::to_string(&sep.to_json(&cert)).map_err(|e| Error::InternalLimit(e.to_string()))
}

/// Message for the last failed call on this thread, or null. Owned by the
/// library; valid until the next call.
#[no_mangle]
pub extern "C" fn polysep_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Parses a graph in edge-list text (`n m` header, then one edge per line).
///
/// # Safety
/// `text` must be a nul-terminated string and `out` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn polysep_graph_from_text(text: *const c_char, out: *mut *mut PolysepGraph) -> PolysepStatus {
    if text.is_null() || out.is_null() {
        return fail(PolysepStatus::NullPointer, "null argument");
    }
    let Ok(s) = CStr::from_ptr(text).to_str() else {
        return fail(PolysepStatus::InvalidUtf8, "graph text is not UTF-8");
    };
    finish(Graph::read_graph(s), |graph| {
        *out = Box::into_raw(Box::new(PolysepGraph { graph }));
        PolysepStatus::Ok
    })
}

/// Graph with `n` vertices and the `m` edges `(edges[2i], edges[2i+1])`.
///
/// # Safety
/// `edges` must point to `2 * m` values (or be null when `m == 0`) and `out`
/// must be valid for writing.
#[no_mangle]
pub unsafe extern "C" fn polysep_graph_from_edges(
    n: usize,
    edges: *const usize,
    m: usize,
    out: *mut *mut PolysepGraph,
) -> PolysepStatus {
    if out.is_null() || (edges.is_null() && m > 0) {
        return fail(PolysepStatus::NullPointer, "null argument");
    }
    let flat = if m == 0 {
        &[][..]
    } else {
        std::slice::from_raw_parts(edges, 2 * m)
    };
    let pairs = flat.chunks_exact(2).map(|p| (p[0], p[1]));
    finish(Graph::from_edges(n, pairs), |graph| {
        *out = Box::into_raw(Box::new(PolysepGraph { graph }));
        PolysepStatus::Ok
    })
}

/// # Safety
/// `g` must come from this library and not be freed twice. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn polysep_graph_free(g: *mut PolysepGraph) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// Vertex count, or 0 for null.
///
/// # Safety
/// `g` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn polysep_graph_vertex_count(g: *const PolysepGraph) -> usize {
    graph_ref(g).map_or(0, Graph::n)
}

/// Edge count, or 0 for null.
///
/// # Safety
/// `g` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn polysep_graph_edge_count(g: *const PolysepGraph) -> usize {
    graph_ref(g).map_or(0, Graph::m)
}

/// Balanced separator as JSON `{"a":[..],"b":[..],"order":k,"balanced":true}`.
///
/// # Safety
/// `g` must be a live handle and `out` valid for writing. The string is freed
/// with [`polysep_string_free`].
#[no_mangle]
pub unsafe extern "C" fn polysep_separator(
    g: *const PolysepGraph,
    algorithm: PolysepSeparatorAlgorithm,
    out: *mut *mut c_char,
) -> PolysepStatus {
    let Some(graph) = graph_ref(g) else {
        return fail(PolysepStatus::NullPointer, "null graph");
    };
    if out.is_null() {
        return fail(PolysepStatus::NullPointer, "null output");
    }
    let sep = match algorithm {
        PolysepSeparatorAlgorithm::Oracle => separator::optimal_balanced_separator(graph),
        PolysepSeparatorAlgorithm::Sweep => Ok(separator::sweep_separator(graph)),
        PolysepSeparatorAlgorithm::RegionGrowing => treewidth::SeparatorProvider::separate(
            &treewidth::DichotomyProvider {
                l: 2,
                h: 8,
                budget_const: separator::DEFAULT_BUDGET_CONST,
            },
            graph,
        ),
    };
    finish(sep.and_then(|s| separator_json(graph, &s)), |s| write_string(out, s))
}

/// Region growing with explicit parameters. The JSON has `"outcome"` set to
/// `"separator"` (with `separator` and `budget`) or `"minor"` (with `model`).
///
/// # Safety
/// `g` must be a live handle and `out` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn polysep_region_growing(
    g: *const PolysepGraph,
    l: usize,
    h: usize,
    budget_const: f64,
    out: *mut *mut c_char,
) -> PolysepStatus {
    let Some(graph) = graph_ref(g) else {
        return fail(PolysepStatus::NullPointer, "null graph");
    };
    if out.is_null() {
        return fail(PolysepStatus::NullPointer, "null output");
    }
    let r = separator::prs_dichotomy(graph, l, h, budget_const).map(|res| {
        let v = match res {
            DichotomyResult::Separator {
                separator,
                certificate,
                budget,
            } => serde_json::json!({
                "outcome": "separator",
                "separator": separator.to_json(&certificate),
                "budget": budget,
            }),
            DichotomyResult::Minor(model) => serde_json::json!({ "outcome": "minor", "model": model }),
        };
        v.to_string()
    });
    finish(r, |s| write_string(out, s))
}

/// Exact treewidth. `out_json` may be null; otherwise it receives the
/// decomposition as `{"bags":..,"tree":..,"width":w}`.
///
/// # Safety
/// `g` must be a live handle, `width` valid for writing, and `out_json` null
/// or valid for writing.
#[no_mangle]
pub unsafe extern "C" fn polysep_exact_treewidth(
    g: *const PolysepGraph,
    width: *mut usize,
    out_json: *mut *mut c_char,
) -> PolysepStatus {
    let Some(graph) = graph_ref(g) else {
        return fail(PolysepStatus::NullPointer, "null graph");
    };
    if width.is_null() {
        return fail(PolysepStatus::NullPointer, "null output");
    }
    finish(treewidth::exact_treewidth(graph), |(tw, td)| {
        *width = tw;
        if out_json.is_null() {
            return PolysepStatus::Ok;
        }
        match serde_json::to_string(&td.to_json()) {
            Ok(s) => write_string(out_json, s),
            Err(e) => fail(PolysepStatus::Internal, e.to_string()),
        }
    })
}

/// Greedy lower bound on `nabla_r` as the exact fraction `edges / vertices`.
///
/// # Safety
/// `g` must be a live handle; `edges` and `vertices` valid for writing.
#[no_mangle]
pub unsafe extern "C" fn polysep_nabla_greedy(
    g: *const PolysepGraph,
    r: usize,
    seed: u64,
    edges: *mut usize,
    vertices: *mut usize,
) -> PolysepStatus {
    let Some(graph) = graph_ref(g) else {
        return fail(PolysepStatus::NullPointer, "null graph");
    };
    if edges.is_null() || vertices.is_null() {
        return fail(PolysepStatus::NullPointer, "null output");
    }
    finish(minor::nabla_greedy(graph, r, seed), |res| {
        *edges = res.density.edges;
        *vertices = res.density.vertices;
        PolysepStatus::Ok
    })
}

/// Root of `a^delta = 4c ln^2(e a)` to absolute residual `tol`.
///
/// # Safety
/// `out` must be valid for writing.
#[no_mangle]
pub unsafe extern "C" fn polysep_solve_a(delta: f64, c: f64, tol: f64, out: *mut f64) -> PolysepStatus {
    if out.is_null() {
        return fail(PolysepStatus::NullPointer, "null output");
    }
    finish(bounds::solve_a(delta, c, tol), |a| {
        *out = a;
        PolysepStatus::Ok
    })
}

/// Bound table row for `(c, delta, r)` as JSON, with magnitudes in log form.
///
/// # Safety
/// `out` must be valid for writing.
#[no_mangle]
pub unsafe extern "C" fn polysep_bound_row(c: f64, delta: f64, r: u64, out: *mut *mut c_char) -> PolysepStatus {
    if out.is_null() {
        return fail(PolysepStatus::NullPointer, "null output");
    }
    let row = bounds::bound_row(&BoundParams::new(c, delta, r))
        .and_then(|row| serde_json::to_string(&row).map_err(|e| Error::InternalLimit(e.to_string())));
    finish(row, |s| write_string(out, s))
}

/// # Safety
/// `s` must be null or a string returned by this library, freed once.
#[no_mangle]
pub unsafe extern "C" fn polysep_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
