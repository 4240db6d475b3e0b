//! C ABI for `pde-consensus`.
//!
//! Every fallible function returns a [`PcStatus`]; on failure the message is
//! available from [`pc_last_error_message`] on the same thread. Objects are
//! handed out as opaque pointers and must be released with the matching
//! `*_free` function. Absent optional values are reported as NaN.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use pde_consensus::analysis::BoundCase;
use pde_consensus::{
    bound_for, builtin, lambda2, lambda_omega, load_scenario, simulate, BalanceWeights,
    BoundReport, CommGraph, GraphError, RunResult, Scenario, ScenarioError,
};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PcStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Parse = 3,
    Validation = 4,
    Simulation = 5,
    Graph = 6,
    Io = 7,
    Panic = 8,
}

/// Which settling-time bound applies.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PcBoundCase {
    None = 0,
    UndirectedFtc = 1,
    UndirectedFxc = 2,
    DirectedFtc = 3,
    DirectedFxc = 4,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct PcBounds {
    pub bound_case: PcBoundCase,
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
    pub c4: f64,
    pub v0: f64,
    pub t_star_bound: f64,
    pub dbar_required: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct PcSettling {
    pub threshold: f64,
    pub settled: bool,
    pub t_settle: f64,
    pub residual_at_bound: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct PcRecord {
    pub time: f64,
    pub energy: f64,
    pub disagreement: f64,
}

/// Communication graph.
pub struct PcGraph(CommGraph);

/// Parsed and validated scenario.
pub struct PcScenario(Scenario);

/// Trajectory and analysis of one run.
pub struct PcRunResult(RunResult);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

type Failure = (PcStatus, String);

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> PcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => PcStatus::Ok,
        Ok(Err((status, message))) => {
            set_error(message);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            PcStatus::Panic
        }
    }
}

fn non_null<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    // SAFETY: callers pass either null or a pointer obtained from this library.
    unsafe { p.as_ref() }.ok_or((PcStatus::NullPointer, format!("{what} is null")))
}

fn out_ptr<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    // SAFETY: as for `non_null`; the caller owns the pointee.
    unsafe { p.as_mut() }.ok_or((PcStatus::NullPointer, format!("{what} is null")))
}

fn slice<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], Failure> {
    if p.is_null() {
        return Err((PcStatus::NullPointer, format!("{what} is null")));
    }
    // SAFETY: the caller guarantees `len` readable doubles at `p`.
    Ok(unsafe { std::slice::from_raw_parts(p, len) })
}

fn slice_mut<'a>(p: *mut f64, len: usize, what: &str) -> Result<&'a mut [f64], Failure> {
    if p.is_null() {
        return Err((PcStatus::NullPointer, format!("{what} is null")));
    }
    // SAFETY: the caller guarantees `len` writable doubles at `p`.
    Ok(unsafe { std::slice::from_raw_parts_mut(p, len) })
}

fn string<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err((PcStatus::NullPointer, format!("{what} is null")));
    }
    // SAFETY: the caller passes a NUL-terminated string.
    unsafe { CStr::from_ptr(p) }.to_str().map_err(|e| {
        (
            PcStatus::InvalidArgument,
            format!("{what} is not UTF-8: {e}"),
        )
    })
}

fn graph_failure(e: GraphError) -> Failure {
    (PcStatus::Graph, e.to_string())
}

fn scenario_failure(e: ScenarioError) -> Failure {
    let status = match &e {
        ScenarioError::Io { .. } => PcStatus::Io,
        ScenarioError::Parse(_) | ScenarioError::UnknownParameter(_) => PcStatus::Parse,
        ScenarioError::Invalid(_) => PcStatus::Validation,
        ScenarioError::UnknownBuiltin(_) => PcStatus::InvalidArgument,
    };
    (status, e.to_string())
}

fn opt(v: Option<f64>) -> f64 {
    v.unwrap_or(f64::NAN)
}

fn bounds_view(b: Option<&BoundReport>) -> PcBounds {
    let bound_case = match b.map(|b| b.case) {
        None => PcBoundCase::None,
        Some(BoundCase::UndirectedFtc) => PcBoundCase::UndirectedFtc,
        Some(BoundCase::UndirectedFxc) => PcBoundCase::UndirectedFxc,
        Some(BoundCase::DirectedFtc) => PcBoundCase::DirectedFtc,
        Some(BoundCase::DirectedFxc) => PcBoundCase::DirectedFxc,
    };
    PcBounds {
        bound_case,
        c1: opt(b.and_then(|b| b.c1)),
        c2: opt(b.and_then(|b| b.c2)),
        c3: opt(b.and_then(|b| b.c3)),
        c4: opt(b.and_then(|b| b.c4)),
        v0: opt(b.and_then(|b| b.v0)),
        t_star_bound: opt(b.map(|b| b.t_star_bound)),
        dbar_required: opt(b.and_then(|b| b.dbar_required)),
    }
}

fn boxed<T>(out: *mut *mut T, value: T) -> Result<(), Failure> {
    *out_ptr(out, "out")? = Box::into_raw(Box::new(value));
    Ok(())
}

/// Message of the most recent failed call on this thread, or null. The
/// pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn pc_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn pc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Builds a graph from an `n × n` row-major adjacency matrix.
///
/// # Safety
/// `adjacency` must point to `n * n` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pc_graph_new(
    adjacency: *const f64,
    n: usize,
    out: *mut *mut PcGraph,
) -> PcStatus {
    guard(|| {
        let len = n
            .checked_mul(n)
            .ok_or((PcStatus::InvalidArgument, "n too large".into()))?;
        let flat = slice(adjacency, len, "adjacency")?;
        let rows: Vec<Vec<f64>> = flat.chunks(n.max(1)).map(<[f64]>::to_vec).collect();
        let g = CommGraph::from_rows(&rows).map_err(graph_failure)?;
        boxed(out, PcGraph(g))
    })
}

/// # Safety
/// `graph` must be null or come from `pc_graph_new`, and not be used again.
#[no_mangle]
pub unsafe extern "C" fn pc_graph_free(graph: *mut PcGraph) {
    if !graph.is_null() {
        drop(Box::from_raw(graph));
    }
}

/// # Safety
/// `graph` must come from `pc_graph_new`.
#[no_mangle]
pub unsafe extern "C" fn pc_graph_agent_count(graph: *const PcGraph) -> usize {
    graph.as_ref().map_or(0, |g| g.0.n_agents())
}

/// Algebraic connectivity of a symmetric graph.
///
/// # Safety
/// `graph` must come from `pc_graph_new`; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pc_graph_lambda2(graph: *const PcGraph, out: *mut f64) -> PcStatus {
    guard(|| {
        let g = non_null(graph, "graph")?;
        *out_ptr(out, "out")? = lambda2(g.0.laplacian()).map_err(graph_failure)?;
        Ok(())
    })
}

/// Minimum Rayleigh quotient of the graph's symmetric Laplacian over vectors
/// orthogonal to `omega`.
///
/// # Safety
/// `omega` must point to `len` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pc_graph_lambda_omega(
    graph: *const PcGraph,
    omega: *const f64,
    len: usize,
    out: *mut f64,
) -> PcStatus {
    guard(|| {
        let g = non_null(graph, "graph")?;
        let w = BalanceWeights::new(slice(omega, len, "omega")?.to_vec()).map_err(graph_failure)?;
        *out_ptr(out, "out")? = lambda_omega(g.0.laplacian(), &w).map_err(graph_failure)?;
        Ok(())
    })
}

/// Writes detail-balance weights (normalized to `ω_1 = 1`) into `out`, which
/// must hold one entry per agent.
///
/// # Safety
/// `out` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn pc_graph_detail_balance_weights(
    graph: *const PcGraph,
    out: *mut f64,
    len: usize,
) -> PcStatus {
    guard(|| {
        let g = non_null(graph, "graph")?;
        if len != g.0.n_agents() {
            return Err((
                PcStatus::InvalidArgument,
                format!("expected {} slots, got {len}", g.0.n_agents()),
            ));
        }
        let w = g.0.detail_balance_weights().map_err(graph_failure)?;
        slice_mut(out, len, "out")?.copy_from_slice(w.as_slice());
        Ok(())
    })
}

/// Reads and validates a scenario file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pc_scenario_load(
    path: *const c_char,
    out: *mut *mut PcScenario,
) -> PcStatus {
    guard(|| {
        let s = load_scenario(string(path, "path")?).map_err(scenario_failure)?;
        boxed(out, PcScenario(s))
    })
}

/// Parses and validates a scenario from TOML text.
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pc_scenario_from_str(
    text: *const c_char,
    out: *mut *mut PcScenario,
) -> PcStatus {
    guard(|| {
        let s = Scenario::from_toml_str(string(text, "text")?).map_err(scenario_failure)?;
        s.validate().map_err(scenario_failure)?;
        boxed(out, PcScenario(s))
    })
}

/// # Safety
/// `name` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pc_scenario_builtin(
    name: *const c_char,
    out: *mut *mut PcScenario,
) -> PcStatus {
    guard(|| {
        let s = builtin(string(name, "name")?).map_err(scenario_failure)?;
        boxed(out, PcScenario(s))
    })
}

/// # Safety
/// `scenario` must be null or come from a `pc_scenario_*` constructor.
#[no_mangle]
pub unsafe extern "C" fn pc_scenario_free(scenario: *mut PcScenario) {
    if !scenario.is_null() {
        drop(Box::from_raw(scenario));
    }
}

/// Shortens or extends the horizon; the scenario is revalidated.
///
/// # Safety
/// `scenario` must come from a `pc_scenario_*` constructor.
#[no_mangle]
pub unsafe extern "C" fn pc_scenario_set_t_end(scenario: *mut PcScenario, t_end: f64) -> PcStatus {
    guard(|| {
        let s = out_ptr(scenario, "scenario")?;
        let mut next = s.0.clone();
        next.dynamics.t_end = t_end;
        next.validate().map_err(scenario_failure)?;
        s.0 = next;
        Ok(())
    })
}

/// Settling-time bound without simulating; `bound_case` is `None` for baselines.
///
/// # Safety
/// `scenario` must come from a `pc_scenario_*` constructor; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pc_scenario_bounds(
    scenario: *const PcScenario,
    out: *mut PcBounds,
) -> PcStatus {
    guard(|| {
        let s = non_null(scenario, "scenario")?;
        let exp = s.0.validate().map_err(scenario_failure)?;
        let b = bound_for(&exp).map_err(|e| (PcStatus::Validation, e.to_string()))?;
        *out_ptr(out, "out")? = bounds_view(b.as_ref());
        Ok(())
    })
}

/// Simulates the scenario. On `Simulation` failure `*out` still receives the
/// partial trajectory, which the caller must free.
///
/// # Safety
/// `scenario` must come from a `pc_scenario_*` constructor; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pc_run(
    scenario: *const PcScenario,
    out: *mut *mut PcRunResult,
) -> PcStatus {
    guard(|| {
        let s = non_null(scenario, "scenario")?;
        let slot = out_ptr(out, "out")?;
        *slot = ptr::null_mut();
        let exp = s.0.validate().map_err(scenario_failure)?;
        match simulate(&exp) {
            Ok(r) => {
                *slot = Box::into_raw(Box::new(PcRunResult(r)));
                Ok(())
            }
            Err(failure) => {
                let message = failure.to_string();
                *slot = Box::into_raw(Box::new(PcRunResult(*failure.partial)));
                Err((PcStatus::Simulation, message))
            }
        }
    })
}

/// # Safety
/// `result` must be null or come from `pc_run`.
#[no_mangle]
pub unsafe extern "C" fn pc_run_result_free(result: *mut PcRunResult) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}

/// # Safety
/// `result` must come from `pc_run`.
#[no_mangle]
pub unsafe extern "C" fn pc_run_result_record_count(result: *const PcRunResult) -> usize {
    result.as_ref().map_or(0, |r| r.0.records.len())
}

/// Number of probe values per record: agents × probe locations.
///
/// # Safety
/// `result` must come from `pc_run`.
#[no_mangle]
pub unsafe extern "C" fn pc_run_result_probe_count(result: *const PcRunResult) -> usize {
    result
        .as_ref()
        .and_then(|r| r.0.records.first())
        .map_or(0, |rec| rec.probes.iter().map(Vec::len).sum())
}

/// # Safety
/// `result` must come from `pc_run`; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pc_run_result_record(
    result: *const PcRunResult,
    index: usize,
    out: *mut PcRecord,
) -> PcStatus {
    guard(|| {
        let r = non_null(result, "result")?;
        let rec = r.0.records.get(index).ok_or((
            PcStatus::InvalidArgument,
            format!("record {index} out of range ({})", r.0.records.len()),
        ))?;
        *out_ptr(out, "out")? = PcRecord {
            time: rec.time,
            energy: rec.energy,
            disagreement: rec.disagreement,
        };
        Ok(())
    })
}

/// Copies the probe values of record `index`, agent-major, into `out`.
///
/// # Safety
/// `out` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn pc_run_result_probes(
    result: *const PcRunResult,
    index: usize,
    out: *mut f64,
    len: usize,
) -> PcStatus {
    guard(|| {
        let r = non_null(result, "result")?;
        let rec = r.0.records.get(index).ok_or((
            PcStatus::InvalidArgument,
            format!("record {index} out of range"),
        ))?;
        let values: Vec<f64> = rec.probes.iter().flatten().copied().collect();
        if len != values.len() {
            return Err((
                PcStatus::InvalidArgument,
                format!("expected {} slots, got {len}", values.len()),
            ));
        }
        slice_mut(out, len, "out")?.copy_from_slice(&values);
        Ok(())
    })
}

/// # Safety
/// `result` must come from `pc_run`; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pc_run_result_bounds(
    result: *const PcRunResult,
    out: *mut PcBounds,
) -> PcStatus {
    guard(|| {
        let r = non_null(result, "result")?;
        *out_ptr(out, "out")? = bounds_view(r.0.bound.as_ref());
        Ok(())
    })
}

/// # Safety
/// `result` must come from `pc_run`; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pc_run_result_settling(
    result: *const PcRunResult,
    out: *mut PcSettling,
) -> PcStatus {
    guard(|| {
        let r = non_null(result, "result")?;
        let s = &r.0.settling;
        *out_ptr(out, "out")? = PcSettling {
            threshold: s.threshold,
            settled: s.settled,
            t_settle: opt(s.t_settle),
            residual_at_bound: opt(s.residual_at_bound),
        };
        Ok(())
    })
}

/// Summary as a JSON string; release it with `pc_string_free`.
///
/// # Safety
/// `result` must come from `pc_run`; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pc_run_result_summary_json(
    result: *const PcRunResult,
    out: *mut *mut c_char,
) -> PcStatus {
    guard(|| {
        let r = non_null(result, "result")?;
        let json = pde_consensus::output::Summary::of(&r.0).to_json();
        let c = CString::new(json).map_err(|e| (PcStatus::InvalidArgument, e.to_string()))?;
        *out_ptr(out, "out")? = c.into_raw();
        Ok(())
    })
}

/// # Safety
/// `s` must be null or come from this library.
#[no_mangle]
pub unsafe extern "C" fn pc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
