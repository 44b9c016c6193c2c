//! C ABI over the wfconf optimizer.
//!
//! Workflows and configuration maps are opaque heap handles. Every fallible
//! call returns a `WfStatus`; on failure the message is kept per thread and
//! can be read with `wf_last_error_message`. Strings returned to the caller
//! must be released with `wf_string_free`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use wfconf::harness::HarnessError;
use wfconf::workflow_file::WorkflowFile;
use wfconf::{
    evaluate_config, function_cost, optimize, validate_dag, ConfigMap, Method, MethodParams, PricingParams,
    ResourceConfig, ScheduleError, SyntheticBackend, WorkflowDag,
};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WfStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Parse = 3,
    Invalid = 4,
    Infeasible = 5,
    Execution = 6,
    NotFound = 7,
    Panic = 8,
}

/// A validated workflow together with its pricing coefficients.
pub struct WfWorkflow {
    dag: WorkflowDag,
    pricing: PricingParams,
}

/// Per-node (vCPU, memory MB) assignment.
pub struct WfConfigMap(ConfigMap);

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WfPricing {
    pub mu0: f64,
    pub mu1: f64,
    pub mu2: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WfEvaluation {
    pub runs: usize,
    pub mean_runtime: f64,
    pub std_runtime: f64,
    pub mean_cost: f64,
    pub violation_rate: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn fail(status: WfStatus, msg: impl Into<String>) -> WfStatus {
    set_error(msg);
    status
}

fn guard(f: impl FnOnce() -> WfStatus) -> WfStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => fail(WfStatus::Panic, "internal panic"),
    }
}

unsafe fn read_str<'a>(s: *const c_char) -> Result<&'a str, WfStatus> {
    if s.is_null() {
        return Err(fail(WfStatus::NullPointer, "null string argument"));
    }
    CStr::from_ptr(s).to_str().map_err(|_| fail(WfStatus::InvalidUtf8, "argument is not valid UTF-8"))
}

fn harness_status(e: &HarnessError) -> WfStatus {
    match e {
        HarnessError::Schedule(ScheduleError::InfeasibleSlo { .. }) => WfStatus::Infeasible,
        HarnessError::Schedule(ScheduleError::Graph(_)) => WfStatus::Invalid,
        _ => WfStatus::Execution,
    }
}

/// Parses and validates a JSON workflow file.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn wf_workflow_from_json(json: *const c_char, out: *mut *mut WfWorkflow) -> WfStatus {
    guard(|| {
        if out.is_null() {
            return fail(WfStatus::NullPointer, "null output pointer");
        }
        *out = ptr::null_mut();
        let text = match read_str(json) {
            Ok(t) => t,
            Err(s) => return s,
        };
        let file = match WorkflowFile::from_json(text) {
            Ok(f) => f,
            Err(e) => return fail(WfStatus::Parse, e.to_string()),
        };
        let dag = match file.to_dag() {
            Ok(d) => d,
            Err(e) => return fail(WfStatus::Invalid, e.to_string()),
        };
        if let Err(e) = validate_dag(&dag) {
            return fail(WfStatus::Invalid, e.to_string());
        }
        let pricing = file.pricing.unwrap_or_default();
        if !pricing.is_valid() {
            return fail(WfStatus::Invalid, "pricing coefficients must be finite and >= 0");
        }
        *out = Box::into_raw(Box::new(WfWorkflow { dag, pricing }));
        WfStatus::Ok
    })
}

/// # Safety
/// `wf` must be null or a handle from `wf_workflow_from_json` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn wf_workflow_free(wf: *mut WfWorkflow) {
    if !wf.is_null() {
        drop(Box::from_raw(wf));
    }
}

/// Number of functions in the workflow, or 0 for a null handle.
///
/// # Safety
/// `wf` must be null or a live workflow handle.
#[no_mangle]
pub unsafe extern "C" fn wf_workflow_node_count(wf: *const WfWorkflow) -> usize {
    wf.as_ref().map_or(0, |w| w.dag.len())
}

/// SLO of the workflow in seconds, or NaN for a null handle.
///
/// # Safety
/// `wf` must be null or a live workflow handle.
#[no_mangle]
pub unsafe extern "C" fn wf_workflow_slo(wf: *const WfWorkflow) -> f64 {
    wf.as_ref().map_or(f64::NAN, |w| w.dag.slo().seconds())
}

/// Searches a configuration with `method` ("aarc", "bo" or "maff") using
/// default parameters and the synthetic backend.
///
/// # Safety
/// `wf` must be a live workflow handle, `method` a NUL-terminated string and
/// `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn wf_optimize(
    wf: *const WfWorkflow,
    method: *const c_char,
    seed: u64,
    out: *mut *mut WfConfigMap,
) -> WfStatus {
    guard(|| {
        if out.is_null() {
            return fail(WfStatus::NullPointer, "null output pointer");
        }
        *out = ptr::null_mut();
        let Some(wf) = wf.as_ref() else {
            return fail(WfStatus::NullPointer, "null workflow handle");
        };
        let method: Method = match read_str(method).map(str::parse) {
            Ok(Ok(m)) => m,
            Ok(Err(e)) => return fail(WfStatus::Invalid, e.to_string()),
            Err(s) => return s,
        };
        let slo = wf.dag.slo();
        match optimize(&wf.dag, slo, method, &SyntheticBackend, &wf.pricing, &MethodParams::default(), seed) {
            Ok(res) => {
                *out = Box::into_raw(Box::new(WfConfigMap(res.configs)));
                WfStatus::Ok
            }
            Err(e) => fail(harness_status(&e), e.to_string()),
        }
    })
}

/// Executes the workflow `runs` times under `cfg`.
///
/// # Safety
/// `wf` and `cfg` must be live handles and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn wf_evaluate(
    wf: *const WfWorkflow,
    cfg: *const WfConfigMap,
    runs: usize,
    seed: u64,
    out: *mut WfEvaluation,
) -> WfStatus {
    guard(|| {
        let (Some(wf), Some(cfg)) = (wf.as_ref(), cfg.as_ref()) else {
            return fail(WfStatus::NullPointer, "null handle");
        };
        if out.is_null() {
            return fail(WfStatus::NullPointer, "null output pointer");
        }
        match evaluate_config(&wf.dag, &cfg.0, runs, seed, &SyntheticBackend, &wf.pricing) {
            Ok(e) => {
                *out = WfEvaluation {
                    runs: e.runs,
                    mean_runtime: e.mean_runtime,
                    std_runtime: e.std_runtime,
                    mean_cost: e.mean_cost,
                    violation_rate: e.violation_rate,
                };
                WfStatus::Ok
            }
            Err(e) => fail(WfStatus::Execution, e.to_string()),
        }
    })
}

/// Parses a JSON object of `{ "node": { "cpu": .., "mem": .. } }`.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn wf_config_from_json(json: *const c_char, out: *mut *mut WfConfigMap) -> WfStatus {
    guard(|| {
        if out.is_null() {
            return fail(WfStatus::NullPointer, "null output pointer");
        }
        *out = ptr::null_mut();
        let text = match read_str(json) {
            Ok(t) => t,
            Err(s) => return s,
        };
        match serde_json::from_str::<ConfigMap>(text) {
            Ok(map) => {
                if let Some((id, _)) = map.iter().find(|(_, c)| !c.in_bounds()) {
                    return fail(WfStatus::Invalid, format!("node `{id}`: config out of bounds"));
                }
                *out = Box::into_raw(Box::new(WfConfigMap(map)));
                WfStatus::Ok
            }
            Err(e) => fail(WfStatus::Parse, e.to_string()),
        }
    })
}

/// Serializes the map as JSON. Returns null on failure; free with
/// `wf_string_free`.
///
/// # Safety
/// `cfg` must be null or a live configuration handle.
#[no_mangle]
pub unsafe extern "C" fn wf_config_to_json(cfg: *const WfConfigMap) -> *mut c_char {
    clear_error();
    let Some(cfg) = cfg.as_ref() else {
        set_error("null configuration handle");
        return ptr::null_mut();
    };
    match serde_json::to_string(&cfg.0).map(CString::new) {
        Ok(Ok(s)) => s.into_raw(),
        _ => {
            set_error("configuration does not serialize");
            ptr::null_mut()
        }
    }
}

/// Number of entries in the map, or 0 for a null handle.
///
/// # Safety
/// `cfg` must be null or a live configuration handle.
#[no_mangle]
pub unsafe extern "C" fn wf_config_len(cfg: *const WfConfigMap) -> usize {
    cfg.as_ref().map_or(0, |c| c.0.len())
}

/// Looks up the allocation of `node_id`.
///
/// # Safety
/// `cfg` must be a live handle, `node_id` a NUL-terminated string, and
/// `cpu` and `mem` writable pointers.
#[no_mangle]
pub unsafe extern "C" fn wf_config_get(
    cfg: *const WfConfigMap,
    node_id: *const c_char,
    cpu: *mut f64,
    mem: *mut u32,
) -> WfStatus {
    guard(|| {
        let Some(cfg) = cfg.as_ref() else {
            return fail(WfStatus::NullPointer, "null configuration handle");
        };
        if cpu.is_null() || mem.is_null() {
            return fail(WfStatus::NullPointer, "null output pointer");
        }
        let id = match read_str(node_id) {
            Ok(s) => s,
            Err(s) => return s,
        };
        match cfg.0.get(id) {
            Some(c) => {
                *cpu = c.cpu;
                *mem = c.mem;
                WfStatus::Ok
            }
            None => fail(WfStatus::NotFound, format!("no configuration for node `{id}`")),
        }
    })
}

/// # Safety
/// `cfg` must be null or a configuration handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn wf_config_free(cfg: *mut WfConfigMap) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// Cost of one invocation: `runtime * (mu0 * cpu + mu1 * mem / 1024) + mu2`.
#[no_mangle]
pub extern "C" fn wf_function_cost(runtime: f64, cpu: f64, mem: u32, pricing: WfPricing) -> f64 {
    let pricing = PricingParams { mu0: pricing.mu0, mu1: pricing.mu1, mu2: pricing.mu2 };
    function_cost(runtime, &ResourceConfig::new(cpu, mem), &pricing)
}

/// The default pricing coefficients.
#[no_mangle]
pub extern "C" fn wf_default_pricing() -> WfPricing {
    let p = PricingParams::default();
    WfPricing { mu0: p.mu0, mu1: p.mu1, mu2: p.mu2 }
}

/// Message of the last failed call on this thread, or null. The pointer is
/// valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn wf_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// # Safety
/// `s` must be null or a string returned by this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn wf_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
