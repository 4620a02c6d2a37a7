//! C ABI over the `stackchern` engine.
//!
//! Every entry point returns an [`ScStatus`]. On failure the message is
//! available from [`sc_last_error`] on the same thread until the next call.
//! Strings handed out by the library are released with [`sc_string_free`];
//! handles with their own `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use serde_json::json;
use stackchern::groupoidlift::{check_groupoid, subtract_arrows, EmbeddedCoverData, FiniteGroupoid, ModelJson};
use stackchern::stablemaps::{chern_m0m, Admissibility, StableMapsError, DEFAULT_MAX_DEGREE};
use stackchern::stratnet::{compute_weights, NetworkJson, StratumNetwork};

/// Result of every call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    InvalidInput = 3,
    ResourceLimit = 4,
    Internal = 5,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn fail(status: ScStatus, message: impl ToString) -> ScStatus {
    let text = message.to_string().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).ok());
    status
}

fn guarded(body: impl FnOnce() -> Result<(), (ScStatus, String)>) -> ScStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => ScStatus::Ok,
        Ok(Err((status, msg))) => fail(status, msg),
        Err(_) => fail(ScStatus::Internal, "panic inside the library"),
    }
}

fn input(e: impl ToString) -> (ScStatus, String) {
    (ScStatus::InvalidInput, e.to_string())
}

unsafe fn read_str<'a>(s: *const c_char, name: &str) -> Result<&'a str, (ScStatus, String)> {
    if s.is_null() {
        return Err((ScStatus::NullArgument, format!("`{name}` is null")));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|_| (ScStatus::InvalidUtf8, format!("`{name}` is not UTF-8")))
}

unsafe fn read_slice<'a>(p: *const u32, len: usize, name: &str) -> Result<&'a [u32], (ScStatus, String)> {
    match (p.is_null(), len) {
        (_, 0) => Ok(&[]),
        (true, _) => Err((ScStatus::NullArgument, format!("`{name}` is null"))),
        (false, _) => Ok(std::slice::from_raw_parts(p, len)),
    }
}

fn out_ptr<T>(out: *mut T, name: &str) -> Result<(), (ScStatus, String)> {
    if out.is_null() {
        Err((ScStatus::NullArgument, format!("`{name}` is null")))
    } else {
        Ok(())
    }
}

fn to_c(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " ")).expect("nul bytes removed").into_raw()
}

/// Message of the last failure on this thread, or null. Owned by the library.
#[no_mangle]
pub extern "C" fn sc_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn sc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Releases a string returned by the library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn sc_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// A validated stratum network.
pub struct ScNetwork {
    net: StratumNetwork,
}

/// Parses and validates a network from JSON.
///
/// # Safety
/// `json` must be a valid C string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sc_network_from_json(json: *const c_char, out: *mut *mut ScNetwork) -> ScStatus {
    guarded(|| {
        out_ptr(out, "out")?;
        let text = read_str(json, "json")?;
        let parsed: NetworkJson = serde_json::from_str(text).map_err(input)?;
        let net = StratumNetwork::from_json(&parsed).map_err(input)?;
        *out = Box::into_raw(Box::new(ScNetwork { net }));
        Ok(())
    })
}

/// # Safety
/// `net` must come from [`sc_network_from_json`] or be null.
#[no_mangle]
pub unsafe extern "C" fn sc_network_free(net: *mut ScNetwork) {
    if !net.is_null() {
        drop(Box::from_raw(net));
    }
}

/// Number of saturated chains from `k` down to `j`.
///
/// # Safety
/// `net` must be a live handle; the index arrays must hold the given lengths.
#[no_mangle]
pub unsafe extern "C" fn sc_network_count_chains(
    net: *const ScNetwork,
    k: *const u32,
    k_len: usize,
    j: *const u32,
    j_len: usize,
    out: *mut u64,
) -> ScStatus {
    guarded(|| {
        out_ptr(out, "out")?;
        let net = net.as_ref().ok_or((ScStatus::NullArgument, "`net` is null".to_string()))?;
        let (k, j) = (read_slice(k, k_len, "k")?, read_slice(j, j_len, "j")?);
        let n = net.net.count_chains(k, j).map_err(input)?;
        *out = u64::try_from(n).map_err(|_| (ScStatus::ResourceLimit, format!("{n} chains overflow 64 bits")))?;
        Ok(())
    })
}

/// Weights, weight-degree failures, degree-ratio failures and homogeneity as JSON.
///
/// # Safety
/// `net` must be a live handle; `out` must be writable. Free the result
/// with [`sc_string_free`].
#[no_mangle]
pub unsafe extern "C" fn sc_network_report(net: *const ScNetwork, out: *mut *mut c_char) -> ScStatus {
    guarded(|| {
        out_ptr(out, "out")?;
        let net = &net.as_ref().ok_or((ScStatus::NullArgument, "`net` is null".to_string()))?.net;
        let weights = compute_weights(net);
        let report = json!({
            "weights": weights.table.to_named(),
            "weight_degree_failures": weights.failures,
            "degree_ratio": net.degree_ratio_sweep(),
            "homogeneity": net.homogeneity(),
        });
        *out = to_c(report.to_string());
        Ok(())
    })
}

/// A finite groupoid with optional cover data.
pub struct ScGroupoidModel {
    groupoid: FiniteGroupoid,
    cover: Option<EmbeddedCoverData>,
}

/// Parses a groupoid model; cover data is validated when parts are present.
///
/// # Safety
/// `json` must be a valid C string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sc_groupoid_from_json(json: *const c_char, out: *mut *mut ScGroupoidModel) -> ScStatus {
    guarded(|| {
        out_ptr(out, "out")?;
        let parsed: ModelJson = serde_json::from_str(read_str(json, "json")?).map_err(input)?;
        let groupoid = FiniteGroupoid::from_json(&parsed).map_err(input)?;
        let cover = if parsed.parts.is_empty() {
            None
        } else {
            Some(EmbeddedCoverData::from_json(&parsed).map_err(input)?)
        };
        *out = Box::into_raw(Box::new(ScGroupoidModel { groupoid, cover }));
        Ok(())
    })
}

/// # Safety
/// `model` must come from [`sc_groupoid_from_json`] or be null.
#[no_mangle]
pub unsafe extern "C" fn sc_groupoid_free(model: *mut ScGroupoidModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Subtracts arrows keeping part `keep` and checks the result. Writes the
/// kept arrow names and the check report as JSON, and whether it passes.
///
/// # Safety
/// `model` must be a live handle, `keep` a valid C string, `out` and
/// `passes` writable.
#[no_mangle]
pub unsafe extern "C" fn sc_groupoid_subtract(
    model: *const ScGroupoidModel,
    keep: *const c_char,
    out: *mut *mut c_char,
    passes: *mut bool,
) -> ScStatus {
    guarded(|| {
        out_ptr(out, "out")?;
        out_ptr(passes, "passes")?;
        let model = model.as_ref().ok_or((ScStatus::NullArgument, "`model` is null".to_string()))?;
        let keep = read_str(keep, "keep")?;
        let cover = model.cover.as_ref().ok_or_else(|| input("model has no cover parts"))?;
        let r = subtract_arrows(cover, keep).map_err(input)?;
        let report = check_groupoid(&model.groupoid, &r);
        *passes = report.passes;
        *out = to_c(json!({"arrows": r.arrow_names(&model.groupoid), "check": report}).to_string());
        Ok(())
    })
}

/// Total Chern class of the stable-map space for `(n, m, d)` as polynomial
/// JSON. A negative `cap` selects the dimension.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sc_stablemaps_chern(
    n: u32,
    m: u32,
    d: u32,
    cap: c_int,
    include_full_set: bool,
    out: *mut *mut c_char,
) -> ScStatus {
    guarded(|| {
        out_ptr(out, "out")?;
        let rule = Admissibility { include_full_set };
        let cap = u32::try_from(cap).ok();
        let (_, c) = chern_m0m(n, m, d, cap, rule, DEFAULT_MAX_DEGREE).map_err(|e| match e {
            StableMapsError::GeneratorBudget { .. } => (ScStatus::ResourceLimit, e.to_string()),
            other => input(other),
        })?;
        *out = to_c(serde_json::to_string(&c.to_json()).map_err(|e| (ScStatus::Internal, e.to_string()))?);
        Ok(())
    })
}

/// Runs the command-line front-end on `argv` (without the program name),
/// capturing both streams. `exit_code` receives the command's exit status.
///
/// # Safety
/// `argv` must hold `argc` valid C strings; the out pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn sc_run(
    argc: c_int,
    argv: *const *const c_char,
    out_stdout: *mut *mut c_char,
    out_stderr: *mut *mut c_char,
    exit_code: *mut c_int,
) -> ScStatus {
    guarded(|| {
        out_ptr(out_stdout, "out_stdout")?;
        out_ptr(out_stderr, "out_stderr")?;
        out_ptr(exit_code, "exit_code")?;
        let argc = usize::try_from(argc).map_err(|_| input("negative argc"))?;
        if argc > 0 && argv.is_null() {
            return Err((ScStatus::NullArgument, "`argv` is null".into()));
        }
        let mut args = vec!["stackchern".to_string()];
        for i in 0..argc {
            args.push(read_str(*argv.add(i), "argv")?.to_string());
        }
        let (mut so, mut se) = (Vec::new(), Vec::new());
        let code = stackchern::cli::main_with(args, &mut so, &mut se);
        *exit_code = code;
        *out_stdout = to_c(String::from_utf8_lossy(&so).into_owned());
        *out_stderr = to_c(String::from_utf8_lossy(&se).into_owned());
        Ok(())
    })
}
