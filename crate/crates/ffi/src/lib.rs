//! C ABI over `ecm-core`.
//!
//! Objects are opaque handles created by `*_load`/`ecm_analyze` and released
//! with the matching `*_free`. Every fallible call returns an [`EcmStatus`];
//! on failure, [`ecm_last_error`] describes the cause for the calling thread.
//! Strings returned through `char **` are owned by the caller and must be
//! released with [`ecm_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use ecm_core::model::{self, Analysis};
use ecm_core::notation::{format_prediction, format_shorthand, Style};
use ecm_core::{assets, units, EcmInput, Error, KernelModel, MachineModel};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EcmStatus {
    Ok = 0,
    /// Unreadable, unparsable or invalid input file.
    InputError = 1,
    /// A micro-op has no resource to issue on.
    Infeasible = 2,
    NullPointer = 3,
    InvalidArgument = 4,
    /// Interior NUL or invalid UTF-8 in a string argument.
    InvalidString = 5,
    Panic = 6,
}

pub struct EcmMachine(MachineModel);
pub struct EcmKernel(KernelModel);
pub struct EcmAnalysis(Analysis);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

struct Failure(EcmStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = if e.is_infeasible() {
            EcmStatus::Infeasible
        } else {
            EcmStatus::InputError
        };
        Failure(status, e.to_string())
    }
}

fn fail(status: EcmStatus, msg: impl Into<String>) -> Failure {
    Failure(status, msg.into())
}

/// Run `f`, translating errors and panics into a status code.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> EcmStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            EcmStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            EcmStatus::Panic
        }
    }
}

unsafe fn arg<'a, T>(p: *const T, name: &str) -> Result<&'a T, Failure> {
    p.as_ref()
        .ok_or_else(|| fail(EcmStatus::NullPointer, format!("`{name}` is null")))
}

unsafe fn out_ptr<'a, T>(p: *mut T, name: &str) -> Result<&'a mut T, Failure> {
    p.as_mut()
        .ok_or_else(|| fail(EcmStatus::NullPointer, format!("`{name}` is null")))
}

unsafe fn text<'a>(p: *const c_char, name: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(fail(EcmStatus::NullPointer, format!("`{name}` is null")));
    }
    CStr::from_ptr(p).to_str().map_err(|_| {
        fail(
            EcmStatus::InvalidString,
            format!("`{name}` is not valid UTF-8"),
        )
    })
}

fn owned_string(s: String) -> Result<*mut c_char, Failure> {
    CString::new(s)
        .map(CString::into_raw)
        .map_err(|_| fail(EcmStatus::InvalidString, "result contains NUL"))
}

fn style(unicode: bool) -> Style {
    if unicode {
        Style::Unicode
    } else {
        Style::Ascii
    }
}

/// Message for the last failed call on this thread; empty after a success.
/// Valid until the next call into this library from the same thread.
#[no_mangle]
pub extern "C" fn ecm_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Load a machine from a file path or a bundled name.
///
/// # Safety
/// `name` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ecm_machine_load(
    name: *const c_char,
    out: *mut *mut EcmMachine,
) -> EcmStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = ptr::null_mut();
        let m = assets::machine(text(name, "name")?)?;
        *out = Box::into_raw(Box::new(EcmMachine(m)));
        Ok(())
    })
}

/// # Safety
/// `m` must come from [`ecm_machine_load`] and not be freed twice. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn ecm_machine_free(m: *mut EcmMachine) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Memory transfer cycles per cache line at `bandwidth_gbs`.
///
/// # Safety
/// `m` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ecm_machine_mem_cycles_per_cl(
    m: *const EcmMachine,
    bandwidth_gbs: f64,
    out: *mut f64,
) -> EcmStatus {
    guard(|| {
        let m = arg(m, "machine")?;
        let out = out_ptr(out, "out")?;
        if !(bandwidth_gbs > 0.0 && bandwidth_gbs.is_finite()) {
            return Err(fail(
                EcmStatus::InvalidArgument,
                Error::NonPositiveBandwidth(bandwidth_gbs).to_string(),
            ));
        }
        *out = m.0.mem_cycles_per_cl(bandwidth_gbs)?;
        Ok(())
    })
}

/// Load a kernel from a file path or a bundled name.
///
/// # Safety
/// `name` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ecm_kernel_load(
    name: *const c_char,
    out: *mut *mut EcmKernel,
) -> EcmStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = ptr::null_mut();
        let k = assets::kernel(text(name, "name")?)?;
        *out = Box::into_raw(Box::new(EcmKernel(k)));
        Ok(())
    })
}

/// # Safety
/// `k` must come from [`ecm_kernel_load`] and not be freed twice. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn ecm_kernel_free(k: *mut EcmKernel) {
    if !k.is_null() {
        drop(Box::from_raw(k));
    }
}

/// Single-core prediction. A `bandwidth_gbs` of zero or less selects the
/// kernel's sustained bandwidth, or the machine default when it has none.
///
/// # Safety
/// `m` and `k` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ecm_analyze(
    m: *const EcmMachine,
    k: *const EcmKernel,
    bandwidth_gbs: f64,
    penalty: bool,
    out: *mut *mut EcmAnalysis,
) -> EcmStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = ptr::null_mut();
        let (m, k) = (arg(m, "machine")?, arg(k, "kernel")?);
        if bandwidth_gbs.is_nan() || bandwidth_gbs.is_infinite() {
            return Err(fail(EcmStatus::InvalidArgument, "bandwidth must be finite"));
        }
        let requested = (bandwidth_gbs > 0.0).then_some(bandwidth_gbs);
        let (bw, _) = model::resolve_bandwidth(&k.0, &m.0, requested);
        let a = model::analyze(&k.0, &m.0, bw, penalty)?;
        *out = Box::into_raw(Box::new(EcmAnalysis(a)));
        Ok(())
    })
}

/// # Safety
/// `a` must come from [`ecm_analyze`] and not be freed twice. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn ecm_analysis_free(a: *mut EcmAnalysis) {
    if !a.is_null() {
        drop(Box::from_raw(a));
    }
}

/// Number of predicted levels (L1 through memory); 0 for a null handle.
///
/// # Safety
/// `a` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn ecm_analysis_level_count(a: *const EcmAnalysis) -> usize {
    a.as_ref().map_or(0, |a| a.0.prediction.levels.len())
}

/// Predicted cycles per cache line at level `index` (0 is L1).
///
/// # Safety
/// `a` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ecm_analysis_level_cycles(
    a: *const EcmAnalysis,
    index: usize,
    out: *mut f64,
) -> EcmStatus {
    guard(|| {
        let a = arg(a, "analysis")?;
        let out = out_ptr(out, "out")?;
        let level = a.0.prediction.levels.get(index).ok_or_else(|| {
            fail(
                EcmStatus::InvalidArgument,
                format!("level index {index} out of range"),
            )
        })?;
        *out = level.cycles;
        Ok(())
    })
}

/// Name of level `index` (`L1`, `L2`, ..., `Mem`). Free with [`ecm_string_free`].
///
/// # Safety
/// `a` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ecm_analysis_level_name(
    a: *const EcmAnalysis,
    index: usize,
    out: *mut *mut c_char,
) -> EcmStatus {
    guard(|| {
        let a = arg(a, "analysis")?;
        let out = out_ptr(out, "out")?;
        *out = ptr::null_mut();
        let level = a.0.prediction.levels.get(index).ok_or_else(|| {
            fail(
                EcmStatus::InvalidArgument,
                format!("level index {index} out of range"),
            )
        })?;
        *out = owned_string(level.level.clone())?;
        Ok(())
    })
}

/// In-core cycles: overlapping and non-overlapping.
///
/// # Safety
/// `a` must be a live handle; both outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn ecm_analysis_core_cycles(
    a: *const EcmAnalysis,
    t_ol: *mut f64,
    t_nol: *mut f64,
) -> EcmStatus {
    guard(|| {
        let a = arg(a, "analysis")?;
        *out_ptr(t_ol, "t_ol")? = a.0.input.t_ol_cy;
        *out_ptr(t_nol, "t_nol")? = a.0.input.t_nol_cy;
        Ok(())
    })
}

/// Model input in shorthand, e.g. `{1 || 2 | 2 | 4 | 9.1} cy/CL`.
///
/// # Safety
/// `a` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ecm_analysis_input_string(
    a: *const EcmAnalysis,
    unicode: bool,
    out: *mut *mut c_char,
) -> EcmStatus {
    guard(|| {
        let a = arg(a, "analysis")?;
        let out = out_ptr(out, "out")?;
        *out = owned_string(format_shorthand(&a.0.input, style(unicode)))?;
        Ok(())
    })
}

/// Prediction in shorthand, e.g. `{2 ] 4 ] 8 ] 17.1} cy/CL`.
///
/// # Safety
/// `a` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ecm_analysis_prediction_string(
    a: *const EcmAnalysis,
    unicode: bool,
    out: *mut *mut c_char,
) -> EcmStatus {
    guard(|| {
        let a = arg(a, "analysis")?;
        let out = out_ptr(out, "out")?;
        *out = owned_string(format_prediction(&a.0.prediction, style(unicode)))?;
        Ok(())
    })
}

/// Predict from raw inputs without machine or kernel files. `t_data` holds
/// `n_data` transfer terms, innermost link first; `out` receives `n_data + 1`
/// level cycles and must have room for them.
///
/// # Safety
/// `t_data` must point to `n_data` doubles (or be null when `n_data` is 0);
/// `out` must point to `n_data + 1` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn ecm_predict(
    t_ol: f64,
    t_nol: f64,
    t_data: *const f64,
    n_data: usize,
    out: *mut f64,
) -> EcmStatus {
    guard(|| {
        if out.is_null() || (n_data > 0 && t_data.is_null()) {
            return Err(fail(EcmStatus::NullPointer, "`t_data` or `out` is null"));
        }
        let terms = if n_data == 0 {
            &[][..]
        } else {
            std::slice::from_raw_parts(t_data, n_data)
        };
        if [t_ol, t_nol]
            .iter()
            .chain(terms)
            .any(|v| !(v.is_finite() && *v >= 0.0))
        {
            return Err(fail(
                EcmStatus::InvalidArgument,
                "cycle terms must be finite and >= 0",
            ));
        }
        let pred = model::predict(&EcmInput {
            t_ol_cy: t_ol,
            t_nol_cy: t_nol,
            t_data_cy: terms.to_vec(),
        });
        let out = std::slice::from_raw_parts_mut(out, n_data + 1);
        for (dst, l) in out.iter_mut().zip(&pred.levels) {
            *dst = l.cycles;
        }
        Ok(())
    })
}

/// Cycles to move `bytes` at `bandwidth_gbs` on a core clocked at `clock_ghz`.
/// Returns NaN for non-positive bandwidth or clock.
#[no_mangle]
pub extern "C" fn ecm_gbs_to_cycles(bytes: f64, clock_ghz: f64, bandwidth_gbs: f64) -> f64 {
    if bandwidth_gbs > 0.0 && clock_ghz > 0.0 {
        units::gbs_to_cycles(bytes, clock_ghz, bandwidth_gbs)
    } else {
        f64::NAN
    }
}

/// # Safety
/// `s` must come from this library and not be freed twice. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn ecm_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
