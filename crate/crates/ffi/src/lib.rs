//! C ABI for inkrementa.
//!
//! Every fallible function returns an [`InkStatus`]; on failure the message is
//! available from [`ink_last_error`] on the same thread. Models are opaque
//! [`InkModel`] handles released with [`ink_model_free`]. Strings returned by
//! the library are released with [`ink_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use inkrementa::continual::weight_align;
use inkrementa::harness::{accn, run_scenario, ScenarioConfig};
use inkrementa::model::IncModel;
use inkrementa::numkit::{Matrix2D, NormKind};
use inkrementa::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InkStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    /// Bad configuration, unknown key or incompatible file version.
    Config = 3,
    /// Missing file, unparsable data or an invalid class mapping.
    Data = 4,
    /// Mismatched dimensions.
    Shape = 5,
    /// Any other argument or state error.
    Invalid = 6,
    /// A Rust panic was caught at the boundary.
    Panic = 7,
}

pub const INK_NORM_L1: u32 = 1;
pub const INK_NORM_L2: u32 = 2;

/// Opaque trained model.
pub struct InkModel {
    inner: IncModel,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> InkStatus {
    match e {
        Error::Stage { source, .. } => status_of(source),
        Error::Shape { .. } => InkStatus::Shape,
        _ => match e.exit_code() {
            2 => InkStatus::Config,
            3 => InkStatus::Data,
            _ => InkStatus::Invalid,
        },
    }
}

struct Failure(InkStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(InkStatus::NullPointer, format!("{what} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> InkStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            InkStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(panic) => {
            let msg = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            InkStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(InkStatus::InvalidUtf8, format!("{what} is not valid UTF-8")))
}

unsafe fn model_ref<'a>(m: *const InkModel) -> Result<&'a IncModel, Failure> {
    m.as_ref().map(|m| &m.inner).ok_or_else(|| null("model"))
}

unsafe fn slice_arg<'a>(p: *const f64, len: usize, what: &str) -> Result<&'a [f64], Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

fn into_c_string(s: String) -> Result<*mut c_char, Failure> {
    CString::new(s)
        .map(CString::into_raw)
        .map_err(|_| Failure(InkStatus::Invalid, "output contains a nul byte".into()))
}

/// Message of the last failed call on this thread, or null. Valid until the next call.
#[no_mangle]
pub extern "C" fn ink_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ink_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// # Safety
/// `s` must be null or a string returned by this library, freed at most once.
#[no_mangle]
pub unsafe extern "C" fn ink_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// # Safety
/// `path` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn ink_model_load(path: *const c_char, out: *mut *mut InkModel) -> InkStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let inner = IncModel::load(str_arg(path, "path")?)?;
        *out = Box::into_raw(Box::new(InkModel { inner }));
        Ok(())
    })
}

/// # Safety
/// `json` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn ink_model_from_json(json: *const c_char, out: *mut *mut InkModel) -> InkStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let inner = IncModel::from_json(str_arg(json, "json")?)?;
        *out = Box::into_raw(Box::new(InkModel { inner }));
        Ok(())
    })
}

/// Serializes the model; free the result with [`ink_string_free`].
///
/// # Safety
/// `model` must be a live handle and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn ink_model_to_json(model: *const InkModel, out: *mut *mut c_char) -> InkStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = into_c_string(model_ref(model)?.to_json()?)?;
        Ok(())
    })
}

/// # Safety
/// `model` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn ink_model_save(model: *const InkModel, path: *const c_char) -> InkStatus {
    guard(|| {
        model_ref(model)?.save(str_arg(path, "path")?)?;
        Ok(())
    })
}

/// # Safety
/// `model` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ink_model_free(model: *mut InkModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Number of classes, or 0 for a null handle.
///
/// # Safety
/// `model` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ink_model_num_classes(model: *const InkModel) -> usize {
    model.as_ref().map_or(0, |m| m.inner.num_classes())
}

/// Input dimension, or 0 for a null handle.
///
/// # Safety
/// `model` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ink_model_input_dim(model: *const InkModel) -> usize {
    model.as_ref().map_or(0, |m| m.inner.input_dim())
}

/// # Safety
/// `x` must point to `len` doubles and `out_class` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ink_model_predict(
    model: *const InkModel,
    x: *const f64,
    len: usize,
    out_class: *mut usize,
) -> InkStatus {
    guard(|| {
        if out_class.is_null() {
            return Err(null("out_class"));
        }
        *out_class = model_ref(model)?.predict(slice_arg(x, len, "x")?)?;
        Ok(())
    })
}

/// Writes `num_classes` logits into `out`, which holds `out_len` doubles.
///
/// # Safety
/// `x` must point to `len` doubles and `out` to `out_len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn ink_model_logits(
    model: *const InkModel,
    x: *const f64,
    len: usize,
    out: *mut f64,
    out_len: usize,
) -> InkStatus {
    guard(|| {
        let m = model_ref(model)?;
        if out.is_null() {
            return Err(null("out"));
        }
        if out_len != m.num_classes() {
            return Err(Failure(
                InkStatus::Shape,
                format!("out_len is {out_len}, model has {} classes", m.num_classes()),
            ));
        }
        let logits = m.forward(slice_arg(x, len, "x")?)?.logits;
        std::slice::from_raw_parts_mut(out, out_len).copy_from_slice(&logits);
        Ok(())
    })
}

/// Runs a scenario given as JSON config text and returns the report JSON.
///
/// # Safety
/// `config_json` must be a NUL-terminated string and `out_report` writable.
#[no_mangle]
pub unsafe extern "C" fn ink_run_scenario(
    config_json: *const c_char,
    out_report: *mut *mut c_char,
) -> InkStatus {
    guard(|| {
        if out_report.is_null() {
            return Err(null("out_report"));
        }
        let config = ScenarioConfig::from_json(str_arg(config_json, "config_json")?)?;
        *out_report = into_c_string(run_scenario(&config)?.to_json()?)?;
        Ok(())
    })
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ink_accn(n: usize, accuracy: f64, out: *mut f64) -> InkStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = accn(n, accuracy)?;
        Ok(())
    })
}

/// Aligns a row-major `(u + v) x cols` head in place. `norm` is `INK_NORM_L1` or `INK_NORM_L2`.
///
/// # Safety
/// `head` must point to `(u + v) * cols` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn ink_weight_align(
    head: *mut f64,
    u: usize,
    v: usize,
    cols: usize,
    norm: u32,
) -> InkStatus {
    guard(|| {
        if head.is_null() {
            return Err(null("head"));
        }
        let len = (u + v)
            .checked_mul(cols)
            .ok_or_else(|| Failure(InkStatus::Shape, "head size overflows".into()))?;
        let norm = match norm {
            INK_NORM_L1 => NormKind::L1,
            INK_NORM_L2 => NormKind::L2,
            other => return Err(Failure(InkStatus::Invalid, format!("unknown norm code {other}"))),
        };
        let buf = std::slice::from_raw_parts_mut(head, len);
        let m = Matrix2D::from_vec(u + v, cols, buf.to_vec())?;
        buf.copy_from_slice(weight_align(&m, u, v, norm)?.data());
        Ok(())
    })
}
