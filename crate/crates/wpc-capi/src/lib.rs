//! C interface over the wpc kernels. Objects cross the boundary as opaque
//! handles that must be released with their matching _free; every fallible
//! call returns a status code and stores the failure message per thread,
//! readable through wpc_last_error until the next failing call.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use wpc::beltrami::{carleson_norm, cp_constant, mp_norm, BeltramiField};
use wpc::io;
use wpc::spaces::{besov_seminorm, bmo_norm, conjugate_circle, hilbert_line};
use wpc::welding::{eval_lambda, eval_lambda_inverse, WeldingResult};
use wpc::{CircleGrid, Grid, LineGrid, WpcError};

/// Result of every fallible call. WPC_STATUS_OK is zero so statuses can be
/// tested like C error codes.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum WpcStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidInput = 2,
    NumericFailure = 3,
    IoFailure = 4,
    InternalPanic = 5,
}

/// Sampled boundary data on a line window or the unit circle.
pub struct WpcSampled {
    inner: wpc::grid::SampledFunction,
}

/// Dilatation field samples on a logarithmic half-plane grid.
pub struct WpcField {
    inner: BeltramiField,
}

/// Welding factorization: two log-derivatives plus convergence data.
pub struct WpcWelding {
    inner: WeldingResult,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: &str) {
    let sanitized = message.replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).expect("NUL bytes stripped");
    });
}

fn status_of(e: &WpcError) -> WpcStatus {
    match e {
        WpcError::Io { .. } | WpcError::Parse { .. } => WpcStatus::IoFailure,
        WpcError::NotConverged { .. } => WpcStatus::NumericFailure,
        _ => WpcStatus::InvalidInput,
    }
}

fn fail(e: WpcError) -> WpcStatus {
    let status = status_of(&e);
    set_error(&e.to_string());
    status
}

fn guarded(f: impl FnOnce() -> WpcStatus) -> WpcStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => {
            set_error("internal panic crossed the boundary");
            WpcStatus::InternalPanic
        }
    }
}

/// Checks a required pointer argument, reporting its name when null.
macro_rules! require {
    ($ptr:expr, $name:literal) => {
        if $ptr.is_null() {
            set_error(concat!($name, " must not be null"));
            return WpcStatus::NullArgument;
        }
    };
}

unsafe fn path_of(ptr: *const c_char) -> Result<String, WpcStatus> {
    match CStr::from_ptr(ptr).to_str() {
        Ok(s) => Ok(s.to_string()),
        Err(_) => {
            set_error("path is not valid UTF-8");
            Err(WpcStatus::InvalidInput)
        }
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn wpc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Message of the most recent failure on this thread. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn wpc_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

unsafe fn complex_values(
    len: usize,
    re: *const f64,
    im: *const f64,
) -> Vec<num_complex::Complex64> {
    let re = std::slice::from_raw_parts(re, len);
    let im = std::slice::from_raw_parts(im, len);
    re.iter().zip(im).map(|(&a, &b)| num_complex::Complex64::new(a, b)).collect()
}

/// Builds sampled data on the symmetric window [-half_width, half_width]
/// from node_count re/im pairs; node_count - 1 must be even and at least 16.
#[no_mangle]
pub unsafe extern "C" fn wpc_sampled_line(
    half_width: f64,
    node_count: usize,
    re: *const f64,
    im: *const f64,
    modulo_constant: bool,
    out: *mut *mut WpcSampled,
) -> WpcStatus {
    guarded(|| {
        require!(re, "re");
        require!(im, "im");
        require!(out, "out");
        if node_count == 0 {
            set_error("node_count must be positive");
            return WpcStatus::InvalidInput;
        }
        let grid = match LineGrid::new(half_width, node_count - 1) {
            Ok(g) => g,
            Err(e) => return fail(e),
        };
        let values = complex_values(node_count, re, im);
        match wpc::grid::SampledFunction::new(Grid::Line(grid), values, modulo_constant) {
            Ok(f) => {
                *out = Box::into_raw(Box::new(WpcSampled { inner: f }));
                WpcStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Builds sampled data on the uniform circle grid of node_count angles;
/// node_count must be a power of two, at least 16.
#[no_mangle]
pub unsafe extern "C" fn wpc_sampled_circle(
    node_count: usize,
    re: *const f64,
    im: *const f64,
    modulo_constant: bool,
    out: *mut *mut WpcSampled,
) -> WpcStatus {
    guarded(|| {
        require!(re, "re");
        require!(im, "im");
        require!(out, "out");
        let grid = match CircleGrid::new(node_count) {
            Ok(g) => g,
            Err(e) => return fail(e),
        };
        let values = complex_values(node_count, re, im);
        match wpc::grid::SampledFunction::new(Grid::Circle(grid), values, modulo_constant) {
            Ok(f) => {
                *out = Box::into_raw(Box::new(WpcSampled { inner: f }));
                WpcStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Reads a sampled-function schema file.
#[no_mangle]
pub unsafe extern "C" fn wpc_sampled_read(
    path: *const c_char,
    out: *mut *mut WpcSampled,
) -> WpcStatus {
    guarded(|| {
        require!(path, "path");
        require!(out, "out");
        let path = match path_of(path) {
            Ok(p) => p,
            Err(status) => return status,
        };
        match io::read_sampled(path) {
            Ok(f) => {
                *out = Box::into_raw(Box::new(WpcSampled { inner: f }));
                WpcStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Writes a sampled-function schema file.
#[no_mangle]
pub unsafe extern "C" fn wpc_sampled_write(
    handle: *const WpcSampled,
    path: *const c_char,
) -> WpcStatus {
    guarded(|| {
        require!(handle, "handle");
        require!(path, "path");
        let path = match path_of(path) {
            Ok(p) => p,
            Err(status) => return status,
        };
        match io::write_sampled(path, &(*handle).inner) {
            Ok(()) => WpcStatus::Ok,
            Err(e) => fail(e),
        }
    })
}

/// Number of stored samples.
#[no_mangle]
pub unsafe extern "C" fn wpc_sampled_len(
    handle: *const WpcSampled,
    out: *mut usize,
) -> WpcStatus {
    guarded(|| {
        require!(handle, "handle");
        require!(out, "out");
        *out = (*handle).inner.values.len();
        WpcStatus::Ok
    })
}

/// Copies the samples into caller-owned re/im buffers of length len, which
/// must equal wpc_sampled_len.
#[no_mangle]
pub unsafe extern "C" fn wpc_sampled_copy_values(
    handle: *const WpcSampled,
    re: *mut f64,
    im: *mut f64,
    len: usize,
) -> WpcStatus {
    guarded(|| {
        require!(handle, "handle");
        require!(re, "re");
        require!(im, "im");
        let values = &(*handle).inner.values;
        if values.len() != len {
            set_error("buffer length does not match the sample count");
            return WpcStatus::InvalidInput;
        }
        let re = std::slice::from_raw_parts_mut(re, len);
        let im = std::slice::from_raw_parts_mut(im, len);
        for (j, v) in values.iter().enumerate() {
            re[j] = v.re;
            im[j] = v.im;
        }
        WpcStatus::Ok
    })
}

/// Releases a sampled-function handle. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn wpc_sampled_free(handle: *mut WpcSampled) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// Order-(1/p, p) seminorm of line samples.
#[no_mangle]
pub unsafe extern "C" fn wpc_besov_seminorm(
    handle: *const WpcSampled,
    p: f64,
    out: *mut f64,
) -> WpcStatus {
    guarded(|| {
        require!(handle, "handle");
        require!(out, "out");
        match besov_seminorm(&(*handle).inner, p) {
            Ok(report) => {
                *out = report.value;
                WpcStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Mean-oscillation sup over dyadic intervals.
#[no_mangle]
pub unsafe extern "C" fn wpc_bmo_norm(
    handle: *const WpcSampled,
    out: *mut f64,
) -> WpcStatus {
    guarded(|| {
        require!(handle, "handle");
        require!(out, "out");
        match bmo_norm(&(*handle).inner) {
            Ok(report) => {
                *out = report.value;
                WpcStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Conjugate function: Hilbert transform for line samples, conjugate series
/// for circle samples. The result is a new handle.
#[no_mangle]
pub unsafe extern "C" fn wpc_hilbert(
    handle: *const WpcSampled,
    out: *mut *mut WpcSampled,
) -> WpcStatus {
    guarded(|| {
        require!(handle, "handle");
        require!(out, "out");
        let f = &(*handle).inner;
        let moved = match f.grid {
            Grid::Line(_) => hilbert_line(f),
            Grid::Circle(_) => conjugate_circle(f),
        };
        match moved {
            Ok(g) => {
                *out = Box::into_raw(Box::new(WpcSampled { inner: g }));
                WpcStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Solves the arc-length welding fixed point for real v. Non-convergence is
/// not an error here; the handle records it.
#[no_mangle]
pub unsafe extern "C" fn wpc_eval_lambda(
    v: *const WpcSampled,
    tol: f64,
    max_iter: usize,
    damping: f64,
    out: *mut *mut WpcWelding,
) -> WpcStatus {
    guarded(|| {
        require!(v, "v");
        require!(out, "out");
        match eval_lambda(&(*v).inner, tol, max_iter, damping) {
            Ok(w) => {
                *out = Box::into_raw(Box::new(WpcWelding { inner: w }));
                WpcStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Inverse direction of the welding fixed point.
#[no_mangle]
pub unsafe extern "C" fn wpc_eval_lambda_inverse(
    u: *const WpcSampled,
    out: *mut *mut WpcSampled,
) -> WpcStatus {
    guarded(|| {
        require!(u, "u");
        require!(out, "out");
        match eval_lambda_inverse(&(*u).inner) {
            Ok(v) => {
                *out = Box::into_raw(Box::new(WpcSampled { inner: v }));
                WpcStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Final fixed-point defect of the iteration.
#[no_mangle]
pub unsafe extern "C" fn wpc_welding_residual(
    handle: *const WpcWelding,
    out: *mut f64,
) -> WpcStatus {
    guarded(|| {
        require!(handle, "handle");
        require!(out, "out");
        *out = (*handle).inner.residual;
        WpcStatus::Ok
    })
}

/// Iterations actually used.
#[no_mangle]
pub unsafe extern "C" fn wpc_welding_iterations(
    handle: *const WpcWelding,
    out: *mut usize,
) -> WpcStatus {
    guarded(|| {
        require!(handle, "handle");
        require!(out, "out");
        *out = (*handle).inner.iterations;
        WpcStatus::Ok
    })
}

/// Whether the residual reached the tolerance.
#[no_mangle]
pub unsafe extern "C" fn wpc_welding_converged(
    handle: *const WpcWelding,
    out: *mut bool,
) -> WpcStatus {
    guarded(|| {
        require!(handle, "handle");
        require!(out, "out");
        *out = (*handle).inner.converged;
        WpcStatus::Ok
    })
}

/// Copy of the quasisymmetric-side log-derivative.
#[no_mangle]
pub unsafe extern "C" fn wpc_welding_log_f_prime(
    handle: *const WpcWelding,
    out: *mut *mut WpcSampled,
) -> WpcStatus {
    guarded(|| {
        require!(handle, "handle");
        require!(out, "out");
        *out = Box::into_raw(Box::new(WpcSampled { inner: (*handle).inner.log_f_prime.clone() }));
        WpcStatus::Ok
    })
}

/// Copy of the conformal-side log-derivative.
#[no_mangle]
pub unsafe extern "C" fn wpc_welding_log_h_prime(
    handle: *const WpcWelding,
    out: *mut *mut WpcSampled,
) -> WpcStatus {
    guarded(|| {
        require!(handle, "handle");
        require!(out, "out");
        *out = Box::into_raw(Box::new(WpcSampled { inner: (*handle).inner.log_h_prime.clone() }));
        WpcStatus::Ok
    })
}

/// Releases a welding handle. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn wpc_welding_free(handle: *mut WpcWelding) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}

/// Reads a dilatation-field schema file.
#[no_mangle]
pub unsafe extern "C" fn wpc_field_read(
    path: *const c_char,
    out: *mut *mut WpcField,
) -> WpcStatus {
    guarded(|| {
        require!(path, "path");
        require!(out, "out");
        let path = match path_of(path) {
            Ok(p) => p,
            Err(status) => return status,
        };
        match io::read_field(path) {
            Ok(mu) => {
                *out = Box::into_raw(Box::new(WpcField { inner: mu }));
                WpcStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Largest sampled dilatation modulus.
#[no_mangle]
pub unsafe extern "C" fn wpc_field_sup(
    handle: *const WpcField,
    out: *mut f64,
) -> WpcStatus {
    guarded(|| {
        require!(handle, "handle");
        require!(out, "out");
        *out = (*handle).inner.sup();
        WpcStatus::Ok
    })
}

/// Degree-p integral norm of the field against the hyperbolic density.
#[no_mangle]
pub unsafe extern "C" fn wpc_mp_norm(
    handle: *const WpcField,
    p: f64,
    out: *mut f64,
) -> WpcStatus {
    guarded(|| {
        require!(handle, "handle");
        require!(out, "out");
        match mp_norm(&(*handle).inner, p) {
            Ok(report) => {
                *out = report.value;
                WpcStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Square-mass box sup of the field.
#[no_mangle]
pub unsafe extern "C" fn wpc_carleson_norm(
    handle: *const WpcField,
    out: *mut f64,
) -> WpcStatus {
    guarded(|| {
        require!(handle, "handle");
        require!(out, "out");
        match carleson_norm(&(*handle).inner) {
            Ok(report) => {
                *out = report.value;
                WpcStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Comparison constant between the box sup and the integral norm, p >= 2.
#[no_mangle]
pub unsafe extern "C" fn wpc_cp_constant(p: f64, out: *mut f64) -> WpcStatus {
    guarded(|| {
        require!(out, "out");
        match cp_constant(p) {
            Ok(c) => {
                *out = c;
                WpcStatus::Ok
            }
            Err(e) => fail(e),
        }
    })
}

/// Releases a field handle. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn wpc_field_free(handle: *mut WpcField) {
    if !handle.is_null() {
        drop(Box::from_raw(handle));
    }
}
