//! C ABI over `crsing`.
//!
//! Surfaces and sheet systems are opaque handles owned by the caller and
//! released with their `_free` function. Every fallible call returns a
//! [`CrsStatus`]; on failure the message is kept per thread and read back
//! with [`crs_last_error_message`]. Strings returned through `char **`
//! belong to the caller and go back through [`crs_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use num_complex::Complex64;

use crsing::complex::CircleGrid;
use crsing::hull::{hull_probe, Point2, Verdict};
use crsing::minimax::LawsonConfig;
use crsing::sheets::SheetSystem;
use crsing::surface::{certify, CRSurface};
use crsing::Error;

/// Result codes. `NotCertified` is a verdict, not a failure: the output
/// arguments are still filled in.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrsStatus {
    Ok = 0,
    NotCertified = 1,
    NullPointer = 2,
    InvalidArgument = 3,
    Schema = 4,
    Json = 5,
    Domain = 6,
    NoRadius = 7,
    Solver = 8,
    Io = 9,
    Panic = 10,
}

/// A validated surface germ.
pub struct CrsSurface {
    inner: CRSurface,
}

/// The Δ sheets of a certified surface.
pub struct CrsSheets {
    inner: SheetSystem,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("NUL bytes replaced");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> CrsStatus {
    match err {
        Error::Invalid(_) | Error::IndexNotInSet { .. } => CrsStatus::InvalidArgument,
        Error::Schema(_) => CrsStatus::Schema,
        Error::Json { .. } => CrsStatus::Json,
        Error::Domain(..) => CrsStatus::Domain,
        Error::NotCertified(_) => CrsStatus::NotCertified,
        Error::NoRadius(_) => CrsStatus::NoRadius,
        Error::Solver(_) => CrsStatus::Solver,
        Error::Io(_) => CrsStatus::Io,
    }
}

fn fail(status: CrsStatus, msg: impl Into<String>) -> CrsStatus {
    set_error(msg.into());
    status
}

/// Runs `f`, records any error, and turns panics into `Panic`.
fn guard(f: impl FnOnce() -> Result<CrsStatus, CrsStatus>) -> CrsStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(s)) => s,
        Ok(Err(s)) => s,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            fail(CrsStatus::Panic, format!("internal panic: {msg}"))
        }
    }
}

fn lift<T>(r: crsing::Result<T>) -> Result<T, CrsStatus> {
    r.map_err(|e| fail(status_of(&e), e.to_string()))
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, CrsStatus> {
    p.as_ref().ok_or_else(|| fail(CrsStatus::NullPointer, format!("{what} is null")))
}

unsafe fn out_ptr<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, CrsStatus> {
    p.as_mut().ok_or_else(|| fail(CrsStatus::NullPointer, format!("{what} is null")))
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, CrsStatus> {
    if p.is_null() {
        return Err(fail(CrsStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(CrsStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

fn grid(samples: usize) -> Result<CircleGrid, CrsStatus> {
    if !(64..=1_000_000).contains(&samples) {
        return Err(fail(CrsStatus::InvalidArgument, "samples must lie in [64, 1000000]"));
    }
    lift(CircleGrid::new(samples))
}

fn into_c_string(s: String) -> *mut c_char {
    CString::new(s).expect("JSON has no NUL bytes").into_raw()
}

/// Message of the last failed call on this thread, or NULL. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn crs_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn crs_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parses a surface from its JSON description.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn crs_surface_from_json(json: *const c_char, out: *mut *mut CrsSurface) -> CrsStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = ptr::null_mut();
        let text = read_str(json, "json")?;
        let inner = lift(CRSurface::from_json_str(text, "<ffi>"))?;
        *out = Box::into_raw(Box::new(CrsSurface { inner }));
        Ok(CrsStatus::Ok)
    })
}

/// Releases a surface. NULL is ignored.
///
/// # Safety
/// `s` must come from [`crs_surface_from_json`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn crs_surface_free(s: *mut CrsSurface) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Evaluates `τ_M` at `z = re + i im`.
///
/// # Safety
/// `s` must be a live surface handle; the output pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn crs_surface_tau(
    s: *const CrsSurface,
    m: usize,
    re: f64,
    im: f64,
    out_re: *mut f64,
    out_im: *mut f64,
) -> CrsStatus {
    guard(|| {
        let s = deref(s, "surface")?;
        let (o_re, o_im) = (out_ptr(out_re, "out_re")?, out_ptr(out_im, "out_im")?);
        let v = lift(s.inner.tau_eval(m, Complex64::new(re, im)))?;
        *o_re = v.re;
        *o_im = v.im;
        Ok(CrsStatus::Ok)
    })
}

/// Runs the certificate and returns its JSON report. Returns `Ok` when the
/// surface is certified and `NotCertified` otherwise; the report is written
/// in both cases.
///
/// # Safety
/// `s` must be a live surface handle and `out_json` writable.
#[no_mangle]
pub unsafe extern "C" fn crs_certify_json(s: *const CrsSurface, samples: usize, out_json: *mut *mut c_char) -> CrsStatus {
    guard(|| {
        let out = out_ptr(out_json, "out_json")?;
        *out = ptr::null_mut();
        let s = deref(s, "surface")?;
        let cert = certify(&s.inner, &grid(samples)?);
        *out = into_c_string(serde_json::to_string(&cert).expect("certificate serializes"));
        Ok(if cert.passed { CrsStatus::Ok } else { CrsStatus::NotCertified })
    })
}

/// Certifies the surface and builds its sheets.
///
/// # Safety
/// `s` must be a live surface handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn crs_sheets_build(s: *const CrsSurface, samples: usize, out: *mut *mut CrsSheets) -> CrsStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = ptr::null_mut();
        let s = deref(s, "surface")?;
        let cert = certify(&s.inner, &grid(samples)?);
        let inner = lift(SheetSystem::build(&s.inner, &cert))?;
        *out = Box::into_raw(Box::new(CrsSheets { inner }));
        Ok(CrsStatus::Ok)
    })
}

/// Releases a sheet system. NULL is ignored.
///
/// # Safety
/// `h` must come from [`crs_sheets_build`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn crs_sheets_free(h: *mut CrsSheets) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// Number of sheets Δ, or 0 for a NULL handle.
///
/// # Safety
/// `h` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn crs_sheets_count(h: *const CrsSheets) -> usize {
    h.as_ref().map_or(0, |h| h.inner.delta())
}

/// Radius of the disc on which the sheets are defined, or NaN for NULL.
///
/// # Safety
/// `h` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn crs_sheets_validity_radius(h: *const CrsSheets) -> f64 {
    h.as_ref().map_or(f64::NAN, |h| h.inner.validity_radius())
}

/// Evaluates sheet `j` (`1 <= j <= Δ`) at `z = re + i im`.
///
/// # Safety
/// `h` must be a live handle; the output pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn crs_sheets_eval(
    h: *const CrsSheets,
    j: usize,
    re: f64,
    im: f64,
    out_re: *mut f64,
    out_im: *mut f64,
) -> CrsStatus {
    guard(|| {
        let h = deref(h, "sheets")?;
        let (o_re, o_im) = (out_ptr(out_re, "out_re")?, out_ptr(out_im, "out_im")?);
        let v = lift(h.inner.sheet_eval(j, Complex64::new(re, im)))?;
        *o_re = v.re;
        *o_im = v.im;
        Ok(CrsStatus::Ok)
    })
}

/// `|∂F/∂z̄|² - |∂F/∂z|²` of the normalized sheet at `z`.
///
/// # Safety
/// `h` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn crs_sheets_jacobian_gap(h: *const CrsSheets, re: f64, im: f64, out: *mut f64) -> CrsStatus {
    guard(|| {
        let h = deref(h, "sheets")?;
        let o = out_ptr(out, "out")?;
        *o = lift(h.inner.jacobian_gap(Complex64::new(re, im)))?;
        Ok(CrsStatus::Ok)
    })
}

/// Polynomial-hull probe. `samples` holds `n` points as consecutive
/// `(z.re, z.im, w.re, w.im)` quadruples and `probe` one more quadruple.
/// Writes `m_1 .. m_{d_max}` into `m_values` (length `d_max`) and sets
/// `*outside` to 1 when some degree separates the probe.
///
/// # Safety
/// `samples` must hold `4 n` doubles, `probe` 4, `m_values` `d_max`.
#[no_mangle]
pub unsafe extern "C" fn crs_hull_probe(
    samples: *const f64,
    n: usize,
    probe: *const f64,
    d_max: u32,
    m_values: *mut f64,
    outside: *mut i32,
) -> CrsStatus {
    guard(|| {
        if samples.is_null() || probe.is_null() || m_values.is_null() || outside.is_null() {
            return Err(fail(CrsStatus::NullPointer, "null argument to crs_hull_probe"));
        }
        if n == 0 || d_max == 0 {
            return Err(fail(CrsStatus::InvalidArgument, "need at least one sample and d_max >= 1"));
        }
        let raw = std::slice::from_raw_parts(samples, 4 * n);
        let pts: Vec<Point2> = raw
            .chunks_exact(4)
            .map(|q| (Complex64::new(q[0], q[1]), Complex64::new(q[2], q[3])))
            .collect();
        let p = std::slice::from_raw_parts(probe, 4);
        let probe = (Complex64::new(p[0], p[1]), Complex64::new(p[2], p[3]));
        let res = lift(hull_probe(&pts, probe, d_max, &LawsonConfig::default()))?;
        std::slice::from_raw_parts_mut(m_values, d_max as usize).copy_from_slice(&res.m_values);
        *outside = i32::from(res.verdict == Verdict::Outside);
        Ok(CrsStatus::Ok)
    })
}

/// Releases a string returned by this library. NULL is ignored.
///
/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn crs_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
