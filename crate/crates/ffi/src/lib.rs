//! C ABI over the numerical core.
//!
//! Every fallible call returns an [`FwStatus`]; results go through out
//! pointers. On failure the message is available from
//! [`fw_last_error_message`] on the same thread. Measures are opaque
//! [`FwMeasure`] handles released with [`fw_measure_free`].

use fwlab::conditions::{gamma_lower_bound, s_necessary};
use fwlab::experiments::{run, ExperimentConfig};
use fwlab::fourier::{measure_ft, measure_ft_complex};
use fwlab::measures::{
    build_cantor_product, build_cantor_product_centered, build_sphere_measure, frostman_constant,
    read_measure_json, AtomicMeasure,
};
use fwlab::norms::sphere_decay_norm;
use fwlab::LabError;
use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FwStatus {
    Ok = 0,
    NullPointer = 1,
    Parameter = 2,
    Domain = 3,
    Range = 4,
    Resource = 5,
    Io = 6,
    Config = 7,
    InvalidUtf8 = 8,
    Panic = 9,
}

/// Opaque measure handle.
pub struct FwMeasure {
    inner: AtomicMeasure,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let text = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(text));
}

fn status_of(err: &LabError) -> FwStatus {
    match err {
        LabError::Parameter(_) => FwStatus::Parameter,
        LabError::Domain(_) => FwStatus::Domain,
        LabError::Range(_) => FwStatus::Range,
        LabError::Resource(_) => FwStatus::Resource,
        LabError::Config(_) => FwStatus::Config,
        LabError::Io(_) | LabError::Json(_) | LabError::Csv(_) => FwStatus::Io,
    }
}

/// Runs `body`, converting errors and panics into a status.
fn guard(body: impl FnOnce() -> Result<(), (FwStatus, String)>) -> FwStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => FwStatus::Ok,
        Ok(Err((status, message))) => {
            set_error(message);
            status
        }
        Err(_) => {
            set_error("internal panic".to_string());
            FwStatus::Panic
        }
    }
}

fn lab<T>(r: fwlab::Result<T>) -> Result<T, (FwStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (FwStatus, String) {
    (FwStatus::NullPointer, format!("{what} is null"))
}

unsafe fn measure_ref<'a>(m: *const FwMeasure) -> Result<&'a AtomicMeasure, (FwStatus, String)> {
    m.as_ref().map(|h| &h.inner).ok_or_else(|| null("measure"))
}

unsafe fn write_out<T>(out: *mut T, value: T) -> Result<(), (FwStatus, String)> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    out.write(value);
    Ok(())
}

unsafe fn c_str<'a>(s: *const c_char) -> Result<&'a str, (FwStatus, String)> {
    if s.is_null() {
        return Err(null("string"));
    }
    CStr::from_ptr(s)
        .to_str()
        .map_err(|e| (FwStatus::InvalidUtf8, e.to_string()))
}

unsafe fn emit_measure(out: *mut *mut FwMeasure, mu: AtomicMeasure) -> Result<(), (FwStatus, String)> {
    write_out(out, Box::into_raw(Box::new(FwMeasure { inner: mu })))
}

/// Message of the last failed call on this thread, or null. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn fw_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Cantor product of `depth` generations in `n` dimensions; `centered`
/// nonzero selects the symmetric copy in [-1/2, 1/2]^n.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn fw_measure_cantor(
    ratio: f64,
    depth: usize,
    n: usize,
    centered: i32,
    out: *mut *mut FwMeasure,
) -> FwStatus {
    guard(|| {
        let mu = if centered != 0 {
            build_cantor_product_centered(ratio, depth, n)
        } else {
            build_cantor_product(ratio, depth, n)
        };
        emit_measure(out, lab(mu)?)
    })
}

/// Surface measure on the sphere of radius `radius` in R^n.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn fw_measure_sphere(radius: f64, n: usize, points: usize, out: *mut *mut FwMeasure) -> FwStatus {
    guard(|| emit_measure(out, lab(build_sphere_measure(radius, n, points))?))
}

/// Loads a measure from a JSON file in the exchange format.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fw_measure_from_json(path: *const c_char, out: *mut *mut FwMeasure) -> FwStatus {
    guard(|| {
        let path = c_str(path)?;
        emit_measure(out, lab(read_measure_json(Path::new(path)))?)
    })
}

/// Releases a handle; null is ignored.
///
/// # Safety
/// `m` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn fw_measure_free(m: *mut FwMeasure) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// # Safety
/// `m` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn fw_measure_len(m: *const FwMeasure, out: *mut usize) -> FwStatus {
    guard(|| write_out(out, measure_ref(m)?.len()))
}

/// # Safety
/// `m` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn fw_measure_dim(m: *const FwMeasure, out: *mut usize) -> FwStatus {
    guard(|| write_out(out, measure_ref(m)?.dim()))
}

/// # Safety
/// `m` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn fw_measure_total_mass(m: *const FwMeasure, out: *mut f64) -> FwStatus {
    guard(|| write_out(out, measure_ref(m)?.total_mass()))
}

/// Growth constant sup mu(B(x, r)) / r^alpha over radii down to `floor`.
///
/// # Safety
/// `m` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn fw_frostman_constant(m: *const FwMeasure, alpha: f64, floor: f64, out: *mut f64) -> FwStatus {
    guard(|| {
        let report = lab(frostman_constant(measure_ref(m)?, alpha, floor))?;
        write_out(out, report.constant_estimate)
    })
}

/// Fourier transform of an even measure at `count` frequencies (`dim`
/// coordinates each, row-major in `xi`); writes `count` real values.
///
/// # Safety
/// `xi` must hold `count * dim` values and `out` room for `count`.
#[no_mangle]
pub unsafe extern "C" fn fw_measure_ft(m: *const FwMeasure, xi: *const f64, count: usize, out: *mut f64) -> FwStatus {
    guard(|| {
        let mu = measure_ref(m)?;
        if xi.is_null() || out.is_null() {
            return Err(null("frequency or output buffer"));
        }
        let freqs = std::slice::from_raw_parts(xi, count * mu.dim());
        let values = lab(measure_ft(mu, freqs))?;
        std::slice::from_raw_parts_mut(out, count).copy_from_slice(&values);
        Ok(())
    })
}

/// Complex Fourier transform of any measure; writes `count` (re, im) pairs.
///
/// # Safety
/// `xi` must hold `count * dim` values and `out` room for `2 * count`.
#[no_mangle]
pub unsafe extern "C" fn fw_measure_ft_complex(
    m: *const FwMeasure,
    xi: *const f64,
    count: usize,
    out: *mut f64,
) -> FwStatus {
    guard(|| {
        let mu = measure_ref(m)?;
        if xi.is_null() || out.is_null() {
            return Err(null("frequency or output buffer"));
        }
        let freqs = std::slice::from_raw_parts(xi, count * mu.dim());
        let values = lab(measure_ft_complex(mu, freqs))?;
        let dest = std::slice::from_raw_parts_mut(out, 2 * count);
        for (pair, v) in dest.chunks_mut(2).zip(values) {
            pair[0] = v.re;
            pair[1] = v.im;
        }
        Ok(())
    })
}

/// Spherical average of |mu^(R w)|^2 over unit directions w.
///
/// # Safety
/// `m` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn fw_sphere_decay(m: *const FwMeasure, radius: f64, sphere_points: usize, out: *mut f64) -> FwStatus {
    guard(|| write_out(out, lab(sphere_decay_norm(measure_ref(m)?, radius, sphere_points))?))
}

/// Lebesgue measure of the distance set thickened by `radius`.
///
/// # Safety
/// `m` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn fw_distance_set_measure(m: *const FwMeasure, radius: f64, out: *mut f64) -> FwStatus {
    guard(|| write_out(out, lab(fwlab::distance::distance_set_measure(measure_ref(m)?, radius))?))
}

/// Necessary Sobolev exponent for the fractal Strichartz estimate.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fw_s_necessary(alpha: f64, p: f64, n: usize, out: *mut f64) -> FwStatus {
    guard(|| write_out(out, lab(s_necessary(alpha, p, n))?))
}

/// Best known lower bound for the averaged decay gain.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fw_gamma_lower_bound(alpha: f64, n: usize, out: *mut f64) -> FwStatus {
    guard(|| write_out(out, lab(gamma_lower_bound(alpha, n))?.value))
}

/// Runs an experiment from a JSON config and returns its result record as a
/// JSON string, to be released with [`fw_string_free`]. `passed` receives 1
/// when every gate passes. Nothing is written to disk.
///
/// # Safety
/// `config_json` must be a NUL-terminated string; the out pointers writable.
#[no_mangle]
pub unsafe extern "C" fn fw_run_experiment(
    config_json: *const c_char,
    result_json: *mut *mut c_char,
    passed: *mut i32,
) -> FwStatus {
    guard(|| {
        let text = c_str(config_json)?;
        let config = ExperimentConfig::from_json(text).map_err(|d| {
            let lines: Vec<String> = d.iter().map(|x| x.to_string()).collect();
            (FwStatus::Config, lines.join("; "))
        })?;
        let record = lab(run(&config, None))?;
        let json = lab(record.to_json())?;
        let c = CString::new(json).map_err(|e| (FwStatus::Io, e.to_string()))?;
        write_out(passed, i32::from(record.pass))?;
        write_out(result_json, c.into_raw())
    })
}

/// Releases a string returned by this library; null is ignored.
///
/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn fw_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
