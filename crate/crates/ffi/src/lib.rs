//! C ABI over `ar1cd`.
//!
//! Objects are opaque handles created by `*_new`/estimator calls and
//! released with the matching `*_free`. Every fallible call returns an
//! [`Ar1cdStatus`]; on failure, [`ar1cd_last_error`] describes the cause on
//! the calling thread. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use ar1cd::{
    bootstrap_cd, c_at_one, cd_median, df_cdf, estimate_cd, extract_interval, flat_prior_cd,
    log_likelihood, make_plan, mle_phi, mle_sigma2, simulate_df_distribution, spike_prior_cd,
    EmpiricalCd, Error, LimitSample, McConfig, PhiGrid, TimeSeries,
};

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ar1cdStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Domain = 3,
    Numerical = 4,
    BufferTooSmall = 5,
    Panic = 6,
}

/// Observed series.
pub struct Ar1cdSeries(TimeSeries);

/// Confidence distribution on a grid.
pub struct Ar1cdCd(EmpiricalCd);

/// Sorted draws from a unit-root limit distribution.
pub struct Ar1cdLimitSample(LimitSample);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> Ar1cdStatus {
    match err {
        Error::InvalidArgument(_)
        | Error::TooShort(_)
        | Error::NonFinite(_)
        | Error::Parse { .. }
        | Error::Io(_)
        | Error::Csv(_)
        | Error::Json(_) => Ar1cdStatus::InvalidArgument,
        Error::Domain(_) | Error::DegenerateSeries(_) => Ar1cdStatus::Domain,
        _ => Ar1cdStatus::Numerical,
    }
}

/// Runs `f`, recording any error or panic for [`ar1cd_last_error`].
fn guard<F: FnOnce() -> Result<(), Ar1cdStatus>>(f: F) -> Ar1cdStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => Ar1cdStatus::Ok,
        Ok(Err(status)) => status,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_last_error(&format!("internal panic: {msg}"));
            Ar1cdStatus::Panic
        }
    }
}

fn lift<T>(r: ar1cd::Result<T>) -> Result<T, Ar1cdStatus> {
    r.map_err(|e| {
        set_last_error(&e.to_string());
        status_of(&e)
    })
}

unsafe fn deref<'a, T>(p: *const T) -> Result<&'a T, Ar1cdStatus> {
    p.as_ref().ok_or_else(|| {
        set_last_error("null pointer argument");
        Ar1cdStatus::NullPointer
    })
}

fn check_out<T>(out: *mut T) -> Result<(), Ar1cdStatus> {
    if out.is_null() {
        set_last_error("null output pointer");
        return Err(Ar1cdStatus::NullPointer);
    }
    Ok(())
}

unsafe fn write<T>(out: *mut T, value: T) -> Result<(), Ar1cdStatus> {
    check_out(out)?;
    out.write(value);
    Ok(())
}

fn boxed<T>(value: T) -> *mut T {
    Box::into_raw(Box::new(value))
}

/// Message for the last failed call on this thread, or NULL. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn ar1cd_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ar1cd_version() -> *const c_char {
    static VERSION: &CStr =
        match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
            Ok(v) => v,
            Err(_) => c"unknown",
        };
    VERSION.as_ptr()
}

/// Copies `len` values into a new series handle.
///
/// # Safety
/// `values` must point to `len` readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ar1cd_series_new(
    values: *const f64,
    len: usize,
    demean: bool,
    out: *mut *mut Ar1cdSeries,
) -> Ar1cdStatus {
    guard(|| {
        check_out(out)?;
        if values.is_null() {
            set_last_error("null values pointer");
            return Err(Ar1cdStatus::NullPointer);
        }
        let data = std::slice::from_raw_parts(values, len).to_vec();
        let series = lift(TimeSeries::new(data))?;
        let series = if demean { series.demean() } else { series };
        write(out, boxed(Ar1cdSeries(series)))
    })
}

/// # Safety
/// `series` must come from [`ar1cd_series_new`] and not be freed yet, or be NULL.
#[no_mangle]
pub unsafe extern "C" fn ar1cd_series_free(series: *mut Ar1cdSeries) {
    if !series.is_null() {
        drop(Box::from_raw(series));
    }
}

/// # Safety
/// `series` must be a live handle or NULL (which yields 0).
#[no_mangle]
pub unsafe extern "C" fn ar1cd_series_len(series: *const Ar1cdSeries) -> usize {
    series.as_ref().map_or(0, |s| s.0.len())
}

/// # Safety
/// `series` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ar1cd_mle_phi(series: *const Ar1cdSeries, out: *mut f64) -> Ar1cdStatus {
    guard(|| {
        check_out(out)?;
        let s = deref(series)?;
        write(out, lift(mle_phi(&s.0))?)
    })
}

/// # Safety
/// `series` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ar1cd_mle_sigma2(
    series: *const Ar1cdSeries,
    out: *mut f64,
) -> Ar1cdStatus {
    guard(|| {
        check_out(out)?;
        let s = deref(series)?;
        write(out, lift(mle_sigma2(&s.0))?)
    })
}

/// Gaussian AR(1) log-likelihood with `y_0 = 0`.
///
/// # Safety
/// `series` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ar1cd_log_likelihood(
    series: *const Ar1cdSeries,
    phi: f64,
    sigma2: f64,
    out: *mut f64,
) -> Ar1cdStatus {
    guard(|| {
        check_out(out)?;
        let s = deref(series)?;
        write(out, lift(log_likelihood(&s.0, phi, sigma2))?)
    })
}

/// Simulated distribution on `[phi_lo, phi_hi]` with `intervals` steps.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ar1cd_estimate_cd(
    phi_obs: f64,
    phi_lo: f64,
    phi_hi: f64,
    intervals: usize,
    n: usize,
    reps: usize,
    seed: u64,
    out: *mut *mut Ar1cdCd,
) -> Ar1cdStatus {
    guard(|| {
        check_out(out)?;
        let grid = lift(PhiGrid::new(phi_lo, phi_hi, intervals))?;
        let cfg = lift(McConfig::new(reps, n, seed))?;
        let cd = lift(estimate_cd(phi_obs, &grid, &cfg))?;
        write(out, boxed(Ar1cdCd(cd)))
    })
}

/// Residual-bootstrap distribution on `[phi_lo, 1]` from a plan drawn with
/// `seed`.
///
/// # Safety
/// `series` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ar1cd_bootstrap_cd(
    series: *const Ar1cdSeries,
    phi_lo: f64,
    intervals: usize,
    reps: usize,
    seed: u64,
    out: *mut *mut Ar1cdCd,
) -> Ar1cdStatus {
    guard(|| {
        check_out(out)?;
        let s = deref(series)?;
        let grid = lift(PhiGrid::to_unit_root(phi_lo, intervals))?;
        let plan = lift(make_plan(s.0.len(), reps, seed))?;
        let cd = lift(bootstrap_cd(&s.0, &grid, &plan, 1))?;
        write(out, boxed(Ar1cdCd(cd)))
    })
}

/// Flat-prior distribution on `[phi_lo, 1]`.
///
/// # Safety
/// `series` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ar1cd_flat_prior_cd(
    series: *const Ar1cdSeries,
    phi_lo: f64,
    intervals: usize,
    out: *mut *mut Ar1cdCd,
) -> Ar1cdStatus {
    guard(|| {
        check_out(out)?;
        let s = deref(series)?;
        let grid = lift(PhiGrid::to_unit_root(phi_lo, intervals))?;
        let cd = lift(flat_prior_cd(&s.0, &grid))?;
        write(out, boxed(Ar1cdCd(cd)))
    })
}

/// Flat prior with point mass `b` at the unit root, on `[phi_lo, 1]`.
///
/// # Safety
/// `series` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ar1cd_spike_prior_cd(
    series: *const Ar1cdSeries,
    phi_lo: f64,
    intervals: usize,
    b: f64,
    out: *mut *mut Ar1cdCd,
) -> Ar1cdStatus {
    guard(|| {
        check_out(out)?;
        let s = deref(series)?;
        let grid = lift(PhiGrid::to_unit_root(phi_lo, intervals))?;
        let spike = lift(spike_prior_cd(&s.0, &grid, b))?;
        write(out, boxed(Ar1cdCd(spike.cd)))
    })
}

/// Number of grid points, 0 for NULL.
///
/// # Safety
/// `cd` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn ar1cd_cd_len(cd: *const Ar1cdCd) -> usize {
    cd.as_ref().map_or(0, |c| c.0.values.len())
}

/// Copies grid points and values into caller buffers of capacity `cap`.
/// Either buffer may be NULL to skip it.
///
/// # Safety
/// `cd` must be a live handle; non-NULL buffers must hold `cap` doubles.
#[no_mangle]
pub unsafe extern "C" fn ar1cd_cd_copy(
    cd: *const Ar1cdCd,
    phi: *mut f64,
    values: *mut f64,
    cap: usize,
) -> Ar1cdStatus {
    guard(|| {
        let c = &deref(cd)?.0;
        let len = c.values.len();
        if cap < len {
            set_last_error(&format!("buffer holds {cap} values, need {len}"));
            return Err(Ar1cdStatus::BufferTooSmall);
        }
        if !phi.is_null() {
            ptr::copy_nonoverlapping(c.grid.points().as_ptr(), phi, len);
        }
        if !values.is_null() {
            ptr::copy_nonoverlapping(c.values.as_ptr(), values, len);
        }
        Ok(())
    })
}

/// Equal-tailed interval at `level`.
///
/// # Safety
/// `cd` must be a live handle; output pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn ar1cd_cd_interval(
    cd: *const Ar1cdCd,
    level: f64,
    lo: *mut f64,
    hi: *mut f64,
    hi_clipped: *mut bool,
) -> Ar1cdStatus {
    guard(|| {
        check_out(lo)?;
        check_out(hi)?;
        check_out(hi_clipped)?;
        let ci = lift(extract_interval(&deref(cd)?.0, level))?;
        write(lo, ci.lo)?;
        write(hi, ci.hi)?;
        write(hi_clipped, ci.hi_clipped)
    })
}

/// # Safety
/// `cd` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ar1cd_cd_median(cd: *const Ar1cdCd, out: *mut f64) -> Ar1cdStatus {
    guard(|| {
        check_out(out)?;
        write(out, lift(cd_median(&deref(cd)?.0))?)
    })
}

/// # Safety
/// `cd` must come from an estimator call and not be freed yet, or be NULL.
#[no_mangle]
pub unsafe extern "C" fn ar1cd_cd_free(cd: *mut Ar1cdCd) {
    if !cd.is_null() {
        drop(Box::from_raw(cd));
    }
}

/// Draws `reps` values of `m (phi_hat - 1)` at the unit root with inner
/// sample size `inner_n`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ar1cd_df_sample(
    reps: usize,
    inner_n: usize,
    seed: u64,
    out: *mut *mut Ar1cdLimitSample,
) -> Ar1cdStatus {
    guard(|| {
        check_out(out)?;
        let cfg = lift(McConfig::new(reps, inner_n, seed))?;
        let sample = lift(simulate_df_distribution(&cfg))?;
        write(out, boxed(Ar1cdLimitSample(sample)))
    })
}

/// Empirical `P(Z <= z)`.
///
/// # Safety
/// `sample` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ar1cd_df_cdf(
    sample: *const Ar1cdLimitSample,
    z: f64,
    out: *mut f64,
) -> Ar1cdStatus {
    guard(|| {
        check_out(out)?;
        write(out, df_cdf(&deref(sample)?.0, z))
    })
}

/// Large-sample `C(1)` for an estimate `phi_obs` from `n` observations.
///
/// # Safety
/// `sample` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ar1cd_c_at_one(
    sample: *const Ar1cdLimitSample,
    phi_obs: f64,
    n: usize,
    out: *mut f64,
) -> Ar1cdStatus {
    guard(|| {
        check_out(out)?;
        write(out, c_at_one(phi_obs, n, &deref(sample)?.0))
    })
}

/// # Safety
/// `sample` must come from [`ar1cd_df_sample`] and not be freed yet, or be NULL.
#[no_mangle]
pub unsafe extern "C" fn ar1cd_limit_sample_free(sample: *mut Ar1cdLimitSample) {
    if !sample.is_null() {
        drop(Box::from_raw(sample));
    }
}
