//! C interface to the twistqft core.
//!
//! Objects cross the boundary as opaque pointers owned by the caller and
//! released with the matching `*_free`. Every fallible call returns a
//! [`TqStatus`]; the message of the most recent failure on the calling thread
//! is available through [`tq_last_error_message`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::ptr;

use twistqft::cli::{self, Command, RunConfig};
use twistqft::deform::{self, DeformationParams};
use twistqft::frw4::{self, Causal, GridSpec, Lattice, SpectralField, TimeGrid};
use twistqft::series::FormalSeries;
use twistqft::Error;

/// Result of a call. Values 1 to 3 match the CLI exit codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TqStatus {
    Ok = 0,
    InvalidInput = 1,
    Numerical = 2,
    Io = 3,
    NullPointer = 4,
    Panic = 5,
}

/// Truncated power series with exact rational coefficients.
pub struct TqSeries(FormalSeries);

/// Log-uniform time grid times a periodic spatial lattice.
pub struct TqGrid(GridSpec);

/// Field stored per spatial Fourier mode.
pub struct TqField(SpectralField);

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

struct Fail(TqStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        let status = match e.exit_code() {
            1 => TqStatus::InvalidInput,
            2 => TqStatus::Numerical,
            _ => TqStatus::Io,
        };
        Fail(status, e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(TqStatus::NullPointer, format!("{what} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> TqStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error(String::new());
            TqStatus::Ok
        }
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            TqStatus::Panic
        }
    }
}

unsafe fn get<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn put<T>(out: *mut *mut T, value: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn write<T>(out: *mut T, value: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    *out = value;
    Ok(())
}

unsafe fn string<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Fail(TqStatus::InvalidInput, format!("{what} is not UTF-8")))
}

/// Length in bytes of the last error message on this thread, without the terminator.
#[no_mangle]
pub extern "C" fn tq_last_error_length() -> usize {
    LAST_ERROR.with(|e| e.borrow().len())
}

/// Copies the last error message into `buf` (NUL-terminated, truncated to
/// `len - 1` bytes). Returns the number of bytes written before the terminator.
///
/// # Safety
/// `buf` must be valid for `len` bytes or null.
#[no_mangle]
pub unsafe extern "C" fn tq_last_error_message(buf: *mut c_char, len: usize) -> usize {
    if buf.is_null() || len == 0 {
        return 0;
    }
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        let n = msg.len().min(len - 1);
        ptr::copy_nonoverlapping(msg.as_ptr().cast::<c_char>(), buf, n);
        *buf.add(n) = 0;
        n
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn tq_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Order-`order` expansion of `sec(u)^{1/2}` (`inverse` false) or `cos(u)^{1/2}`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn tq_series_sqrt_sec(order: usize, inverse: bool, out: *mut *mut TqSeries) -> TqStatus {
    guard(|| {
        let s = if inverse { FormalSeries::sqrt_cos(order) } else { FormalSeries::sqrt_sec(order) };
        put(out, TqSeries(s))
    })
}

/// Truncated product of two series of equal order.
///
/// # Safety
/// Pointers must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn tq_series_mul(a: *const TqSeries, b: *const TqSeries, out: *mut *mut TqSeries) -> TqStatus {
    guard(|| {
        let p = get(a, "a")?.0.mul(&get(b, "b")?.0)?;
        put(out, TqSeries(p))
    })
}

/// Truncation order, or 0 for null.
///
/// # Safety
/// `s` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn tq_series_order(s: *const TqSeries) -> usize {
    s.as_ref().map_or(0, |s| s.0.order())
}

/// Coefficient `n`, rounded to the nearest double.
///
/// # Safety
/// `s` must come from this library; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn tq_series_coefficient(s: *const TqSeries, n: usize, out: *mut f64) -> TqStatus {
    guard(|| {
        let c = get(s, "series")?.0.to_f64();
        let v = *c.get(n).ok_or_else(|| Fail(TqStatus::InvalidInput, format!("index {n} above order {}", c.len() - 1)))?;
        write(out, v)
    })
}

/// Returns 1 if every coefficient is exactly zero, 0 otherwise, -1 for null.
///
/// # Safety
/// `s` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn tq_series_is_zero(s: *const TqSeries) -> i32 {
    s.as_ref().map_or(-1, |s| i32::from(s.0.is_zero()))
}

/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn tq_series_free(s: *mut TqSeries) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Grid with `nt` log-uniform times in `[t_min, t_max]` and an
/// `n[0] x n[1] x n[2]` periodic box of side lengths `len`.
///
/// # Safety
/// `n` and `len` must point to three elements; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn tq_grid_new(
    t_min: f64,
    t_max: f64,
    nt: usize,
    n: *const usize,
    len: *const f64,
    out: *mut *mut TqGrid,
) -> TqStatus {
    guard(|| {
        if n.is_null() || len.is_null() {
            return Err(null("lattice shape"));
        }
        let n = [*n, *n.add(1), *n.add(2)];
        let len = [*len, *len.add(1), *len.add(2)];
        put(out, TqGrid(GridSpec::new(TimeGrid::new(t_min, t_max, nt)?, Lattice::new(n, len)?)))
    })
}

/// Number of position samples, `nt * n[0] * n[1] * n[2]`.
///
/// # Safety
/// `g` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn tq_grid_samples(g: *const TqGrid) -> usize {
    g.as_ref().map_or(0, |g| g.0.time.n * g.0.lattice.size())
}

/// # Safety
/// `g` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn tq_grid_free(g: *mut TqGrid) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// Field from real position samples laid out `[time][x3][x2][x1]`, x1 fastest.
///
/// # Safety
/// `samples` must hold `len` doubles; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn tq_field_from_position(
    g: *const TqGrid,
    samples: *const f64,
    len: usize,
    out: *mut *mut TqField,
) -> TqStatus {
    guard(|| {
        let g = get(g, "grid")?;
        if samples.is_null() {
            return Err(null("samples"));
        }
        let s = std::slice::from_raw_parts(samples, len);
        put(out, TqField(SpectralField::from_position(&g.0, s)?))
    })
}

/// Writes the real position-space samples into `buf` (same layout as input).
///
/// # Safety
/// `buf` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn tq_field_to_position(f: *const TqField, buf: *mut f64, len: usize) -> TqStatus {
    guard(|| {
        let v = get(f, "field")?.0.to_position_real()?;
        if buf.is_null() {
            return Err(null("buffer"));
        }
        if len != v.len() {
            return Err(Fail(TqStatus::InvalidInput, format!("buffer holds {len} samples, field has {}", v.len())));
        }
        ptr::copy_nonoverlapping(v.as_ptr(), buf, len);
        Ok(())
    })
}

/// Retarded (`retarded` true) or advanced Green operator applied to `f`.
///
/// # Safety
/// `f` must come from this library; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn tq_field_green(f: *const TqField, xi: f64, retarded: bool, out: *mut *mut TqField) -> TqStatus {
    guard(|| {
        let which = if retarded { Causal::Retarded } else { Causal::Advanced };
        put(out, TqField(frw4::green(&get(f, "field")?.0, xi, which)?))
    })
}

/// Wave operator applied to `f`.
///
/// # Safety
/// `f` must come from this library; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn tq_field_wave(f: *const TqField, xi: f64, out: *mut *mut TqField) -> TqStatus {
    guard(|| put(out, TqField(frw4::wave_apply(&get(f, "field")?.0, xi)?)))
}

/// Discrete L2 norm, or NaN for null.
///
/// # Safety
/// `f` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn tq_field_norm(f: *const TqField) -> f64 {
    f.as_ref().map_or(f64::NAN, |f| frw4::norm(&f.0))
}

/// `|a - b| / |b|` in the discrete L2 norm.
///
/// # Safety
/// Both fields must come from this library; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn tq_field_relative_distance(a: *const TqField, b: *const TqField, out: *mut f64) -> TqStatus {
    guard(|| {
        let (a, b) = (&get(a, "a")?.0, &get(b, "b")?.0);
        write(out, frw4::norm(&a.sub(b)?) / frw4::norm(b))
    })
}

/// # Safety
/// `f` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn tq_field_free(f: *mut TqField) {
    if !f.is_null() {
        drop(Box::from_raw(f));
    }
}

/// Symplectic pairing of two fields; deformed with parameter `lambda` when
/// it is positive.
///
/// # Safety
/// Both fields must come from this library; `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn tq_symplectic(
    a: *const TqField,
    b: *const TqField,
    lambda: f64,
    xi: f64,
    out: *mut f64,
) -> TqStatus {
    guard(|| {
        let (a, b) = (&get(a, "a")?.0, &get(b, "b")?.0);
        let v = if lambda == 0.0 {
            frw4::symplectic(a, b, xi)?
        } else {
            deform::deformed_symplectic(a, b, &DeformationParams::frw4(lambda, xi)?)?
        };
        write(out, v)
    })
}

/// Per-mode commutator kernel at `(t, tau)` for wavenumber `k`.
///
/// # Safety
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn tq_mode_kernel(t: f64, tau: f64, k: f64, xi: f64, out: *mut f64) -> TqStatus {
    guard(|| write(out, frw4::mode_kernel_eval(t, tau, k, xi)?))
}

/// Runs a CLI command in-process. `config` is optional `key = value` text;
/// `out_dir` optionally overrides the output directory.
///
/// # Safety
/// `command` must be a NUL-terminated string; the others NUL-terminated or null.
#[no_mangle]
pub unsafe extern "C" fn tq_run(command: *const c_char, config: *const c_char, out_dir: *const c_char) -> TqStatus {
    guard(|| {
        let name = string(command, "command")?;
        let command = Command::from_name(name).ok_or_else(|| Fail(TqStatus::InvalidInput, format!("unknown command {name:?}")))?;
        let mut cfg = RunConfig::default();
        if !config.is_null() {
            cfg.apply_text(string(config, "config")?)?;
        }
        if !out_dir.is_null() {
            cfg.out = PathBuf::from(string(out_dir, "out_dir")?);
        }
        cli::run(command, &cfg)?;
        Ok(())
    })
}
