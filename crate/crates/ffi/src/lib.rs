//! C ABI over the `anhosc` library.
//!
//! Models are opaque handles created with [`anhosc_model_new`] and released with
//! [`anhosc_model_free`]. Every call returns an [`AnhoscStatus`]; on failure the message is
//! kept per thread and read back with [`anhosc_last_error_message`].

use anhosc::correction::{exponent_ratio, full_propagator};
use anhosc::lattice::ModelParams;
use anhosc::spectral::x_fourier_zero_momentum;
use anhosc::{Error, TruncationPolicy};
use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

/// Status codes shared by all entry points.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AnhoscStatus {
    Ok = 0,
    InvalidArgument = 1,
    Singular = 2,
    Accuracy = 3,
    NullPointer = 5,
    Panic = 6,
}

/// Opaque model: parameters plus truncation policy.
pub struct AnhoscModel {
    params: ModelParams,
    policy: TruncationPolicy,
}

/// Factors of the propagator; `value` is their combination.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct AnhoscPropagator {
    pub harmonic_prefactor: f64,
    pub harmonic_exponent: f64,
    pub universal_exponent: f64,
    pub polynomial_factor: f64,
    pub value: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> AnhoscStatus {
    match e {
        Error::Domain(_) => AnhoscStatus::InvalidArgument,
        Error::SingularFrequency(_) | Error::SingularLattice { .. } | Error::PoleHit(_) => AnhoscStatus::Singular,
        Error::Accuracy { .. } => AnhoscStatus::Accuracy,
    }
}

fn guard<F: FnOnce() -> Result<(), (AnhoscStatus, String)>>(f: F) -> AnhoscStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            AnhoscStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            AnhoscStatus::Panic
        }
    }
}

fn lift(e: Error) -> (AnhoscStatus, String) {
    (status_of(&e), e.to_string())
}

fn null() -> (AnhoscStatus, String) {
    (AnhoscStatus::NullPointer, "null pointer argument".into())
}

/// Creates a model with the default truncation policy. `*out` is set only on success.
///
/// # Safety
/// `out` must be null or point to writable storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn anhosc_model_new(
    a: f64,
    b: f64,
    c: f64,
    beta: f64,
    x_f: f64,
    out: *mut *mut AnhoscModel,
) -> AnhoscStatus {
    guard(|| {
        if out.is_null() {
            return Err(null());
        }
        let params = ModelParams::new(a, b, c, beta, x_f).map_err(lift)?;
        let model = Box::new(AnhoscModel {
            params,
            policy: TruncationPolicy::default(),
        });
        *out = Box::into_raw(model);
        Ok(())
    })
}

/// Releases a model; null is ignored.
///
/// # Safety
/// `model` must be null or a handle from [`anhosc_model_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn anhosc_model_free(model: *mut AnhoscModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Moves the endpoint x_f.
///
/// # Safety
/// `model` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn anhosc_model_set_endpoint(model: *mut AnhoscModel, x_f: f64) -> AnhoscStatus {
    guard(|| {
        let m = model.as_mut().ok_or_else(null)?;
        let p = m.params.with_x_f(x_f);
        p.validate().map_err(lift)?;
        m.params = p;
        Ok(())
    })
}

/// Sets Poincaré order, highest correction order, relative quadrature tolerance and series cutoff.
///
/// # Safety
/// `model` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn anhosc_model_set_truncation(
    model: *mut AnhoscModel,
    order: u32,
    p_max: u32,
    rel_tol: f64,
    cutoff: u32,
) -> AnhoscStatus {
    guard(|| {
        let m = model.as_mut().ok_or_else(null)?;
        let mut policy = m.policy.clone();
        policy.poincare_order = order as usize;
        policy.p_max = p_max as usize;
        policy.quad_rel_tol = rel_tol;
        policy.series_cutoff = cutoff as usize;
        policy.validate().map_err(lift)?;
        m.policy = policy;
        Ok(())
    })
}

/// Evaluates the corrected fixed-origin propagator.
///
/// # Safety
/// `model` must be null or a live handle; `out` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn anhosc_propagate(model: *const AnhoscModel, out: *mut AnhoscPropagator) -> AnhoscStatus {
    guard(|| {
        let m = model.as_ref().ok_or_else(null)?;
        let out = out.as_mut().ok_or_else(null)?;
        let r = full_propagator(&m.params, &m.policy).map_err(lift)?;
        *out = AnhoscPropagator {
            harmonic_prefactor: r.harmonic_prefactor,
            harmonic_exponent: r.harmonic_exponent,
            universal_exponent: r.universal_exponent,
            polynomial_factor: r.polynomial_factor,
            value: r.value,
        };
        Ok(())
    })
}

/// `I_0(0)/Q⁴(β)`, the coefficient of `−a·x_f⁴` in the universal exponent.
///
/// # Safety
/// `model` must be null or a live handle; `out` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn anhosc_universal_ratio(model: *const AnhoscModel, out: *mut f64) -> AnhoscStatus {
    guard(|| {
        let m = model.as_ref().ok_or_else(null)?;
        let out = out.as_mut().ok_or_else(null)?;
        *out = exponent_ratio(&m.params).map_err(lift)?;
        Ok(())
    })
}

/// Zero-momentum x-transform of the propagator with the universal exponent.
///
/// # Safety
/// `model` must be null or a live handle; `out` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn anhosc_x_transform(model: *const AnhoscModel, out: *mut f64) -> AnhoscStatus {
    guard(|| {
        let m = model.as_ref().ok_or_else(null)?;
        let out = out.as_mut().ok_or_else(null)?;
        *out = x_fourier_zero_momentum(&m.params, &m.policy).map_err(lift)?;
        Ok(())
    })
}

/// Copies the calling thread's last error message into `buf` (NUL-terminated, truncated to `len`).
/// Returns the full message length without the terminator.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn anhosc_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        let bytes = e.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            std::ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buf, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn anhosc_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}
