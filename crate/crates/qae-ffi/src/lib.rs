//! C ABI over the autoencoder engine: opaque handles, integer status codes,
//! and a thread-local last-error message. The header is generated into
//! `include/qae.h` at build time.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use qae_core::experiment::{run_single, ExperimentConfig};
use qae_core::qae::qae_pure_bound;
use qae_core::qinfo::{fidelity_with, quantum_mutual_information, von_neumann_entropy, DensityMatrix, FidelityConvention};
use qae_core::states::StateFamilySpec;

/// Status codes returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QaeStatus {
    /// Success.
    QaeOk = 0,
    /// A required pointer argument was null.
    QaeNullPointer = 1,
    /// An argument failed validation.
    QaeInvalidArgument = 2,
    /// The computation failed; see qae_last_error.
    QaeComputeError = 3,
    /// A panic was caught at the boundary.
    QaePanic = 4,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(message: impl Into<String>) {
    LAST_ERROR.with(|slot| *slot.borrow_mut() = message.into());
}

fn fail(message: impl Into<String>, status: QaeStatus) -> QaeStatus {
    set_error(message);
    status
}

/// Opaque density-matrix handle.
pub struct QaeDensity {
    inner: DensityMatrix,
}

fn guarded(op: impl FnOnce() -> QaeStatus) -> QaeStatus {
    match catch_unwind(AssertUnwindSafe(op)) {
        Ok(status) => status,
        Err(_) => fail("panic crossed the ffi boundary", QaeStatus::QaePanic),
    }
}

/// Copies the last error message for the calling thread into `buffer`
/// (NUL-terminated, truncated to `capacity`). Returns the full message
/// length in bytes, excluding the terminator.
#[no_mangle]
pub extern "C" fn qae_last_error(buffer: *mut c_char, capacity: usize) -> usize {
    LAST_ERROR.with(|slot| {
        let message = slot.borrow();
        let bytes = message.as_bytes();
        if !buffer.is_null() && capacity > 0 {
            let n = bytes.len().min(capacity - 1);
            unsafe {
                ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buffer, n);
                *buffer.add(n) = 0;
            }
        }
        bytes.len()
    })
}

fn emit_density(out: *mut *mut QaeDensity, rho: DensityMatrix) -> QaeStatus {
    unsafe {
        *out = Box::into_raw(Box::new(QaeDensity { inner: rho }));
    }
    QaeStatus::QaeOk
}

/// Builds a thermal state of the transverse-field Ising chain.
#[no_mangle]
pub extern "C" fn qae_density_thermal(
    n_qubits: usize,
    beta: f64,
    out: *mut *mut QaeDensity,
) -> QaeStatus {
    guarded(|| {
        if out.is_null() {
            return fail("out pointer is null", QaeStatus::QaeNullPointer);
        }
        match (StateFamilySpec::Thermal { n_qubits, beta }).build() {
            Ok(rho) => emit_density(out, rho),
            Err(e) => fail(e.to_string(), QaeStatus::QaeInvalidArgument),
        }
    })
}

/// Builds a Werner state on two `subsystem_dim`-dimensional subsystems.
#[no_mangle]
pub extern "C" fn qae_density_werner(
    subsystem_dim: usize,
    alpha: f64,
    out: *mut *mut QaeDensity,
) -> QaeStatus {
    guarded(|| {
        if out.is_null() {
            return fail("out pointer is null", QaeStatus::QaeNullPointer);
        }
        match (StateFamilySpec::Werner {
            subsystem_dim,
            alpha,
        })
        .build()
        {
            Ok(rho) => emit_density(out, rho),
            Err(e) => fail(e.to_string(), QaeStatus::QaeInvalidArgument),
        }
    })
}

/// Builds the blend of a seeded Haar-random pure state with I/d.
#[no_mangle]
pub extern "C" fn qae_density_blended(
    dim: usize,
    p0: f64,
    psi_seed: u64,
    out: *mut *mut QaeDensity,
) -> QaeStatus {
    guarded(|| {
        if out.is_null() {
            return fail("out pointer is null", QaeStatus::QaeNullPointer);
        }
        match (StateFamilySpec::Blended { dim, p0, psi_seed }).build() {
            Ok(rho) => emit_density(out, rho),
            Err(e) => fail(e.to_string(), QaeStatus::QaeInvalidArgument),
        }
    })
}

/// Builds a density matrix from a row-major interleaved [re, im] buffer of
/// `dim * dim * 2` doubles.
#[no_mangle]
pub extern "C" fn qae_density_from_buffer(
    dim: usize,
    data: *const f64,
    out: *mut *mut QaeDensity,
) -> QaeStatus {
    guarded(|| {
        if out.is_null() || data.is_null() {
            return fail("null pointer argument", QaeStatus::QaeNullPointer);
        }
        let slice = unsafe { std::slice::from_raw_parts(data, dim * dim * 2) };
        let values: Vec<qae_core::linalg::Complex64> = slice
            .chunks_exact(2)
            .map(|p| qae_core::linalg::Complex64::new(p[0], p[1]))
            .collect();
        let matrix = match qae_core::linalg::ComplexMatrix::from_vec(dim, dim, values) {
            Ok(m) => m,
            Err(e) => return fail(e.to_string(), QaeStatus::QaeInvalidArgument),
        };
        match DensityMatrix::new(matrix) {
            Ok(rho) => emit_density(out, rho),
            Err(e) => fail(e.to_string(), QaeStatus::QaeInvalidArgument),
        }
    })
}

/// Frees a density handle. Null is a no-op.
#[no_mangle]
pub extern "C" fn qae_density_free(handle: *mut QaeDensity) {
    if !handle.is_null() {
        drop(unsafe { Box::from_raw(handle) });
    }
}

/// Writes the Hilbert-space dimension of `handle` to `out`.
#[no_mangle]
pub extern "C" fn qae_density_dim(handle: *const QaeDensity, out: *mut usize) -> QaeStatus {
    guarded(|| {
        if handle.is_null() || out.is_null() {
            return fail("null pointer argument", QaeStatus::QaeNullPointer);
        }
        unsafe { *out = (*handle).inner.dim() };
        QaeStatus::QaeOk
    })
}

/// Von Neumann entropy in nats.
#[no_mangle]
pub extern "C" fn qae_entropy(handle: *const QaeDensity, out: *mut f64) -> QaeStatus {
    guarded(|| {
        if handle.is_null() || out.is_null() {
            return fail("null pointer argument", QaeStatus::QaeNullPointer);
        }
        match von_neumann_entropy(unsafe { &(*handle).inner }) {
            Ok(s) => {
                unsafe { *out = s };
                QaeStatus::QaeOk
            }
            Err(e) => fail(e.to_string(), QaeStatus::QaeComputeError),
        }
    })
}

/// Fidelity between two states. `squared` selects the squared (Jozsa)
/// convention; otherwise the square-root convention is used.
#[no_mangle]
pub extern "C" fn qae_fidelity(
    a: *const QaeDensity,
    b: *const QaeDensity,
    squared: bool,
    out: *mut f64,
) -> QaeStatus {
    guarded(|| {
        if a.is_null() || b.is_null() || out.is_null() {
            return fail("null pointer argument", QaeStatus::QaeNullPointer);
        }
        let convention = if squared {
            FidelityConvention::Squared
        } else {
            FidelityConvention::Root
        };
        match fidelity_with(unsafe { &(*a).inner }, unsafe { &(*b).inner }, convention) {
            Ok(f) => {
                unsafe { *out = f };
                QaeStatus::QaeOk
            }
            Err(e) => fail(e.to_string(), QaeStatus::QaeComputeError),
        }
    })
}

/// Quantum mutual information for a bipartition with leading-factor
/// dimension `dim_a`.
#[no_mangle]
pub extern "C" fn qae_mutual_information(
    handle: *const QaeDensity,
    dim_a: usize,
    out: *mut f64,
) -> QaeStatus {
    guarded(|| {
        if handle.is_null() || out.is_null() {
            return fail("null pointer argument", QaeStatus::QaeNullPointer);
        }
        let dim = unsafe { (*handle).inner.dim() };
        if dim_a == 0 || dim % dim_a != 0 {
            return fail(
                format!("dim_a {dim_a} does not divide dim {dim}"),
                QaeStatus::QaeInvalidArgument,
            );
        }
        match quantum_mutual_information(unsafe { &(*handle).inner }, dim_a, dim / dim_a) {
            Ok(v) => {
                unsafe { *out = v };
                QaeStatus::QaeOk
            }
            Err(e) => fail(e.to_string(), QaeStatus::QaeComputeError),
        }
    })
}

/// Pure-reference compression bound: the sum of the 2^n_latent largest
/// eigenvalues of the state.
#[no_mangle]
pub extern "C" fn qae_bound(
    handle: *const QaeDensity,
    n_latent: usize,
    out: *mut f64,
) -> QaeStatus {
    guarded(|| {
        if handle.is_null() || out.is_null() {
            return fail("null pointer argument", QaeStatus::QaeNullPointer);
        }
        match qae_pure_bound(unsafe { &(*handle).inner }, n_latent) {
            Ok(v) => {
                unsafe { *out = v };
                QaeStatus::QaeOk
            }
            Err(e) => fail(e.to_string(), QaeStatus::QaeComputeError),
        }
    })
}

/// Runs one full train/decode experiment from a JSON configuration (the
/// same schema the CLI and manifests use) with the given seed, and writes
/// the decoding fidelity to `out_j_d`.
#[no_mangle]
pub extern "C" fn qae_run_json(
    config_json: *const c_char,
    seed: u64,
    out_j_d: *mut f64,
) -> QaeStatus {
    guarded(|| {
        if config_json.is_null() || out_j_d.is_null() {
            return fail("null pointer argument", QaeStatus::QaeNullPointer);
        }
        let text = match unsafe { CStr::from_ptr(config_json) }.to_str() {
            Ok(t) => t,
            Err(_) => return fail("config is not valid utf-8", QaeStatus::QaeInvalidArgument),
        };
        let config: ExperimentConfig = match serde_json::from_str(text) {
            Ok(c) => c,
            Err(e) => return fail(format!("config parse error: {e}"), QaeStatus::QaeInvalidArgument),
        };
        match run_single(&config, seed) {
            Ok(outcome) => {
                unsafe { *out_j_d = outcome.record.j_d };
                QaeStatus::QaeOk
            }
            Err(e) => fail(e.to_string(), QaeStatus::QaeComputeError),
        }
    })
}
