//! C ABI surface so other languages can drive the solver.
//!
//! Conventions: every fallible call returns a [`VsStatus`]; out-parameters
//! are written only on `Ok`; handles are opaque and freed by their matching
//! `_free`. The last error message of the calling thread is available via
//! [`vs_last_error_message`]. The generated header lands in
//! `include/viscospec.h` at build time.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::path::PathBuf;
use viscospec::cli::{self, RunConfig};
use viscospec::diagnostics;
use viscospec::solver::{self, ForceSpec, SolverState};

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(message: impl std::fmt::Display) {
    LAST_ERROR.with(|slot| *slot.borrow_mut() = message.to_string());
}

/// Status codes returned by every fallible call.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    ConfigError = 3,
    SetupError = 4,
    StepError = 5,
    IoError = 6,
}

/// Opaque solver handle: the state, its force and the run configuration.
pub struct VsSolver {
    state: SolverState,
    force: ForceSpec,
    config: RunConfig,
}

fn parse_config_text(text: *const c_char) -> Result<RunConfig, VsStatus> {
    if text.is_null() {
        set_error("config text is null");
        return Err(VsStatus::NullPointer);
    }
    let raw = unsafe { CStr::from_ptr(text) };
    let text = raw.to_str().map_err(|e| {
        set_error(format!("config text is not utf-8: {e}"));
        VsStatus::InvalidUtf8
    })?;
    cli::parse_config(text).map_err(|e| {
        set_error(e);
        VsStatus::ConfigError
    })
}

fn build_solver(config: RunConfig) -> Result<VsSolver, VsStatus> {
    let fail = |e: cli::CliError| {
        set_error(e);
        VsStatus::SetupError
    };
    let spectral = config.spectral_config().map_err(|e| fail(cli::CliError::Config(e)))?;
    let n = match config.n {
        viscospec::Regularisation::Finite(n) => n,
        viscospec::Regularisation::Unregularised => {
            set_error("stepping requires a finite n");
            return Err(VsStatus::SetupError);
        }
    };
    let params = viscospec::ConstitutiveParams::regularised(config.a, config.alpha, n)
        .map_err(|e| fail(cli::CliError::Constitutive(e)))?;
    let initial = cli::drivers::build_initial_data(&config, &spectral, &params).map_err(fail)?;
    let force = cli::drivers::build_force(&config, &spectral, &params).map_err(fail)?;
    let state = SolverState::new(initial.u0, initial.v0, params);
    Ok(VsSolver { state, force, config })
}

/// Creates a solver from a `key = value` configuration document.
///
/// On success writes the handle to `out` and returns `Ok`.
///
/// # Safety
/// `config_text` must be a valid NUL-terminated string and `out` a valid
/// pointer.
#[no_mangle]
pub unsafe extern "C" fn vs_solver_new(config_text: *const c_char, out: *mut *mut VsSolver) -> VsStatus {
    if out.is_null() {
        set_error("out pointer is null");
        return VsStatus::NullPointer;
    }
    match parse_config_text(config_text).and_then(build_solver) {
        Ok(solver) => {
            unsafe { *out = Box::into_raw(Box::new(solver)) };
            VsStatus::Ok
        }
        Err(status) => status,
    }
}

/// Frees a solver handle; a null handle is a no-op.
///
/// # Safety
/// `solver` must be a pointer previously returned by `vs_solver_new`.
#[no_mangle]
pub unsafe extern "C" fn vs_solver_free(solver: *mut VsSolver) {
    if !solver.is_null() {
        drop(unsafe { Box::from_raw(solver) });
    }
}

unsafe fn borrow<'a>(solver: *mut VsSolver) -> Result<&'a mut VsSolver, VsStatus> {
    if solver.is_null() {
        set_error("solver handle is null");
        return Err(VsStatus::NullPointer);
    }
    Ok(unsafe { &mut *solver })
}

/// Advances the solver by `steps` steps of length `dt` (the configured
/// integrator, no stiffness guard).
///
/// # Safety
/// `solver` must be a live handle from `vs_solver_new`.
#[no_mangle]
pub unsafe extern "C" fn vs_solver_step(solver: *mut VsSolver, dt: f64, steps: u64) -> VsStatus {
    let handle = match unsafe { borrow(solver) } {
        Ok(h) => h,
        Err(s) => return s,
    };
    if !(dt > 0.0) || !dt.is_finite() {
        set_error("dt must be positive and finite");
        return VsStatus::StepError;
    }
    for _ in 0..steps {
        match solver::step(&handle.state, dt, &handle.force, handle.config.method) {
            Ok(outcome) => handle.state = outcome.state,
            Err(e) => {
                set_error(e);
                return VsStatus::StepError;
            }
        }
    }
    VsStatus::Ok
}

/// Current solver time.
///
/// # Safety
/// `solver` must be a live handle; a null handle yields NaN.
#[no_mangle]
pub unsafe extern "C" fn vs_solver_time(solver: *const VsSolver) -> f64 {
    if solver.is_null() {
        return f64::NAN;
    }
    unsafe { (*solver).state.t }
}

/// Writes `(kinetic, stored, total)` energy to the out-pointers.
///
/// # Safety
/// `solver` must be a live handle and the out-pointers valid or null (null
/// out-pointers are skipped).
#[no_mangle]
pub unsafe extern "C" fn vs_solver_energy(
    solver: *mut VsSolver,
    kinetic: *mut f64,
    stored: *mut f64,
    total: *mut f64,
) -> VsStatus {
    let handle = match unsafe { borrow(solver) } {
        Ok(h) => h,
        Err(s) => return s,
    };
    let (k, s, t) = diagnostics::energy(&handle.state);
    unsafe {
        if !kinetic.is_null() {
            *kinetic = k;
        }
        if !stored.is_null() {
            *stored = s;
        }
        if !total.is_null() {
            *total = t;
        }
    }
    VsStatus::Ok
}

/// Writes the max grid Frobenius norm of `eps(u)` to `out`.
///
/// # Safety
/// `solver` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn vs_solver_max_strain(solver: *mut VsSolver, out: *mut f64) -> VsStatus {
    let handle = match unsafe { borrow(solver) } {
        Ok(h) => h,
        Err(s) => return s,
    };
    if out.is_null() {
        set_error("out pointer is null");
        return VsStatus::NullPointer;
    }
    let eps = viscospec::spectral::sym_gradient(&handle.state.u);
    unsafe { *out = eps.max_frobenius() };
    VsStatus::Ok
}

/// Runs the full configured experiment (like the `run` subcommand), writing
/// diagnostics and snapshots under the configured output directory.
///
/// # Safety
/// `config_text` must be a valid NUL-terminated string; `out_dir_override`
/// may be null.
#[no_mangle]
pub unsafe extern "C" fn vs_run(config_text: *const c_char, out_dir_override: *const c_char) -> VsStatus {
    let mut config = match parse_config_text(config_text) {
        Ok(c) => c,
        Err(s) => return s,
    };
    if !out_dir_override.is_null() {
        let raw = unsafe { CStr::from_ptr(out_dir_override) };
        match raw.to_str() {
            Ok(dir) => config.out_dir = PathBuf::from(dir),
            Err(e) => {
                set_error(format!("out_dir is not utf-8: {e}"));
                return VsStatus::InvalidUtf8;
            }
        }
    }
    match cli::cmd_run(&config) {
        Ok(_) => VsStatus::Ok,
        Err(cli::CliError::Io { path, source }) => {
            set_error(format!("io at {}: {source}", path.display()));
            VsStatus::IoError
        }
        Err(e) => {
            set_error(e);
            VsStatus::StepError
        }
    }
}

/// Copies the calling thread's last error message (NUL-terminated,
/// truncated to `len`); returns the untruncated length.
///
/// # Safety
/// `buf` must point to at least `len` writable bytes, or be null.
#[no_mangle]
pub unsafe extern "C" fn vs_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|slot| {
        let message = slot.borrow();
        let bytes = message.as_bytes();
        if !buf.is_null() && len > 0 {
            let copy = bytes.len().min(len - 1);
            unsafe {
                std::ptr::copy_nonoverlapping(bytes.as_ptr(), buf.cast::<u8>(), copy);
                *buf.add(copy) = 0;
            }
        }
        bytes.len()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ffi::CString;

    const CONFIG: &str = "dim = 2\nm = 2\na = 1\nalpha = 1\nn = 4\nT_final = 0.01\ndt = 1e-3\nic = single_mode v 1 0 0 1 0.05\n";

    #[test]
    fn lifecycle_through_the_c_surface() {
        let text = CString::new(CONFIG).unwrap();
        let mut handle: *mut VsSolver = std::ptr::null_mut();
        let status = unsafe { vs_solver_new(text.as_ptr(), &mut handle) };
        assert_eq!(status, VsStatus::Ok);
        assert!(!handle.is_null());

        let mut kinetic = -1.0;
        let status = unsafe { vs_solver_energy(handle, &mut kinetic, std::ptr::null_mut(), std::ptr::null_mut()) };
        assert_eq!(status, VsStatus::Ok);
        assert!(kinetic > 0.0);

        let status = unsafe { vs_solver_step(handle, 1e-3, 10) };
        assert_eq!(status, VsStatus::Ok);
        assert!((unsafe { vs_solver_time(handle) } - 0.01).abs() < 1e-12);

        let mut strain = -1.0;
        assert_eq!(unsafe { vs_solver_max_strain(handle, &mut strain) }, VsStatus::Ok);
        assert!(strain > 0.0);

        unsafe { vs_solver_free(handle) };
    }

    #[test]
    fn errors_set_message_and_codes() {
        let mut handle: *mut VsSolver = std::ptr::null_mut();
        let status = unsafe { vs_solver_new(std::ptr::null(), &mut handle) };
        assert_eq!(status, VsStatus::NullPointer);

        let bad = CString::new("dim = 2\nbogus = 1\n").unwrap();
        let status = unsafe { vs_solver_new(bad.as_ptr(), &mut handle) };
        assert_eq!(status, VsStatus::ConfigError);
        let mut buf = vec![0i8; 128];
        let n = unsafe { vs_last_error_message(buf.as_mut_ptr(), buf.len()) };
        assert!(n > 0);
        let msg = unsafe { CStr::from_ptr(buf.as_ptr()) }.to_str().unwrap();
        assert!(msg.contains("bogus"), "message: {msg}");
    }

    #[test]
    fn null_handle_is_rejected() {
        assert_eq!(unsafe { vs_solver_step(std::ptr::null_mut(), 1e-3, 1) }, VsStatus::NullPointer);
        assert!(unsafe { vs_solver_time(std::ptr::null()) }.is_nan());
    }
}
