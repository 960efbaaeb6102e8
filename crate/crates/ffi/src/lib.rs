//! C ABI over `nsv-core`.
//!
//! Objects cross the boundary as opaque handles created by `nsv_*_new` /
//! `nsv_simulate` and released with the matching `_free`. Every fallible call
//! returns an [`NsvStatus`]; on failure the message is kept per thread and can
//! be read with [`nsv_last_error_message`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use nsv_core::config::DatumFile;
use nsv_core::decay::{estimate_decay_character, ContinuumDatum, DecayCharacter};
use nsv_core::fit::fit_decay_exponent;
use nsv_core::linear::evolve_linear;
use nsv_core::solver::{energy_resolving_schedule, run_simulation, scale_to_h1alpha, SolverConfig, TrajectoryRecord};
use nsv_core::spectral::{Grid, PhysicsParams};
use nsv_core::verify::{predicted_difference_exponent, predicted_nsv_exponent};
use nsv_core::NsvError;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NsvStatus {
    Ok = 0,
    NullPointer = 1,
    Validation = 2,
    Domain = 3,
    Structural = 4,
    Numerical = 5,
    Instability = 6,
    Io = 7,
    Parse = 8,
    OutOfRange = 9,
    Panic = 10,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NsvCharacterKind {
    Finite = 0,
    /// r* = −n/2
    MinusNHalf = 1,
    Infinity = 2,
}

/// Opaque datum handle.
pub struct NsvDatum {
    inner: ContinuumDatum,
}

/// Opaque trajectory handle.
pub struct NsvTrajectory {
    inner: TrajectoryRecord,
}

/// Grid run description for [`nsv_simulate`]. `envelope <= 0` disables the
/// Gaussian envelope and `amplitude <= 0` keeps the sampled datum unscaled.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct NsvRunParams {
    pub n_points: usize,
    pub box_length: f64,
    pub alpha: f64,
    pub nu: f64,
    pub dt: f64,
    pub t_end: f64,
    pub amplitude: f64,
    pub envelope: f64,
    pub sample_spacing: f64,
    pub samples_per_decade: usize,
    pub nonlinear: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &NsvError) -> NsvStatus {
    match e {
        NsvError::Validation(_) | NsvError::Plan(_) => NsvStatus::Validation,
        NsvError::Domain(_) => NsvStatus::Domain,
        NsvError::Structural(_) => NsvStatus::Structural,
        NsvError::Numerical { .. } => NsvStatus::Numerical,
        NsvError::Instability { .. } => NsvStatus::Instability,
        NsvError::Io(_) => NsvStatus::Io,
        NsvError::Parse(_) => NsvStatus::Parse,
    }
}

fn fail(status: NsvStatus, msg: impl Into<String>) -> NsvStatus {
    set_error(msg.into());
    status
}

/// Runs `f`, mapping errors and panics onto status codes.
fn guard(f: impl FnOnce() -> Result<(), NsvStatus>) -> NsvStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => NsvStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => fail(NsvStatus::Panic, "internal panic"),
    }
}

fn lift<T>(r: nsv_core::Result<T>) -> Result<T, NsvStatus> {
    r.map_err(|e| fail(status_of(&e), e.to_string()))
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, NsvStatus> {
    p.as_ref().ok_or_else(|| fail(NsvStatus::NullPointer, format!("{what} is null")))
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, NsvStatus> {
    p.as_mut().ok_or_else(|| fail(NsvStatus::NullPointer, format!("{what} is null")))
}

fn new_datum(out_ptr: *mut *mut NsvDatum, make: impl FnOnce() -> nsv_core::Result<ContinuumDatum>) -> NsvStatus {
    guard(|| {
        let slot = unsafe { out(out_ptr, "out")? };
        *slot = std::ptr::null_mut();
        let inner = lift(make())?;
        *slot = Box::into_raw(Box::new(NsvDatum { inner }));
        Ok(())
    })
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next call into the library from the same thread.
#[no_mangle]
pub extern "C" fn nsv_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |c| c.as_ptr()))
}

/// Static, NUL-terminated version string.
#[no_mangle]
pub extern "C" fn nsv_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Power-law datum a(ρ) = ρ^q on [0, κ] in dimension n.
#[no_mangle]
pub extern "C" fn nsv_datum_power_law(n: usize, q: f64, kappa: f64, seed: u64, out_datum: *mut *mut NsvDatum) -> NsvStatus {
    new_datum(out_datum, || Ok(ContinuumDatum::power_law(n, q, kappa)?.with_seed(seed)))
}

#[no_mangle]
pub extern "C" fn nsv_datum_annulus(n: usize, delta: f64, kappa: f64, seed: u64, out_datum: *mut *mut NsvDatum) -> NsvStatus {
    new_datum(out_datum, || Ok(ContinuumDatum::annulus(n, delta, kappa)?.with_seed(seed)))
}

#[no_mangle]
pub extern "C" fn nsv_datum_critical_log(n: usize, kappa: f64, seed: u64, out_datum: *mut *mut NsvDatum) -> NsvStatus {
    new_datum(out_datum, || Ok(ContinuumDatum::critical_log(n, kappa)?.with_seed(seed)))
}

/// Reads a datum file written by `nsv gen-datum`.
///
/// # Safety
/// `path` must be a valid NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn nsv_datum_load(path: *const c_char, out_datum: *mut *mut NsvDatum) -> NsvStatus {
    new_datum(out_datum, || {
        if path.is_null() {
            return Err(NsvError::validation("path is null"));
        }
        let p = CStr::from_ptr(path).to_str().map_err(|e| NsvError::validation(e.to_string()))?;
        Ok(DatumFile::load(Path::new(p))?.datum)
    })
}

/// # Safety
/// `datum` must come from an `nsv_datum_*` constructor and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn nsv_datum_free(datum: *mut NsvDatum) {
    if !datum.is_null() {
        drop(Box::from_raw(datum));
    }
}

/// Estimated decay character for derivative order `s`. `value` receives
/// the numeric value (−n/2 or +∞ for the sentinels).
///
/// # Safety
/// Pointers must be valid; `datum` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn nsv_datum_decay_character(
    datum: *const NsvDatum,
    s: f64,
    kind: *mut NsvCharacterKind,
    value: *mut f64,
) -> NsvStatus {
    guard(|| {
        let d = &deref(datum, "datum")?.inner;
        let (kind, value) = (out(kind, "kind")?, out(value, "value")?);
        let est = lift(estimate_decay_character(d, s))?;
        *kind = match est.r_star {
            DecayCharacter::Finite(_) => NsvCharacterKind::Finite,
            DecayCharacter::MinusNHalf => NsvCharacterKind::MinusNHalf,
            DecayCharacter::Infinity => NsvCharacterKind::Infinity,
        };
        *value = est.r_star.value(d.n, 0.0);
        Ok(())
    })
}

/// ‖v(t)‖²_{H¹_α} of the linear evolution of the continuum datum.
///
/// # Safety
/// Pointers must be valid; `datum` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn nsv_linear_h1alpha_sq(datum: *const NsvDatum, alpha: f64, nu: f64, t: f64, result: *mut f64) -> NsvStatus {
    guard(|| {
        let d = &deref(datum, "datum")?.inner;
        let result = out(result, "result")?;
        let params = lift(PhysicsParams::new(alpha, nu, d.n))?;
        *result = lift(evolve_linear(d, t, &params).and_then(|e| e.norms()))?.h1alpha_sq;
        Ok(())
    })
}

/// Predicted H¹_α decay exponent of the nonlinear solution for `r_star`.
///
/// # Safety
/// `result` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn nsv_predicted_exponent(r_star: f64, result: *mut f64) -> NsvStatus {
    guard(|| {
        let result = out(result, "result")?;
        *result = lift(predicted_nsv_exponent(r_star))?.exponent;
        Ok(())
    })
}

/// Predicted exponent of the nonlinear-minus-linear difference.
///
/// # Safety
/// `result` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn nsv_predicted_difference_exponent(r_star: f64, result: *mut f64) -> NsvStatus {
    guard(|| {
        let result = out(result, "result")?;
        *result = lift(predicted_difference_exponent(r_star))?.exponent;
        Ok(())
    })
}

/// Samples the datum on the grid and integrates it.
///
/// # Safety
/// Pointers must be valid; `datum` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn nsv_simulate(
    datum: *const NsvDatum,
    params: *const NsvRunParams,
    out_traj: *mut *mut NsvTrajectory,
) -> NsvStatus {
    guard(|| {
        let d = &deref(datum, "datum")?.inner;
        let p = *deref(params, "params")?;
        let slot = out(out_traj, "out")?;
        *slot = std::ptr::null_mut();
        let traj = lift((|| {
            let grid = Grid::new(p.n_points, p.box_length)?;
            let physics = PhysicsParams::new(p.alpha, p.nu, Grid::DIM)?;
            if !(p.sample_spacing > 0.0 && p.samples_per_decade > 0 && p.t_end > 0.0) {
                return Err(NsvError::validation("t_end, sample spacing and samples per decade must be positive"));
            }
            let envelope = (p.envelope > 0.0).then_some(p.envelope);
            let mut field = d.sample_on_grid_with_envelope(&grid, envelope)?;
            if p.amplitude > 0.0 {
                field = scale_to_h1alpha(&field, &physics, p.amplitude)?;
            }
            let config = SolverConfig {
                grid,
                params: physics,
                dt: p.dt,
                t_end: p.t_end,
                sample_times: energy_resolving_schedule(p.t_end, p.sample_spacing, p.samples_per_decade),
                snapshot_times: Vec::new(),
                nonlinearity: p.nonlinear,
                cfl_safety: 0.5,
                linear_companion: false,
            };
            run_simulation(&config, &field)
        })())?;
        *slot = Box::into_raw(Box::new(NsvTrajectory { inner: traj }));
        Ok(())
    })
}

/// # Safety
/// `traj` must come from [`nsv_simulate`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn nsv_trajectory_free(traj: *mut NsvTrajectory) {
    if !traj.is_null() {
        drop(Box::from_raw(traj));
    }
}

/// Number of samples; 0 for a null handle.
///
/// # Safety
/// `traj` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn nsv_trajectory_len(traj: *const NsvTrajectory) -> usize {
    traj.as_ref().map_or(0, |t| t.inner.series.len())
}

/// Sample `index`: time, ‖u‖²_{H¹_α} and the energy-balance residual.
///
/// # Safety
/// Pointers must be valid; `traj` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn nsv_trajectory_sample(
    traj: *const NsvTrajectory,
    index: usize,
    t: *mut f64,
    h1alpha_sq: *mut f64,
    balance_residual: *mut f64,
) -> NsvStatus {
    guard(|| {
        let tr = &deref(traj, "trajectory")?.inner;
        let (t, e, b) = (out(t, "t")?, out(h1alpha_sq, "h1alpha_sq")?, out(balance_residual, "balance_residual")?);
        if index >= tr.series.len() {
            return Err(fail(NsvStatus::OutOfRange, format!("sample {index} of {}", tr.series.len())));
        }
        *t = tr.series.times[index];
        *e = tr.series.h1alpha_sq[index];
        *b = tr.balance_residual.get(index).copied().unwrap_or(f64::NAN);
        Ok(())
    })
}

/// Fitted decay exponent of ‖u‖²_{H¹_α} over `[t0, t1]`.
///
/// # Safety
/// Pointers must be valid; `traj` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn nsv_trajectory_fit_exponent(traj: *const NsvTrajectory, t0: f64, t1: f64, result: *mut f64) -> NsvStatus {
    guard(|| {
        let tr = &deref(traj, "trajectory")?.inner;
        let result = out(result, "result")?;
        *result = lift(fit_decay_exponent(&tr.series.times, &tr.series.h1alpha_sq, (t0, t1)))?.exponent;
        Ok(())
    })
}
