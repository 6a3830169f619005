//! C interface to the `dfl-array` body model.
//!
//! Every function returns a [`DflStatus`]; results go through out-pointers.
//! Objects are opaque handles that must be released with their `_free`
//! function. On failure a message for the calling thread is available from
//! [`dfl_last_error`].
//!
//! Array copies follow one convention: pass the capacity in `len`; on
//! `DFL_STATUS_BUFFER_TOO_SMALL` nothing is written and `*needed` (when not
//! null) holds the required length.

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use dfl_array::array_processing::{array_factor, BeamWeights, Hypothesis};
use dfl_array::em_model::signal_vector;
use dfl_array::geometry::{fresnel_radius, wavelength_for, TargetSheet};
use dfl_array::scenario::ScenarioError;
use dfl_array::sweep::{evaluate, Evaluation};
use dfl_array::{ModelError, Scenario};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DflStatus {
    Ok = 0,
    NullPointer = 1,
    /// Invalid input: bad JSON, failed validation, bad UTF-8, bad enum value.
    Validation = 2,
    /// The model cannot be evaluated, e.g. a target too close to an antenna.
    Numerical = 3,
    Io = 4,
    BufferTooSmall = 5,
    Panic = 6,
}

/// Wavefront model for array factors.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DflHypothesis {
    Planar = 0,
    NonPlanar = 1,
}

/// Opaque scenario handle.
pub struct DflScenario(Scenario);

/// Opaque estimation result.
pub struct DflEstimate(Evaluation);

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct DflEstimateSummary {
    pub gamma_hat_rad: f64,
    pub gamma_hat_deg: f64,
    pub attenuation_db: f64,
    pub p0: f64,
    pub py: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).unwrap_or_default());
}

struct Failure(DflStatus, String);

impl From<ModelError> for Failure {
    fn from(e: ModelError) -> Self {
        let status = if e.is_numerical() {
            DflStatus::Numerical
        } else {
            DflStatus::Validation
        };
        Failure(status, e.to_string())
    }
}

impl From<ScenarioError> for Failure {
    fn from(e: ScenarioError) -> Self {
        let status = match e {
            ScenarioError::Io { .. } => DflStatus::Io,
            _ => DflStatus::Validation,
        };
        Failure(status, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(DflStatus::NullPointer, format!("{what} is null"))
}

/// Runs `f`, converting errors and panics into a status and a stored message.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> DflStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            DflStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            DflStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn deref_mut<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|e| Failure(DflStatus::Validation, format!("{what} is not UTF-8: {e}")))
}

unsafe fn copy_out(src: &[f64], dst: *mut f64, len: usize, needed: *mut usize) -> Result<(), Failure> {
    if !needed.is_null() {
        *needed = src.len();
    }
    if len < src.len() {
        return Err(Failure(
            DflStatus::BufferTooSmall,
            format!("buffer holds {len} values, {} needed", src.len()),
        ));
    }
    if dst.is_null() {
        return Err(null("output buffer"));
    }
    ptr::copy_nonoverlapping(src.as_ptr(), dst, src.len());
    Ok(())
}

/// Message for the last failing call on this thread; empty after a success.
/// The pointer stays valid until the next call into this library on the same
/// thread.
#[no_mangle]
pub extern "C" fn dfl_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Parses and validates a scenario from a JSON string.
#[no_mangle]
pub unsafe extern "C" fn dfl_scenario_from_json(json: *const c_char, out: *mut *mut DflScenario) -> DflStatus {
    guard(|| {
        let out = deref_mut(out, "out")?;
        *out = ptr::null_mut();
        let s = Scenario::from_json_str(text(json, "json")?)?;
        *out = Box::into_raw(Box::new(DflScenario(s)));
        Ok(())
    })
}

/// Loads a scenario file.
#[no_mangle]
pub unsafe extern "C" fn dfl_scenario_load(path: *const c_char, out: *mut *mut DflScenario) -> DflStatus {
    guard(|| {
        let out = deref_mut(out, "out")?;
        *out = ptr::null_mut();
        let s = Scenario::load(Path::new(text(path, "path")?))?;
        *out = Box::into_raw(Box::new(DflScenario(s)));
        Ok(())
    })
}

/// Releases a scenario. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn dfl_scenario_free(scenario: *mut DflScenario) {
    if !scenario.is_null() {
        drop(Box::from_raw(scenario));
    }
}

#[no_mangle]
pub unsafe extern "C" fn dfl_scenario_num_antennas(scenario: *const DflScenario, out: *mut usize) -> DflStatus {
    guard(|| {
        let s = deref(scenario, "scenario")?;
        *deref_mut(out, "out")? = s.0.layout.num_antennas();
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn dfl_scenario_wavelength(scenario: *const DflScenario, out: *mut f64) -> DflStatus {
    guard(|| {
        let s = deref(scenario, "scenario")?;
        *deref_mut(out, "out")? = s.0.wavelength();
        Ok(())
    })
}

/// Places (or replaces) the target sheet. On failure the scenario is unchanged.
#[no_mangle]
pub unsafe extern "C" fn dfl_scenario_set_target(
    scenario: *mut DflScenario,
    half_width_m: f64,
    half_height_m: f64,
    theta_rad: f64,
    x_m: f64,
    y_m: f64,
) -> DflStatus {
    guard(|| {
        let s = deref_mut(scenario, "scenario")?;
        s.0.target = Some(TargetSheet::new(half_width_m, half_height_m, theta_rad, x_m, y_m)?);
        Ok(())
    })
}

/// Removes the target, making the scene empty.
#[no_mangle]
pub unsafe extern "C" fn dfl_scenario_clear_target(scenario: *mut DflScenario) -> DflStatus {
    guard(|| {
        deref_mut(scenario, "scenario")?.0.target = None;
        Ok(())
    })
}

/// Noiseless signal vector, `m = -M..=M`, as separate real and imaginary
/// parts. Both buffers must hold `len` values.
#[no_mangle]
pub unsafe extern "C" fn dfl_signal_vector(
    scenario: *const DflScenario,
    re: *mut f64,
    im: *mut f64,
    len: usize,
    needed: *mut usize,
) -> DflStatus {
    guard(|| {
        let s = &deref(scenario, "scenario")?.0;
        let v = signal_vector(&s.layout, &s.occupancy(), &s.quadrature)?;
        let (r, i): (Vec<f64>, Vec<f64>) = v.as_slice().iter().map(|c| (c.re, c.im)).unzip();
        copy_out(&r, re, len, needed)?;
        copy_out(&i, im, len, needed)
    })
}

/// Runs the estimator on the scenario's scene.
#[no_mangle]
pub unsafe extern "C" fn dfl_doa_run(scenario: *const DflScenario, out: *mut *mut DflEstimate) -> DflStatus {
    guard(|| {
        let out = deref_mut(out, "out")?;
        *out = ptr::null_mut();
        let e = evaluate(&deref(scenario, "scenario")?.0)?;
        *out = Box::into_raw(Box::new(DflEstimate(e)));
        Ok(())
    })
}

/// Releases an estimate. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn dfl_estimate_free(estimate: *mut DflEstimate) {
    if !estimate.is_null() {
        drop(Box::from_raw(estimate));
    }
}

#[no_mangle]
pub unsafe extern "C" fn dfl_estimate_summary(estimate: *const DflEstimate, out: *mut DflEstimateSummary) -> DflStatus {
    guard(|| {
        let e = &deref(estimate, "estimate")?.0.estimate;
        *deref_mut(out, "out")? = DflEstimateSummary {
            gamma_hat_rad: e.gamma_hat,
            gamma_hat_deg: e.gamma_hat_deg(),
            attenuation_db: e.attenuation_db,
            p0: e.p0,
            py: e.py,
        };
        Ok(())
    })
}

/// Power-ratio curve: grid angles (rad) and `P_y / P_0`.
#[no_mangle]
pub unsafe extern "C" fn dfl_estimate_curve(
    estimate: *const DflEstimate,
    gammas_rad: *mut f64,
    ratios: *mut f64,
    len: usize,
    needed: *mut usize,
) -> DflStatus {
    guard(|| {
        let c = &deref(estimate, "estimate")?.0.estimate.curve;
        copy_out(&c.gammas, gammas_rad, len, needed)?;
        copy_out(&c.ratios, ratios, len, needed)
    })
}

/// Per-antenna attenuation in dB, `m = -M..=M`.
#[no_mangle]
pub unsafe extern "C" fn dfl_estimate_antenna_attenuation(
    estimate: *const DflEstimate,
    out: *mut f64,
    len: usize,
    needed: *mut usize,
) -> DflStatus {
    guard(|| {
        let e = &deref(estimate, "estimate")?.0;
        copy_out(&e.per_antenna_db, out, len, needed)
    })
}

/// `|F_a(gamma)|` with uniform weights over the scenario's array.
/// `hypothesis` is a `DflHypothesis` value.
#[no_mangle]
pub unsafe extern "C" fn dfl_array_factor(
    scenario: *const DflScenario,
    gamma_rad: f64,
    hypothesis: u32,
    out: *mut f64,
) -> DflStatus {
    guard(|| {
        let layout = &deref(scenario, "scenario")?.0.layout;
        let h = match hypothesis {
            x if x == DflHypothesis::Planar as u32 => Hypothesis::Planar,
            x if x == DflHypothesis::NonPlanar as u32 => Hypothesis::NonPlanar,
            other => return Err(Failure(DflStatus::Validation, format!("unknown hypothesis {other}"))),
        };
        let w = BeamWeights::uniform(layout.num_antennas());
        *deref_mut(out, "out")? = array_factor(layout, &w, gamma_rad, h)?.norm();
        Ok(())
    })
}

/// First Fresnel zone radius at the middle of a link.
#[no_mangle]
pub unsafe extern "C" fn dfl_fresnel_radius(frequency_hz: f64, link_length_m: f64, out: *mut f64) -> DflStatus {
    guard(|| {
        if !(frequency_hz.is_finite() && frequency_hz > 0.0 && link_length_m.is_finite() && link_length_m > 0.0) {
            return Err(Failure(
                DflStatus::Validation,
                format!("frequency and link length must be > 0, got {frequency_hz}, {link_length_m}"),
            ));
        }
        *deref_mut(out, "out")? = fresnel_radius(wavelength_for(frequency_hz), link_length_m);
        Ok(())
    })
}
