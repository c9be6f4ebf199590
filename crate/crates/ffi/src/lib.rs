//! C ABI for the `thzmix` library.
//!
//! Scenarios and trajectories are opaque handles created and destroyed by
//! this library. Every fallible function returns a [`ThzStatus`]; on failure
//! a description is available from [`thz_last_error`] on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use thzmix::bloch::steady_state;
use thzmix::elliptic::{analytic_solution, complete_k, EllipticModulus};
use thzmix::run::{compute, Mode};
use thzmix::trajectory::PropagationTrajectory;
use thzmix::{FieldState, ScenarioConfig, SimError};

/// Result codes.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ThzStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    ConfigError = 3,
    PhysicsError = 4,
    SolverError = 5,
    IoError = 6,
    OutOfRange = 7,
    Panic = 99,
}

/// Propagation modes accepted by [`thz_scenario_run`].
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ThzMode {
    Full = 0,
    Reduced = 1,
    Analytic = 2,
}

/// Opaque scenario handle.
pub struct ThzScenario {
    config: ScenarioConfig,
}

/// Opaque trajectory handle.
pub struct ThzTrajectory {
    trajectory: PropagationTrajectory,
}

/// Steady-state populations and loop-phase referenced coherences.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ThzDensityMatrix {
    pub rho11: f64,
    pub rho22: f64,
    pub rho33: f64,
    pub sigma31_re: f64,
    pub sigma31_im: f64,
    pub sigma32_re: f64,
    pub sigma32_im: f64,
    pub sigma21_re: f64,
    pub sigma21_im: f64,
}

/// One trajectory row; intensities in W/cm².
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ThzSample {
    pub tau: f64,
    pub z_cm: f64,
    pub zeta: f64,
    pub i31_w_cm2: f64,
    pub i32_w_cm2: f64,
    pub it_w_cm2: f64,
    pub u1sq: f64,
    pub u2sq: f64,
    pub utsq: f64,
    pub phi_rad: f64,
    pub rho33: f64,
    pub inv_s: f64,
    pub inv_b: f64,
    pub inv_c: f64,
    pub inv_pi: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &SimError) -> ThzStatus {
    match e {
        SimError::InvalidParameter { .. } | SimError::Domain { .. } => ThzStatus::InvalidArgument,
        SimError::MultiphotonResonance { .. } | SimError::IncompatibleMode { .. } => ThzStatus::PhysicsError,
        SimError::NonUniqueSteadyState { .. }
        | SimError::VelocityNode { .. }
        | SimError::StepUnderflow { .. }
        | SimError::TooManySteps { .. } => ThzStatus::SolverError,
        SimError::Config(_) => ThzStatus::ConfigError,
        SimError::Io { .. } => ThzStatus::IoError,
    }
}

/// Run `f`, translating errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), (ThzStatus, String)>) -> ThzStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            ThzStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            ThzStatus::Panic
        }
    }
}

fn sim<T>(r: Result<T, SimError>) -> Result<T, (ThzStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

fn null(what: &str) -> (ThzStatus, String) {
    (ThzStatus::NullPointer, format!("{what} is null"))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, (ThzStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| (ThzStatus::InvalidArgument, format!("{what} is not valid UTF-8")))
}

unsafe fn store_scenario(out: *mut *mut ThzScenario, config: ScenarioConfig) {
    *out = Box::into_raw(Box::new(ThzScenario { config }));
}

/// Description of the last error on this thread; empty after a success.
/// The pointer stays valid until the next call into this library on the
/// same thread.
#[no_mangle]
pub extern "C" fn thz_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn thz_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Create a scenario from a built-in preset name.
///
/// # Safety
/// `name` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn thz_scenario_from_preset(name: *const c_char, out: *mut *mut ThzScenario) -> ThzStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let name = str_arg(name, "name")?;
        store_scenario(out, sim(ScenarioConfig::preset(name))?);
        Ok(())
    })
}

/// Create a scenario from config text.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn thz_scenario_from_toml(text: *const c_char, out: *mut *mut ThzScenario) -> ThzStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let text = str_arg(text, "text")?;
        store_scenario(out, sim(ScenarioConfig::from_toml(text))?);
        Ok(())
    })
}

/// Create a scenario from a config file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn thz_scenario_load(path: *const c_char, out: *mut *mut ThzScenario) -> ThzStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        let path = str_arg(path, "path")?;
        store_scenario(out, sim(ScenarioConfig::load(Path::new(path)))?);
        Ok(())
    })
}

/// Release a scenario. Null is ignored.
///
/// # Safety
/// `scenario` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn thz_scenario_free(scenario: *mut ThzScenario) {
    if !scenario.is_null() {
        drop(Box::from_raw(scenario));
    }
}

/// Energy conversion bound ωT/ω31 of the scenario's medium.
///
/// # Safety
/// Both pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn thz_scenario_efficiency_bound(scenario: *const ThzScenario, out: *mut f64) -> ThzStatus {
    guard(|| {
        let s = scenario.as_ref().ok_or_else(|| null("scenario"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = s.config.medium.efficiency_bound();
        Ok(())
    })
}

/// Optical-pumping threshold intensity (W/cm²).
///
/// # Safety
/// Both pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn thz_scenario_pumping_threshold(scenario: *const ThzScenario, out: *mut f64) -> ThzStatus {
    guard(|| {
        let s = scenario.as_ref().ok_or_else(|| null("scenario"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = sim(s.config.medium.pumping_threshold())?.intensity_w_cm2;
        Ok(())
    })
}

/// Steady state of atoms with axial velocity `vz_cm_s` driven at exact
/// resonance by Rabi frequencies (units of γ31) with loop phase `phi`.
///
/// # Safety
/// Both pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn thz_scenario_steady_state(
    scenario: *const ThzScenario,
    g31: f64,
    g32: f64,
    gt: f64,
    phi: f64,
    vz_cm_s: f64,
    out: *mut ThzDensityMatrix,
) -> ThzStatus {
    guard(|| {
        let s = scenario.as_ref().ok_or_else(|| null("scenario"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        if ![g31, g32, gt, phi, vz_cm_s].iter().all(|v| v.is_finite()) || g31 < 0.0 || g32 < 0.0 || gt < 0.0 {
            return Err((ThzStatus::InvalidArgument, "arguments must be finite, amplitudes non-negative".into()));
        }
        let f = FieldState::from_amplitudes(g31, g32, gt, phi);
        let st = sim(steady_state(&s.config.medium, &f, vz_cm_s))?;
        let [s31, s32, s21] = st.referenced(&f);
        *out = ThzDensityMatrix {
            rho11: st.rho11,
            rho22: st.rho22,
            rho33: st.rho33,
            sigma31_re: s31.re,
            sigma31_im: s31.im,
            sigma32_re: s32.re,
            sigma32_im: s32.im,
            sigma21_re: s21.re,
            sigma21_im: s21.im,
        };
        Ok(())
    })
}

/// Propagate a scenario.
///
/// # Safety
/// `scenario` and `out` must be valid pointers.
#[no_mangle]
pub unsafe extern "C" fn thz_scenario_run(
    scenario: *const ThzScenario,
    mode: ThzMode,
    out: *mut *mut ThzTrajectory,
) -> ThzStatus {
    guard(|| {
        let s = scenario.as_ref().ok_or_else(|| null("scenario"))?;
        if out.is_null() {
            return Err(null("out"));
        }
        let mode = match mode {
            ThzMode::Full => Mode::Full,
            ThzMode::Reduced => Mode::Reduced,
            ThzMode::Analytic => Mode::Analytic,
        };
        let mut result = sim(compute(&s.config, mode))?;
        let (_, trajectory) = result.trajectories.remove(0);
        *out = Box::into_raw(Box::new(ThzTrajectory { trajectory }));
        Ok(())
    })
}

/// Number of samples; 0 for a null handle.
///
/// # Safety
/// `trajectory` must be null or valid.
#[no_mangle]
pub unsafe extern "C" fn thz_trajectory_len(trajectory: *const ThzTrajectory) -> usize {
    trajectory.as_ref().map_or(0, |t| t.trajectory.samples.len())
}

/// Copy sample `index` into `out`.
///
/// # Safety
/// Both pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn thz_trajectory_sample(
    trajectory: *const ThzTrajectory,
    index: usize,
    out: *mut ThzSample,
) -> ThzStatus {
    guard(|| {
        let t = trajectory.as_ref().ok_or_else(|| null("trajectory"))?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let s = t.trajectory.samples.get(index).ok_or_else(|| {
            (ThzStatus::OutOfRange, format!("index {index} out of range ({} samples)", t.trajectory.samples.len()))
        })?;
        let v = s.values();
        *out = ThzSample {
            tau: v[0],
            z_cm: v[1],
            zeta: v[2],
            i31_w_cm2: v[3],
            i32_w_cm2: v[4],
            it_w_cm2: v[5],
            u1sq: v[6],
            u2sq: v[7],
            utsq: v[8],
            phi_rad: v[9],
            rho33: v[10],
            inv_s: v[11],
            inv_b: v[12],
            inv_c: v[13],
            inv_pi: v[14],
        };
        Ok(())
    })
}

/// Release a trajectory. Null is ignored.
///
/// # Safety
/// `trajectory` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn thz_trajectory_free(trajectory: *mut ThzTrajectory) {
    if !trajectory.is_null() {
        drop(Box::from_raw(trajectory));
    }
}

/// Complete elliptic integral K(k), 0 ≤ k < 1.
///
/// # Safety
/// `out` must be valid.
#[no_mangle]
pub unsafe extern "C" fn thz_complete_k(k: f64, out: *mut f64) -> ThzStatus {
    guard(|| {
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = sim(complete_k(k))?;
        Ok(())
    })
}

/// Jacobi sn, cn, dn at `x` for 0 ≤ k ≤ 1.
///
/// # Safety
/// The output pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn thz_jacobi(x: f64, k: f64, sn: *mut f64, cn: *mut f64, dn: *mut f64) -> ThzStatus {
    guard(|| {
        if sn.is_null() || cn.is_null() || dn.is_null() {
            return Err(null("output"));
        }
        if !x.is_finite() {
            return Err((ThzStatus::InvalidArgument, "x must be finite".into()));
        }
        let j = sim(EllipticModulus::from_k(k))?.jacobi(x);
        *sn = j.sn;
        *cn = j.cn;
        *dn = j.dn;
        Ok(())
    })
}

/// Closed-form generation solution (u1², u2², uT²) at `zeta`.
///
/// # Safety
/// The output pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn thz_analytic_solution(
    zeta: f64,
    u10: f64,
    u1sq: *mut f64,
    u2sq: *mut f64,
    utsq: *mut f64,
) -> ThzStatus {
    guard(|| {
        if u1sq.is_null() || u2sq.is_null() || utsq.is_null() {
            return Err(null("output"));
        }
        let p = sim(analytic_solution(zeta, u10))?;
        *u1sq = p.u1sq;
        *u2sq = p.u2sq;
        *utsq = p.utsq;
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn panics_become_status() {
        let s = guard(|| panic!("boom"));
        assert_eq!(s, ThzStatus::Panic);
        let msg = unsafe { CStr::from_ptr(thz_last_error()) };
        assert_eq!(msg.to_str().unwrap(), "internal panic");
    }

    #[test]
    fn error_kinds_map_to_codes() {
        assert_eq!(status_of(&SimError::Config("x".into())), ThzStatus::ConfigError);
        assert_eq!(status_of(&SimError::StepUnderflow { t: 1.0, h: 0.0 }), ThzStatus::SolverError);
        assert_eq!(status_of(&SimError::NonUniqueSteadyState { ratio: 0.0 }), ThzStatus::SolverError);
    }

    #[test]
    fn interior_nul_is_sanitised() {
        set_error("a\0b");
        let msg = unsafe { CStr::from_ptr(thz_last_error()) };
        assert_eq!(msg.to_str().unwrap(), "a b");
    }
}
