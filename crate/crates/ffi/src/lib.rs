//! C ABI over `nssol`.
//!
//! Handles are opaque and owned by the caller, who releases them with the
//! matching `*_free` function. Every entry point returns an [`NssolStatus`];
//! on failure a description is available from
//! [`nssol_last_error_message`] on the same thread. Strings returned through
//! `char **` out-parameters are released with [`nssol_string_free`].

use nssol::config::RunConfig;
use nssol::fields::{eval_grid, RadialField};
use nssol::model::{derived_s, validate, ModelParams};
use nssol::residual::ResidualReport;
use nssol::solution::{build_solution, verify_family, Solution, SolutionError, SolveOptions};
use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

/// Result code of every entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NssolStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 2,
    /// The configuration JSON could not be parsed.
    ParseError = 3,
    /// The parameters violate a family constraint.
    ValidationError = 4,
    /// A point lies outside the solution's domain.
    DomainError = 5,
    /// Integration, tabulation or differencing failed.
    NumericError = 6,
    /// An argument is out of range (bad grid, missing section).
    InvalidArgument = 7,
    /// A panic was caught at the boundary.
    Panic = 8,
}

/// A constructed self-similar solution.
pub struct NssolSolution(Solution);

/// A residual report.
pub struct NssolReport(ResidualReport);

/// Flat copy of the first-resolution numbers of a report. Orders are NaN
/// when they could not be estimated.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct NssolReportSummary {
    pub h_t: f64,
    pub h_r: f64,
    pub mass_linf: f64,
    pub mass_l2: f64,
    pub mom_linf: f64,
    pub mom_l2: f64,
    pub order_mass: f64,
    pub order_mom: f64,
    pub mass_skipped: u64,
    pub mom_skipped: u64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let text = msg.into().replace('\0', " ");
    let c = CString::new(text).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Failure(NssolStatus, String);

impl From<SolutionError> for Failure {
    fn from(e: SolutionError) -> Self {
        use nssol::fields::FieldError;
        use nssol::profiles::ProfileError;
        use nssol::residual::ResidualError;
        use nssol::scaling::ScalingError;
        let status = match &e {
            SolutionError::Invalid(_) => NssolStatus::ValidationError,
            SolutionError::Profile(ProfileError::InvalidParameter(_))
            | SolutionError::Scaling(ScalingError::InvalidParameter(_))
            | SolutionError::Field(FieldError::InvalidGrid(_))
            | SolutionError::Residual(ResidualError::InvalidSetup(_)) => NssolStatus::InvalidArgument,
            SolutionError::Profile(ProfileError::OutOfRange { .. })
            | SolutionError::Scaling(ScalingError::Domain { .. })
            | SolutionError::Residual(ResidualError::StencilOutOfDomain { .. }) => NssolStatus::DomainError,
            _ => NssolStatus::NumericError,
        };
        Failure(status, e.to_string())
    }
}

impl From<nssol::fields::FieldError> for Failure {
    fn from(e: nssol::fields::FieldError) -> Self {
        let inner = match e {
            nssol::fields::FieldError::Point { source, .. } => *source,
            other => other,
        };
        SolutionError::Field(inner).into()
    }
}

/// Runs `f`, recording any failure or panic as the thread's last error.
fn guard(f: impl FnOnce() -> Result<(), Failure>) -> NssolStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => NssolStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("panic: {msg}"));
            NssolStatus::Panic
        }
    }
}

fn null(name: &str) -> Failure {
    Failure(NssolStatus::NullPointer, format!("{name} is null"))
}

unsafe fn read_str<'a>(p: *const c_char, name: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(name));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|e| Failure(NssolStatus::InvalidUtf8, format!("{name}: {e}")))
}

unsafe fn read_config(p: *const c_char) -> Result<RunConfig, Failure> {
    let text = read_str(p, "config_json")?;
    RunConfig::from_json(text).map_err(|e| Failure(NssolStatus::ParseError, e.to_string()))
}

fn into_c_string(s: String) -> *mut c_char {
    CString::new(s.replace('\0', " "))
        .expect("interior NULs removed")
        .into_raw()
}

unsafe fn solution<'a>(p: *const NssolSolution) -> Result<&'a Solution, Failure> {
    p.as_ref().map(|s| &s.0).ok_or_else(|| null("solution"))
}

unsafe fn report<'a>(p: *const NssolReport) -> Result<&'a ResidualReport, Failure> {
    p.as_ref().map(|s| &s.0).ok_or_else(|| null("report"))
}

/// Message of the last failure on this thread, or null if there was none.
/// The pointer stays valid until the next failing call on this thread.
#[no_mangle]
pub extern "C" fn nssol_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn nssol_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not have been freed already.
#[no_mangle]
pub unsafe extern "C" fn nssol_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Similarity exponent `2/(gamma N - N + 2)`.
///
/// # Safety
/// `out_s` must be a valid pointer to a double.
#[no_mangle]
pub unsafe extern "C" fn nssol_derived_s(dim: u32, gamma: f64, out_s: *mut f64) -> NssolStatus {
    guard(|| {
        let out = out_s.as_mut().ok_or_else(|| null("out_s"))?;
        let p = ModelParams {
            dim,
            gamma,
            theta: 1.0,
            pressure: 1.0,
            kappa: 1.0,
            delta: 1,
        };
        *out = derived_s(&p).map_err(|e| Failure(NssolStatus::InvalidArgument, e.to_string()))?;
        Ok(())
    })
}

/// Validates the `model` and `family` of a configuration and writes the
/// outcome as JSON. Returns `VALIDATION_ERROR` (with the JSON still
/// written) when a constraint is violated.
///
/// # Safety
/// `config_json` must be a NUL-terminated string; `out_json` a valid
/// pointer. The returned string is freed with [`nssol_string_free`].
#[no_mangle]
pub unsafe extern "C" fn nssol_validate_json(
    config_json: *const c_char,
    out_json: *mut *mut c_char,
) -> NssolStatus {
    guard(|| {
        if out_json.is_null() {
            return Err(null("out_json"));
        }
        *out_json = ptr::null_mut();
        let cfg = read_config(config_json)?;
        let outcome = validate(&cfg.model, &cfg.family);
        let doc = serde_json::json!({
            "valid": outcome.is_ok(),
            "violations": outcome.violations,
            "derived": outcome.derived,
        });
        *out_json = into_c_string(doc.to_string());
        if outcome.is_ok() {
            Ok(())
        } else {
            let list: Vec<String> = outcome.violations.iter().map(ToString::to_string).collect();
            Err(Failure(NssolStatus::ValidationError, list.join("; ")))
        }
    })
}

/// Builds a solution from a configuration. Numeric scaling functions are
/// integrated on `[0, t_end]`; `t_end <= 0` uses the configuration's
/// `scaling.t_end`, or 1.
///
/// # Safety
/// `config_json` must be a NUL-terminated string; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn nssol_solution_from_json(
    config_json: *const c_char,
    t_end: f64,
    out: *mut *mut NssolSolution,
) -> NssolStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let cfg = read_config(config_json)?;
        let horizon = if t_end > 0.0 {
            t_end
        } else {
            cfg.scaling_config().t_end.unwrap_or(1.0)
        };
        let mut ivp = cfg.ivp_options(horizon);
        ivp.t_end = horizon;
        let opts = SolveOptions {
            ivp,
            table: cfg.table_options(),
        };
        let sol = build_solution(&cfg.model, &cfg.family, &opts)?;
        *out = Box::into_raw(Box::new(NssolSolution(sol)));
        Ok(())
    })
}

/// Releases a solution. Null is ignored.
///
/// # Safety
/// `sol` must come from [`nssol_solution_from_json`] and not be used
/// afterwards.
#[no_mangle]
pub unsafe extern "C" fn nssol_solution_free(sol: *mut NssolSolution) {
    if !sol.is_null() {
        drop(Box::from_raw(sol));
    }
}

/// Density and velocity at `(t, r)`.
///
/// # Safety
/// `sol` must be a live handle; `rho` and `u` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn nssol_solution_eval_point(
    sol: *const NssolSolution,
    t: f64,
    r: f64,
    rho: *mut f64,
    u: *mut f64,
) -> NssolStatus {
    guard(|| {
        let sol = solution(sol)?;
        let (rho, u) = (rho.as_mut().ok_or_else(|| null("rho"))?, u.as_mut().ok_or_else(|| null("u"))?);
        let s = sol.field().sample(t, r)?;
        *rho = s.rho;
        *u = s.u;
        Ok(())
    })
}

/// Fields on the grid `t[0..nt] x r[0..nr]`, written time-major into
/// `rho_out` and `u_out`, each of length `nt * nr`. Nothing is written on
/// failure.
///
/// # Safety
/// All arrays must be valid for the stated lengths.
#[no_mangle]
pub unsafe extern "C" fn nssol_solution_eval_grid(
    sol: *const NssolSolution,
    t: *const f64,
    nt: usize,
    r: *const f64,
    nr: usize,
    rho_out: *mut f64,
    u_out: *mut f64,
) -> NssolStatus {
    guard(|| {
        let sol = solution(sol)?;
        if t.is_null() || r.is_null() || rho_out.is_null() || u_out.is_null() {
            return Err(null("grid array"));
        }
        let ts = std::slice::from_raw_parts(t, nt);
        let rs = std::slice::from_raw_parts(r, nr);
        let g = eval_grid(sol.field(), ts, rs)?;
        let n = nt * nr;
        std::slice::from_raw_parts_mut(rho_out, n).copy_from_slice(&g.rho);
        std::slice::from_raw_parts_mut(u_out, n).copy_from_slice(&g.u);
        Ok(())
    })
}

/// Profile value and slope at `z`.
///
/// # Safety
/// `sol` must be a live handle; `y` and `dy` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn nssol_solution_profile_eval(
    sol: *const NssolSolution,
    z: f64,
    y: *mut f64,
    dy: *mut f64,
) -> NssolStatus {
    guard(|| {
        let sol = solution(sol)?;
        let (y, dy) = (y.as_mut().ok_or_else(|| null("y"))?, dy.as_mut().ok_or_else(|| null("dy"))?);
        let s = sol
            .profile()
            .evaluate(z)
            .map_err(|e| Failure::from(SolutionError::Profile(e)))?;
        *y = s.y;
        *dy = s.dy;
        Ok(())
    })
}

/// `a(t)` and `a'(t)`.
///
/// # Safety
/// `sol` must be a live handle; `a` and `adot` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn nssol_solution_scaling_eval(
    sol: *const NssolSolution,
    t: f64,
    a: *mut f64,
    adot: *mut f64,
) -> NssolStatus {
    guard(|| {
        let sol = solution(sol)?;
        let (a, adot) = (a.as_mut().ok_or_else(|| null("a"))?, adot.as_mut().ok_or_else(|| null("adot"))?);
        let s = sol
            .scaling()
            .evaluate(t)
            .map_err(|e| Failure::from(SolutionError::Scaling(e)))?;
        *a = s.a;
        *adot = s.adot;
        Ok(())
    })
}

/// Time at which `a` reaches zero. `*has_value` is set to 0 when `a` does
/// not vanish on the integrated span, and `*t` is then left unchanged.
///
/// # Safety
/// `sol` must be a live handle; `t` and `has_value` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn nssol_solution_vanishing_time(
    sol: *const NssolSolution,
    t: *mut f64,
    has_value: *mut i32,
) -> NssolStatus {
    guard(|| {
        let sol = solution(sol)?;
        let (t, has) = (t.as_mut().ok_or_else(|| null("t"))?, has_value.as_mut().ok_or_else(|| null("has_value"))?);
        match sol.scaling().vanishing_time() {
            Some(v) => {
                *t = v;
                *has = 1;
            }
            None => *has = 0,
        }
        Ok(())
    })
}

/// Runs the residual verifier with the configuration's `verify` section.
///
/// # Safety
/// `config_json` must be a NUL-terminated string; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn nssol_verify_json(
    config_json: *const c_char,
    out: *mut *mut NssolReport,
) -> NssolStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        *out = ptr::null_mut();
        let cfg = read_config(config_json)?;
        let v = cfg
            .verify()
            .map_err(|e| Failure(NssolStatus::InvalidArgument, e.to_string()))?;
        let opts = SolveOptions {
            ivp: cfg.ivp_options(v.window.t_max),
            table: cfg.table_options(),
        };
        let rep = verify_family(&cfg.family, &cfg.model, &v.window, &v.resolutions, v.lattice, &opts)?;
        *out = Box::into_raw(Box::new(NssolReport(rep)));
        Ok(())
    })
}

/// Releases a report. Null is ignored.
///
/// # Safety
/// `rep` must come from [`nssol_verify_json`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn nssol_report_free(rep: *mut NssolReport) {
    if !rep.is_null() {
        drop(Box::from_raw(rep));
    }
}

/// # Safety
/// `rep` must be a live handle; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn nssol_report_summary(
    rep: *const NssolReport,
    out: *mut NssolReportSummary,
) -> NssolStatus {
    guard(|| {
        let r = report(rep)?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        *out = NssolReportSummary {
            h_t: r.h_t,
            h_r: r.h_r,
            mass_linf: r.mass_linf,
            mass_l2: r.mass_l2,
            mom_linf: r.mom_linf,
            mom_l2: r.mom_l2,
            order_mass: r.order_mass.unwrap_or(f64::NAN),
            order_mom: r.order_mom.unwrap_or(f64::NAN),
            mass_skipped: r.mass_skipped as u64,
            mom_skipped: r.mom_skipped as u64,
        };
        Ok(())
    })
}

/// Full report, all resolutions included, as JSON.
///
/// # Safety
/// `rep` must be a live handle; `out_json` a valid pointer. The returned
/// string is freed with [`nssol_string_free`].
#[no_mangle]
pub unsafe extern "C" fn nssol_report_to_json(
    rep: *const NssolReport,
    out_json: *mut *mut c_char,
) -> NssolStatus {
    guard(|| {
        let r = report(rep)?;
        if out_json.is_null() {
            return Err(null("out_json"));
        }
        let text = serde_json::to_string(r).map_err(|e| Failure(NssolStatus::NumericError, e.to_string()))?;
        *out_json = into_c_string(text);
        Ok(())
    })
}
