//! Self-similar solutions of the radially symmetric compressible
//! Navier-Stokes equations with density-dependent viscosity
//! `mu = kappa rho^theta`, and a finite-difference residual verifier for
//! them.
//!
//! A solution is `rho(t, r) = shape(r/a(t))/a(t)^N`, `u(t, r) = (a'/a) r`:
//! [`profiles`] builds the shape, [`scaling`] the dilation `a(t)`,
//! [`fields`] combines them, and [`residual`] plugs the result back into
//! the mass and momentum equations.
//!
//! ```
//! use nssol::model::{Family, ModelParams};
//! use nssol::residual::{Resolution, Window};
//! use nssol::solution::{verify_family, SolveOptions};
//!
//! let params = ModelParams { dim: 1, gamma: 2.0, theta: 2.0, pressure: 1.0, kappa: 1.0, delta: 1 };
//! let family = Family::WithPressurePolytropic { alpha: 1.0, a0: 1.0, a1: 0.5 };
//! let window = Window { t_min: 0.1, t_max: 0.3, r_min: 0.1, r_max: 2.0 };
//! let report = verify_family(
//!     &family, &params, &window, &[Resolution::uniform(1e-3)], 9, &SolveOptions::default(),
//! ).unwrap();
//! assert!(report.mom_linf < 1e-5);
//! ```

// NaN must fail range checks, so negated comparisons are deliberate.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod blowup;
pub mod config;
pub mod fields;
pub mod model;
pub mod ode;
pub mod profiles;
pub mod residual;
pub mod scaling;
pub mod solution;

pub use fields::{eval_grid, eval_point, FieldGrid, FieldSample, RadialField, SelfSimilarField};
pub use model::{derived_s, validate, Family, ModelParams, ValidationOutcome};
pub use profiles::Profile;
pub use residual::{verify_window, ResidualReport, Resolution, Window};
pub use scaling::ScalingFn;
pub use solution::{build_profile, build_scaling, build_solution, verify_family, Solution, SolutionError, SolveOptions};

/// Environment variable capping the worker threads (0 = automatic).
pub const THREADS_ENV: &str = "NSSOL_THREADS";

/// Sizes the global rayon pool from [`THREADS_ENV`].
///
/// Returns the requested thread count, 0 for automatic. Has no effect if
/// the global pool was already built.
pub fn init_threads_from_env() -> Result<usize, String> {
    let n = match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .map_err(|e| format!("{THREADS_ENV}={v:?}: {e}"))?,
        Err(_) => 0,
    };
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(n)
}
