//! Builds profile, scaling and fields for a validated family, and runs the
//! residual verifier on the result.

use crate::fields::{FieldError, ShapeMap, SelfSimilarField};
use crate::model::{validate, DensityForm, DerivedConstants, Family, ModelParams, Violation};
use crate::profiles::{
    isothermal_profile, polytropic_profile, powerlaw_profile, pressureless_theta1_profile,
    pressureless_theta_not1_profile, Profile, ProfileError, TableOptions,
};
use crate::residual::{verify_window, Resolution, ResidualError, ResidualReport, Window};
use crate::scaling::{
    integrate_isothermal, integrate_polytropic, integrate_pressureless, powerlaw_scaling,
    IvpOptions, ScalingError, ScalingFn,
};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolutionError {
    #[error("invalid model: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Violation>),
    #[error(transparent)]
    Profile(#[from] ProfileError),
    #[error(transparent)]
    Scaling(#[from] ScalingError),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Residual(#[from] ResidualError),
}

/// Numerical settings used when a family needs integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    /// Settings of the scaling IVP; `ivp.t_end` is the last time needed.
    pub ivp: IvpOptions,
    pub table: TableOptions,
}

impl SolveOptions {
    pub fn until(t_end: f64) -> Self {
        Self {
            ivp: IvpOptions::until(t_end),
            table: TableOptions::default(),
        }
    }
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self::until(1.0)
    }
}

/// A constructed self-similar solution.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    params: ModelParams,
    family: Family,
    derived: Option<DerivedConstants>,
    field: SelfSimilarField,
}

impl Solution {
    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn derived(&self) -> Option<DerivedConstants> {
        self.derived
    }

    pub fn profile(&self) -> &Profile {
        self.field.profile()
    }

    pub fn scaling(&self) -> &ScalingFn {
        self.field.scaling()
    }

    pub fn field(&self) -> &SelfSimilarField {
        &self.field
    }

    /// Model parameters with the pressure switch the family is defined for.
    pub fn verification_params(&self) -> ModelParams {
        ModelParams {
            delta: self.family.expected_delta(),
            ..self.params
        }
    }
}

fn checked(params: &ModelParams, family: &Family) -> Result<Option<DerivedConstants>, SolutionError> {
    let outcome = validate(params, family);
    if outcome.is_ok() {
        Ok(outcome.derived)
    } else {
        Err(SolutionError::Invalid(outcome.violations))
    }
}

/// Validates `(params, family)` and builds the density shape alone.
pub fn build_profile(
    params: &ModelParams,
    family: &Family,
    table: TableOptions,
) -> Result<(Profile, ShapeMap), SolutionError> {
    let derived = checked(params, family)?;
    let p = params;
    let profile = match *family {
        Family::WithPressureIsothermal {
            amplitude, b, c, ..
        } => isothermal_profile(amplitude, b, c)?,
        Family::WithPressurePolytropic { alpha, .. } => polytropic_profile(p.theta, alpha)?,
        Family::WithPressurePowerLaw { m, n, sigma, alpha } => {
            let s = derived
                .map(|d| d.s)
                .expect("validated power-law family has derived constants");
            powerlaw_profile(p, m, n, sigma, alpha, s, table)?
        }
        Family::PressurelessTheta1 { lambda, alpha, .. } => {
            pressureless_theta1_profile(lambda, p.kappa, p.dim, alpha)?
        }
        Family::PressurelessThetaNot1 { lambda, alpha, .. } => {
            pressureless_theta_not1_profile(p.theta, lambda, p.kappa, p.dim, alpha)?
        }
    };
    let shape = match family {
        Family::PressurelessThetaNot1 {
            density_form: DensityForm::Exponential,
            ..
        } => ShapeMap::Exponential,
        _ => ShapeMap::Linear,
    };
    Ok((profile, shape))
}

/// Validates `(params, family)` and builds `a(t)` alone.
pub fn build_scaling(
    params: &ModelParams,
    family: &Family,
    ivp: &IvpOptions,
) -> Result<ScalingFn, SolutionError> {
    let derived = checked(params, family)?;
    let p = params;
    let scaling = match *family {
        Family::WithPressureIsothermal {
            b, a0, a1, closure, ..
        } => integrate_isothermal(closure, b, p.pressure, p.kappa, p.dim, a0, a1, ivp)?,
        Family::WithPressurePolytropic { a0, a1, .. } => {
            integrate_polytropic(p.gamma, p.pressure, p.kappa, p.dim, a0, a1, ivp)?
        }
        Family::WithPressurePowerLaw { m, n, sigma, .. } => {
            let s = derived
                .map(|d| d.s)
                .expect("validated power-law family has derived constants");
            powerlaw_scaling(sigma, m, n, s)?
        }
        Family::PressurelessTheta1 { lambda, a0, a1, .. } => {
            integrate_pressureless(1.0, lambda, p.dim, a0, a1, ivp)?
        }
        Family::PressurelessThetaNot1 { lambda, a0, a1, .. } => {
            integrate_pressureless(p.theta, lambda, p.dim, a0, a1, ivp)?
        }
    };
    Ok(scaling)
}

/// Validates `(params, family)` and assembles its fields.
pub fn build_solution(
    params: &ModelParams,
    family: &Family,
    opts: &SolveOptions,
) -> Result<Solution, SolutionError> {
    let derived = checked(params, family)?;
    let (profile, shape) = build_profile(params, family, opts.table)?;
    let scaling = build_scaling(params, family, &opts.ivp)?;
    Ok(Solution {
        params: *params,
        family: *family,
        derived,
        field: SelfSimilarField::new(profile, scaling, params.dim, shape),
    })
}

/// Constructs the family and measures its residuals on `window`, with the
/// pressure switch the family is defined for.
///
/// The scaling IVP is integrated just past the last stencil time.
pub fn verify_family(
    family: &Family,
    params: &ModelParams,
    window: &Window,
    resolutions: &[Resolution],
    lattice: usize,
    opts: &SolveOptions,
) -> Result<ResidualReport, SolutionError> {
    let h_t = resolutions.iter().map(|h| h.h_t).fold(0.0, f64::max);
    let mut opts = *opts;
    opts.ivp.t_end = window.t_max + 2.0 * h_t;
    let sol = build_solution(params, family, &opts)?;
    let report = verify_window(
        sol.field(),
        &sol.verification_params(),
        window,
        resolutions,
        lattice,
    )?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::RadialField;
    use crate::model::IsothermalClosure;

    fn polytropic() -> (ModelParams, Family) {
        (
            ModelParams {
                dim: 1,
                gamma: 2.0,
                theta: 2.0,
                pressure: 1.0,
                kappa: 1.0,
                delta: 1,
            },
            Family::WithPressurePolytropic {
                alpha: 1.0,
                a0: 1.0,
                a1: 0.5,
            },
        )
    }

    fn window() -> Window {
        Window {
            t_min: 0.1,
            t_max: 0.3,
            r_min: 0.1,
            r_max: 2.0,
        }
    }

    #[test]
    fn invalid_family_is_rejected() {
        let (mut p, f) = polytropic();
        p.theta = 3.0;
        let err = build_solution(&p, &f, &SolveOptions::default()).unwrap_err();
        assert!(matches!(err, SolutionError::Invalid(ref v) if !v.is_empty()));
    }

    #[test]
    fn polytropic_residuals_are_small() {
        let (p, f) = polytropic();
        let rep = verify_family(
            &f,
            &p,
            &window(),
            &[Resolution::uniform(1e-3), Resolution::uniform(5e-4)],
            17,
            &SolveOptions::default(),
        )
        .unwrap();
        assert!(rep.mass_linf < 1e-5, "{rep:?}");
        assert!(rep.mom_linf < 1e-5, "{rep:?}");
        let order = rep.order_mom.unwrap();
        assert!((1.7..=2.3).contains(&order), "{order}");
    }

    #[test]
    fn wrong_pressure_switch_is_detected() {
        let (p, f) = polytropic();
        let sol = build_solution(&p, &f, &SolveOptions::until(0.4)).unwrap();
        let mut off = sol.verification_params();
        off.delta = 0;
        let res = [Resolution::uniform(1e-3)];
        let good = verify_window(sol.field(), &sol.verification_params(), &window(), &res, 9).unwrap();
        let bad = verify_window(sol.field(), &off, &window(), &res, 9).unwrap();
        assert!(bad.mom_linf > 1e3 * good.mom_linf);
    }

    #[test]
    fn exponential_density_form_is_wired() {
        let p = ModelParams {
            dim: 3,
            gamma: 1.0,
            theta: 2.0,
            pressure: 1.0,
            kappa: 1.0,
            delta: 0,
        };
        let f = |density_form| Family::PressurelessThetaNot1 {
            lambda: 1.0,
            alpha: 1.0,
            a0: 1.0,
            a1: 0.5,
            density_form,
        };
        let lin = build_solution(&p, &f(DensityForm::Linear), &SolveOptions::default()).unwrap();
        let exp = build_solution(&p, &f(DensityForm::Exponential), &SolveOptions::default()).unwrap();
        let (a, b) = (
            lin.field().sample(0.0, 0.5).unwrap().rho,
            exp.field().sample(0.0, 0.5).unwrap().rho,
        );
        assert!((a.exp() - b).abs() < 1e-12 * b);
    }

    #[test]
    fn consistent_isothermal_closure_collapses_early() {
        let p = ModelParams {
            dim: 3,
            gamma: 1.0,
            theta: 1.0,
            pressure: 1.0,
            kappa: 1.0,
            delta: 1,
        };
        let f = Family::WithPressureIsothermal {
            amplitude: 1.0,
            b: 1.0,
            c: 0.0,
            a0: 1.0,
            a1: 0.0,
            closure: IsothermalClosure::MomentumConsistent,
        };
        let sol = build_solution(&p, &f, &SolveOptions::until(1.0)).unwrap();
        let tv = sol.scaling().vanishing_time().unwrap();
        assert!(tv > 0.3 && tv < 0.5, "{tv}");
    }
}
