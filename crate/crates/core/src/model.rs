//! Model parameters, solution families and their admissibility rules.

use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

/// Relative tolerance used when checking exponent identities such as
/// `theta == gamma`.
const EXPONENT_TOL: f64 = 1e-12;

/// Physical constants of the radial system.
///
/// The serialized keys follow the usual notation (`N`, `K`) so configuration
/// files read naturally next to the equations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    /// Spatial dimension.
    #[serde(rename = "N")]
    pub dim: u32,
    /// Adiabatic exponent of the pressure law `P = K rho^gamma`.
    pub gamma: f64,
    /// Exponent of the viscosity law `mu = kappa rho^theta`.
    pub theta: f64,
    /// Pressure constant.
    #[serde(rename = "K")]
    pub pressure: f64,
    /// Viscosity constant.
    pub kappa: f64,
    /// Pressure switch: 1 with pressure, 0 pressureless.
    pub delta: u8,
}

impl ModelParams {
    pub fn dim_f64(&self) -> f64 {
        f64::from(self.dim)
    }

    /// The viscosity exponent singled out by the power-law family,
    /// `gamma/2 + 1/2 - 1/N`.
    pub fn theta_required(&self) -> f64 {
        self.gamma / 2.0 + 0.5 - 1.0 / self.dim_f64()
    }
}

/// Closure used for the scaling ODE of the isothermal family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IsothermalClosure {
    /// `a'' - 2BK/a + B N kappa a'/a^2 = 0`, the closure usually quoted
    /// for this family.
    #[default]
    Nominal,
    /// `a'' + 2BK/a - 2 B N kappa a'/a^2 = 0`, the closure obtained by
    /// substituting `A exp(B z^2 + C)/a^N` into the momentum equation.
    MomentumConsistent,
}

/// How the pressureless `theta != 1` profile maps to a density.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DensityForm {
    /// `rho = y(r/a)/a^N`.
    #[default]
    Linear,
    /// `rho = exp(y(r/a))/a^N`, kept for comparison only.
    Exponential,
}

/// Self-similar solution family together with its constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Family {
    /// `theta = gamma = 1`; density `A exp(B z^2 + C)/a^N`.
    WithPressureIsothermal {
        #[serde(rename = "A")]
        amplitude: f64,
        #[serde(rename = "B")]
        b: f64,
        #[serde(rename = "C")]
        c: f64,
        a0: f64,
        a1: f64,
        #[serde(default)]
        closure: IsothermalClosure,
    },
    /// `theta = gamma > 1`.
    WithPressurePolytropic { alpha: f64, a0: f64, a1: f64 },
    /// `theta = gamma/2 + 1/2 - 1/N` with `a(t) = sigma (m t + n)^s`.
    WithPressurePowerLaw {
        m: f64,
        n: f64,
        sigma: f64,
        alpha: f64,
    },
    PressurelessTheta1 {
        lambda: f64,
        alpha: f64,
        a0: f64,
        a1: f64,
    },
    PressurelessThetaNot1 {
        lambda: f64,
        alpha: f64,
        a0: f64,
        a1: f64,
        #[serde(default)]
        density_form: DensityForm,
    },
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::WithPressureIsothermal { .. } => "with_pressure_isothermal",
            Family::WithPressurePolytropic { .. } => "with_pressure_polytropic",
            Family::WithPressurePowerLaw { .. } => "with_pressure_power_law",
            Family::PressurelessTheta1 { .. } => "pressureless_theta1",
            Family::PressurelessThetaNot1 { .. } => "pressureless_theta_not1",
        }
    }

    pub fn with_pressure(&self) -> bool {
        matches!(
            self,
            Family::WithPressureIsothermal { .. }
                | Family::WithPressurePolytropic { .. }
                | Family::WithPressurePowerLaw { .. }
        )
    }

    /// The pressure switch this family is defined for.
    pub fn expected_delta(&self) -> u8 {
        u8::from(self.with_pressure())
    }
}

/// Constants derived for the power-law family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DerivedConstants {
    /// Similarity exponent `s = 2/(gamma N - N + 2)`.
    pub s: f64,
    pub theta_required: f64,
}

/// One violated admissibility constraint.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub constraint: &'static str,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.constraint, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationOutcome {
    pub violations: Vec<Violation>,
    pub derived: Option<DerivedConstants>,
}

impl ValidationOutcome {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("gamma N - N + 2 = {0} must be positive")]
    Domain(f64),
    #[error("closed forms of s disagree: 2/(gamma N - N + 2) = {lhs}, 1/((gamma - theta) N) = {rhs}")]
    SIdentity { lhs: f64, rhs: f64 },
    #[error("invalid model: {}", join(.0))]
    Invalid(Vec<Violation>),
}

fn join(v: &[Violation]) -> String {
    v.iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

/// Similarity exponent of the power-law family.
///
/// When `theta` equals `gamma/2 + 1/2 - 1/N` the second closed form
/// `1/((gamma - theta) N)` is evaluated as well and must agree.
pub fn derived_s(params: &ModelParams) -> Result<f64, ModelError> {
    let n = params.dim_f64();
    let denom = params.gamma * n - n + 2.0;
    if !(denom > 0.0) {
        return Err(ModelError::Domain(denom));
    }
    let s = 2.0 / denom;
    if approx_eq(params.theta, params.theta_required()) {
        let alt = 1.0 / ((params.gamma - params.theta) * n);
        if !((s - alt).abs() <= 1e-12 * s) {
            return Err(ModelError::SIdentity { lhs: s, rhs: alt });
        }
    }
    Ok(s)
}

fn approx_eq(a: f64, b: f64) -> bool {
    (a - b).abs() <= EXPONENT_TOL * a.abs().max(b.abs()).max(1.0)
}

struct Checker {
    violations: Vec<Violation>,
}

impl Checker {
    fn fail(&mut self, constraint: &'static str, message: String) {
        self.violations.push(Violation {
            constraint,
            message,
        });
    }

    fn finite(&mut self, name: &'static str, v: f64) -> bool {
        if v.is_finite() {
            true
        } else {
            self.fail("finite", format!("{name} = {v} is not finite"));
            false
        }
    }

    fn positive(&mut self, name: &'static str, v: f64) {
        if self.finite(name, v) && !(v > 0.0) {
            self.fail("positive", format!("{name} > 0 required, got {v}"));
        }
    }

    fn non_negative(&mut self, name: &'static str, v: f64) {
        if self.finite(name, v) && !(v >= 0.0) {
            self.fail("non_negative", format!("{name} >= 0 required, got {v}"));
        }
    }
}

/// Checks every parameter invariant and the family-selection constraints.
/// All violations are collected; validation never stops at the first one.
pub fn validate(params: &ModelParams, family: &Family) -> ValidationOutcome {
    let mut c = Checker {
        violations: Vec::new(),
    };
    let p = params;

    if p.dim < 1 {
        c.fail("dimension", format!("N >= 1 required, got {}", p.dim));
    }
    if c.finite("gamma", p.gamma) && !(p.gamma >= 1.0) {
        c.fail("gamma", format!("gamma >= 1 required, got {}", p.gamma));
    }
    c.positive("theta", p.theta);
    c.positive("K", p.pressure);
    c.positive("kappa", p.kappa);
    if p.delta > 1 {
        c.fail("delta", format!("delta must be 0 or 1, got {}", p.delta));
    } else if p.delta != family.expected_delta() {
        c.fail(
            "delta",
            format!(
                "{} requires delta = {}, got {}",
                family.name(),
                family.expected_delta(),
                p.delta
            ),
        );
    }

    let mut derived = None;
    match *family {
        Family::WithPressureIsothermal {
            amplitude,
            b,
            c: cc,
            a0,
            a1,
            ..
        } => {
            if !(approx_eq(p.theta, 1.0) && approx_eq(p.gamma, 1.0)) {
                c.fail(
                    "theta = gamma = 1",
                    format!(
                        "theta = gamma = 1 required for {}, got gamma = {}, theta = {}",
                        family.name(),
                        p.gamma,
                        p.theta
                    ),
                );
            }
            c.non_negative("A", amplitude);
            c.finite("B", b);
            c.finite("C", cc);
            c.positive("a0", a0);
            c.finite("a1", a1);
        }
        Family::WithPressurePolytropic { alpha, a0, a1 } => {
            if !(approx_eq(p.theta, p.gamma) && p.gamma > 1.0) {
                c.fail(
                    "theta = gamma > 1",
                    format!(
                        "theta = gamma > 1 required for {}, got gamma = {}, theta = {}",
                        family.name(),
                        p.gamma,
                        p.theta
                    ),
                );
            }
            c.positive("alpha", alpha);
            c.positive("a0", a0);
            c.finite("a1", a1);
        }
        Family::WithPressurePowerLaw { m, n, sigma, alpha } => {
            let required = p.theta_required();
            let floor = 1.0 - 1.0 / p.dim_f64().max(1.0);
            if !approx_eq(p.theta, required) {
                c.fail(
                    "theta = gamma/2 + 1/2 - 1/N",
                    format!(
                        "theta = gamma/2 + 1/2 - 1/N = {required} required for {}, got theta = {}",
                        family.name(),
                        p.theta
                    ),
                );
            } else if p.theta < floor - EXPONENT_TOL {
                c.fail(
                    "theta >= 1 - 1/N",
                    format!("theta >= 1 - 1/N = {floor} required, got {}", p.theta),
                );
            }
            c.finite("m", m);
            c.positive("n", n);
            c.positive("sigma", sigma);
            c.positive("alpha", alpha);
            if p.dim >= 1 {
                match derived_s(p) {
                    Ok(s) if s > 0.0 && s <= 1.0 + EXPONENT_TOL => {
                        derived = Some(DerivedConstants {
                            s,
                            theta_required: required,
                        });
                    }
                    Ok(s) => c.fail("0 < s <= 1", format!("0 < s <= 1 required, got s = {s}")),
                    Err(e) => c.fail("s", e.to_string()),
                }
            }
        }
        Family::PressurelessTheta1 {
            lambda,
            alpha,
            a0,
            a1,
        } => {
            if !approx_eq(p.theta, 1.0) {
                c.fail(
                    "theta = 1",
                    format!("theta = 1 required for {}, got {}", family.name(), p.theta),
                );
            }
            c.finite("lambda", lambda);
            c.finite("alpha", alpha);
            c.positive("a0", a0);
            c.finite("a1", a1);
        }
        Family::PressurelessThetaNot1 {
            lambda,
            alpha,
            a0,
            a1,
            ..
        } => {
            if approx_eq(p.theta, 1.0) {
                c.fail(
                    "theta != 1",
                    format!("theta != 1 required for {}, got {}", family.name(), p.theta),
                );
            }
            c.finite("lambda", lambda);
            c.positive("alpha", alpha);
            c.positive("a0", a0);
            c.finite("a1", a1);
        }
    }

    let violations = c.violations;
    if !violations.is_empty() {
        derived = None;
    }
    ValidationOutcome {
        violations,
        derived,
    }
}
