//! Scaling functions `a(t)` and their derivatives.
//!
//! The power-law family has a closed form. Every other family defines `a`
//! through a second-order ODE, integrated forward from `t = 0` as the first
//! order system `(a, a')` and stored as a dense trajectory.

use crate::model::IsothermalClosure;
use crate::ode::{self, Dopri5, OdeError, StepperOptions};
use serde::Serialize;
use thiserror::Error;

/// Vanishing threshold relative to `a0`.
pub const VANISH_FRACTION: f64 = 1e-8;
/// Width to which a vanishing time is bracketed.
pub const VANISH_BRACKET: f64 = 1e-10;
/// `|a|` beyond this multiple of `max(a0, 1)` counts as divergence.
const DIVERGENCE_FACTOR: f64 = 1e100;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScalingError {
    #[error("invalid scaling parameter: {0}")]
    InvalidParameter(String),
    #[error("t = {t} outside the scaling domain [{lo}, {hi}]")]
    Domain { t: f64, lo: f64, hi: f64 },
    #[error("step size underflow at t = {t} (a = {a}, a' = {adot})")]
    StepFailure { t: f64, a: f64, adot: f64 },
    #[error(transparent)]
    Ode(#[from] OdeError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingSample {
    pub a: f64,
    pub adot: f64,
}

/// Second-order ODE for `a(t)`, written as `a'' = accel(a, a')`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "ode", rename_all = "snake_case")]
pub enum ScalingOde {
    Isothermal {
        b: f64,
        pressure: f64,
        kappa: f64,
        dim: u32,
        closure: IsothermalClosure,
    },
    /// `theta = gamma`.
    Polytropic {
        gamma: f64,
        pressure: f64,
        kappa: f64,
        dim: u32,
    },
    PressurelessTheta1 { lambda: f64 },
    PressurelessThetaNot1 { theta: f64, lambda: f64, dim: u32 },
}

impl ScalingOde {
    pub fn accel(&self, a: f64, adot: f64) -> f64 {
        match *self {
            ScalingOde::Isothermal {
                b,
                pressure,
                kappa,
                dim,
                closure,
            } => {
                let n = f64::from(dim);
                match closure {
                    IsothermalClosure::Nominal => {
                        2.0 * b * pressure / a - b * n * kappa * adot / (a * a)
                    }
                    IsothermalClosure::MomentumConsistent => {
                        -2.0 * b * pressure / a + 2.0 * b * n * kappa * adot / (a * a)
                    }
                }
            }
            ScalingOde::Polytropic {
                gamma,
                pressure,
                kappa,
                dim,
            } => {
                let n = f64::from(dim);
                let theta = gamma;
                -pressure * gamma * a.powf(n - theta * n - 1.0)
                    + n * kappa * theta * adot * a.powf(n - theta * n - 2.0)
            }
            ScalingOde::PressurelessTheta1 { lambda } => lambda * adot / (a * a),
            ScalingOde::PressurelessThetaNot1 { theta, lambda, dim } => {
                let n = f64::from(dim);
                -lambda * adot / a.powf(n * theta - n + 2.0)
            }
        }
    }
}

/// How a numeric integration ended.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum IvpStatus {
    Completed,
    /// `a` reached zero inside `[t_lo, t_hi]`.
    Vanished { t_lo: f64, t_hi: f64 },
    /// `|a|` grew without bound near `t`.
    Diverged { t: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IvpOptions {
    pub t_end: f64,
    pub rtol: f64,
    pub atol: f64,
    /// Maximum spacing of the stored trajectory.
    pub h_max: f64,
}

impl IvpOptions {
    pub fn until(t_end: f64) -> Self {
        Self {
            t_end,
            ..Default::default()
        }
    }
}

impl Default for IvpOptions {
    fn default() -> Self {
        Self {
            t_end: 1.0,
            rtol: 1e-10,
            atol: 1e-12,
            h_max: 1e-3,
        }
    }
}

/// `a(t) = sigma (m t + n)^s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerLawScaling {
    pub sigma: f64,
    pub m: f64,
    pub n: f64,
    pub s: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NumericScaling {
    ode: ScalingOde,
    a0: f64,
    a1: f64,
    t: Vec<f64>,
    a: Vec<f64>,
    adot: Vec<f64>,
    addot: Vec<f64>,
    status: IvpStatus,
}

impl NumericScaling {
    pub fn ode(&self) -> &ScalingOde {
        &self.ode
    }

    pub fn initial(&self) -> (f64, f64) {
        (self.a0, self.a1)
    }

    pub fn status(&self) -> IvpStatus {
        self.status
    }

    pub fn times(&self) -> &[f64] {
        &self.t
    }

    pub fn values(&self) -> &[f64] {
        &self.a
    }

    pub fn rates(&self) -> &[f64] {
        &self.adot
    }

    pub fn t_last(&self) -> f64 {
        *self.t.last().expect("trajectory has at least one node")
    }

    fn eval(&self, t: f64) -> Result<ScalingSample, ScalingError> {
        let (lo, hi) = (self.t[0], self.t_last());
        if !(t >= lo && t <= hi) {
            return Err(ScalingError::Domain { t, lo, hi });
        }
        if self.t.len() == 1 {
            return Ok(ScalingSample {
                a: self.a[0],
                adot: self.adot[0],
            });
        }
        let i = ode::bracket(&self.t, t);
        let (t0, t1) = (self.t[i], self.t[i + 1]);
        let (a, _) = ode::hermite(
            t0,
            t1,
            self.a[i],
            self.a[i + 1],
            self.adot[i],
            self.adot[i + 1],
            t,
        );
        let (adot, _) = ode::hermite(
            t0,
            t1,
            self.adot[i],
            self.adot[i + 1],
            self.addot[i],
            self.addot[i + 1],
            t,
        );
        Ok(ScalingSample { a, adot })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ScalingFn {
    PowerLaw(PowerLawScaling),
    NumericIvp(NumericScaling),
}

impl ScalingFn {
    pub fn evaluate(&self, t: f64) -> Result<ScalingSample, ScalingError> {
        match self {
            ScalingFn::PowerLaw(p) => {
                let tau = p.m * t + p.n;
                if !(tau > 0.0) {
                    let (lo, hi) = self.domain();
                    return Err(ScalingError::Domain { t, lo, hi });
                }
                let a = p.sigma * tau.powf(p.s);
                Ok(ScalingSample {
                    a,
                    adot: p.s * p.m * p.sigma * tau.powf(p.s - 1.0),
                })
            }
            ScalingFn::NumericIvp(n) => n.eval(t),
        }
    }

    /// Time interval on which the scaling is defined (open ends for the
    /// power law, closed for a stored trajectory).
    pub fn domain(&self) -> (f64, f64) {
        match self {
            ScalingFn::PowerLaw(p) => {
                if p.m > 0.0 {
                    (-p.n / p.m, f64::INFINITY)
                } else if p.m < 0.0 {
                    (f64::NEG_INFINITY, -p.n / p.m)
                } else {
                    (f64::NEG_INFINITY, f64::INFINITY)
                }
            }
            ScalingFn::NumericIvp(n) => (n.t[0], n.t_last()),
        }
    }

    /// Time at which `a` reaches zero, when there is one.
    pub fn vanishing_time(&self) -> Option<f64> {
        match self {
            ScalingFn::PowerLaw(p) if p.m < 0.0 => Some(-p.n / p.m),
            ScalingFn::PowerLaw(_) => None,
            ScalingFn::NumericIvp(n) => match n.status {
                IvpStatus::Vanished { t_lo, t_hi } => Some(0.5 * (t_lo + t_hi)),
                _ => None,
            },
        }
    }

    pub fn status(&self) -> IvpStatus {
        match self {
            ScalingFn::PowerLaw(_) => IvpStatus::Completed,
            ScalingFn::NumericIvp(n) => n.status,
        }
    }
}

/// Closed-form `a(t) = sigma (m t + n)^s`.
pub fn powerlaw_scaling(sigma: f64, m: f64, n: f64, s: f64) -> Result<ScalingFn, ScalingError> {
    if !(sigma > 0.0) || !(n > 0.0) || !(s > 0.0 && s <= 1.0) || !m.is_finite() {
        return Err(ScalingError::InvalidParameter(format!(
            "sigma > 0, n > 0, 0 < s <= 1 required (sigma = {sigma}, m = {m}, n = {n}, s = {s})"
        )));
    }
    Ok(ScalingFn::PowerLaw(PowerLawScaling { sigma, m, n, s }))
}

#[allow(clippy::too_many_arguments)]
pub fn integrate_isothermal(
    closure: IsothermalClosure,
    b: f64,
    pressure: f64,
    kappa: f64,
    dim: u32,
    a0: f64,
    a1: f64,
    opts: &IvpOptions,
) -> Result<ScalingFn, ScalingError> {
    let ode = ScalingOde::Isothermal {
        b,
        pressure,
        kappa,
        dim,
        closure,
    };
    integrate(ode, a0, a1, opts)
}

/// Scaling ODE of the `theta = gamma > 1` family.
pub fn integrate_polytropic(
    gamma: f64,
    pressure: f64,
    kappa: f64,
    dim: u32,
    a0: f64,
    a1: f64,
    opts: &IvpOptions,
) -> Result<ScalingFn, ScalingError> {
    if !(gamma > 1.0) {
        return Err(ScalingError::InvalidParameter(format!(
            "gamma = theta > 1 required, got {gamma}"
        )));
    }
    let ode = ScalingOde::Polytropic {
        gamma,
        pressure,
        kappa,
        dim,
    };
    integrate(ode, a0, a1, opts)
}

/// Scaling ODE of the pressureless families; `theta == 1` selects the
/// first form.
pub fn integrate_pressureless(
    theta: f64,
    lambda: f64,
    dim: u32,
    a0: f64,
    a1: f64,
    opts: &IvpOptions,
) -> Result<ScalingFn, ScalingError> {
    let ode = if theta == 1.0 {
        ScalingOde::PressurelessTheta1 { lambda }
    } else {
        ScalingOde::PressurelessThetaNot1 { theta, lambda, dim }
    };
    integrate(ode, a0, a1, opts)
}

/// Integrates `a'' = accel(a, a')` on `[0, t_end]` with event handling for
/// vanishing and divergence of `a`.
pub fn integrate(
    ode: ScalingOde,
    a0: f64,
    a1: f64,
    opts: &IvpOptions,
) -> Result<ScalingFn, ScalingError> {
    if !(a0 > 0.0 && a0.is_finite()) || !a1.is_finite() {
        return Err(ScalingError::InvalidParameter(format!(
            "a0 > 0 and finite a1 required (a0 = {a0}, a1 = {a1})"
        )));
    }
    if !(opts.t_end > 0.0) || !(opts.h_max > 0.0) {
        return Err(ScalingError::InvalidParameter(format!(
            "t_end > 0 and h_max > 0 required (t_end = {}, h_max = {})",
            opts.t_end, opts.h_max
        )));
    }
    let eps_a = VANISH_FRACTION * a0;
    let a_big = DIVERGENCE_FACTOR * a0.max(1.0);
    let mut out = NumericScaling {
        ode,
        a0,
        a1,
        t: vec![0.0],
        a: vec![a0],
        adot: vec![a1],
        addot: vec![ode.accel(a0, a1)],
        status: IvpStatus::Completed,
    };
    let mut stepper = Dopri5::new(
        |_, y: &[f64; 2]| [y[1], ode.accel(y[0], y[1])],
        0.0,
        [a0, a1],
        opts.t_end,
        StepperOptions {
            rtol: opts.rtol,
            atol: opts.atol,
            h_max: opts.h_max,
            ..Default::default()
        },
    )?;

    while !stepper.finished() {
        match stepper.step() {
            Ok(()) => {
                let [a, adot] = *stepper.y();
                if a <= eps_a {
                    let (mut lo, mut hi) = (stepper.last_step_start(), stepper.t());
                    while hi - lo > VANISH_BRACKET {
                        let mid = 0.5 * (lo + hi);
                        if stepper.dense(mid)[0] > eps_a {
                            lo = mid;
                        } else {
                            hi = mid;
                        }
                    }
                    out.status = IvpStatus::Vanished { t_lo: lo, t_hi: hi };
                    break;
                }
                if !(a.abs() < a_big) || !adot.is_finite() {
                    out.status = IvpStatus::Diverged { t: stepper.t() };
                    break;
                }
                out.t.push(stepper.t());
                out.a.push(a);
                out.adot.push(adot);
                out.addot.push(stepper.dy()[1]);
            }
            Err(OdeError::StepUnderflow { t, .. }) => {
                let [a, adot] = *stepper.y();
                // Collapse faster than the clock can resolve: the remaining
                // time to a = 0 is below a / |a'|.
                if adot < 0.0 && a / -adot <= VANISH_BRACKET {
                    out.status = IvpStatus::Vanished {
                        t_lo: t,
                        t_hi: t + a / -adot,
                    };
                    break;
                }
                return Err(ScalingError::StepFailure { t, a, adot });
            }
            Err(e) => return Err(e.into()),
        }
    }
    Ok(ScalingFn::NumericIvp(out))
}
