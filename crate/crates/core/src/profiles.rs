//! Self-similar density shapes `y(z)`, `z = r/a(t)`.
//!
//! Closed forms are evaluated analytically together with their derivative.
//! The power-law family has no closed form; its profile ODE is integrated
//! once and tabulated on a uniform grid with Hermite interpolation.

use crate::model::ModelParams;
use crate::ode::{self, Dopri5, OdeError, StepperOptions};
use serde::Serialize;
use thiserror::Error;

/// Relative guard on the bracketed coefficient of the power-law profile ODE.
pub const SINGULAR_COEFFICIENT_EPS: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProfileError {
    #[error("invalid profile parameter: {0}")]
    InvalidParameter(String),
    #[error("z = {z} outside tabulated range [0, {z_max}]")]
    OutOfRange { z: f64, z_max: f64 },
    #[error("profile value is not finite at z = {0}")]
    NonFinite(f64),
    #[error("profile ODE integration failed: {0}")]
    Integration(#[from] OdeError),
}

/// Value and slope of a profile at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileSample {
    pub y: f64,
    pub dy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Profile {
    /// `A exp(B z^2 + C)`.
    ExpQuadratic { amplitude: f64, b: f64, c: f64 },
    /// `((n+1)/2 xi z^2 + alpha^(n+1))^(1/(n+1))`, zero where the radicand
    /// is not positive. Solves `y' y^n = xi z`, `y(0) = alpha`.
    PowerRoot { n_exp: f64, xi: f64, alpha: f64 },
    Tabulated(TabulatedProfile),
}

/// Why a tabulated profile stops short of its requested range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TruncationReason {
    /// The bracketed coefficient fell below the relative guard.
    SingularCoefficient,
    /// The step-size controller underflowed.
    StepFailure,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Truncation {
    pub z: f64,
    pub reason: TruncationReason,
}

/// Coefficients of the power-law profile ODE
/// `[P y^(gamma-2) - V y^(theta-2)] y' = S z`, `y(0) = alpha`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerLawProfileOde {
    pub gamma: f64,
    pub theta: f64,
    /// `P = K gamma / (s sigma^(gamma N + 1))`
    pub pressure_coeff: f64,
    /// `V = m N kappa theta / sigma^(theta N + 1)`
    pub viscous_coeff: f64,
    /// `S = (1 - s) m^2 / sigma^(N - 1)`
    pub source_coeff: f64,
    pub alpha: f64,
}

impl PowerLawProfileOde {
    pub fn new(params: &ModelParams, m: f64, sigma: f64, alpha: f64, s: f64) -> Self {
        let n = params.dim_f64();
        let (g, th) = (params.gamma, params.theta);
        Self {
            gamma: g,
            theta: th,
            pressure_coeff: params.pressure * g / (s * sigma.powf(g * n + 1.0)),
            viscous_coeff: m * n * params.kappa * th / sigma.powf(th * n + 1.0),
            source_coeff: (1.0 - s) * m * m / sigma.powf(n - 1.0),
            alpha,
        }
    }

    /// The bracketed coefficient multiplying `y'`.
    pub fn coefficient(&self, y: f64) -> f64 {
        self.pressure_coeff * y.powf(self.gamma - 2.0)
            - self.viscous_coeff * y.powf(self.theta - 2.0)
    }

    pub fn slope(&self, z: f64, y: f64) -> f64 {
        if self.source_coeff == 0.0 || z == 0.0 {
            return 0.0;
        }
        self.source_coeff * z / self.coefficient(y)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedProfile {
    z: Vec<f64>,
    y: Vec<f64>,
    dy: Vec<f64>,
    ode: PowerLawProfileOde,
    truncation: Option<Truncation>,
}

impl TabulatedProfile {
    pub fn nodes(&self) -> &[f64] {
        &self.z
    }

    pub fn values(&self) -> &[f64] {
        &self.y
    }

    pub fn ode(&self) -> &PowerLawProfileOde {
        &self.ode
    }

    pub fn truncation(&self) -> Option<Truncation> {
        self.truncation
    }

    pub fn z_max(&self) -> f64 {
        *self.z.last().unwrap_or(&0.0)
    }

    fn eval(&self, z: f64) -> Result<ProfileSample, ProfileError> {
        let z_max = self.z_max();
        if !(z <= z_max) {
            return Err(ProfileError::OutOfRange { z, z_max });
        }
        if self.z.len() == 1 {
            return Ok(ProfileSample {
                y: self.y[0],
                dy: self.dy[0],
            });
        }
        let i = ode::bracket(&self.z, z);
        let (y, dy) = ode::hermite(
            self.z[i],
            self.z[i + 1],
            self.y[i],
            self.y[i + 1],
            self.dy[i],
            self.dy[i + 1],
            z,
        );
        Ok(ProfileSample { y: y.max(0.0), dy })
    }
}

/// Grid options for tabulated profiles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TableOptions {
    pub z_max: f64,
    /// Spacing of the stored table.
    pub dz: f64,
    pub rtol: f64,
    pub atol: f64,
}

impl Default for TableOptions {
    fn default() -> Self {
        Self {
            z_max: 10.0,
            dz: 1e-3,
            rtol: 1e-10,
            atol: 1e-12,
        }
    }
}

/// Closed-form solution of `y' y^n = xi z`, `y(0) = alpha`.
pub fn power_root_profile(n_exp: f64, xi: f64, alpha: f64) -> Result<Profile, ProfileError> {
    if !n_exp.is_finite() || n_exp == -1.0 {
        return Err(ProfileError::InvalidParameter(format!(
            "exponent n = {n_exp} excluded (n != -1 required)"
        )));
    }
    if !xi.is_finite() {
        return Err(ProfileError::InvalidParameter(format!("xi = {xi}")));
    }
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(ProfileError::InvalidParameter(format!(
            "alpha > 0 required, got {alpha}"
        )));
    }
    Ok(Profile::PowerRoot { n_exp, xi, alpha })
}

/// `A exp(B z^2 + C)`, the isothermal shape.
pub fn isothermal_profile(amplitude: f64, b: f64, c: f64) -> Result<Profile, ProfileError> {
    if !(amplitude >= 0.0 && amplitude.is_finite()) {
        return Err(ProfileError::InvalidParameter(format!(
            "A >= 0 required, got {amplitude}"
        )));
    }
    if !b.is_finite() || !c.is_finite() {
        return Err(ProfileError::InvalidParameter(format!("B = {b}, C = {c}")));
    }
    Ok(Profile::ExpQuadratic { amplitude, b, c })
}

/// Profile of the `theta = gamma > 1` family: `y^(theta-2) y' = z`.
pub fn polytropic_profile(theta: f64, alpha: f64) -> Result<Profile, ProfileError> {
    if !(theta > 1.0) {
        return Err(ProfileError::InvalidParameter(format!(
            "theta > 1 required, got {theta}"
        )));
    }
    power_root_profile(theta - 2.0, 1.0, alpha)
}

/// Exponent `y = lambda z^2/(2 N kappa) + alpha` of the pressureless
/// `theta = 1` family, folded into an exponential shape `exp(y)`.
pub fn pressureless_theta1_profile(
    lambda: f64,
    kappa: f64,
    dim: u32,
    alpha: f64,
) -> Result<Profile, ProfileError> {
    isothermal_profile(1.0, lambda / (2.0 * f64::from(dim) * kappa), alpha)
}

/// Profile of the pressureless `theta != 1` family:
/// `y^(theta-2) y' = -lambda z/(N kappa theta)`.
pub fn pressureless_theta_not1_profile(
    theta: f64,
    lambda: f64,
    kappa: f64,
    dim: u32,
    alpha: f64,
) -> Result<Profile, ProfileError> {
    power_root_profile(
        theta - 2.0,
        -lambda / (f64::from(dim) * kappa * theta),
        alpha,
    )
}

/// Integrates the power-law profile ODE from `z = 0` and tabulates it.
///
/// If the bracketed coefficient degenerates the table stops there and the
/// returned profile carries a [`Truncation`].
pub fn powerlaw_profile(
    params: &ModelParams,
    m: f64,
    _n: f64,
    sigma: f64,
    alpha: f64,
    s: f64,
    opts: TableOptions,
) -> Result<Profile, ProfileError> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(ProfileError::InvalidParameter(format!(
            "alpha > 0 required, got {alpha}"
        )));
    }
    if !(opts.dz > 0.0 && opts.z_max > 0.0) {
        return Err(ProfileError::InvalidParameter(format!(
            "table spacing {} and range {} must be positive",
            opts.dz, opts.z_max
        )));
    }
    let ode = PowerLawProfileOde::new(params, m, sigma, alpha, s);
    let n_nodes = (opts.z_max / opts.dz).round() as usize + 1;
    let node = |i: usize| (i as f64 * opts.dz).min(opts.z_max);

    let c0 = ode.coefficient(alpha);
    let mut table = TabulatedProfile {
        z: Vec::with_capacity(n_nodes),
        y: Vec::with_capacity(n_nodes),
        dy: Vec::with_capacity(n_nodes),
        ode,
        truncation: None,
    };

    if ode.source_coeff == 0.0 {
        // y' = 0: the profile is flat
        for i in 0..n_nodes {
            table.z.push(node(i));
            table.y.push(alpha);
            table.dy.push(0.0);
        }
        return Ok(Profile::Tabulated(table));
    }

    table.z.push(0.0);
    table.y.push(alpha);
    table.dy.push(0.0);
    if !(c0.is_finite() && c0 != 0.0) {
        table.truncation = Some(Truncation {
            z: 0.0,
            reason: TruncationReason::SingularCoefficient,
        });
        return Ok(Profile::Tabulated(table));
    }
    let guard = SINGULAR_COEFFICIENT_EPS * c0.abs();

    let stepper_opts = StepperOptions {
        rtol: opts.rtol,
        atol: opts.atol,
        ..Default::default()
    };
    let mut stepper = Dopri5::new(
        |z, y: &[f64; 1]| [ode.slope(z, y[0])],
        0.0,
        [alpha],
        opts.z_max,
        stepper_opts,
    )?;
    let mut next = 1;
    while next < n_nodes {
        if let Err(e) = stepper.step() {
            return match e {
                OdeError::StepUnderflow { t, .. } => {
                    table.truncation = Some(Truncation {
                        z: t,
                        reason: TruncationReason::StepFailure,
                    });
                    Ok(Profile::Tabulated(table))
                }
                other => Err(other.into()),
            };
        }
        let y_end = stepper.y()[0];
        if !(ode.coefficient(y_end).abs() >= guard) {
            table.truncation = Some(Truncation {
                z: stepper.t(),
                reason: TruncationReason::SingularCoefficient,
            });
            return Ok(Profile::Tabulated(table));
        }
        while next < n_nodes && node(next) <= stepper.t() {
            let z = node(next);
            let y = if z == stepper.t() {
                y_end
            } else {
                stepper.dense(z)[0]
            };
            table.z.push(z);
            table.y.push(y);
            table.dy.push(ode.slope(z, y));
            next += 1;
        }
    }
    Ok(Profile::Tabulated(table))
}

impl Profile {
    /// Value and slope at `z`; negative `z` is reflected since every
    /// profile is even.
    pub fn evaluate(&self, z: f64) -> Result<ProfileSample, ProfileError> {
        if z.is_nan() {
            return Err(ProfileError::NonFinite(z));
        }
        let sign = if z < 0.0 { -1.0 } else { 1.0 };
        let z = z.abs();
        let sample = match *self {
            Profile::ExpQuadratic { amplitude, b, c } => {
                if amplitude == 0.0 {
                    ProfileSample { y: 0.0, dy: 0.0 }
                } else {
                    let y = amplitude * (b * z * z + c).exp();
                    ProfileSample {
                        y,
                        dy: 2.0 * b * z * y,
                    }
                }
            }
            Profile::PowerRoot { n_exp, xi, alpha } => {
                let np1 = n_exp + 1.0;
                let radicand = power_root_radicand(n_exp, xi, alpha, z);
                if radicand > 0.0 {
                    let y = radicand.powf(1.0 / np1);
                    ProfileSample {
                        y,
                        dy: xi * z * y / radicand,
                    }
                } else {
                    ProfileSample { y: 0.0, dy: 0.0 }
                }
            }
            Profile::Tabulated(ref table) => table.eval(z)?,
        };
        if !(sample.y.is_finite() && sample.dy.is_finite()) || sample.y < 0.0 {
            return Err(ProfileError::NonFinite(z));
        }
        Ok(ProfileSample {
            y: sample.y,
            dy: sign * sample.dy,
        })
    }

    /// Radius where the profile's support ends, if it is finite.
    /// Found by bisection on the radicand sign.
    pub fn support_radius(&self) -> Option<f64> {
        match *self {
            Profile::PowerRoot { n_exp, xi, alpha } => {
                if !((n_exp + 1.0) * xi < 0.0) {
                    return None;
                }
                let r = |z: f64| power_root_radicand(n_exp, xi, alpha, z);
                let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
                while r(hi) > 0.0 {
                    lo = hi;
                    hi *= 2.0;
                    if !hi.is_finite() {
                        return None;
                    }
                }
                while hi - lo > 1e-12 * hi.max(1.0) {
                    let mid = 0.5 * (lo + hi);
                    if r(mid) > 0.0 {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                Some(0.5 * (lo + hi))
            }
            _ => None,
        }
    }

    /// Largest `z` the profile can be evaluated at.
    pub fn z_max(&self) -> f64 {
        match self {
            Profile::Tabulated(t) => t.z_max(),
            _ => f64::INFINITY,
        }
    }

    pub fn truncation(&self) -> Option<Truncation> {
        match self {
            Profile::Tabulated(t) => t.truncation(),
            _ => None,
        }
    }
}

fn power_root_radicand(n_exp: f64, xi: f64, alpha: f64, z: f64) -> f64 {
    let np1 = n_exp + 1.0;
    0.5 * np1 * xi * z * z + alpha.powf(np1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn at(p: &Profile, z: f64) -> (f64, f64) {
        let s = p.evaluate(z).unwrap();
        (s.y, s.dy)
    }

    // Fixed-step RK4 oracle for y' = f(z, y).
    fn rk4(f: impl Fn(f64, f64) -> f64, y0: f64, z_end: f64, h: f64) -> f64 {
        let n = (z_end / h).round() as usize;
        let h = z_end / n as f64;
        let mut y = y0;
        for i in 0..n {
            let z = i as f64 * h;
            let k1 = f(z, y);
            let k2 = f(z + h / 2.0, y + h / 2.0 * k1);
            let k3 = f(z + h / 2.0, y + h / 2.0 * k2);
            let k4 = f(z + h, y + h * k3);
            y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        y
    }

    fn powerlaw_params() -> ModelParams {
        ModelParams {
            dim: 3,
            gamma: 5.0 / 3.0,
            theta: 1.0,
            pressure: 1.0,
            kappa: 1.0,
            delta: 1,
        }
    }

    #[test]
    fn power_root_examples() {
        let p = power_root_profile(0.0, 1.0, 1.0).unwrap();
        assert_eq!(at(&p, 2.0).0, 3.0);
        assert_eq!(at(&p, 3.0), (5.5, 3.0));

        let flat = power_root_profile(2.0, 0.0, 5.0).unwrap();
        for z in [0.0, 1.0, 7.5] {
            let (y, dy) = at(&flat, z);
            assert!((y - 5.0).abs() < 1e-14 && dy == 0.0);
        }

        // radicand 1 - z^2: zero at z = 1, negative beyond
        let v = power_root_profile(-3.0, 1.0, 1.0).unwrap();
        assert_eq!(at(&v, 1.0), (0.0, 0.0));
        assert_eq!(at(&v, 2.0), (0.0, 0.0));
        assert!((at(&v, 0.5).0 - 0.75f64.powf(-0.5)).abs() < 1e-14);
    }

    #[test]
    fn power_root_rejects_excluded_exponent() {
        assert!(power_root_profile(-1.0, 1.0, 1.0).is_err());
        assert!(power_root_profile(0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn isothermal_examples() {
        let flat = isothermal_profile(1.0, 0.0, 0.0).unwrap();
        assert_eq!(at(&flat, 4.0), (1.0, 0.0));
        let g = isothermal_profile(2.0, -1.0, 0.0).unwrap();
        assert!((at(&g, 1.0).0 - 0.7357588823428847).abs() < 1e-15);
        let empty = isothermal_profile(0.0, 5.0, 3.0).unwrap();
        assert_eq!(at(&empty, 0.3), (0.0, 0.0));
        assert!(isothermal_profile(-1.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn polytropic_examples() {
        assert_eq!(at(&polytropic_profile(2.0, 1.0).unwrap(), 2.0).0, 3.0);
        assert_eq!(at(&polytropic_profile(3.0, 1.0).unwrap(), 0.0).0, 1.0);
        let y = at(&polytropic_profile(3.0, 2.0).unwrap(), 2.0).0;
        assert!((y - 8f64.sqrt()).abs() < 1e-14);
        assert!(polytropic_profile(1.0, 1.0).is_err());
    }

    #[test]
    fn negative_z_reflects() {
        let p = power_root_profile(0.0, 1.0, 1.0).unwrap();
        assert_eq!(at(&p, -3.0), (5.5, -3.0));
    }

    #[test]
    fn support_radius_matches_closed_form() {
        // pressureless theta = 2, lambda = 1, N = 3, kappa = 1, alpha = 1
        let p = pressureless_theta_not1_profile(2.0, 1.0, 1.0, 3, 1.0).unwrap();
        let exact = (2.0f64 * 3.0 * 2.0 * 1.0 / 1.0).sqrt();
        let z_star = p.support_radius().unwrap();
        assert!((z_star - exact).abs() < 1e-10, "{z_star} vs {exact}");
        assert!(at(&p, exact * (1.0 + 1e-9)).0 == 0.0);
        assert!(at(&p, exact * (1.0 - 1e-6)).0 > 0.0);
        assert!(polytropic_profile(2.5, 1.0).unwrap().support_radius().is_none());
    }

    #[test]
    fn tabulated_constant_when_source_vanishes() {
        // gamma = 1 forces s = 1
        let p = ModelParams {
            dim: 2,
            gamma: 1.0,
            theta: 0.5,
            pressure: 1.0,
            kappa: 1.0,
            delta: 1,
        };
        let prof = powerlaw_profile(&p, 1.0, 1.0, 1.0, 1.7, 1.0, TableOptions::default()).unwrap();
        assert_eq!(at(&prof, 7.0), (1.7, 0.0));
        // m = 0
        let prof =
            powerlaw_profile(&powerlaw_params(), 0.0, 1.0, 1.0, 2.0, 0.5, TableOptions::default())
                .unwrap();
        assert_eq!(at(&prof, 3.3), (2.0, 0.0));
        assert!(prof.truncation().is_none());
    }

    #[test]
    fn tabulated_matches_rk4_oracle() {
        let prof =
            powerlaw_profile(&powerlaw_params(), -1.0, 1.0, 1.0, 1.0, 0.5, TableOptions::default())
                .unwrap();
        // c(y) = (10/3) y^(-1/3) + 3/y, source 0.5 z
        let f = |z: f64, y: f64| 0.5 * z / (10.0 / 3.0 * y.powf(-1.0 / 3.0) + 3.0 / y);
        let oracle = rk4(f, 1.0, 1.0, 1e-6);
        let (y, dy) = at(&prof, 1.0);
        assert!((y - oracle).abs() < 1e-9 * oracle, "{y} vs {oracle}");
        assert!((dy - f(1.0, oracle)).abs() < 1e-9);
        // strictly increasing away from the origin
        let mut prev = at(&prof, 0.0).0;
        for i in 1..=100 {
            let y = at(&prof, i as f64 * 0.05).0;
            assert!(y > prev);
            prev = y;
        }
    }

    #[test]
    fn tabulated_out_of_range() {
        let prof =
            powerlaw_profile(&powerlaw_params(), -1.0, 1.0, 1.0, 1.0, 0.5, TableOptions::default())
                .unwrap();
        assert!(matches!(
            prof.evaluate(10.5),
            Err(ProfileError::OutOfRange { .. })
        ));
        assert!(prof.evaluate(10.0).is_ok());
    }

    #[test]
    fn tabulated_interpolation_is_fourth_order() {
        let f = |z: f64, y: f64| 0.5 * z / (10.0 / 3.0 * y.powf(-1.0 / 3.0) + 3.0 / y);
        let probes: Vec<f64> = (0..20).map(|k| 0.037 + 0.13 * k as f64).collect();
        let reference: Vec<f64> = probes.iter().map(|&z| rk4(f, 1.0, z, 1e-4)).collect();
        let err = |dz: f64| {
            let opts = TableOptions {
                z_max: 3.0,
                dz,
                ..Default::default()
            };
            let prof = powerlaw_profile(&powerlaw_params(), -1.0, 1.0, 1.0, 1.0, 0.5, opts).unwrap();
            probes
                .iter()
                .zip(&reference)
                .map(|(&z, r)| (at(&prof, z).0 - r).abs())
                .fold(0.0, f64::max)
        };
        let (e1, e2) = (err(0.2), err(0.1));
        let order = (e1 / e2).log2();
        assert!(order >= 3.7, "order {order} ({e1:e} -> {e2:e})");
    }

    #[test]
    fn singular_coefficient_truncates() {
        // N = 1, gamma = 3, theta = 1, s = 1/2, m = 6: c(y) = 6y - 6/y vanishes at y = 1
        let p = ModelParams {
            dim: 1,
            gamma: 3.0,
            theta: 1.0,
            pressure: 1.0,
            kappa: 1.0,
            delta: 1,
        };
        let prof = powerlaw_profile(&p, 6.0, 1.0, 1.0, 1.0, 0.5, TableOptions::default()).unwrap();
        let t = prof.truncation().unwrap();
        assert_eq!(t.reason, TruncationReason::SingularCoefficient);
        assert_eq!(t.z, 0.0);
        assert_eq!(at(&prof, 0.0).0, 1.0);
        assert!(prof.evaluate(0.1).is_err());
    }

    proptest! {
        #[test]
        fn power_root_identity(
            n_exp in -0.9f64..3.0,
            xi in -2.0f64..2.0,
            alpha in 0.1f64..5.0,
            frac in 0.0f64..1.0,
        ) {
            let p = power_root_profile(n_exp, xi, alpha).unwrap();
            let z = match p.support_radius() {
                Some(zs) => frac * zs,
                None => 5.0 * frac,
            };
            let ProfileSample { y, dy } = p.evaluate(z).unwrap();
            prop_assume!(y > 0.0);
            let lhs = dy * y.powf(n_exp);
            prop_assert!((lhs - xi * z).abs() < 1e-9 * (1.0 + (xi * z).abs()));
        }

        #[test]
        fn polytropic_grows_from_alpha(theta in 1.01f64..4.0, alpha in 0.1f64..5.0, z in 0.0f64..20.0) {
            let p = polytropic_profile(theta, alpha).unwrap();
            let a = p.evaluate(z).unwrap();
            let b = p.evaluate(z + 0.01).unwrap();
            prop_assert!(a.y >= alpha * (1.0 - 1e-15));
            prop_assert!(b.y >= a.y);
            prop_assert!(a.dy >= 0.0);
        }

        #[test]
        fn evaluation_never_negative_or_nan(
            n_exp in -3.0f64..3.0,
            xi in -2.0f64..2.0,
            alpha in 0.1f64..5.0,
            z in -30.0f64..30.0,
        ) {
            prop_assume!((n_exp + 1.0).abs() > 1e-3);
            let p = power_root_profile(n_exp, xi, alpha).unwrap();
            if let Ok(s) = p.evaluate(z) {
                prop_assert!(s.y >= 0.0 && s.y.is_finite() && s.dy.is_finite());
            }
        }
    }
}
