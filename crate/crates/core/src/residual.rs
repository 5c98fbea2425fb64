//! Finite-difference residuals of the radial mass and momentum equations.
//!
//! Fields are treated as black boxes: only point values of `rho` and `u`
//! are read, and every derivative is a centered difference.
//!
//! ```text
//! mass:      rho_t + u rho_r + rho u_r + (N-1) rho u / r
//! momentum:  rho (u_t + u u_r) + delta K (rho^gamma)_r
//!            - (kappa rho^theta)_r ((N-1) u / r + u_r)
//!            - kappa rho^theta (u_rr + (N-1) u_r / r - (N-1) u / r^2)
//! ```

use crate::fields::{FieldError, FieldSample, RadialField};
use crate::model::ModelParams;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const DEFAULT_LATTICE: usize = 33;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ResidualError {
    #[error("stencil at t = {t}, r = {r} leaves the field's domain: {reason}")]
    StencilOutOfDomain { t: f64, r: f64, reason: String },
    #[error("non-finite powered density in the stencil at t = {t}, r = {r}")]
    NonFiniteField { t: f64, r: f64 },
    #[error("stencil at t = {t}, r = {r} touches vacuum")]
    VacuumStencil { t: f64, r: f64 },
    #[error("invalid verification setup: {0}")]
    InvalidSetup(String),
}

impl ResidualError {
    /// Points with these errors are left out of the norms and counted.
    fn is_skippable(&self) -> bool {
        matches!(
            self,
            ResidualError::NonFiniteField { .. } | ResidualError::VacuumStencil { .. }
        )
    }
}

/// Rectangle in `(t, r)` sampled by the verifier.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Window {
    pub t_min: f64,
    pub t_max: f64,
    pub r_min: f64,
    pub r_max: f64,
}

/// Difference steps in time and radius.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Resolution {
    pub h_t: f64,
    pub h_r: f64,
}

impl Resolution {
    pub fn uniform(h: f64) -> Self {
        Self { h_t: h, h_r: h }
    }
}

struct Stencil {
    c: FieldSample,
    tp: FieldSample,
    tm: FieldSample,
    rp: FieldSample,
    rm: FieldSample,
}

impl Stencil {
    fn gather<F: RadialField + ?Sized>(
        field: &F,
        t: f64,
        r: f64,
        h: Resolution,
    ) -> Result<Self, ResidualError> {
        if !(r - h.h_r > 0.0) {
            return Err(ResidualError::StencilOutOfDomain {
                t,
                r,
                reason: format!("r - h_r = {} must be positive", r - h.h_r),
            });
        }
        let at = |tt: f64, rr: f64| {
            field
                .sample(tt, rr)
                .map_err(|e: FieldError| ResidualError::StencilOutOfDomain {
                    t,
                    r,
                    reason: e.to_string(),
                })
        };
        Ok(Self {
            c: at(t, r)?,
            tp: at(t + h.h_t, r)?,
            tm: at(t - h.h_t, r)?,
            rp: at(t, r + h.h_r)?,
            rm: at(t, r - h.h_r)?,
        })
    }

    fn densities(&self) -> [f64; 5] {
        [self.c.rho, self.tp.rho, self.tm.rho, self.rp.rho, self.rm.rho]
    }
}

/// Mass residual at one point. A stencil that straddles a vacuum boundary
/// is reported as [`ResidualError::VacuumStencil`].
pub fn mass_residual<F: RadialField + ?Sized>(
    field: &F,
    dim: u32,
    t: f64,
    r: f64,
    h: Resolution,
) -> Result<f64, ResidualError> {
    let s = Stencil::gather(field, t, r, h)?;
    let rho = s.densities();
    if rho.contains(&0.0) && rho.iter().any(|&x| x != 0.0) {
        return Err(ResidualError::VacuumStencil { t, r });
    }
    let n1 = f64::from(dim) - 1.0;
    let rho_t = (s.tp.rho - s.tm.rho) / (2.0 * h.h_t);
    let rho_r = (s.rp.rho - s.rm.rho) / (2.0 * h.h_r);
    let u_r = (s.rp.u - s.rm.u) / (2.0 * h.h_r);
    Ok(rho_t + s.c.u * rho_r + s.c.rho * u_r + n1 * s.c.rho * s.c.u / r)
}

/// Momentum residual at one point. Stencils containing vacuum are
/// reported as [`ResidualError::VacuumStencil`].
pub fn momentum_residual<F: RadialField + ?Sized>(
    field: &F,
    params: &ModelParams,
    t: f64,
    r: f64,
    h: Resolution,
) -> Result<f64, ResidualError> {
    let s = Stencil::gather(field, t, r, h)?;
    if s.densities().contains(&0.0) {
        return Err(ResidualError::VacuumStencil { t, r });
    }
    let n1 = params.dim_f64() - 1.0;
    let kappa = params.kappa;

    let pow_g = |x: f64| x.powf(params.gamma);
    let pow_th = |x: f64| x.powf(params.theta);
    let (pg_p, pg_m) = (pow_g(s.rp.rho), pow_g(s.rm.rho));
    let (pt_p, pt_m, pt_c) = (pow_th(s.rp.rho), pow_th(s.rm.rho), pow_th(s.c.rho));
    if ![pg_p, pg_m, pt_p, pt_m, pt_c].iter().all(|v| v.is_finite()) {
        return Err(ResidualError::NonFiniteField { t, r });
    }

    let u = s.c.u;
    let u_t = (s.tp.u - s.tm.u) / (2.0 * h.h_t);
    let u_r = (s.rp.u - s.rm.u) / (2.0 * h.h_r);
    let u_rr = (s.rp.u - 2.0 * u + s.rm.u) / (h.h_r * h.h_r);
    let pressure_r = (pg_p - pg_m) / (2.0 * h.h_r);
    let visc_r = kappa * (pt_p - pt_m) / (2.0 * h.h_r);

    let inertia = s.c.rho * (u_t + u * u_r);
    let pressure = f64::from(params.delta) * params.pressure * pressure_r;
    let visc_grad = visc_r * (n1 * u / r + u_r);
    let visc_lap = kappa * pt_c * (u_rr + n1 * u_r / r - n1 * u / (r * r));
    Ok(inertia + pressure - visc_grad - visc_lap)
}

/// Norms at one resolution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResolutionLevel {
    pub h_t: f64,
    pub h_r: f64,
    pub mass_linf: f64,
    pub mass_l2: f64,
    pub mom_linf: f64,
    pub mom_l2: f64,
    pub mass_skipped: usize,
    pub mom_skipped: usize,
}

/// Residual norms over a window, at one or more resolutions.
///
/// The top-level step sizes and norms repeat the first resolution; the
/// orders compare the first two.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualReport {
    pub window: Window,
    pub lattice: usize,
    pub h_t: f64,
    pub h_r: f64,
    pub mass_linf: f64,
    pub mass_l2: f64,
    pub mom_linf: f64,
    pub mom_l2: f64,
    pub mass_skipped: usize,
    pub mom_skipped: usize,
    pub order_mass: Option<f64>,
    pub order_mom: Option<f64>,
    pub levels: Vec<ResolutionLevel>,
}

fn round_sig(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

fn lattice_axis(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 || lo == hi {
        return vec![lo];
    }
    (0..n)
        .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
        .collect()
}

fn check_setup(window: &Window, resolutions: &[Resolution], lattice: usize) -> Result<(), ResidualError> {
    let w = window;
    let finite = [w.t_min, w.t_max, w.r_min, w.r_max]
        .iter()
        .all(|v| v.is_finite());
    if !finite || w.t_min > w.t_max || w.r_min > w.r_max {
        return Err(ResidualError::InvalidSetup(format!("bad window {w:?}")));
    }
    if lattice == 0 {
        return Err(ResidualError::InvalidSetup("lattice must be positive".into()));
    }
    if resolutions.is_empty() {
        return Err(ResidualError::InvalidSetup("no resolutions given".into()));
    }
    for h in resolutions {
        if !(h.h_t > 0.0 && h.h_r > 0.0) {
            return Err(ResidualError::InvalidSetup(format!(
                "step sizes must be positive, got {h:?}"
            )));
        }
        if !(w.r_min - h.h_r > 0.0) {
            return Err(ResidualError::InvalidSetup(format!(
                "r_min - h_r = {} must be positive",
                w.r_min - h.h_r
            )));
        }
    }
    Ok(())
}

struct Norms {
    linf: f64,
    sum_sq: f64,
    count: usize,
    skipped: usize,
}

impl Norms {
    fn new() -> Self {
        Self {
            linf: 0.0,
            sum_sq: 0.0,
            count: 0,
            skipped: 0,
        }
    }

    fn push(&mut self, v: Result<f64, ResidualError>) -> Result<(), ResidualError> {
        match v {
            Ok(x) => {
                self.linf = self.linf.max(x.abs());
                self.sum_sq += x * x;
                self.count += 1;
            }
            Err(e) if e.is_skippable() => self.skipped += 1,
            Err(e) => return Err(e),
        }
        Ok(())
    }

    fn l2(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            (self.sum_sq / self.count as f64).sqrt()
        }
    }
}

fn observed_order(coarse: f64, fine: f64, h_coarse: Resolution, h_fine: Resolution) -> Option<f64> {
    let ratio = if h_coarse.h_r != h_fine.h_r {
        h_coarse.h_r / h_fine.h_r
    } else {
        h_coarse.h_t / h_fine.h_t
    };
    if coarse > 0.0 && fine > 0.0 && ratio != 1.0 && coarse.is_finite() && fine.is_finite() {
        Some((coarse / fine).ln() / ratio.ln())
    } else {
        None
    }
}

/// Residual norms of `field` on a uniform `lattice x lattice` sample of
/// `window`, once per resolution.
pub fn verify_window<F: RadialField + ?Sized>(
    field: &F,
    params: &ModelParams,
    window: &Window,
    resolutions: &[Resolution],
    lattice: usize,
) -> Result<ResidualReport, ResidualError> {
    check_setup(window, resolutions, lattice)?;
    let ts = lattice_axis(window.t_min, window.t_max, lattice);
    let rs = lattice_axis(window.r_min, window.r_max, lattice);
    let nr = rs.len();

    let mut levels = Vec::with_capacity(resolutions.len());
    for &h in resolutions {
        let values: Vec<_> = (0..ts.len() * nr)
            .into_par_iter()
            .map(|k| {
                let (t, r) = (ts[k / nr], rs[k % nr]);
                (
                    mass_residual(field, params.dim, t, r, h),
                    momentum_residual(field, params, t, r, h),
                )
            })
            .collect();
        let (mut mass, mut mom) = (Norms::new(), Norms::new());
        for (m, p) in values {
            mass.push(m)?;
            mom.push(p)?;
        }
        levels.push(ResolutionLevel {
            h_t: h.h_t,
            h_r: h.h_r,
            mass_linf: round_sig(mass.linf),
            mass_l2: round_sig(mass.l2()),
            mom_linf: round_sig(mom.linf),
            mom_l2: round_sig(mom.l2()),
            mass_skipped: mass.skipped,
            mom_skipped: mom.skipped,
        });
    }

    let first = levels[0];
    let (order_mass, order_mom) = match levels.get(1) {
        Some(second) => (
            observed_order(first.mass_linf, second.mass_linf, resolutions[0], resolutions[1]),
            observed_order(first.mom_linf, second.mom_linf, resolutions[0], resolutions[1]),
        ),
        None => (None, None),
    };
    Ok(ResidualReport {
        window: *window,
        lattice,
        h_t: first.h_t,
        h_r: first.h_r,
        mass_linf: first.mass_linf,
        mass_l2: first.mass_l2,
        mom_linf: first.mom_linf,
        mom_l2: first.mom_l2,
        mass_skipped: first.mass_skipped,
        mom_skipped: first.mom_skipped,
        order_mass,
        order_mom,
        levels,
    })
}
