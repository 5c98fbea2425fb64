//! Finite-time vanishing of `a(t)` and the matching growth of the center
//! density.

use crate::fields::{RadialField, SelfSimilarField};
use crate::scaling::ScalingFn;
use serde::Serialize;

/// Center density used as the default blowup threshold.
pub const DEFAULT_DENSITY_THRESHOLD: f64 = 1e6;

const STATED_TIME_NOTE: &str = "a(t) = sigma (m t + n)^s vanishes at t = -n/m; \
the closed-form blowup time is sometimes quoted as T = -m/n, which agrees only when m^2 = n^2";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityCrossing {
    pub t: f64,
    pub rho_center: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlowupReport {
    /// Time where `a` reaches zero.
    pub vanishing_time: Option<f64>,
    /// `-m/n` for a power-law scaling with `m < 0`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stated_time: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<&'static str>,
    pub threshold: f64,
    /// First time (to bisection accuracy) with `rho(t, 0) > threshold`.
    pub crossing: Option<DensityCrossing>,
}

/// The quoted closed-form blowup time `-m/n`, for decaying power laws.
pub fn stated_blowup_time(scaling: &ScalingFn) -> Option<f64> {
    match scaling {
        ScalingFn::PowerLaw(p) if p.m < 0.0 => Some(-p.m / p.n),
        _ => None,
    }
}

/// Locates the first time in the scaling's domain, from `t = 0` on, where
/// the center density exceeds `threshold`.
///
/// The center density is monotone up to the vanishing time, so bisection
/// on the predicate `rho(t, 0) > threshold` is used; times outside the
/// domain count as past the crossing.
pub fn density_crossing(field: &SelfSimilarField, threshold: f64) -> Option<DensityCrossing> {
    let rho = |t: f64| field.sample(t, 0.0).ok().map(|s| s.rho);
    let above = |t: f64| rho(t).is_none_or(|r| r > threshold);

    let (lo0, hi0) = field.scaling().domain();
    let mut lo = lo0.max(0.0);
    let r = rho(lo)?;
    if r > threshold {
        return Some(DensityCrossing { t: lo, rho_center: r });
    }
    let mut hi = if hi0.is_finite() {
        hi0
    } else {
        // grow until the density crosses or the search gives up
        let mut h = lo + 1.0;
        while !above(h) {
            h = lo + 2.0 * (h - lo);
            if h > 1e12 {
                return None;
            }
        }
        h
    };
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if above(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    match rho(hi) {
        Some(r) if r > threshold => Some(DensityCrossing { t: hi, rho_center: r }),
        _ => None,
    }
}

pub fn analyze(field: &SelfSimilarField, threshold: f64) -> BlowupReport {
    let scaling = field.scaling();
    let vanishing_time = scaling.vanishing_time();
    let stated_time = stated_blowup_time(scaling);
    BlowupReport {
        vanishing_time,
        stated_time,
        note: stated_time.map(|_| STATED_TIME_NOTE),
        threshold,
        crossing: vanishing_time.and_then(|_| density_crossing(field, threshold)),
    }
}
