//! Physical fields `rho(t, r) = shape(r/a)/a^N` and `u(t, r) = (a'/a) r`.

use crate::profiles::{Profile, ProfileError};
use crate::scaling::{ScalingError, ScalingFn};
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FieldError {
    #[error(transparent)]
    Profile(#[from] ProfileError),
    #[error(transparent)]
    Scaling(#[from] ScalingError),
    #[error("non-finite field value at t = {t}, r = {r}")]
    NonFinite { t: f64, r: f64 },
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("evaluation failed at t = {t}, r = {r}: {source}")]
    Point {
        t: f64,
        r: f64,
        #[source]
        source: Box<FieldError>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldSample {
    pub rho: f64,
    pub u: f64,
}

/// Point evaluator for a radial density and velocity.
///
/// This is the only view of a solution the residual verifier gets.
pub trait RadialField: Sync {
    fn sample(&self, t: f64, r: f64) -> Result<FieldSample, FieldError>;
}

impl<T: RadialField + ?Sized> RadialField for &T {
    fn sample(&self, t: f64, r: f64) -> Result<FieldSample, FieldError> {
        (**self).sample(t, r)
    }
}

/// Adapts a closure `(t, r) -> (rho, u)` into a [`RadialField`].
pub struct FnField<F>(pub F);

impl<F> RadialField for FnField<F>
where
    F: Fn(f64, f64) -> (f64, f64) + Sync,
{
    fn sample(&self, t: f64, r: f64) -> Result<FieldSample, FieldError> {
        let (rho, u) = (self.0)(t, r);
        Ok(FieldSample { rho, u })
    }
}

/// Multiplies the density and velocity of another field by constant factors.
pub struct Perturbed<F> {
    pub inner: F,
    pub rho_factor: f64,
    pub u_factor: f64,
}

impl<F: RadialField> RadialField for Perturbed<F> {
    fn sample(&self, t: f64, r: f64) -> Result<FieldSample, FieldError> {
        let s = self.inner.sample(t, r)?;
        Ok(FieldSample {
            rho: s.rho * self.rho_factor,
            u: s.u * self.u_factor,
        })
    }
}

/// How the profile value becomes the density shape.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ShapeMap {
    /// `shape = y`
    #[default]
    Linear,
    /// `shape = exp(y)` on the support of `y`, zero outside.
    Exponential,
}

/// Fields assembled from a profile and a scaling function.
#[derive(Debug, Clone, PartialEq)]
pub struct SelfSimilarField {
    profile: Profile,
    scaling: ScalingFn,
    dim: u32,
    shape: ShapeMap,
}

impl SelfSimilarField {
    pub fn new(profile: Profile, scaling: ScalingFn, dim: u32, shape: ShapeMap) -> Self {
        Self {
            profile,
            scaling,
            dim,
            shape,
        }
    }

    pub fn profile(&self) -> &Profile {
        &self.profile
    }

    pub fn scaling(&self) -> &ScalingFn {
        &self.scaling
    }

    pub fn dim(&self) -> u32 {
        self.dim
    }

    /// `rho(t, 0)`.
    pub fn center_density(&self, t: f64) -> Result<f64, FieldError> {
        Ok(self.sample(t, 0.0)?.rho)
    }
}

impl RadialField for SelfSimilarField {
    fn sample(&self, t: f64, r: f64) -> Result<FieldSample, FieldError> {
        let sc = self.scaling.evaluate(t)?;
        let y = self.profile.evaluate(r / sc.a)?.y;
        let shape = match self.shape {
            ShapeMap::Linear => y,
            ShapeMap::Exponential if y > 0.0 => y.exp(),
            ShapeMap::Exponential => 0.0,
        };
        let rho = shape / sc.a.powi(self.dim as i32);
        let u = sc.adot / sc.a * r;
        if !(rho.is_finite() && u.is_finite()) {
            return Err(FieldError::NonFinite { t, r });
        }
        Ok(FieldSample { rho, u })
    }
}

/// `rho` and `u` at one point, with the profile value used directly as the
/// density shape.
pub fn eval_point(
    profile: &Profile,
    scaling: &ScalingFn,
    dim: u32,
    t: f64,
    r: f64,
) -> Result<FieldSample, FieldError> {
    let field = SelfSimilarField::new(profile.clone(), scaling.clone(), dim, ShapeMap::Linear);
    field.sample(t, r)
}

/// Fields sampled on a rectangular grid, stored time-major.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldGrid {
    pub t_values: Vec<f64>,
    pub r_values: Vec<f64>,
    pub rho: Vec<f64>,
    pub u: Vec<f64>,
}

impl FieldGrid {
    fn index(&self, i: usize, j: usize) -> usize {
        i * self.r_values.len() + j
    }

    pub fn rho_at(&self, i: usize, j: usize) -> f64 {
        self.rho[self.index(i, j)]
    }

    pub fn u_at(&self, i: usize, j: usize) -> f64 {
        self.u[self.index(i, j)]
    }

    /// Row `i` of the density.
    pub fn rho_row(&self, i: usize) -> &[f64] {
        let n = self.r_values.len();
        &self.rho[i * n..(i + 1) * n]
    }
}

fn check_axis(name: &str, v: &[f64]) -> Result<(), FieldError> {
    if v.is_empty() {
        return Err(FieldError::InvalidGrid(format!("{name} is empty")));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(FieldError::InvalidGrid(format!("{name} has non-finite entries")));
    }
    if v.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(FieldError::InvalidGrid(format!(
            "{name} must be strictly increasing"
        )));
    }
    Ok(())
}

/// Evaluates a field over the tensor grid `t_values x r_values`.
///
/// Points are evaluated in parallel; the result does not depend on the
/// evaluation order. The first failing point in grid order is reported.
pub fn eval_grid<F: RadialField>(
    field: &F,
    t_values: &[f64],
    r_values: &[f64],
) -> Result<FieldGrid, FieldError> {
    check_axis("t_values", t_values)?;
    check_axis("r_values", r_values)?;
    if !(r_values[0] > 0.0) {
        return Err(FieldError::InvalidGrid(format!(
            "r_min must be > 0, got {}",
            r_values[0]
        )));
    }
    let nr = r_values.len();
    let samples: Vec<Result<FieldSample, FieldError>> = (0..t_values.len() * nr)
        .into_par_iter()
        .map(|k| {
            let (t, r) = (t_values[k / nr], r_values[k % nr]);
            field
                .sample(t, r)
                .and_then(|s| {
                    if s.rho.is_finite() && s.u.is_finite() && s.rho >= 0.0 {
                        Ok(s)
                    } else {
                        Err(FieldError::NonFinite { t, r })
                    }
                })
                .map_err(|e| FieldError::Point {
                    t,
                    r,
                    source: Box::new(e),
                })
        })
        .collect();
    let mut rho = Vec::with_capacity(samples.len());
    let mut u = Vec::with_capacity(samples.len());
    for s in samples {
        let s = s?;
        rho.push(s.rho);
        u.push(s.u);
    }
    Ok(FieldGrid {
        t_values: t_values.to_vec(),
        r_values: r_values.to_vec(),
        rho,
        u,
    })
}
