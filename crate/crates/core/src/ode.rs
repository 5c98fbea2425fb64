//! Dormand-Prince 5(4) stepper with continuous (dense) output.
//!
//! The stepper is driven one accepted step at a time so that callers can
//! sample the dense output, watch for events, and decide when to halt.

use thiserror::Error;

// Butcher tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

// Difference between the 5th and embedded 4th order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

// Dense output.
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OdeError {
    /// The controller asked for a step below the resolvable minimum.
    #[error("step size underflow at t = {t} (h = {h:e})")]
    StepUnderflow { t: f64, h: f64 },
    #[error("maximum number of steps ({0}) exceeded")]
    TooManySteps(usize),
    #[error("non-finite initial state or derivative at t = {0}")]
    NonFiniteStart(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepperOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Upper bound on the step size; `f64::INFINITY` for none.
    pub h_max: f64,
    pub max_steps: usize,
}

impl Default for StepperOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            atol: 1e-12,
            h_max: f64::INFINITY,
            max_steps: 5_000_000,
        }
    }
}

/// Adaptive explicit integrator for `y' = f(t, y)` with `D` components.
pub struct Dopri5<F, const D: usize>
where
    F: FnMut(f64, &[f64; D]) -> [f64; D],
{
    rhs: F,
    opts: StepperOptions,
    t: f64,
    y: [f64; D],
    k1: [f64; D],
    t_end: f64,
    h: f64,
    steps: usize,
    // dense output of the last accepted step
    t_old: f64,
    h_old: f64,
    cont: [[f64; D]; 5],
}

impl<F, const D: usize> Dopri5<F, D>
where
    F: FnMut(f64, &[f64; D]) -> [f64; D],
{
    pub fn new(
        mut rhs: F,
        t0: f64,
        y0: [f64; D],
        t_end: f64,
        opts: StepperOptions,
    ) -> Result<Self, OdeError> {
        let k1 = rhs(t0, &y0);
        if !all_finite(&y0) || !all_finite(&k1) {
            return Err(OdeError::NonFiniteStart(t0));
        }
        let mut stepper = Self {
            rhs,
            opts,
            t: t0,
            y: y0,
            k1,
            t_end,
            h: 0.0,
            steps: 0,
            t_old: t0,
            h_old: 0.0,
            cont: [y0; 5],
        };
        stepper.h = stepper.initial_step();
        Ok(stepper)
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn y(&self) -> &[f64; D] {
        &self.y
    }

    /// Derivative at the current state (first stage of the next step).
    pub fn dy(&self) -> &[f64; D] {
        &self.k1
    }

    pub fn finished(&self) -> bool {
        self.t >= self.t_end
    }

    pub fn last_step_start(&self) -> f64 {
        self.t_old
    }

    /// Evaluates the continuous extension of the last accepted step.
    /// `t` should lie in `[last_step_start(), t()]`.
    pub fn dense(&self, t: f64) -> [f64; D] {
        if self.h_old == 0.0 {
            return self.y;
        }
        let s = (t - self.t_old) / self.h_old;
        let s1 = 1.0 - s;
        let c = &self.cont;
        let mut out = [0.0; D];
        for i in 0..D {
            out[i] = c[0][i] + s * (c[1][i] + s1 * (c[2][i] + s * (c[3][i] + s1 * c[4][i])));
        }
        out
    }

    /// Takes one accepted step, never stepping past `t_end`.
    pub fn step(&mut self) -> Result<(), OdeError> {
        loop {
            if self.steps >= self.opts.max_steps {
                return Err(OdeError::TooManySteps(self.opts.max_steps));
            }
            let h_min = 16.0 * f64::EPSILON * self.t.abs().max(1.0);
            let mut h = self.h.min(self.opts.h_max);
            let remaining = self.t_end - self.t;
            let last = h >= remaining;
            if last {
                h = remaining;
            }
            if h < h_min && !last {
                return Err(OdeError::StepUnderflow { t: self.t, h });
            }
            self.steps += 1;

            let (y_new, k, err) = self.attempt(h);
            let err = if all_finite(&y_new) && all_finite(&k[6]) {
                err
            } else {
                f64::INFINITY
            };

            if err <= 1.0 {
                let fac = (err.powf(0.2) / SAFETY).clamp(1.0 / FAC_MAX, 1.0 / FAC_MIN);
                self.store_dense(h, &y_new, &k);
                self.t_old = self.t;
                self.h_old = h;
                self.t = if last { self.t_end } else { self.t + h };
                self.y = y_new;
                self.k1 = k[6];
                self.h = h / fac;
                return Ok(());
            }
            let fac = if err.is_finite() {
                (err.powf(0.2) / SAFETY).min(1.0 / FAC_MIN)
            } else {
                10.0
            };
            self.h = h / fac;
            if self.h < h_min {
                return Err(OdeError::StepUnderflow { t: self.t, h: self.h });
            }
        }
    }

    fn attempt(&mut self, h: f64) -> ([f64; D], [[f64; D]; 7], f64) {
        let t = self.t;
        let y = self.y;
        let k1 = self.k1;
        let comb = |terms: &[(f64, &[f64; D])]| {
            let mut out = y;
            for i in 0..D {
                let mut acc = 0.0;
                for (c, k) in terms {
                    acc += c * k[i];
                }
                out[i] += h * acc;
            }
            out
        };
        let k2 = (self.rhs)(t + C2 * h, &comb(&[(A21, &k1)]));
        let k3 = (self.rhs)(t + C3 * h, &comb(&[(A31, &k1), (A32, &k2)]));
        let k4 = (self.rhs)(t + C4 * h, &comb(&[(A41, &k1), (A42, &k2), (A43, &k3)]));
        let k5 = (self.rhs)(
            t + C5 * h,
            &comb(&[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
        );
        let k6 = (self.rhs)(
            t + h,
            &comb(&[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
        );
        let y_new = comb(&[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
        let k7 = (self.rhs)(t + h, &y_new);

        let mut sum = 0.0;
        for i in 0..D {
            let e = h
                * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sc = self.opts.atol + self.opts.rtol * y[i].abs().max(y_new[i].abs());
            sum += (e / sc).powi(2);
        }
        let err = (sum / D as f64).sqrt();
        (y_new, [k1, k2, k3, k4, k5, k6, k7], err)
    }

    fn store_dense(&mut self, h: f64, y_new: &[f64; D], k: &[[f64; D]; 7]) {
        for i in 0..D {
            let dy = y_new[i] - self.y[i];
            let bspl = h * k[0][i] - dy;
            self.cont[0][i] = self.y[i];
            self.cont[1][i] = dy;
            self.cont[2][i] = bspl;
            self.cont[3][i] = dy - h * k[6][i] - bspl;
            self.cont[4][i] = h
                * (D1 * k[0][i] + D3 * k[2][i] + D4 * k[3][i] + D5 * k[4][i] + D6 * k[5][i]
                    + D7 * k[6][i]);
        }
    }

    // Hairer & Wanner's starting step heuristic.
    fn initial_step(&mut self) -> f64 {
        let span = (self.t_end - self.t).abs();
        if span == 0.0 {
            return 0.0;
        }
        let sc: Vec<f64> = self
            .y
            .iter()
            .map(|v| self.opts.atol + self.opts.rtol * v.abs())
            .collect();
        let norm = |v: &[f64; D]| {
            (v.iter().zip(&sc).map(|(x, s)| (x / s).powi(2)).sum::<f64>() / D as f64).sqrt()
        };
        let d0 = norm(&self.y);
        let d1 = norm(&self.k1);
        let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        let h0 = h0.min(span).min(self.opts.h_max);
        let mut y1 = self.y;
        for (y, k) in y1.iter_mut().zip(&self.k1) {
            *y += h0 * k;
        }
        let k2 = (self.rhs)(self.t + h0, &y1);
        let mut diff = [0.0; D];
        for i in 0..D {
            diff[i] = k2[i] - self.k1[i];
        }
        let d2 = norm(&diff) / h0;
        let h1 = if !d2.is_finite() {
            h0
        } else if d1.max(d2) <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / d1.max(d2)).powf(0.2)
        };
        (100.0 * h0).min(h1).min(span).min(self.opts.h_max)
    }
}

fn all_finite<const D: usize>(v: &[f64; D]) -> bool {
    v.iter().all(|x| x.is_finite())
}

/// Cubic Hermite interpolation on `[t0, t1]` from endpoint values and slopes.
/// Returns the value and its derivative.
pub fn hermite(t0: f64, t1: f64, y0: f64, y1: f64, d0: f64, d1: f64, t: f64) -> (f64, f64) {
    let h = t1 - t0;
    let s = (t - t0) / h;
    let s2 = s * s;
    let s3 = s2 * s;
    let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    let h10 = s3 - 2.0 * s2 + s;
    let h01 = -2.0 * s3 + 3.0 * s2;
    let h11 = s3 - s2;
    let value = h00 * y0 + h10 * h * d0 + h01 * y1 + h11 * h * d1;
    let dh00 = (6.0 * s2 - 6.0 * s) / h;
    let dh10 = 3.0 * s2 - 4.0 * s + 1.0;
    let dh01 = (-6.0 * s2 + 6.0 * s) / h;
    let dh11 = 3.0 * s2 - 2.0 * s;
    let deriv = dh00 * y0 + dh10 * d0 + dh01 * y1 + dh11 * d1;
    (value, deriv)
}

/// Index `i` such that `grid[i] <= x <= grid[i + 1]`, for a strictly
/// increasing grid with at least two nodes and `x` inside its range.
pub(crate) fn bracket(grid: &[f64], x: f64) -> usize {
    let i = grid.partition_point(|&g| g <= x);
    i.saturating_sub(1).min(grid.len() - 2)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run<F: FnMut(f64, &[f64; 1]) -> [f64; 1]>(f: F, y0: f64, t_end: f64) -> f64 {
        let mut s = Dopri5::new(f, 0.0, [y0], t_end, StepperOptions::default()).unwrap();
        while !s.finished() {
            s.step().unwrap();
        }
        s.y()[0]
    }

    #[test]
    fn exponential_growth() {
        let y = run(|_, y| [y[0]], 1.0, 2.0);
        assert!((y - 2f64.exp()).abs() < 1e-9 * 2f64.exp());
    }

    #[test]
    fn harmonic_oscillator_dense_output() {
        let mut s = Dopri5::new(
            |_, y: &[f64; 2]| [y[1], -y[0]],
            0.0,
            [0.0, 1.0],
            10.0,
            StepperOptions::default(),
        )
        .unwrap();
        let mut worst: f64 = 0.0;
        while !s.finished() {
            s.step().unwrap();
            let (a, b) = (s.last_step_start(), s.t());
            for j in 1..4 {
                let t = a + (b - a) * j as f64 / 4.0;
                worst = worst.max((s.dense(t)[0] - t.sin()).abs());
            }
        }
        assert!(worst < 1e-8, "dense output error {worst}");
        assert!((s.y()[0] - 10f64.sin()).abs() < 1e-9);
    }

    #[test]
    fn h_max_is_respected() {
        let opts = StepperOptions {
            h_max: 0.01,
            ..Default::default()
        };
        let mut s = Dopri5::new(|_, _: &[f64; 1]| [1.0], 0.0, [0.0], 1.0, opts).unwrap();
        let mut n = 0;
        while !s.finished() {
            let t0 = s.t();
            s.step().unwrap();
            assert!(s.t() - t0 <= 0.01 + 1e-15);
            n += 1;
        }
        assert!(n >= 100);
    }

    #[test]
    fn finite_time_singularity_underflows() {
        // y' = y^2, y(0) = 1 blows up at t = 1.
        let mut s =
            Dopri5::new(|_, y: &[f64; 1]| [y[0] * y[0]], 0.0, [1.0], 2.0, Default::default())
                .unwrap();
        let err = loop {
            if let Err(e) = s.step() {
                break e;
            }
        };
        assert!(matches!(err, OdeError::StepUnderflow { .. }));
        assert!((s.t() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn hermite_reproduces_cubics() {
        let f = |x: f64| x * x * x - 2.0 * x + 1.0;
        let df = |x: f64| 3.0 * x * x - 2.0;
        let (v, d) = hermite(0.5, 1.5, f(0.5), f(1.5), df(0.5), df(1.5), 0.8);
        assert!((v - f(0.8)).abs() < 1e-14);
        assert!((d - df(0.8)).abs() < 1e-13);
    }

    #[test]
    fn bracket_finds_interval() {
        let g = [0.0, 1.0, 2.0, 3.0];
        assert_eq!(bracket(&g, 0.0), 0);
        assert_eq!(bracket(&g, 1.5), 1);
        assert_eq!(bracket(&g, 3.0), 2);
    }
}
