#![allow(dead_code)]

use nssol::scaling::ScalingOde;

/// Fixed-step classical RK4 for `a'' = accel(a, a')` from `t = 0`.
///
/// Returns `(a, a')` at `t_end`; the last step is shortened to land on it.
pub fn rk4_scaling(ode: &ScalingOde, a0: f64, a1: f64, t_end: f64, h: f64) -> (f64, f64) {
    let f = |y: [f64; 2]| [y[1], ode.accel(y[0], y[1])];
    let mut y = [a0, a1];
    let mut t = 0.0;
    let steps = (t_end / h).ceil() as usize;
    for i in 0..steps {
        let dt = if i + 1 == steps { t_end - t } else { h };
        let k1 = f(y);
        let k2 = f([y[0] + 0.5 * dt * k1[0], y[1] + 0.5 * dt * k1[1]]);
        let k3 = f([y[0] + 0.5 * dt * k2[0], y[1] + 0.5 * dt * k2[1]]);
        let k4 = f([y[0] + dt * k3[0], y[1] + dt * k3[1]]);
        for j in 0..2 {
            y[j] += dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
        t = h * (i + 1) as f64;
    }
    (y[0], y[1])
}

/// Writes `text` to a fresh file inside `dir` and returns its path.
pub fn write_config(dir: &tempfile::TempDir, name: &str, text: &str) -> std::path::PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}
