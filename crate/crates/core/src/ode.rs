//! Fixed-step classical Runge-Kutta on small state vectors.

use crate::roots::illinois;

pub(crate) fn rk4_step<const N: usize, F>(y: &[f64; N], h: f64, f: &F) -> [f64; N]
where
    F: Fn(&[f64; N]) -> [f64; N],
{
    let k1 = f(y);
    let k2 = f(&axpy(y, 0.5 * h, &k1));
    let k3 = f(&axpy(y, 0.5 * h, &k2));
    let k4 = f(&axpy(y, h, &k3));
    let mut out = *y;
    for i in 0..N {
        out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    out
}

fn axpy<const N: usize>(y: &[f64; N], a: f64, k: &[f64; N]) -> [f64; N] {
    let mut out = *y;
    for i in 0..N {
        out[i] += a * k[i];
    }
    out
}

/// Locates the zero of `g` inside one step that starts at `y_prev` (where
/// `g < 0`) and ends with `g >= 0` after a full step `h`. Sub-steps are single
/// RK4 steps from `y_prev`, so the crossing carries the integrator's own
/// accuracy rather than an interpolation error.
pub(crate) fn refine_crossing<const N: usize, F, G>(
    y_prev: &[f64; N],
    h: f64,
    f: &F,
    g: &G,
) -> (f64, [f64; N])
where
    F: Fn(&[f64; N]) -> [f64; N],
    G: Fn(&[f64; N]) -> f64,
{
    let ga = g(y_prev);
    let gb = g(&rk4_step(y_prev, h, f));
    if gb == 0.0 {
        return (h, rk4_step(y_prev, h, f));
    }
    let tau = illinois(|t| g(&rk4_step(y_prev, t, f)), 0.0, h, ga, gb, 1e-16, 80);
    let tau = tau.clamp(0.0, h);
    (tau, rk4_step(y_prev, tau, f))
}
