//! The reduced two-angle carousel flow
//!
//! ```text
//! x' = cos(x + y) - cos y
//! y' = cos x - cos(x + y)
//! ```
//!
//! which is Hamiltonian for `H = sin x + sin y - sin(x + y)` with
//! `x' = -dH/dy`, `y' = dH/dx`. The independent variable is the arc length
//! of the carousel curve.

use std::f64::consts::{FRAC_PI_2, PI};

use thiserror::Error;

use crate::ode::{refine_crossing, rk4_step as rk4};
use crate::scalar::{hamiltonian, in_admissible_region, AngleState, EnergyLevel};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FlowError {
    #[error("trajectory left the admissible region after t = {t}; last interior state {last:?}")]
    StateLeftRegion { t: f64, last: AngleState },
    #[error("energy drift {drift:e} exceeds the ceiling {ceiling:e}")]
    StepTooLarge { drift: f64, ceiling: f64 },
    #[error("state {0:?} is outside the admissible region")]
    OutOfRegion(AngleState),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("no section crossing within t = {0}")]
    NoCrossing(f64),
}

/// `(x', y')` at `s`.
pub fn vector_field(s: AngleState) -> [f64; 2] {
    let cxy = (s.x + s.y).cos();
    [cxy - s.y.cos(), s.x.cos() - cxy]
}

fn field_array(y: &[f64; 2]) -> [f64; 2] {
    vector_field(AngleState::new(y[0], y[1]))
}

/// One classical RK4 step of size `h` (negative `h` integrates backwards).
pub fn rk4_step(s: AngleState, h: f64) -> AngleState {
    let [x, y] = rk4(&[s.x, s.y], h, &field_array);
    AngleState::new(x, y)
}

/// Flow map `Phi_t(s)` by fixed steps of size at most `|step|`; `t` may be
/// negative. No region checks.
pub fn flow_map(s: AngleState, t: f64, step: f64) -> AngleState {
    let n = (t.abs() / step.abs()).ceil().max(1.0) as usize;
    let h = t / n as f64;
    (0..n).fold(s, |acc, _| rk4_step(acc, h))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Method {
    #[default]
    FixedRk4,
    /// Fixed-step RK4, rerun with the step halved until the energy drift per
    /// unit time is below [`OrbitOptions::adaptive_drift_rate`].
    Adaptive,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OrbitOptions {
    /// Keep every k-th step (the final state is always kept).
    pub record_every: usize,
    /// Maximum tolerated `|H - H(s0)|` for fixed-step runs.
    pub drift_ceiling: f64,
    pub adaptive_drift_rate: f64,
    pub max_halvings: u32,
}

impl Default for OrbitOptions {
    fn default() -> Self {
        Self {
            record_every: 10,
            drift_ceiling: 1e-6,
            adaptive_drift_rate: 1e-10,
            max_halvings: 20,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OrbitSample {
    pub t: f64,
    pub state: AngleState,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Orbit {
    pub samples: Vec<OrbitSample>,
    pub h_reference: EnergyLevel,
    pub h_max_drift: f64,
    /// Step actually used (differs from the request in adaptive mode).
    pub step: f64,
}

impl Orbit {
    pub fn initial(&self) -> AngleState {
        self.samples[0].state
    }

    pub fn last(&self) -> OrbitSample {
        *self.samples.last().expect("orbit has at least one sample")
    }
}

pub fn integrate_orbit(
    s0: AngleState,
    duration: f64,
    step: f64,
    method: Method,
) -> Result<Orbit, FlowError> {
    integrate_orbit_with(s0, duration, step, method, &OrbitOptions::default())
}

pub fn integrate_orbit_with(
    s0: AngleState,
    duration: f64,
    step: f64,
    method: Method,
    opts: &OrbitOptions,
) -> Result<Orbit, FlowError> {
    if !in_admissible_region(s0) {
        return Err(FlowError::OutOfRegion(s0));
    }
    if !(duration > 0.0) || !(step > 0.0) {
        return Err(FlowError::InvalidArgument(format!(
            "duration {duration} and step {step} must be positive"
        )));
    }
    if opts.record_every == 0 {
        return Err(FlowError::InvalidArgument("record_every must be at least 1".into()));
    }
    match method {
        Method::FixedRk4 => {
            let orbit = integrate_fixed(s0, duration, step, opts.record_every)?;
            if orbit.h_max_drift > opts.drift_ceiling {
                return Err(FlowError::StepTooLarge {
                    drift: orbit.h_max_drift,
                    ceiling: opts.drift_ceiling,
                });
            }
            Ok(orbit)
        }
        Method::Adaptive => {
            let mut h = step;
            for _ in 0..=opts.max_halvings {
                let orbit = integrate_fixed(s0, duration, h, opts.record_every)?;
                if orbit.h_max_drift / duration <= opts.adaptive_drift_rate {
                    return Ok(orbit);
                }
                h *= 0.5;
            }
            let orbit = integrate_fixed(s0, duration, h, opts.record_every)?;
            Err(FlowError::StepTooLarge {
                drift: orbit.h_max_drift,
                ceiling: opts.adaptive_drift_rate * duration,
            })
        }
    }
}

fn integrate_fixed(
    s0: AngleState,
    duration: f64,
    step: f64,
    record_every: usize,
) -> Result<Orbit, FlowError> {
    let h_ref = hamiltonian(s0);
    let n_full = (duration / step).floor() as usize;
    let tail = duration - n_full as f64 * step;
    let mut samples = vec![OrbitSample { t: 0.0, state: s0 }];
    let mut drift: f64 = 0.0;
    let mut s = s0;
    let mut t = 0.0;
    let mut n = 0usize;
    let advance = |s: &mut AngleState, t: &mut f64, h: f64, t_new: f64| {
        let next = rk4_step(*s, h);
        if !in_admissible_region(next) {
            return Err(FlowError::StateLeftRegion { t: *t, last: *s });
        }
        *s = next;
        *t = t_new;
        Ok(())
    };
    while n < n_full {
        n += 1;
        advance(&mut s, &mut t, step, n as f64 * step)?;
        drift = drift.max((hamiltonian(s).value() - h_ref.value()).abs());
        if n.is_multiple_of(record_every) {
            samples.push(OrbitSample { t, state: s });
        }
    }
    if tail > 1e-12 * step {
        advance(&mut s, &mut t, tail, duration)?;
        drift = drift.max((hamiltonian(s).value() - h_ref.value()).abs());
    }
    if samples.last().map(|p| p.t) != Some(t) {
        samples.push(OrbitSample { t, state: s });
    }
    Ok(Orbit {
        samples,
        h_reference: h_ref,
        h_max_drift: drift,
        step,
    })
}

/// A line in the `(x, y)` plane crossed in the direction of `normal`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Section {
    pub point: AngleState,
    pub normal: [f64; 2],
}

impl Section {
    /// The diagonal `{v = 0}` crossed with `v' > 0`.
    pub fn diagonal_upward() -> Self {
        Self {
            point: AngleState::regular(),
            normal: [1.0, -1.0],
        }
    }

    /// Line through `point` perpendicular to the flow there. `None` at the
    /// fixed point.
    pub fn transverse_at(point: AngleState) -> Option<Self> {
        let f = vector_field(point);
        let norm = f[0].hypot(f[1]);
        (norm > 1e-14).then(|| Self {
            point,
            normal: [f[0] / norm, f[1] / norm],
        })
    }

    pub fn signed_distance(&self, s: AngleState) -> f64 {
        self.normal[0] * (s.x - self.point.x) + self.normal[1] * (s.y - self.point.y)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Crossing {
    pub t: f64,
    pub state: AngleState,
}

/// First time after `min_time` at which the orbit of `s0` crosses `section`
/// from its negative to its non-negative side. The crossing is refined to
/// integrator accuracy inside the step where it happens.
pub fn first_crossing(
    s0: AngleState,
    section: &Section,
    step: f64,
    min_time: f64,
    max_duration: f64,
) -> Result<Crossing, FlowError> {
    if !(step > 0.0) {
        return Err(FlowError::InvalidArgument(format!("step {step} must be positive")));
    }
    let g = |y: &[f64; 2]| section.signed_distance(AngleState::new(y[0], y[1]));
    let mut y = [s0.x, s0.y];
    let mut t = 0.0;
    while t < max_duration {
        let next = rk4(&y, step, &field_array);
        if !in_admissible_region(AngleState::new(next[0], next[1])) {
            return Err(FlowError::StateLeftRegion {
                t,
                last: AngleState::new(y[0], y[1]),
            });
        }
        if t + step > min_time && g(&y) < 0.0 && g(&next) >= 0.0 {
            let (tau, hit) = refine_crossing(&y, step, &field_array, &g);
            if t + tau > min_time {
                return Ok(Crossing {
                    t: t + tau,
                    state: AngleState::new(hit[0], hit[1]),
                });
            }
        }
        y = next;
        t += step;
    }
    Err(FlowError::NoCrossing(max_duration))
}

/// Period of the orbit through `s0`, measured as the time between two
/// upward crossings of the diagonal `{v = 0}`.
pub fn return_period(s0: AngleState, step: f64, max_duration: f64) -> Result<f64, FlowError> {
    let section = Section::diagonal_upward();
    let first = first_crossing(s0, &section, step, 0.0, max_duration)?;
    let second = first_crossing(first.state, &section, step, 10.0 * step, max_duration)?;
    Ok(second.t)
}

/// Full angle data of the centrally symmetric hexagon: `x3 = 2 pi - x1 - x2`
/// and the chord-tangent angles `alpha_i = x_{i+2} - pi/2` (indices mod 3).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TripleAngles {
    pub x: [f64; 3],
    pub alpha: [f64; 3],
}

pub fn triple_angles(s: AngleState) -> Result<TripleAngles, FlowError> {
    if !in_admissible_region(s) {
        return Err(FlowError::OutOfRegion(s));
    }
    Ok(triple_angles_unchecked(s))
}

pub(crate) fn triple_angles_unchecked(s: AngleState) -> TripleAngles {
    let x = [s.x, s.y, 2.0 * PI - s.x - s.y];
    let alpha = [x[2] - FRAC_PI_2, x[0] - FRAC_PI_2, x[1] - FRAC_PI_2];
    TripleAngles { x, alpha }
}

/// Angle velocities of a general equilateral `N`-gon carousel,
/// `x_i' = sin(alpha_{i-1}) - sin(alpha_i)` with indices mod `N`.
pub fn general_carousel_field(alphas: &[f64]) -> Result<Vec<f64>, FlowError> {
    let n = alphas.len();
    if n < 3 {
        return Err(FlowError::InvalidArgument(format!(
            "a carousel polygon needs at least 3 vertices, got {n}"
        )));
    }
    Ok((0..n)
        .map(|i| alphas[(i + n - 1) % n].sin() - alphas[i].sin())
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{hamiltonian_gradient, to_symmetric};

    #[test]
    fn fixed_point_and_reference_value() {
        let f = vector_field(AngleState::regular());
        assert!(f[0].abs() < 1e-15 && f[1].abs() < 1e-15);
        let f = vector_field(AngleState::new(2.0, 2.2));
        // cos(4.2) - cos(2.2), cos(2) - cos(4.2)
        assert!((f[0] - 0.098_24).abs() < 1e-5, "{f:?}");
        assert!((f[1] - 0.074_11).abs() < 1e-5);
    }

    #[test]
    fn field_is_symplectic_gradient() {
        let s = AngleState::new(1.9, 2.3);
        let g = hamiltonian_gradient(s);
        let f = vector_field(s);
        assert!((f[0] + g[1]).abs() < 1e-15);
        assert!((f[1] - g[0]).abs() < 1e-15);
    }

    #[test]
    fn constant_orbit_at_fixed_point() {
        let orbit = integrate_orbit(AngleState::regular(), 5.0, 1e-3, Method::FixedRk4).unwrap();
        assert!(orbit.samples.iter().all(|p| p.state.distance(AngleState::regular()) < 1e-14));
        assert_eq!(orbit.last().t, 5.0);
    }

    #[test]
    fn conservation_from_reference_state() {
        let orbit =
            integrate_orbit(AngleState::new(2.0, 2.2), 20.0, 1e-3, Method::FixedRk4).unwrap();
        assert!(orbit.h_max_drift <= 1e-9, "{}", orbit.h_max_drift);
        assert!((orbit.h_reference.value() - 2.589_369).abs() < 1e-6);
        let ts: Vec<f64> = orbit.samples.iter().map(|p| p.t).collect();
        assert!(ts.windows(2).all(|w| w[1] > w[0]));
        assert_eq!(ts.len(), 2001);
    }

    #[test]
    fn adaptive_mode_meets_drift_rate() {
        let orbit = integrate_orbit(AngleState::new(2.0, 2.2), 10.0, 0.2, Method::Adaptive).unwrap();
        assert!(orbit.h_max_drift / 10.0 <= 1e-10);
        assert!(orbit.step < 0.2);
    }

    #[test]
    fn coarse_fixed_step_trips_the_ceiling() {
        let opts = OrbitOptions {
            drift_ceiling: 1e-12,
            ..Default::default()
        };
        let err = integrate_orbit_with(AngleState::new(2.0, 2.2), 10.0, 0.2, Method::FixedRk4, &opts)
            .unwrap_err();
        assert!(matches!(err, FlowError::StepTooLarge { .. }));
    }

    #[test]
    fn leaving_the_region_is_reported() {
        // H below H_0: the level set meets the boundary of D
        let s0 = AngleState::new(1.65, 1.65);
        let err = integrate_orbit(s0, 20.0, 1e-3, Method::FixedRk4).unwrap_err();
        match err {
            FlowError::StateLeftRegion { last, .. } => assert!(in_admissible_region(last)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_arguments() {
        let s = AngleState::new(2.0, 2.2);
        assert!(integrate_orbit(s, -1.0, 1e-3, Method::FixedRk4).is_err());
        assert!(integrate_orbit(s, 1.0, 0.0, Method::FixedRk4).is_err());
        assert!(matches!(
            integrate_orbit(AngleState::new(1.0, 2.0), 1.0, 1e-3, Method::FixedRk4),
            Err(FlowError::OutOfRegion(_))
        ));
    }

    #[test]
    fn u_rate_matches_reduction() {
        // finite-difference u' against -sin u sin v along the orbit
        let dt = 1e-4;
        let mut s = AngleState::new(2.0, 2.2);
        for _ in 0..200 {
            let next = flow_map(s, dt, dt);
            let prev = flow_map(s, -dt, dt);
            let du = (to_symmetric(next).u - to_symmetric(prev).u) / (2.0 * dt);
            let c = to_symmetric(s);
            assert!((du + c.u.sin() * c.v.sin()).abs() <= 1e-5);
            s = flow_map(s, 0.05, 1e-3);
        }
    }

    #[test]
    fn triple_angle_examples() {
        let t = triple_angles(AngleState::regular()).unwrap();
        for i in 0..3 {
            assert!((t.x[i] - 2.0 * PI / 3.0).abs() < 1e-15);
            assert!((t.alpha[i] - PI / 6.0).abs() < 1e-15);
        }
        let t = triple_angles(AngleState::new(2.0, 2.2)).unwrap();
        assert!((t.x[2] - 2.083_185).abs() < 1e-6);
        assert!((t.alpha[0] - 0.512_389).abs() < 1e-6);
        assert!((t.x.iter().sum::<f64>() - 2.0 * PI).abs() < 1e-12);
        assert!(triple_angles(AngleState::new(1.5, 2.0)).is_err());
    }

    #[test]
    fn general_field_reduces_to_hexagon_field() {
        let t = triple_angles(AngleState::new(2.0, 2.2)).unwrap();
        let alphas: Vec<f64> = (0..6).map(|i| t.alpha[i % 3]).collect();
        let v = general_carousel_field(&alphas).unwrap();
        let f = vector_field(AngleState::new(2.0, 2.2));
        assert!((v[0] - f[0]).abs() < 1e-14);
        assert!((v[1] - f[1]).abs() < 1e-14);
        assert!(general_carousel_field(&[0.1, 0.2]).is_err());
        let same = general_carousel_field(&[0.3; 7]).unwrap();
        assert!(same.iter().all(|&d| d == 0.0));
    }

    #[test]
    fn transverse_section_is_undefined_at_fixed_point() {
        assert!(Section::transverse_at(AngleState::regular()).is_none());
        assert!(Section::transverse_at(AngleState::new(2.0, 2.2)).is_some());
    }
}
