//! Turning points, the period function `T(H)`, radius relations and audits
//! of the two-sided parabolic bounds on the effective potential.
//!
//! Along an orbit of energy `H` the half-sum `u = (x+y)/2` obeys
//! `u'^2 = Q_H(u)` and oscillates between the two roots `u_-(H) < u_+(H)`
//! of `F(u) = H`. The period is
//!
//! ```text
//! T(H) = 2 * integral_{u_-}^{u_+} du / sqrt(Q_H(u)),
//! ```
//!
//! evaluated after the substitution `u = c + h sin(theta)` which turns the
//! inverse square-root endpoint singularities into a smooth integrand.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI, SQRT_2};
use std::io::{self, Write};

use serde::Serialize;
use thiserror::Error;

use crate::par::{map_ordered, Execution};
use crate::roots::bisect;
use crate::scalar::{
    f_profile, f_profile_second_derivative, g_profile, q_potential, q_second_derivative,
    AngleState, EnergyLevel, CRITICAL_ANGLE, H_BOUNDARY, H_MAX, LINEARIZED_PERIOD,
};

/// Slope of the upper parabola, `Q_H <= (8/3) (u - u_-)(u_+ - u)`.
pub const UPPER_PARABOLA: f64 = 8.0 / 3.0;
/// Slope of the lower parabola, `Q_H >= ((4 - sqrt 2)/2) (u - u_-)(u_+ - u)`.
pub const LOWER_PARABOLA: f64 = (4.0 - SQRT_2) / 2.0;
/// `Q_H'' >= -16/3` on `[u_-, u_+]`.
pub const CURVATURE_FLOOR: f64 = -16.0 / 3.0;
/// `F'' <= 6 - 4 H_0 = -2 (2 sqrt 2 - 1)` on `[u_-, u_+]`.
pub const F_CURVATURE_CEILING: f64 = 6.0 - 4.0 * H_BOUNDARY;
/// `G(u) + H >= 4 sin(3 pi / 4) = 2 sqrt 2` on `[u_-, u_+]`.
pub const G_FLOOR: f64 = 2.0 * SQRT_2;
/// Slack below which an audited inequality counts as violated.
pub const AUDIT_SLACK: f64 = -1e-12;
/// Energies closer than this to `H_max` report the linearised period.
pub const DEGENERATE_GAP: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PeriodError {
    #[error("energy {0} is outside the open interval (1 + sqrt 2, 3 sqrt 3 / 2)")]
    OutOfEnergyRange(f64),
    #[error("quadrature did not converge: estimate {estimate}, error {error:e} after {nodes} nodes")]
    QuadratureNotConverged {
        estimate: f64,
        error: f64,
        nodes: usize,
    },
    #[error("negative radicand {radicand:e} for H = {h}, u = {u}")]
    NegativeRadicand { h: f64, u: f64, radicand: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

fn check_range(h: EnergyLevel) -> Result<(), PeriodError> {
    if h.is_oscillatory() {
        Ok(())
    } else {
        Err(PeriodError::OutOfEnergyRange(h.value()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TurningPoints {
    pub u_minus: f64,
    pub u_plus: f64,
    /// `max |F(u_+-) - H|`.
    pub residual: f64,
}

impl TurningPoints {
    pub fn half_width(&self) -> f64 {
        0.5 * (self.u_plus - self.u_minus)
    }

    pub fn center(&self) -> f64 {
        0.5 * (self.u_plus + self.u_minus)
    }
}

const BISECTION_TOL: f64 = 1e-14;
const BISECTION_MAX_ITER: usize = 200;

/// The two roots of `F(u) = H`, found by bisection on the monotone branches
/// `[pi/2, 2pi/3]` and `[2pi/3, 3pi/4]`.
pub fn turning_points(h: EnergyLevel) -> Result<TurningPoints, PeriodError> {
    check_range(h)?;
    let f = |u: f64| f_profile(u) - h.value();
    let u_minus = bisect(f, FRAC_PI_2, CRITICAL_ANGLE, BISECTION_TOL, BISECTION_MAX_ITER)
        .ok_or(PeriodError::OutOfEnergyRange(h.value()))?;
    let u_plus = bisect(f, CRITICAL_ANGLE, 3.0 * FRAC_PI_4, BISECTION_TOL, BISECTION_MAX_ITER)
        .ok_or(PeriodError::OutOfEnergyRange(h.value()))?;
    Ok(TurningPoints {
        u_minus,
        u_plus,
        residual: f(u_minus).abs().max(f(u_plus).abs()),
    })
}

/// Midpoint-rule node doubling schedule for the period quadrature.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureOptions {
    pub min_nodes: usize,
    pub max_nodes: usize,
    /// Relative change between successive doublings that counts as converged.
    pub rel_tol: f64,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        Self {
            min_nodes: 64,
            max_nodes: 65_536,
            rel_tol: 1e-10,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PeriodResult {
    pub h: f64,
    pub turning: TurningPoints,
    pub period: f64,
    pub quadrature_error: f64,
    pub nodes: usize,
    /// Set when `H` is within [`DEGENERATE_GAP`] of `H_max` and the
    /// linearised value `4 pi / 3` is reported instead of a quadrature.
    pub degenerate: bool,
}

pub fn period(h: EnergyLevel) -> Result<PeriodResult, PeriodError> {
    period_with(h, &QuadratureOptions::default())
}

pub fn period_with(h: EnergyLevel, opts: &QuadratureOptions) -> Result<PeriodResult, PeriodError> {
    let turning = turning_points(h)?;
    if H_MAX - h.value() <= DEGENERATE_GAP {
        return Ok(PeriodResult {
            h: h.value(),
            turning,
            period: LINEARIZED_PERIOD,
            quadrature_error: 0.0,
            nodes: 0,
            degenerate: true,
        });
    }
    let mut nodes = opts.min_nodes.max(2);
    let mut previous = period_sum(h, &turning, nodes);
    loop {
        let next_nodes = nodes * 2;
        if next_nodes > opts.max_nodes {
            return Err(PeriodError::QuadratureNotConverged {
                estimate: previous,
                error: f64::NAN,
                nodes,
            });
        }
        let current = period_sum(h, &turning, next_nodes);
        let error = (current - previous).abs();
        if error <= opts.rel_tol * current.abs() {
            return Ok(PeriodResult {
                h: h.value(),
                turning,
                period: current,
                quadrature_error: error,
                nodes: next_nodes,
                degenerate: false,
            });
        }
        if next_nodes * 2 > opts.max_nodes {
            return Err(PeriodError::QuadratureNotConverged {
                estimate: current,
                error,
                nodes: next_nodes,
            });
        }
        previous = current;
        nodes = next_nodes;
    }
}

/// Midpoint rule in `theta` on `[-pi/2, pi/2]` for
/// `2 * integral h cos(theta) / sqrt(Q_H(c + h sin theta)) dtheta`.
fn period_sum(h: EnergyLevel, tp: &TurningPoints, nodes: usize) -> f64 {
    let width = tp.half_width();
    let center = tp.center();
    let dtheta = PI / nodes as f64;
    let mut sum = 0.0;
    for k in 0..nodes {
        let theta = -FRAC_PI_2 + (k as f64 + 0.5) * dtheta;
        let (s, c) = theta.sin_cos();
        let u = center + width * s;
        // distance to the nearer turning point, free of cancellation
        let (root, d) = if s >= 0.0 {
            (tp.u_plus, -width * c * c / (1.0 + s))
        } else {
            (tp.u_minus, width * c * c / (1.0 - s))
        };
        let f_minus_h = profile_difference(root, d);
        let q = 0.25 * f_minus_h * (g_profile(u) + h.value());
        sum += width * c / q.sqrt();
    }
    2.0 * sum * dtheta
}

/// `F(w + d) - F(w)` from sum-to-product identities.
fn profile_difference(w: f64, d: f64) -> f64 {
    let half = 0.5 * d;
    half.sin() * (4.0 * (w + half).cos() - 4.0 * (2.0 * w + d).cos() * half.cos())
}

/// Minimum slack of each inequality used to bound the period, sampled on a
/// uniform grid over `[u_-, u_+]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BoundAudit {
    pub h: f64,
    pub grid: usize,
    /// `min Q_H - ((4 - sqrt 2)/2) p`, with `p = (u - u_-)(u_+ - u)`.
    pub lower_margin: f64,
    /// `min (8/3) p - Q_H`.
    pub upper_margin: f64,
    /// `min Q_H'' + 16/3`.
    pub curvature_margin: f64,
    /// `min (6 - 4 H_0) - F''`.
    pub f_curvature_margin: f64,
    /// `min G + H - 2 sqrt 2`.
    pub g_floor_margin: f64,
    /// `|G(u_+) + H - 4 sin u_+|`.
    pub g_identity_residual: f64,
    pub pass: bool,
}

pub fn audit_parabolic_bounds(h: EnergyLevel, grid_points: usize) -> Result<BoundAudit, PeriodError> {
    if grid_points < 3 {
        return Err(PeriodError::InvalidArgument(format!(
            "audit grid needs at least 3 points, got {grid_points}"
        )));
    }
    let tp = turning_points(h)?;
    let hv = h.value();
    let mut lower: f64 = f64::INFINITY;
    let mut upper: f64 = f64::INFINITY;
    let mut curvature: f64 = f64::INFINITY;
    let mut f_curv: f64 = f64::INFINITY;
    let mut g_floor: f64 = f64::INFINITY;
    let span = tp.u_plus - tp.u_minus;
    for k in 0..grid_points {
        let u = if k + 1 == grid_points {
            tp.u_plus
        } else {
            tp.u_minus + span * k as f64 / (grid_points - 1) as f64
        };
        let p = (u - tp.u_minus) * (tp.u_plus - u);
        let q = q_potential(h, u);
        lower = lower.min(q - LOWER_PARABOLA * p);
        upper = upper.min(UPPER_PARABOLA * p - q);
        curvature = curvature.min(q_second_derivative(h, u) - CURVATURE_FLOOR);
        f_curv = f_curv.min(F_CURVATURE_CEILING - f_profile_second_derivative(u));
        g_floor = g_floor.min(g_profile(u) + hv - G_FLOOR);
    }
    let g_identity_residual = (g_profile(tp.u_plus) + hv - 4.0 * tp.u_plus.sin()).abs();
    let pass = [lower, upper, curvature, f_curv, g_floor]
        .iter()
        .all(|&m| m >= AUDIT_SLACK);
    Ok(BoundAudit {
        h: hv,
        grid: grid_points,
        lower_margin: lower,
        upper_margin: upper,
        curvature_margin: curvature,
        f_curvature_margin: f_curv,
        g_floor_margin: g_floor,
        g_identity_residual,
        pass,
    })
}

/// `r = sqrt(1 - 2 H cot u)`: distance from the center of symmetry to the
/// hexagon vertex whose two neighbouring angles average to `u`.
pub fn radius(h: EnergyLevel, u: f64) -> Result<f64, PeriodError> {
    if !(FRAC_PI_2 < u && u < PI) {
        return Err(PeriodError::InvalidArgument(format!("u = {u} outside (pi/2, pi)")));
    }
    let radicand = 1.0 - 2.0 * h.value() * u.cos() / u.sin();
    if radicand < 0.0 {
        return Err(PeriodError::NegativeRadicand {
            h: h.value(),
            u,
            radicand,
        });
    }
    Ok(radicand.sqrt())
}

/// Same radius from the two angles, `r^2 = 3 - 2 cos x - 2 cos y + 2 cos(x+y)`.
pub fn radius_from_angles(s: AngleState) -> f64 {
    (3.0 - 2.0 * s.x.cos() - 2.0 * s.y.cos() + 2.0 * (s.x + s.y).cos()).sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RadiusExtrema {
    pub r_min: f64,
    pub r_max: f64,
}

pub fn radius_extrema(h: EnergyLevel) -> Result<RadiusExtrema, PeriodError> {
    let tp = turning_points(h)?;
    Ok(RadiusExtrema {
        r_min: radius(h, tp.u_minus)?,
        r_max: radius(h, tp.u_plus)?,
    })
}

/// `count` evenly spaced energies from `lo` to `hi` inclusive.
pub fn energy_grid(lo: f64, hi: f64, count: usize) -> Vec<EnergyLevel> {
    match count {
        0 => Vec::new(),
        1 => vec![EnergyLevel(lo)],
        n => (0..n)
            .map(|i| EnergyLevel(lo + (hi - lo) * i as f64 / (n - 1) as f64))
            .collect(),
    }
}

/// One row of a period scan.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ScanRow {
    #[serde(rename = "H")]
    pub h: f64,
    pub u_minus: f64,
    pub u_plus: f64,
    #[serde(rename = "T")]
    pub period: f64,
    pub quadrature_error: f64,
    pub r_min: f64,
    pub r_max: f64,
    pub lower_margin: f64,
    pub upper_margin: f64,
}

pub const SCAN_CSV_HEADER: &str =
    "H,u_minus,u_plus,T,quadrature_error,r_min,r_max,lower_margin,upper_margin";

pub fn scan_row(h: EnergyLevel, audit_grid: usize) -> Result<ScanRow, PeriodError> {
    let p = period(h)?;
    let r = radius_extrema(h)?;
    let audit = audit_parabolic_bounds(h, audit_grid)?;
    Ok(ScanRow {
        h: h.value(),
        u_minus: p.turning.u_minus,
        u_plus: p.turning.u_plus,
        period: p.period,
        quadrature_error: p.quadrature_error,
        r_min: r.r_min,
        r_max: r.r_max,
        lower_margin: audit.lower_margin,
        upper_margin: audit.upper_margin,
    })
}

/// Period, radius extrema and bound margins over an energy grid; rows come
/// back in grid order regardless of execution mode.
pub fn period_scan(
    grid: &[EnergyLevel],
    audit_grid: usize,
    exec: Execution,
) -> Result<Vec<ScanRow>, PeriodError> {
    map_ordered(exec, grid, |&h| scan_row(h, audit_grid))
        .into_iter()
        .collect()
}

pub fn audit_scan(
    grid: &[EnergyLevel],
    grid_points: usize,
    exec: Execution,
) -> Result<Vec<BoundAudit>, PeriodError> {
    map_ordered(exec, grid, |&h| audit_parabolic_bounds(h, grid_points))
        .into_iter()
        .collect()
}

pub fn write_scan_csv<W: Write>(rows: &[ScanRow], mut out: W) -> io::Result<()> {
    writeln!(out, "{SCAN_CSV_HEADER}")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.h,
            r.u_minus,
            r.u_plus,
            r.period,
            r.quadrature_error,
            r.r_min,
            r.r_max,
            r.lower_margin,
            r.upper_margin
        )?;
    }
    Ok(())
}
