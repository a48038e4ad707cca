//! Vertex-flow reconstruction of a candidate carousel curve.
//!
//! The angle state follows the reduced flow while the six vertices move with
//! unit speed along tangents obtained by rotating each outgoing side by its
//! chord-tangent angle. A closed floating body would make vertex 1 arrive at
//! the starting point of vertex 2 exactly when the angle state has advanced
//! to its cyclic relabelling `(x1, x2) -> (x2, x3)`; the closure defect is
//! the distance by which it misses.

use std::f64::consts::PI;
use std::io::{self, Write};

use serde::Serialize;
use thiserror::Error;

use crate::flow::{triple_angles, triple_angles_unchecked, vector_field, FlowError, Section, TripleAngles};
use crate::geom::{interior_angles, signed_angle, Vec2};
use crate::ode::{refine_crossing, rk4_step};
use crate::par::{map_ordered, Execution};
use crate::period::{period, turning_points, PeriodError, DEGENERATE_GAP};
use crate::polygon::{central_symmetry_defect, hexagon_from_angles, Hexagon, PolygonError, SIDE};
use crate::scalar::{hamiltonian, in_admissible_region, AngleState, EnergyLevel, H_MAX};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TracerError {
    #[error(transparent)]
    Flow(#[from] FlowError),
    #[error(transparent)]
    Polygon(#[from] PolygonError),
    #[error(transparent)]
    Period(#[from] PeriodError),
    #[error("tangent directions inconsistent with the chord angles (defect {defect:e})")]
    InconsistentAngles { defect: f64 },
    #[error("angle state did not reach its relabelled position within t = {duration}")]
    NoReturn { duration: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

/// Tolerance of the tangent-chord consistency check.
pub const TANGENT_TOL: f64 = 1e-10;

/// Centrally symmetric hexagon with angles `(x, y, z, x, y, z)`,
/// `z = 2 pi - x - y`, side 2, centered at the origin.
pub fn initial_hexagon(s: AngleState) -> Result<Hexagon, TracerError> {
    if !in_admissible_region(s) {
        return Err(FlowError::OutOfRegion(s).into());
    }
    let z = 2.0 * PI - s.x - s.y;
    Ok(hexagon_from_angles([s.x, s.y, z, s.x, s.y, z])?.centered())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TangentFrame {
    pub tangents: [Vec2; 6],
    /// `+1` when the outward rotation is clockwise (counterclockwise
    /// polygon), `-1` otherwise.
    pub orientation: f64,
    pub consistency_defect: f64,
}

fn side_alpha(a: &TripleAngles, i: usize) -> f64 {
    a.alpha[i % 3]
}

fn tangents_with(vertices: &[Vec2; 6], a: &TripleAngles, orientation: f64) -> [Vec2; 6] {
    std::array::from_fn(|i| {
        let e = (vertices[(i + 1) % 6] - vertices[i]).normalized();
        e.rotated(-orientation * side_alpha(a, i))
    })
}

fn consistency(vertices: &[Vec2; 6], a: &TripleAngles, orientation: f64, tangents: &[Vec2; 6]) -> f64 {
    (0..6)
        .map(|i| {
            let prev = (i + 5) % 6;
            let e_in = (vertices[i] - vertices[prev]).normalized();
            e_in.rotated(orientation * side_alpha(a, prev)).distance(tangents[i])
        })
        .fold(0.0, f64::max)
}

/// Unit tangents at the six vertices. Each is the outgoing side direction
/// rotated outward by its angle `alpha_i`; it must also equal the incoming
/// side rotated the other way by `alpha_{i-1}`. The outward sense is fixed by
/// whichever rotation sign passes that check.
pub fn tangent_directions(h: &Hexagon, a: &TripleAngles) -> Result<TangentFrame, TracerError> {
    let mut best = f64::INFINITY;
    for orientation in [1.0, -1.0] {
        let tangents = tangents_with(&h.vertices, a, orientation);
        let defect = consistency(&h.vertices, a, orientation, &tangents);
        if defect <= TANGENT_TOL {
            return Ok(TangentFrame {
                tangents,
                orientation,
                consistency_defect: defect,
            });
        }
        best = best.min(defect);
    }
    Err(TracerError::InconsistentAngles { defect: best })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceOptions {
    /// Keep every k-th step (the final state is always kept).
    pub record_every: usize,
    /// Largest angle-state mismatch accepted when locating the relabelled
    /// state on its section.
    pub section_match_tol: f64,
}

impl Default for TraceOptions {
    fn default() -> Self {
        Self {
            record_every: 1,
            section_match_tol: 1e-6,
        }
    }
}

/// Reconstructed vertex motion. Sample `k` holds time `times[k]`, angle
/// state `angles[k]` and the six vertex positions `positions[k]`.
#[derive(Clone, Debug, PartialEq)]
pub struct VertexFlow {
    pub times: Vec<f64>,
    pub angles: Vec<AngleState>,
    pub positions: Vec<[Vec2; 6]>,
    pub h_reference: EnergyLevel,
    pub orientation: f64,
    /// Time at which the angle state reaches its cyclic relabelling.
    pub closure_time: f64,
    /// `|v1(closure_time) - v2(0)|`.
    pub closure_defect: f64,
    /// First return of the angle state to its initial value, if reached.
    pub return_time: Option<f64>,
    /// `max | |v|^2 - (1 - 2 H cot u) |` over samples and vertex classes.
    pub radius_residual: f64,
}

impl VertexFlow {
    /// `(t, position)` samples of vertex `i` (0-based).
    pub fn trajectory(&self, i: usize) -> impl Iterator<Item = (f64, Vec2)> + '_ {
        self.times.iter().zip(&self.positions).map(move |(&t, p)| (t, p[i]))
    }

    /// Perimeter implied by the closure time, six arcs of equal length.
    pub fn swept_perimeter(&self) -> f64 {
        6.0 * self.closure_time
    }

    pub fn max_side_error(&self) -> f64 {
        self.positions
            .iter()
            .flat_map(|p| (0..6).map(move |i| (p[(i + 1) % 6].distance(p[i]) - SIDE).abs()))
            .fold(0.0, f64::max)
    }

    /// `max |v_{i+3} + v_i|`.
    pub fn max_symmetry_defect(&self) -> f64 {
        self.positions
            .iter()
            .flat_map(|p| (0..3).map(move |i| (p[i + 3] + p[i]).norm()))
            .fold(0.0, f64::max)
    }

    /// Largest `|chord / dt - 1|` between consecutive samples.
    pub fn max_speed_error(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for k in 1..self.times.len() {
            let dt = self.times[k] - self.times[k - 1];
            if dt <= 0.0 {
                continue;
            }
            for i in 0..6 {
                let chord = self.positions[k][i].distance(self.positions[k - 1][i]);
                worst = worst.max((chord / dt - 1.0).abs());
            }
        }
        worst
    }

    /// Largest difference between the measured interior angles and the
    /// integrated angle state.
    pub fn max_angle_mismatch(&self) -> f64 {
        self.positions
            .iter()
            .zip(&self.angles)
            .flat_map(|(p, s)| {
                let measured = interior_angles(p);
                let x = triple_angles_unchecked(*s).x;
                (0..6).map(move |i| (measured[i] - x[i % 3]).abs())
            })
            .fold(0.0, f64::max)
    }
}

type Packed = [f64; 14];

fn pack(s: AngleState, v: &[Vec2; 6]) -> Packed {
    let mut y = [0.0; 14];
    y[0] = s.x;
    y[1] = s.y;
    for i in 0..6 {
        y[2 + 2 * i] = v[i].x;
        y[3 + 2 * i] = v[i].y;
    }
    y
}

fn unpack(y: &Packed) -> (AngleState, [Vec2; 6]) {
    (
        AngleState::new(y[0], y[1]),
        std::array::from_fn(|i| Vec2::new(y[2 + 2 * i], y[3 + 2 * i])),
    )
}

/// `|v|^2 - (1 - 2 H cot u)` for the three vertex classes. The radius of
/// `v3` is governed by `u = (x1 + x2)/2`, that of `v1` by `(x2 + x3)/2` and
/// that of `v2` by `(x3 + x1)/2`.
fn radius_residual(h: f64, s: AngleState, v: &[Vec2; 6]) -> f64 {
    let x = triple_angles_unchecked(s).x;
    let classes = [(2, x[0] + x[1]), (0, x[1] + x[2]), (1, x[2] + x[0])];
    classes
        .iter()
        .flat_map(|&(i, sum)| {
            let u = 0.5 * sum;
            let r2 = 1.0 - 2.0 * h * u.cos() / u.sin();
            [(v[i].norm_sq() - r2).abs(), (v[i + 3].norm_sq() - r2).abs()]
        })
        .fold(0.0, f64::max)
}

pub fn trace(s0: AngleState, duration: f64, step: f64) -> Result<VertexFlow, TracerError> {
    trace_with(s0, duration, step, &TraceOptions::default())
}

pub fn trace_with(
    s0: AngleState,
    duration: f64,
    step: f64,
    opts: &TraceOptions,
) -> Result<VertexFlow, TracerError> {
    if !(duration > 0.0) || !(step > 0.0) || opts.record_every == 0 {
        return Err(TracerError::InvalidArgument(format!(
            "duration {duration}, step {step} and record_every {} must be positive",
            opts.record_every
        )));
    }
    let hex = initial_hexagon(s0)?;
    let frame = tangent_directions(&hex, &triple_angles(s0)?)?;
    let orientation = frame.orientation;
    let h_ref = hamiltonian(s0);

    let field = move |y: &Packed| -> Packed {
        let (s, v) = unpack(y);
        let f = vector_field(s);
        let t = tangents_with(&v, &triple_angles_unchecked(s), orientation);
        let mut out = [0.0; 14];
        out[0] = f[0];
        out[1] = f[1];
        for i in 0..6 {
            out[2 + 2 * i] = t[i].x;
            out[3 + 2 * i] = t[i].y;
        }
        out
    };

    let target = s0.shifted();
    let shift_section = Section::transverse_at(target);
    let return_section = Section::transverse_at(s0);
    // a stationary angle state is relabelled at every instant; vertex 1 then
    // rides a circle and reaches v2(0) after sweeping the central angle
    let stationary_closure = match shift_section {
        Some(_) => None,
        None => {
            let (a, b) = (hex.vertices[0], hex.vertices[1]);
            let turn = signed_angle(a, b) * orientation;
            Some(a.norm() * turn.rem_euclid(2.0 * PI))
        }
    };

    let mut y = pack(s0, &hex.vertices);
    let mut times = vec![0.0];
    let mut angles = vec![s0];
    let mut positions = vec![hex.vertices];
    let mut residual = radius_residual(h_ref.value(), s0, &hex.vertices);
    let mut closure: Option<(f64, [Vec2; 6])> = None;
    let mut return_time = None;

    let n_full = (duration / step).floor() as usize;
    let tail = duration - n_full as f64 * step;
    let steps = n_full + usize::from(tail > 1e-12 * step);
    let mut t = 0.0;
    for n in 1..=steps {
        let h = if n > n_full { tail } else { step };
        let next = rk4_step(&y, h, &field);
        let (s_next, v_next) = unpack(&next);
        if !in_admissible_region(s_next) {
            return Err(FlowError::StateLeftRegion {
                t,
                last: unpack(&y).0,
            }
            .into());
        }
        if closure.is_none() {
            if let Some(tc) = stationary_closure {
                if tc > t && tc <= t + h {
                    let at = rk4_step(&y, tc - t, &field);
                    closure = Some((tc, unpack(&at).1));
                }
            } else if let Some(sec) = &shift_section {
                let g = |z: &Packed| sec.signed_distance(AngleState::new(z[0], z[1]));
                if g(&y) < 0.0 && g(&next) >= 0.0 {
                    let (tau, at) = refine_crossing(&y, h, &field, &g);
                    let (s_at, v_at) = unpack(&at);
                    if s_at.distance(target) <= opts.section_match_tol {
                        closure = Some((t + tau, v_at));
                    }
                }
            }
        }
        if return_time.is_none() {
            if let Some(sec) = &return_section {
                let g = |z: &Packed| sec.signed_distance(AngleState::new(z[0], z[1]));
                if t + h > 10.0 * step && g(&y) < 0.0 && g(&next) >= 0.0 {
                    let (tau, at) = refine_crossing(&y, h, &field, &g);
                    if unpack(&at).0.distance(s0) <= opts.section_match_tol {
                        return_time = Some(t + tau);
                    }
                }
            }
        }
        y = next;
        t = if n > n_full { duration } else { n as f64 * step };
        residual = residual.max(radius_residual(h_ref.value(), s_next, &v_next));
        if n % opts.record_every == 0 || n == steps {
            times.push(t);
            angles.push(s_next);
            positions.push(v_next);
        }
    }

    let (closure_time, closure_vertices) = closure.ok_or(TracerError::NoReturn { duration })?;
    Ok(VertexFlow {
        times,
        angles,
        positions,
        h_reference: h_ref,
        orientation,
        closure_time,
        closure_defect: closure_vertices[0].distance(hex.vertices[1]),
        return_time,
        radius_residual: residual,
    })
}

/// Trajectory dump, one `t,i,x,y` row per vertex and sample (1-based `i`).
pub fn write_trajectory_csv<W: Write>(flow: &VertexFlow, mut out: W) -> io::Result<()> {
    writeln!(out, "t,i,x,y")?;
    for (t, p) in flow.times.iter().zip(&flow.positions) {
        for (i, v) in p.iter().enumerate() {
            writeln!(out, "{},{},{},{}", t, i + 1, v.x, v.y)?;
        }
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ClosureRow {
    #[serde(rename = "H")]
    pub h: f64,
    pub closure_defect: f64,
    pub radius_residual: f64,
}

pub const CLOSURE_CSV_HEADER: &str = "H,closure_defect,radius_residual";

/// Starting state for an energy level: the diagonal point `(u_-, u_-)`, or
/// the regular hexagon for energies within [`DEGENERATE_GAP`] of `H_max`.
pub fn closure_start(h: EnergyLevel) -> Result<(AngleState, f64), TracerError> {
    if h.value() <= H_MAX && H_MAX - h.value() <= DEGENERATE_GAP {
        return Ok((AngleState::regular(), 2.0 * (2.0 * PI / 3.0)));
    }
    let tp = turning_points(h)?;
    let t = period(h)?.period;
    Ok((AngleState::new(tp.u_minus, tp.u_minus), 1.05 * t))
}

pub fn closure_row(h: EnergyLevel, step: f64) -> Result<ClosureRow, TracerError> {
    let (s0, duration) = closure_start(h)?;
    let flow = trace(s0, duration, step)?;
    Ok(ClosureRow {
        h: h.value(),
        closure_defect: flow.closure_defect,
        radius_residual: flow.radius_residual,
    })
}

pub fn closure_scan(
    grid: &[EnergyLevel],
    step: f64,
    exec: Execution,
) -> Result<Vec<ClosureRow>, TracerError> {
    map_ordered(exec, grid, |&h| closure_row(h, step))
        .into_iter()
        .collect()
}

pub fn write_closure_csv<W: Write>(rows: &[ClosureRow], mut out: W) -> io::Result<()> {
    writeln!(out, "{CLOSURE_CSV_HEADER}")?;
    for r in rows {
        writeln!(out, "{},{},{}", r.h, r.closure_defect, r.radius_residual)?;
    }
    Ok(())
}

/// Central symmetry of a traced hexagon at sample `k`.
pub fn sample_symmetry_defect(flow: &VertexFlow, k: usize) -> f64 {
    central_symmetry_defect(&Hexagon {
        vertices: flow.positions[k],
    })
}
