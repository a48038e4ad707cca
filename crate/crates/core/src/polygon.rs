//! Hexagon geometry and inscribed-polygon diagnostics on closed curves.
//!
//! Polygons are counterclockwise and side lengths are normalised to 2.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use thiserror::Error;

use crate::geom::{interior_angles, side_lengths, signed_area, Vec2};

/// Common side length of every carousel polygon in this crate.
pub const SIDE: f64 = 2.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PolygonError {
    #[error("interior angles sum to {sum}, expected {expected}")]
    AngleSumInvalid { sum: f64, expected: f64 },
    #[error("angle {index} = {value} outside (pi/2, pi)")]
    AngleOutOfRange { index: usize, value: f64 },
    #[error("turtle walk misses its start by {gap:e}")]
    NonClosure { gap: f64 },
    #[error("alternate angle sums are {odd} and {even}, both must be 2 pi")]
    SumConstraintViolated { odd: f64, even: f64 },
    #[error("degenerate curve: {0}")]
    DegenerateCurve(String),
    #[error("invalid curve spec {0:?}; expected circle:R or ellipse:a,b")]
    InvalidCurveSpec(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PolygonTolerances {
    pub angle_sum: f64,
    pub closure: f64,
}

impl Default for PolygonTolerances {
    fn default() -> Self {
        Self {
            angle_sum: 1e-9,
            closure: 1e-9,
        }
    }
}

/// Six vertices in counterclockwise order.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Hexagon {
    pub vertices: [Vec2; 6],
}

impl Hexagon {
    pub fn edge(&self, i: usize) -> Vec2 {
        self.vertices[(i + 1) % 6] - self.vertices[i % 6]
    }

    pub fn side_midpoint(&self, i: usize) -> Vec2 {
        self.vertices[i % 6].midpoint(self.vertices[(i + 1) % 6])
    }

    pub fn side_lengths(&self) -> [f64; 6] {
        let v = side_lengths(&self.vertices);
        std::array::from_fn(|i| v[i])
    }

    pub fn interior_angles(&self) -> [f64; 6] {
        let v = interior_angles(&self.vertices);
        std::array::from_fn(|i| v[i])
    }

    pub fn area(&self) -> f64 {
        signed_area(&self.vertices)
    }

    /// Vertex centroid; the symmetry center for centrally symmetric hexagons.
    pub fn centroid(&self) -> Vec2 {
        self.vertices.iter().fold(Vec2::ZERO, |acc, &v| acc + v) * (1.0 / 6.0)
    }

    pub fn translated(&self, d: Vec2) -> Self {
        Self {
            vertices: self.vertices.map(|v| v + d),
        }
    }

    pub fn rotated(&self, theta: f64) -> Self {
        Self {
            vertices: self.vertices.map(|v| v.rotated(theta)),
        }
    }

    /// Translate so that the midpoint of `v1 v4` sits at the origin.
    pub fn centered(&self) -> Self {
        self.translated(-self.vertices[0].midpoint(self.vertices[3]))
    }

    /// All consecutive edge cross products share one sign.
    pub fn is_convex(&self) -> bool {
        let crosses: Vec<f64> = (0..6).map(|i| self.edge(i).cross(self.edge(i + 1))).collect();
        crosses.iter().all(|&c| c > 0.0) || crosses.iter().all(|&c| c < 0.0)
    }

    pub fn max_side_error(&self) -> f64 {
        self.side_lengths()
            .iter()
            .map(|l| (l - SIDE).abs())
            .fold(0.0, f64::max)
    }

    /// Triangle on the alternate vertices `v2, v4, v6`, measured.
    pub fn interior_triangle(&self) -> InteriorTriangle {
        let [a, b, c] = [self.vertices[1], self.vertices[3], self.vertices[5]];
        let angle_at = |p: Vec2, q: Vec2, r: Vec2| {
            let (u, w) = (q - p, r - p);
            u.cross(w).abs().atan2(u.dot(w))
        };
        InteriorTriangle {
            psi: [angle_at(a, b, c), angle_at(b, c, a), angle_at(c, a, b)],
            l: [b.distance(c), c.distance(a), a.distance(b)],
        }
    }
}

/// Turtle construction: sides of length 2, turning by `pi - x_i` at each
/// vertex. The first vertex is at the origin and the first side runs along
/// `+x`; vertex `i` carries interior angle `x[i]`.
pub fn hexagon_from_angles(x: [f64; 6]) -> Result<Hexagon, PolygonError> {
    hexagon_from_angles_with(x, &PolygonTolerances::default())
}

pub fn hexagon_from_angles_with(
    x: [f64; 6],
    tol: &PolygonTolerances,
) -> Result<Hexagon, PolygonError> {
    for (index, &value) in x.iter().enumerate() {
        if !(FRAC_PI_2 < value && value < PI) {
            return Err(PolygonError::AngleOutOfRange { index, value });
        }
    }
    let sum: f64 = x.iter().sum();
    if (sum - 4.0 * PI).abs() > tol.angle_sum {
        return Err(PolygonError::AngleSumInvalid {
            sum,
            expected: 4.0 * PI,
        });
    }
    let mut vertices = [Vec2::ZERO; 6];
    let mut p = Vec2::ZERO;
    let mut heading = 0.0;
    for i in 0..6 {
        vertices[i] = p;
        p += Vec2::from_angle(heading) * SIDE;
        heading += PI - x[(i + 1) % 6];
    }
    let gap = p.norm();
    if gap > tol.closure {
        return Err(PolygonError::NonClosure { gap });
    }
    Ok(Hexagon { vertices })
}

/// Angles `psi_i` and sides `l_i` of the triangle `v2 v4 v6`; `l_i` is
/// opposite `psi_i`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InteriorTriangle {
    pub psi: [f64; 3],
    pub l: [f64; 3],
}

impl InteriorTriangle {
    pub fn angle_sum(&self) -> f64 {
        self.psi.iter().sum()
    }

    /// `sin(psi_i) / l_i`, equal for a genuine triangle.
    pub fn sine_ratios(&self) -> [f64; 3] {
        std::array::from_fn(|i| self.psi[i].sin() / self.l[i])
    }

    pub fn sine_ratio_spread(&self) -> f64 {
        let r = self.sine_ratios();
        let hi = r.iter().cloned().fold(f64::MIN, f64::max);
        let lo = r.iter().cloned().fold(f64::MAX, f64::min);
        hi - lo
    }
}

/// `psi_1 = x2 - x5/2`, `psi_2 = x4 - x1/2`, `psi_3 = x6 - x3/2`, with
/// `l_1 = 4 sin(x5/2)`, `l_2 = 4 sin(x1/2)`, `l_3 = 4 sin(x3/2)`.
pub fn interior_triangle(x: [f64; 6]) -> Result<InteriorTriangle, PolygonError> {
    let odd = x[0] + x[2] + x[4];
    let even = x[1] + x[3] + x[5];
    let tol = PolygonTolerances::default().angle_sum;
    if (odd - 2.0 * PI).abs() > tol || (even - 2.0 * PI).abs() > tol {
        return Err(PolygonError::SumConstraintViolated { odd, even });
    }
    Ok(InteriorTriangle {
        psi: [x[1] - x[4] / 2.0, x[3] - x[0] / 2.0, x[5] - x[2] / 2.0],
        l: [
            2.0 * SIDE * (x[4] / 2.0).sin(),
            2.0 * SIDE * (x[0] / 2.0).sin(),
            2.0 * SIDE * (x[2] / 2.0).sin(),
        ],
    })
}

/// Largest distance between the midpoints of opposite-vertex pairs.
pub fn central_symmetry_defect(h: &Hexagon) -> f64 {
    let v = &h.vertices;
    let reference = v[0].midpoint(v[3]);
    (0..3)
        .map(|i| v[i].midpoint(v[i + 3]).distance(reference))
        .fold(0.0, f64::max)
}

/// Rescales polygon data with side `side` to the normalised side 2.
pub fn normalize_side(points: &[Vec2], side: f64) -> Vec<Vec2> {
    let k = SIDE / side;
    points.iter().map(|&p| p * k).collect()
}

/// A closed curve parametrised by arc length `t`, taken modulo the perimeter.
pub trait ClosedCurve: Send + Sync {
    fn perimeter(&self) -> f64;
    fn point(&self, t: f64) -> Vec2;
    fn unit_tangent(&self, t: f64) -> Vec2;
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Circle {
    pub center: Vec2,
    pub radius: f64,
}

impl Circle {
    pub fn new(radius: f64) -> Self {
        Self {
            center: Vec2::ZERO,
            radius,
        }
    }
}

impl ClosedCurve for Circle {
    fn perimeter(&self) -> f64 {
        2.0 * PI * self.radius
    }

    fn point(&self, t: f64) -> Vec2 {
        self.center + Vec2::from_angle(t / self.radius) * self.radius
    }

    fn unit_tangent(&self, t: f64) -> Vec2 {
        Vec2::from_angle(t / self.radius + FRAC_PI_2)
    }
}

/// Axis-aligned ellipse `(a cos phi, b sin phi)` reparametrised by arc length.
///
/// A table of cumulative length at 4096 equally spaced `phi` gives a linear
/// first guess for `phi(t)`; two Newton steps on `s(phi) - t`, with `s`
/// evaluated by 5-point Gauss-Legendre inside the bracketing table cell,
/// bring the parameter to near machine precision.
#[derive(Clone, Debug, PartialEq)]
pub struct Ellipse {
    a: f64,
    b: f64,
    table: Vec<f64>,
}

const ELLIPSE_TABLE: usize = 4096;

const GL5_NODES: [f64; 5] = [
    -0.906_179_845_938_664,
    -0.538_469_310_105_683,
    0.0,
    0.538_469_310_105_683,
    0.906_179_845_938_664,
];
const GL5_WEIGHTS: [f64; 5] = [
    0.236_926_885_056_189,
    0.478_628_670_499_366,
    0.568_888_888_888_889,
    0.478_628_670_499_366,
    0.236_926_885_056_189,
];

impl Ellipse {
    pub fn new(a: f64, b: f64) -> Result<Self, PolygonError> {
        if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
            return Err(PolygonError::DegenerateCurve(format!(
                "ellipse semi-axes {a}, {b} must be positive"
            )));
        }
        let mut e = Self {
            a,
            b,
            table: Vec::with_capacity(ELLIPSE_TABLE + 1),
        };
        let dphi = 2.0 * PI / ELLIPSE_TABLE as f64;
        let mut acc = 0.0;
        e.table.push(0.0);
        for k in 0..ELLIPSE_TABLE {
            let lo = k as f64 * dphi;
            acc += e.length_between(lo, lo + dphi);
            e.table.push(acc);
        }
        Ok(e)
    }

    pub fn semi_axes(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    fn speed(&self, phi: f64) -> f64 {
        (self.a * phi.sin()).hypot(self.b * phi.cos())
    }

    fn length_between(&self, lo: f64, hi: f64) -> f64 {
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        half * GL5_NODES
            .iter()
            .zip(GL5_WEIGHTS)
            .map(|(&x, w)| w * self.speed(mid + half * x))
            .sum::<f64>()
    }

    fn parameter(&self, t: f64) -> f64 {
        let p = self.perimeter();
        let t = t.rem_euclid(p);
        let dphi = 2.0 * PI / ELLIPSE_TABLE as f64;
        let k = match self.table.binary_search_by(|s| s.total_cmp(&t)) {
            Ok(k) => k.min(ELLIPSE_TABLE - 1),
            Err(k) => k.saturating_sub(1).min(ELLIPSE_TABLE - 1),
        };
        let (s0, s1) = (self.table[k], self.table[k + 1]);
        let phi0 = k as f64 * dphi;
        let mut phi = phi0 + (t - s0) / (s1 - s0) * dphi;
        for _ in 0..2 {
            let s = s0 + self.length_between(phi0, phi);
            phi -= (s - t) / self.speed(phi);
        }
        phi
    }
}

impl ClosedCurve for Ellipse {
    fn perimeter(&self) -> f64 {
        self.table[ELLIPSE_TABLE]
    }

    fn point(&self, t: f64) -> Vec2 {
        let phi = self.parameter(t);
        Vec2::new(self.a * phi.cos(), self.b * phi.sin())
    }

    fn unit_tangent(&self, t: f64) -> Vec2 {
        let phi = self.parameter(t);
        Vec2::new(-self.a * phi.sin(), self.b * phi.cos()).normalized()
    }
}

/// A curve moved by a rotation about the origin followed by a translation.
#[derive(Clone, Debug, PartialEq)]
pub struct RigidMotion<C> {
    pub inner: C,
    pub rotation: f64,
    pub translation: Vec2,
}

impl<C> RigidMotion<C> {
    pub fn new(inner: C, rotation: f64, translation: Vec2) -> Self {
        Self {
            inner,
            rotation,
            translation,
        }
    }
}

impl<C: ClosedCurve> ClosedCurve for RigidMotion<C> {
    fn perimeter(&self) -> f64 {
        self.inner.perimeter()
    }

    fn point(&self, t: f64) -> Vec2 {
        self.inner.point(t).rotated(self.rotation) + self.translation
    }

    fn unit_tangent(&self, t: f64) -> Vec2 {
        self.inner.unit_tangent(t).rotated(self.rotation)
    }
}

/// Curve description accepted on the command line: `circle:R` or
/// `ellipse:a,b`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CurveSpec {
    Circle { radius: f64 },
    Ellipse { a: f64, b: f64 },
}

impl CurveSpec {
    pub fn build(&self) -> Result<Box<dyn ClosedCurve>, PolygonError> {
        match *self {
            CurveSpec::Circle { radius } if radius > 0.0 && radius.is_finite() => {
                Ok(Box::new(Circle::new(radius)))
            }
            CurveSpec::Circle { radius } => Err(PolygonError::DegenerateCurve(format!(
                "circle radius {radius} must be positive"
            ))),
            CurveSpec::Ellipse { a, b } => Ok(Box::new(Ellipse::new(a, b)?)),
        }
    }
}

impl FromStr for CurveSpec {
    type Err = PolygonError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || PolygonError::InvalidCurveSpec(s.to_string());
        let (kind, args) = s.split_once(':').ok_or_else(bad)?;
        let nums: Vec<f64> = args
            .split(',')
            .map(|p| p.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| bad())?;
        match (kind.trim(), nums.as_slice()) {
            ("circle", [r]) => Ok(CurveSpec::Circle { radius: *r }),
            ("ellipse", [a, b]) => Ok(CurveSpec::Ellipse { a: *a, b: *b }),
            _ => Err(bad()),
        }
    }
}

impl fmt::Display for CurveSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CurveSpec::Circle { radius } => write!(f, "circle:{radius}"),
            CurveSpec::Ellipse { a, b } => write!(f, "ellipse:{a},{b}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct InscribedPolygon {
    pub vertices: Vec<Vec2>,
    pub side_lengths: Vec<f64>,
    pub interior_angles: Vec<f64>,
}

fn check_vertex_count(n: usize) -> Result<(), PolygonError> {
    if n < 3 {
        return Err(PolygonError::InvalidArgument(format!(
            "polygon needs at least 3 vertices, got {n}"
        )));
    }
    Ok(())
}

/// Vertices `gamma(t + i P / N)` for `i = 0..N`.
pub fn inscribed_polygon<C: ClosedCurve + ?Sized>(
    curve: &C,
    t: f64,
    n: usize,
) -> Result<InscribedPolygon, PolygonError> {
    check_vertex_count(n)?;
    let p = curve.perimeter();
    if !(p > 0.0 && p.is_finite()) {
        return Err(PolygonError::DegenerateCurve(format!("perimeter {p}")));
    }
    let vertices: Vec<Vec2> = (0..n)
        .map(|i| curve.point(t + i as f64 * p / n as f64))
        .collect();
    let sides = side_lengths(&vertices);
    if sides.iter().any(|&l| !(l > 1e-12)) {
        return Err(PolygonError::DegenerateCurve("repeated vertices".into()));
    }
    let angles = interior_angles(&vertices);
    Ok(InscribedPolygon {
        vertices,
        side_lengths: sides,
        interior_angles: angles,
    })
}

/// Largest deviation of any inscribed side length from the global mean side,
/// over `t_samples` equally spaced start parameters.
pub fn carousel_defect<C: ClosedCurve + ?Sized>(
    curve: &C,
    n: usize,
    t_samples: usize,
) -> Result<f64, PolygonError> {
    check_vertex_count(n)?;
    if t_samples < 2 {
        return Err(PolygonError::InvalidArgument(format!(
            "need at least 2 samples, got {t_samples}"
        )));
    }
    let p = curve.perimeter();
    let mut sides = Vec::with_capacity(n * t_samples);
    for j in 0..t_samples {
        let poly = inscribed_polygon(curve, j as f64 * p / t_samples as f64, n)?;
        sides.extend(poly.side_lengths);
    }
    let mean = mean_side(&sides);
    Ok(sides.iter().map(|l| (l - mean).abs()).fold(0.0, f64::max))
}

/// Mean inscribed side length over `t_samples` start parameters.
pub fn mean_inscribed_side<C: ClosedCurve + ?Sized>(
    curve: &C,
    n: usize,
    t_samples: usize,
) -> Result<f64, PolygonError> {
    check_vertex_count(n)?;
    let p = curve.perimeter();
    let mut sides = Vec::new();
    for j in 0..t_samples.max(1) {
        sides.extend(inscribed_polygon(curve, j as f64 * p / t_samples as f64, n)?.side_lengths);
    }
    Ok(mean_side(&sides))
}

fn mean_side(sides: &[f64]) -> f64 {
    sides.iter().sum::<f64>() / sides.len() as f64
}

/// Largest normalised cross product between each side and the velocity of
/// its midpoint; the velocity is a central difference with step `dt`.
pub fn midpoint_parallel_defect<C: ClosedCurve + ?Sized>(
    curve: &C,
    n: usize,
    t: f64,
    dt: f64,
) -> Result<f64, PolygonError> {
    check_vertex_count(n)?;
    if !(dt > 0.0) {
        return Err(PolygonError::InvalidArgument(format!("dt {dt} must be positive")));
    }
    let fwd = inscribed_polygon(curve, t + dt, n)?;
    let bwd = inscribed_polygon(curve, t - dt, n)?;
    let now = inscribed_polygon(curve, t, n)?;
    let mut worst: f64 = 0.0;
    for i in 0..n {
        let j = (i + 1) % n;
        let m_fwd = fwd.vertices[i].midpoint(fwd.vertices[j]);
        let m_bwd = bwd.vertices[i].midpoint(bwd.vertices[j]);
        let m_dot = (m_fwd - m_bwd) * (0.5 / dt);
        let e = now.vertices[j] - now.vertices[i];
        let scale = m_dot.norm() * e.norm();
        if scale > 0.0 {
            worst = worst.max(m_dot.cross(e).abs() / scale);
        }
    }
    Ok(worst)
}

/// Writes `i,x,y` rows with 1-based vertex labels.
pub fn write_polygon_csv<W: Write>(points: &[Vec2], mut out: W) -> io::Result<()> {
    writeln!(out, "i,x,y")?;
    for (i, p) in points.iter().enumerate() {
        writeln!(out, "{},{},{}", i + 1, p.x, p.y)?;
    }
    Ok(())
}
