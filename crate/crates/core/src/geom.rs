//! Minimal planar vector type.

use std::ops::{Add, AddAssign, Mul, Neg, Sub};

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn from_angle(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Self::new(c, s)
    }

    pub fn dot(self, o: Self) -> f64 {
        self.x * o.x + self.y * o.y
    }

    pub fn cross(self, o: Self) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }

    pub fn normalized(self) -> Self {
        self * (1.0 / self.norm())
    }

    /// Counterclockwise rotation by `theta`.
    pub fn rotated(self, theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Self::new(c * self.x - s * self.y, s * self.x + c * self.y)
    }

    pub fn atan2(self) -> f64 {
        self.y.atan2(self.x)
    }

    pub fn midpoint(self, o: Self) -> Self {
        (self + o) * 0.5
    }

    pub fn distance(self, o: Self) -> f64 {
        (self - o).norm()
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl AddAssign for Vec2 {
    fn add_assign(&mut self, o: Vec2) {
        self.x += o.x;
        self.y += o.y;
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, k: f64) -> Vec2 {
        Vec2::new(self.x * k, self.y * k)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

/// Signed angle from `a` to `b` in `(-pi, pi]`.
pub fn signed_angle(a: Vec2, b: Vec2) -> f64 {
    a.cross(b).atan2(a.dot(b))
}

/// Shoelace area; positive for counterclockwise vertex order.
pub fn signed_area(points: &[Vec2]) -> f64 {
    let n = points.len();
    0.5 * (0..n)
        .map(|i| points[i].cross(points[(i + 1) % n]))
        .sum::<f64>()
}

/// Interior angles of a closed polygon, `pi` minus the signed turn at each
/// vertex (counterclockwise convention).
pub fn interior_angles(points: &[Vec2]) -> Vec<f64> {
    let n = points.len();
    (0..n)
        .map(|i| {
            let incoming = points[i] - points[(i + n - 1) % n];
            let outgoing = points[(i + 1) % n] - points[i];
            std::f64::consts::PI - signed_angle(incoming, outgoing)
        })
        .collect()
}

pub fn side_lengths(points: &[Vec2]) -> Vec<f64> {
    let n = points.len();
    (0..n).map(|i| points[i].distance(points[(i + 1) % n])).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn unit_square() {
        let sq = [
            Vec2::new(0.0, 0.0),
            Vec2::new(1.0, 0.0),
            Vec2::new(1.0, 1.0),
            Vec2::new(0.0, 1.0),
        ];
        assert!((signed_area(&sq) - 1.0).abs() < 1e-15);
        assert!(interior_angles(&sq).iter().all(|a| (a - FRAC_PI_2).abs() < 1e-15));
        assert!(side_lengths(&sq).iter().all(|l| (l - 1.0).abs() < 1e-15));
    }

    #[test]
    fn rotation_and_angle() {
        let v = Vec2::new(1.0, 0.0).rotated(FRAC_PI_2);
        assert!(v.distance(Vec2::new(0.0, 1.0)) < 1e-15);
        assert!((signed_angle(Vec2::new(1.0, 0.0), Vec2::new(-1.0, 1e-300)) - PI).abs() < 1e-12);
    }
}
