//! Scalar functions of the reduced hexagon problem.
//!
//! Everything here is a pure function of its arguments. Angles are in
//! radians; there is no degree interface anywhere in the crate.

use std::f64::consts::{FRAC_PI_2, PI, SQRT_2};

/// Largest value of the Hamiltonian on the boundary of the admissible
/// region, `1 + sqrt(2)`.
pub const H_BOUNDARY: f64 = 1.0 + SQRT_2;

/// Value of the Hamiltonian at the regular hexagon, `3 sqrt(3) / 2`.
pub const H_MAX: f64 = 2.598_076_211_353_316;

/// Interior angle of the regular hexagon, `2 pi / 3`.
pub const CRITICAL_ANGLE: f64 = 2.0 * PI / 3.0;

/// Lower bound on the period function, `pi sqrt(3/2)`.
pub const PERIOD_LOWER_BOUND: f64 = 3.847_649_490_485_592;

/// Upper bound on the period function, `2 pi / sqrt((4 - sqrt(2)) / 2)`.
pub const PERIOD_UPPER_BOUND: f64 = 5.525_842_974_018_157;

/// Period of the small oscillations around the regular hexagon, `4 pi / 3`.
pub const LINEARIZED_PERIOD: f64 = 4.0 * PI / 3.0;

/// Pair of interior angles `(x, y)` at two consecutive hexagon vertices.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AngleState {
    pub x: f64,
    pub y: f64,
}

impl AngleState {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    /// The regular hexagon, the unique critical point of the flow.
    pub const fn regular() -> Self {
        Self::new(CRITICAL_ANGLE, CRITICAL_ANGLE)
    }

    pub fn swapped(self) -> Self {
        Self::new(self.y, self.x)
    }

    /// Cyclic relabelling `(x1, x2) -> (x2, x3)` with `x3 = 2 pi - x1 - x2`.
    pub fn shifted(self) -> Self {
        Self::new(self.y, 2.0 * PI - self.x - self.y)
    }

    pub fn distance(self, other: Self) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Conserved energy of the reduced flow; a quarter of the hexagon area.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct EnergyLevel(pub f64);

impl EnergyLevel {
    pub const fn new(h: f64) -> Self {
        Self(h)
    }

    pub const fn value(self) -> f64 {
        self.0
    }

    /// True for energies carrying non-constant closed orbits in the region.
    pub fn is_oscillatory(self) -> bool {
        H_BOUNDARY < self.0 && self.0 < H_MAX
    }
}

impl From<f64> for EnergyLevel {
    fn from(h: f64) -> Self {
        Self(h)
    }
}

/// Half-sum and half-difference coordinates `u = (x+y)/2`, `v = (x-y)/2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SymmetricCoords {
    pub u: f64,
    pub v: f64,
}

/// `H(x, y) = sin x + sin y - sin(x + y)`.
pub fn hamiltonian(s: AngleState) -> EnergyLevel {
    EnergyLevel(s.x.sin() + s.y.sin() - (s.x + s.y).sin())
}

/// `(dH/dx, dH/dy)`.
pub fn hamiltonian_gradient(s: AngleState) -> [f64; 2] {
    let cxy = (s.x + s.y).cos();
    [s.x.cos() - cxy, s.y.cos() - cxy]
}

/// Symmetric 2x2 matrix, row major.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sym2 {
    pub xx: f64,
    pub xy: f64,
    pub yy: f64,
}

impl Sym2 {
    pub fn det(&self) -> f64 {
        self.xx * self.yy - self.xy * self.xy
    }

    pub fn trace(&self) -> f64 {
        self.xx + self.yy
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> [f64; 2] {
        let half_tr = 0.5 * self.trace();
        let disc = (0.25 * (self.xx - self.yy).powi(2) + self.xy * self.xy).sqrt();
        [half_tr - disc, half_tr + disc]
    }

    pub fn is_negative_definite(&self) -> bool {
        self.xx < 0.0 && self.det() > 0.0
    }
}

pub fn hamiltonian_hessian(s: AngleState) -> Sym2 {
    let sxy = (s.x + s.y).sin();
    Sym2 {
        xx: -s.x.sin() + sxy,
        xy: sxy,
        yy: -s.y.sin() + sxy,
    }
}

/// `F(u) = 2 sin u - sin 2u`; its level sets give the turning points.
pub fn f_profile(u: f64) -> f64 {
    2.0 * u.sin() - (2.0 * u).sin()
}

/// `G(u) = 2 sin u + sin 2u`.
pub fn g_profile(u: f64) -> f64 {
    2.0 * u.sin() + (2.0 * u).sin()
}

pub fn f_profile_derivative(u: f64) -> f64 {
    2.0 * u.cos() - 2.0 * (2.0 * u).cos()
}

pub fn f_profile_second_derivative(u: f64) -> f64 {
    -2.0 * u.sin() + 4.0 * (2.0 * u).sin()
}

/// Effective potential `Q_H(u) = sin^2 u - (H + sin 2u)^2 / 4`, so that
/// `u'^2 = Q_H(u)` along an orbit of energy `H`.
pub fn q_potential(h: EnergyLevel, u: f64) -> f64 {
    let s = u.sin();
    let w = h.0 + (2.0 * u).sin();
    s * s - 0.25 * w * w
}

/// Same quantity through the factorisation `(F(u) - H)(G(u) + H) / 4`.
pub fn q_potential_factored(h: EnergyLevel, u: f64) -> f64 {
    0.25 * (f_profile(u) - h.0) * (g_profile(u) + h.0)
}

/// `Q_H''(u) = 2 (1 + cos 2u + H sin 2u - 2 cos^2 2u)`.
pub fn q_second_derivative(h: EnergyLevel, u: f64) -> f64 {
    let c2 = (2.0 * u).cos();
    2.0 * (1.0 + c2 + h.0 * (2.0 * u).sin() - 2.0 * c2 * c2)
}

/// Membership in the open triangle `pi/2 < x, pi/2 < y, x + y < 3 pi / 2`.
/// Strict inequalities, no tolerance.
pub fn in_admissible_region(s: AngleState) -> bool {
    s.x > FRAC_PI_2 && s.y > FRAC_PI_2 && s.x + s.y < 3.0 * FRAC_PI_2
}

/// Euclidean distance to the boundary of the admissible triangle, signed:
/// positive inside, negative outside.
pub fn distance_to_boundary(s: AngleState) -> f64 {
    let to_left = s.x - FRAC_PI_2;
    let to_bottom = s.y - FRAC_PI_2;
    let to_diagonal = (3.0 * FRAC_PI_2 - s.x - s.y) / SQRT_2;
    to_left.min(to_bottom).min(to_diagonal)
}

pub fn to_symmetric(s: AngleState) -> SymmetricCoords {
    SymmetricCoords {
        u: 0.5 * (s.x + s.y),
        v: 0.5 * (s.x - s.y),
    }
}

pub fn from_symmetric(c: SymmetricCoords) -> AngleState {
    AngleState::new(c.u + c.v, c.u - c.v)
}

/// `H = 2 sin u (cos v - cos u)`.
pub fn hamiltonian_symmetric(c: SymmetricCoords) -> EnergyLevel {
    EnergyLevel(2.0 * c.u.sin() * (c.v.cos() - c.u.cos()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_4;

    const SQRT_3: f64 = 1.732_050_807_568_877_2;

    #[test]
    fn named_constants_match_their_expressions() {
        assert_eq!(H_MAX, 1.5 * 3f64.sqrt());
        assert!((PERIOD_LOWER_BOUND - PI * 1.5f64.sqrt()).abs() < 1e-15);
        let upper = 2.0 * PI / ((4.0 - SQRT_2) / 2.0).sqrt();
        assert!((PERIOD_UPPER_BOUND - upper).abs() < 1e-14);
    }

    #[test]
    fn hamiltonian_reference_points() {
        let hmax = hamiltonian(AngleState::regular()).value();
        assert!((hmax - 3.0 * SQRT_3 / 2.0).abs() < 1e-15);
        let h0 = hamiltonian(AngleState::new(3.0 * FRAC_PI_4, FRAC_PI_2)).value();
        assert!((h0 - H_BOUNDARY).abs() < 1e-15);
        let corner = hamiltonian(AngleState::new(FRAC_PI_2, FRAC_PI_2)).value();
        assert!((corner - 2.0).abs() < 1e-15);
    }

    #[test]
    fn hessian_at_regular_hexagon() {
        let m = hamiltonian_hessian(AngleState::regular());
        assert!((m.xx + SQRT_3).abs() < 1e-15);
        assert!((m.yy + SQRT_3).abs() < 1e-15);
        assert!((m.xy + SQRT_3 / 2.0).abs() < 1e-15);
        assert!((m.det() - 2.25).abs() < 1e-14);
        let g = hamiltonian_gradient(AngleState::regular());
        assert!(g[0].abs() < 1e-15 && g[1].abs() < 1e-15);
    }

    #[test]
    fn hessian_matches_finite_differences_at_center() {
        // central second differences of H, step 1e-5
        let s = AngleState::regular();
        let e = 1e-5;
        let h = |x: f64, y: f64| hamiltonian(AngleState::new(x, y)).value();
        let hxx = (h(s.x + e, s.y) - 2.0 * h(s.x, s.y) + h(s.x - e, s.y)) / (e * e);
        let hxy = (h(s.x + e, s.y + e) - h(s.x + e, s.y - e) - h(s.x - e, s.y + e)
            + h(s.x - e, s.y - e))
            / (4.0 * e * e);
        let m = hamiltonian_hessian(s);
        assert!((hxx - m.xx).abs() < 1e-4);
        assert!((hxy - m.xy).abs() < 1e-4);
    }

    #[test]
    fn hessian_negative_definite_on_grid() {
        let mut checked = 0;
        for i in 1..=10 {
            for j in 1..=10 {
                let s = AngleState::new(
                    FRAC_PI_2 + i as f64 * FRAC_PI_2 / 11.0,
                    FRAC_PI_2 + j as f64 * FRAC_PI_2 / 11.0,
                );
                if !in_admissible_region(s) {
                    continue;
                }
                let [lo, hi] = hamiltonian_hessian(s).eigenvalues();
                assert!(lo < 0.0 && hi < 0.0, "{s:?}");
                checked += 1;
            }
        }
        assert!(checked > 40);
    }

    #[test]
    fn profiles() {
        assert!((f_profile(CRITICAL_ANGLE) - H_MAX).abs() < 1e-15);
        assert!((f_profile(FRAC_PI_2) - 2.0).abs() < 1e-15);
        assert!((f_profile(3.0 * FRAC_PI_4) - H_BOUNDARY).abs() < 1e-15);
        assert!((g_profile(FRAC_PI_2) - 2.0).abs() < 1e-15);
        assert!(f_profile_derivative(CRITICAL_ANGLE).abs() < 1e-14);
    }

    #[test]
    fn potential_examples() {
        let h = EnergyLevel(2.5);
        let expected = 0.75 - (2.5 - SQRT_3 / 2.0).powi(2) / 4.0;
        assert!((q_potential(h, CRITICAL_ANGLE) - expected).abs() < 1e-15);
        assert!((expected - 0.082_53).abs() < 1e-5);

        // double root at the center for H = H_max
        let hm = EnergyLevel(H_MAX);
        assert!(q_potential(hm, CRITICAL_ANGLE).abs() < 1e-15);
        let e = 1e-6;
        let dq = (q_potential(hm, CRITICAL_ANGLE + e) - q_potential(hm, CRITICAL_ANGLE - e))
            / (2.0 * e);
        assert!(dq.abs() < 1e-9);
        assert!((q_second_derivative(hm, CRITICAL_ANGLE) + 4.5).abs() < 1e-14);
    }

    #[test]
    fn q_second_derivative_matches_finite_differences() {
        let h = EnergyLevel(2.45);
        let e = 1e-4;
        for k in 0..20 {
            let u = 1.7 + 0.04 * k as f64;
            let fd = (q_potential(h, u + e) - 2.0 * q_potential(h, u) + q_potential(h, u - e))
                / (e * e);
            assert!((fd - q_second_derivative(h, u)).abs() < 1e-6);
        }
    }

    #[test]
    fn admissible_region_membership() {
        assert!(in_admissible_region(AngleState::regular()));
        assert!(!in_admissible_region(AngleState::new(FRAC_PI_2, CRITICAL_ANGLE)));
        assert!(!in_admissible_region(AngleState::new(5.0 * PI / 6.0, 5.0 * PI / 6.0)));
        assert!(distance_to_boundary(AngleState::regular()) > 0.0);
        assert!(distance_to_boundary(AngleState::new(1.5, 2.0)) < 0.0);
    }

    #[test]
    fn symmetric_coordinates() {
        let c = to_symmetric(AngleState::regular());
        assert!((c.u - CRITICAL_ANGLE).abs() < 1e-15 && c.v == 0.0);
        let s = AngleState::new(2.0, 2.2);
        let h1 = hamiltonian(s).value();
        let h2 = hamiltonian_symmetric(to_symmetric(s)).value();
        assert!((h1 - h2).abs() < 1e-14);
        assert!((h1 - 2.589_369).abs() < 1e-6);
    }
}
