//! The rotation-quantisation argument as a finite feasibility check.
//!
//! A non-circular centrally symmetric body has a rotation group of order
//! `2k`; the basic rotation shifts arc length by `P / (2k)`, which must be
//! `m` periods of the radius, so `T = P / (2km)`. With `P` confined to
//! `[12, 2 pi (1 + sqrt 2)]` and `T` to the two-sided period bounds, no pair
//! `(k, m)` survives.

use std::f64::consts::{PI, SQRT_2};

use serde::Serialize;

use crate::par::{map_ordered, Execution};
use crate::period::{period, PeriodError};
use crate::scalar::{EnergyLevel, PERIOD_LOWER_BOUND, PERIOD_UPPER_BOUND};

/// Closed or open real interval, depending on the caller's reading.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Interval {
    pub low: f64,
    pub high: f64,
}

impl Interval {
    pub const fn new(low: f64, high: f64) -> Self {
        Self { low, high }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.low <= x && x <= self.high
    }

    pub fn as_array(&self) -> [f64; 2] {
        [self.low, self.high]
    }
}

/// Perimeter of any admissible body: at least the inscribed hexagon's 12, at
/// most the circumference of the disk of radius `1 + sqrt 2`.
pub fn perimeter_bounds() -> Interval {
    Interval::new(12.0, 2.0 * PI * (1.0 + SQRT_2))
}

/// Open interval `(pi sqrt(3/2), 2 pi / sqrt((4 - sqrt 2)/2))` for `T(H)`.
pub fn period_bounds() -> Interval {
    Interval::new(PERIOD_LOWER_BOUND, PERIOD_UPPER_BOUND)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SymmetryData {
    pub k: u32,
    pub m: u32,
    /// Basic rotation angle `pi / k`.
    pub sigma: f64,
    /// Arc-length shift of the basic rotation, `P / (2k)`.
    pub eta: f64,
    pub perimeter: f64,
}

impl SymmetryData {
    pub fn new(k: u32, m: u32, perimeter: f64) -> Self {
        Self {
            k,
            m,
            sigma: PI / k as f64,
            eta: perimeter / (2.0 * k as f64),
            perimeter,
        }
    }

    /// Period forced by the symmetry, `eta / m`.
    pub fn implied_period(&self) -> f64 {
        self.eta / self.m as f64
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FeasibilityRow {
    pub k: u32,
    pub m: u32,
    /// Open interval allowed by the period bounds.
    pub allowed: Interval,
    /// Closed interval `P / (2km)` for `P` in the perimeter bounds.
    pub required: Interval,
    pub feasible: bool,
    pub reason: String,
}

pub fn feasibility_row(k: u32, m: u32, allowed: Interval) -> FeasibilityRow {
    let p = perimeter_bounds();
    let km = 2.0 * (k as f64) * (m as f64);
    let required = Interval::new(p.low / km, p.high / km);
    let feasible = required.high > allowed.low && required.low < allowed.high;
    let reason = if required.low >= allowed.high {
        format!(
            "required T >= {:.6} but T < {:.6}",
            required.low, allowed.high
        )
    } else if required.high <= allowed.low {
        format!(
            "required T <= {:.6} but T > {:.6}",
            required.high, allowed.low
        )
    } else {
        format!(
            "required [{:.6}, {:.6}] meets allowed ({:.6}, {:.6})",
            required.low, required.high, allowed.low, allowed.high
        )
    };
    FeasibilityRow {
        k,
        m,
        allowed,
        required,
        feasible,
        reason,
    }
}

/// Every `(k, m)` with `1 <= k <= k_max`, `1 <= m <= m_max`, ordered by `k`
/// then `m`.
pub fn feasibility_scan(k_max: u32, m_max: u32, period_bounds: Interval) -> Vec<FeasibilityRow> {
    (1..=k_max)
        .flat_map(|k| (1..=m_max).map(move |m| (k, m)))
        .map(|(k, m)| feasibility_row(k, m, period_bounds))
        .collect()
}

/// Best integer explanation of `T = P / (2km)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Quantization {
    pub k: u32,
    pub m: u32,
    /// Every pair achieving the same residual, larger `k` first.
    pub ties: Vec<(u32, u32)>,
    pub residual: f64,
}

/// Relative tolerance on `|2kmT - P|`.
pub const QUANTIZATION_TOL: f64 = 1e-6;

pub fn period_quantization_check(
    period: f64,
    perimeter: f64,
    k_max: u32,
    m_max: u32,
) -> Option<Quantization> {
    if !(period > 0.0 && perimeter > 0.0) {
        return None;
    }
    let mut best = f64::INFINITY;
    let mut pairs: Vec<(u32, u32)> = Vec::new();
    for k in 1..=k_max {
        for m in 1..=m_max {
            let r = (2.0 * k as f64 * m as f64 * period - perimeter).abs();
            if r < best - 1e-15 * perimeter {
                best = r;
                pairs.clear();
                pairs.push((k, m));
            } else if (r - best).abs() <= 1e-15 * perimeter {
                pairs.push((k, m));
            }
        }
    }
    if best > QUANTIZATION_TOL * perimeter {
        return None;
    }
    pairs.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    let (k, m) = pairs[0];
    Some(Quantization {
        k,
        m,
        ties: pairs,
        residual: best,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MonotonicityRow {
    #[serde(rename = "H")]
    pub h: f64,
    #[serde(rename = "T")]
    pub period: f64,
    /// Sign of `T(H_i) - T(H_{i-1})`; absent on the first row.
    pub d_sign: Option<i8>,
}

/// Observational report of successive differences of `T(H)`; no claim about
/// monotonicity is made from it.
pub fn monotonicity_scan(
    grid: &[EnergyLevel],
    exec: Execution,
) -> Result<Vec<MonotonicityRow>, PeriodError> {
    if grid.windows(2).any(|w| !(w[1].value() > w[0].value())) {
        return Err(PeriodError::InvalidArgument("energy grid must be strictly increasing".into()));
    }
    let periods: Vec<f64> = map_ordered(exec, grid, |&h| period(h).map(|p| p.period))
        .into_iter()
        .collect::<Result<_, _>>()?;
    Ok(grid
        .iter()
        .zip(&periods)
        .enumerate()
        .map(|(i, (h, &t))| MonotonicityRow {
            h: h.value(),
            period: t,
            d_sign: (i > 0).then(|| {
                let d = t - periods[i - 1];
                if d > 0.0 {
                    1
                } else if d < 0.0 {
                    -1
                } else {
                    0
                }
            }),
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReportRow {
    pub k: u32,
    pub m: u32,
    pub feasible: bool,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProofReport {
    pub perimeter_bounds: [f64; 2],
    #[serde(rename = "T_bounds")]
    pub t_bounds: [f64; 2],
    pub rows: Vec<ReportRow>,
    pub conclusion: &'static str,
}

impl ProofReport {
    pub fn from_scan(t_bounds: Interval, rows: &[FeasibilityRow]) -> Self {
        let any = rows.iter().any(|r| r.feasible);
        Self {
            perimeter_bounds: perimeter_bounds().as_array(),
            t_bounds: t_bounds.as_array(),
            rows: rows
                .iter()
                .map(|r| ReportRow {
                    k: r.k,
                    m: r.m,
                    feasible: r.feasible,
                    reason: r.reason.clone(),
                })
                .collect(),
            conclusion: if any {
                "feasible_pairs_found"
            } else {
                "empty_feasible_set"
            },
        }
    }

    pub fn is_contradiction(&self) -> bool {
        self.conclusion == "empty_feasible_set"
    }

    /// Compact JSON.
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("report serialises")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::period::energy_grid;
    use crate::scalar::{H_BOUNDARY, H_MAX, LINEARIZED_PERIOD};

    #[test]
    fn perimeter_bounds_values() {
        let p = perimeter_bounds();
        assert_eq!(p.low, 12.0);
        assert!((p.high - 15.168_951_183_496).abs() < 1e-11);
        assert!(p.contains(4.0 * PI));
    }

    #[test]
    fn unit_pair_fails_on_the_upper_bound() {
        let row = feasibility_row(1, 1, period_bounds());
        assert!(!row.feasible);
        assert_eq!(row.required.low, 6.0);
        assert!(row.reason.contains("T >= 6.000000"));
    }

    #[test]
    fn double_products_fail_on_the_lower_bound() {
        for (k, m) in [(1, 2), (2, 1)] {
            let row = feasibility_row(k, m, period_bounds());
            assert!(!row.feasible);
            assert!((row.required.high - PI * (1.0 + SQRT_2) / 2.0).abs() < 1e-14);
            assert!(row.required.high < PERIOD_LOWER_BOUND);
        }
    }

    #[test]
    fn full_scan_is_empty() {
        let rows = feasibility_scan(10, 10, period_bounds());
        assert_eq!(rows.len(), 100);
        assert!(rows.iter().all(|r| !r.feasible));
        assert_eq!((rows[0].k, rows[0].m), (1, 1));
        assert_eq!((rows[1].k, rows[1].m), (1, 2));
    }

    #[test]
    fn widened_bounds_admit_pairs() {
        let rows = feasibility_scan(3, 3, Interval::new(3.0, 7.0));
        assert!(rows.iter().any(|r| r.feasible));
        let report = ProofReport::from_scan(Interval::new(3.0, 7.0), &rows);
        assert_eq!(report.conclusion, "feasible_pairs_found");
    }

    #[test]
    fn quantization_examples() {
        let p = 4.0 * PI;
        let q = period_quantization_check(p / 2.0, p, 10, 10).unwrap();
        assert_eq!((q.k, q.m), (1, 1));
        let q = period_quantization_check(p / 4.0, p, 10, 10).unwrap();
        assert_eq!((q.k, q.m), (2, 1));
        assert_eq!(q.ties, vec![(2, 1), (1, 2)]);
        assert!(period_quantization_check(p / (2.0 * SQRT_2), p, 10, 10).is_none());
        assert!(period_quantization_check(-1.0, p, 10, 10).is_none());
    }

    #[test]
    fn symmetry_data_relations() {
        let d = SymmetryData::new(3, 2, 13.0);
        assert!((d.sigma - PI / 3.0).abs() < 1e-15);
        assert!((d.eta - 13.0 / 6.0).abs() < 1e-15);
        assert!((d.implied_period() - 13.0 / 12.0).abs() < 1e-15);
    }

    #[test]
    fn monotonicity_scan_shape() {
        let grid = energy_grid(H_BOUNDARY + 1e-3, H_MAX - 1e-6, 100);
        let rows = monotonicity_scan(&grid, Execution::Sequential).unwrap();
        assert_eq!(rows.len(), 100);
        assert_eq!(rows.iter().filter(|r| r.d_sign.is_some()).count(), 99);
        assert!((rows[99].period - LINEARIZED_PERIOD).abs() < 1e-3);
        for r in [&rows[0], &rows[99]] {
            assert!(PERIOD_LOWER_BOUND < r.period && r.period < PERIOD_UPPER_BOUND);
        }
        let bad = [EnergyLevel(2.5), EnergyLevel(2.45)];
        assert!(monotonicity_scan(&bad, Execution::Sequential).is_err());
    }

    #[test]
    fn report_json_layout() {
        let rows = feasibility_scan(1, 1, period_bounds());
        let json = ProofReport::from_scan(period_bounds(), &rows).to_json();
        assert!(json.starts_with("{\"perimeter_bounds\":[12.0,"));
        assert!(json.contains("\"T_bounds\":["));
        assert!(json.contains("\"rows\":[{\"k\":1,\"m\":1,\"feasible\":false,\"reason\":"));
        assert!(json.ends_with("\"conclusion\":\"empty_feasible_set\"}"));
        assert!(!json.contains(' ') || !json.contains(": "));
    }
}
