//! Zindler carousels and floating bodies of density 1/6.
//!
//! The symmetric hexagon inscribed in a Zindler carousel is governed by a
//! one-degree-of-freedom Hamiltonian flow on its angles. This crate exposes
//! that flow, its period function, the vertex trajectories it generates and
//! the finite rotation-quantisation check built on the period bounds.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod flow;
pub mod geom;
mod ode;
pub mod par;
pub mod period;
pub mod polygon;
pub mod rigidity;
pub mod roots;
pub mod scalar;
pub mod tracer;

pub use flow::{
    flow_map, integrate_orbit, return_period, triple_angles, vector_field, FlowError, Method,
    Orbit, Section,
};
pub use geom::Vec2;
pub use par::Execution;
pub use period::{
    audit_parabolic_bounds, energy_grid, period, radius, turning_points, BoundAudit, PeriodError,
    PeriodResult, TurningPoints,
};
pub use polygon::{hexagon_from_angles, ClosedCurve, CurveSpec, Hexagon, PolygonError};
pub use rigidity::{feasibility_scan, perimeter_bounds, period_bounds, Interval, ProofReport};
pub use scalar::{hamiltonian, AngleState, EnergyLevel, H_BOUNDARY, H_MAX};
pub use tracer::{trace, TracerError, VertexFlow};
