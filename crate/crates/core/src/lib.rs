//! Numerical tools for the chordal Loewner equation `∂f/∂t = 2/(f − λ(t))`.
//!
//! The forward engine composes exact elementary slit maps over a time mesh,
//! the zipper inverts that process for a polygonal curve, and [`verify`] runs
//! the small-time asymptotic experiments on top of both.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod curve;
pub mod driving;
pub mod error;
pub mod evolution;
pub mod io;
pub mod mc;
pub mod measure;
pub mod mesh;
pub mod ode;
pub mod verify;
pub mod zipper;

pub use num_complex::Complex64;

pub use curve::Curve;
pub use driving::{DrivingTerm, SampledDriving};
pub use error::{Error, Result};
pub use evolution::{
    compute_trace, evolve, preimage, singular_solutions, slit_map, slit_map_inverse, solve_forward,
    trace_at, EvolutionResult,
};
pub use mc::{hm_mc_interval, hm_mc_oracle, McReport, Side};
pub use measure::{hm_interval, hm_slit_sides, measure_series, MeasureSeries};
pub use mesh::{time_ladder, TimeMesh};
pub use verify::{extrapolate_limit, BoundSequences, LimitEstimate, Report, Settings};
pub use zipper::{compute_driving, make_arc_curve, make_line_curve, make_vertical_curve};
