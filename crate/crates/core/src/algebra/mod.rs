//! Exact arithmetic foundation: Gaussian rationals, phase-space polynomials,
//! truncated multi-parameter series and phase maps.

pub mod gaussian;
pub mod map;
pub mod poly;
pub mod series;
pub mod text;

pub use gaussian::{fmt_rational, parse_rational, GaussianRational};
pub use map::{compose, substitute, PhaseMap};
pub use poly::{Monomial, PhasePoly};
pub use series::{normalize_params, DeformedFn, Param, HBAR};
