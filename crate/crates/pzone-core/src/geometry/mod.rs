//! Exact rational linear arithmetic and the convex-polyhedron kernel.
//!
//! Everything here is constraint-based: a polyhedron is a conjunction of
//! (strict or non-strict) linear inequalities over clocks and parameters,
//! and every decision (emptiness, containment, projection) reduces to
//! Fourier-Motzkin elimination over the rationals. There is no generator
//! representation and no floating point anywhere.

mod linear;
mod poly;
mod polyset;
mod rational;

pub use linear::{LinearInequality, Relation, Roster, VarId, VarKind};
pub use poly::{difference, Bound, ConvexPolyhedron, VarInterval};
pub use polyset::PolySet;
pub use rational::{lcm, Rational};

use thiserror::Error;

/// Structural misuse of the kernel.
#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum GeometryError {
    #[error("operands live on different variable rosters")]
    RosterMismatch,
    #[error("inequality references a variable outside the roster")]
    UnknownVariable,
    #[error("sample point misses a coordinate referenced by the constraint")]
    MissingCoordinate,
}
