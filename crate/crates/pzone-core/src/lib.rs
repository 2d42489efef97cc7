//! Exact parameter synthesis for parametric timed automata (PTAs) with
//! zone extrapolation.
//!
//! The crate is organized around five subsystems:
//!
//! * [`geometry`] - exact rational arithmetic and the convex-polyhedron
//!   kernel (Fourier-Motzkin elimination, zone operations, finite unions);
//! * [`model`] - PTA abstract syntax, a small textual model language,
//!   subclass classification, and concrete instantiation;
//! * [`extrapolation`] - per-clock constant bounds and the zone
//!   extrapolation operators, including the bounds for unbounded
//!   lower/upper-bound parameters;
//! * [`engine`] - the symbolic semantics and the synthesis traversals for
//!   reachability and accepting cycles, plus zone-graph export;
//! * [`oracle`] - an independent brute-force validator that model-checks
//!   concrete instantiations at sampled parameter valuations.

pub mod engine;
pub mod extrapolation;
pub mod geometry;
pub mod model;
pub mod oracle;

pub use engine::{ExplorationStats, ParamConstraint, SymbolicState, Termination};
pub use extrapolation::{BoundInputs, ClockBound, ClockBounds, ModeReport};
pub use geometry::{ConvexPolyhedron, PolySet, Rational, Roster, VarId};
pub use model::{Classification, ConcreteTa, ParamDomain, Pta};
