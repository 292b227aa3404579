//! Exact-arithmetic engine for categorical-entropy lower bounds and induced
//! spectral radii of autoequivalences, at the level of numerical lattices and
//! cohomology dimension profiles.
//!
//! * [`lattice`]: integer lattices, matrices, characteristic polynomials and
//!   certified spectral radii.
//! * [`autoeq`]: autoequivalence words and their class actions.
//! * [`graded`]: graded dimension vectors, intervals and long exact sequence
//!   propagation through exact triangles.
//! * [`twist`]: the ℙⁿ-twist recurrence on a hyperkähler model, δ′ series and
//!   entropy bounds; spherical twist iteration on K3 surfaces.
//! * [`hilb`]: transfer to Hilbert schemes of points via tensor powers and
//!   symmetric invariants.
//! * [`descent`]: descent through cyclic covers (Enriques-type quotients).

pub mod autoeq;
pub mod descent;
pub mod error;
pub mod graded;
pub mod hilb;
pub mod lattice;
pub mod series;
pub mod twist;

pub use error::{Error, Result};
