//! Sparse domination machinery on finite spaces of homogeneous type.
//!
//! The crate works on a [`space::FiniteSpace`]: finitely many points with
//! positive masses and a quasi-metric. On top of it:
//!
//! - [`dyadic`]: dyadic systems, adjacent families, covering partitions and
//!   sparseness certificates;
//! - [`matrix_weight`]: matrix weights, Muckenhoupt constants and reducing
//!   matrices;
//! - [`convex_body`]: convex-body averages, their John ellipsoids and kernel
//!   representations;
//! - [`operators`]: Haar systems and multipliers, maximal functions, Hörmander
//!   constants and testing conditions;
//! - [`sparse_engine`]: the stopping-time decomposition with certificates;
//! - [`harness`]: scenario files, weighted-bound campaigns and reports.

pub mod convex_body;
pub mod dyadic;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod matrix_weight;
pub mod operators;
pub mod space;
pub mod sparse_engine;

pub use error::{Error, Hypothesis, Result};
