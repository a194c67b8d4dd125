//! Combinatorial and numerical machinery for configuration-space invariants
//! of long n-knots.
//!
//! * [`diagram`], [`canon`], [`enumerate`], [`patterns`], [`cycle`] — Jacobi
//!   diagrams: validation, canonical forms, enumeration, degeneracy patterns,
//!   cycle and symmetry bookkeeping.
//! * [`linalg`], [`algebra`] — exact relation spaces, the quotient A_k and the
//!   weight functional w_k.
//! * [`laurent`], [`alexander`], [`schemes`] — ribbon presentations, Fox
//!   calculus, the normalized Alexander polynomial, α_k and k-schemes.
//! * [`chord_map`] — singular-disk data to chord diagrams and the pairing value.
//! * [`mc`] — Monte Carlo evaluation of Gauss-type configuration integrals.

pub mod algebra;
pub mod alexander;
pub mod canon;
pub mod chord_map;
pub mod cycle;
pub mod diagram;
pub mod enumerate;
pub mod laurent;
pub mod linalg;
pub mod mc;
pub mod patterns;
pub mod schemes;

/// Library-wide error classification (validation vs. resource bound vs. structure).
#[derive(Debug, thiserror::Error, Clone, PartialEq, Eq)]
pub enum Error {
    /// Invalid input data.
    #[error("validation error: {0}")]
    Validation(String),
    /// A configured size bound was exceeded.
    #[error("resource bound exceeded: {0}")]
    Resource(String),
    /// An internal consistency check failed.
    #[error("structural error: {0}")]
    Structural(String),
}

pub use canon::{automorphism_count, canonicalize, CanonicalForm};
pub use diagram::{wheel_diagram, EdgeKind, JacobiDiagram, VertexClass};
