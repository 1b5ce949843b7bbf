//! Translation-invariant valuations on convex polytopes given by smooth
//! kernels on the partial flag manifold of (k-plane, normal line) pairs.
//!
//! A kernel `f(E, l)` with `E` a k-dimensional subspace and `l` a unit vector
//! in `E^⊥` defines
//!
//! ```text
//! φ_f(P) = Σ_{F k-face} vol_k(F) · ∫_{γ_F} f(F̄, l) dl
//! ```
//!
//! where `γ_F` is the exterior angle of `P` at `F` with total mass one on the
//! full sphere `S(F̄^⊥)`. The crate covers polytope construction and face
//! lattices, exterior angles, kernel families, the valuation itself together
//! with continuity diagnostics, and the cosine transform on the sphere.

pub mod error;
pub mod faces;
pub mod geometry;
pub mod kernels;
pub mod linalg;
pub mod quadrature;
pub mod transforms;
pub mod valuation;

pub use error::{Error, Result};
pub use geometry::{Polytope, Vector};

/// Library version embedded in reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Global geometric tolerance.
pub const TOL: f64 = 1e-9;
