//! Generalized Euler-angle (KAK) parametrizations of compact groups and the
//! Haar-measure machinery that goes with them.
//!
//! The library provides, at desk scale (matrices up to 14×14):
//!
//! - dense complex linear algebra with a scaling-and-squaring matrix
//!   exponential and structural membership checks ([`linalg`]),
//! - the generic KAK/Euler-angle framework — Cartan data, restricted roots,
//!   the product-of-sines radial Jacobian, and a finite-difference
//!   Maurer–Cartan density oracle ([`kak`]),
//! - recursive Euler charts for SU(N), U(N) and U(N)/ℤ₂ᴺ ([`sun`]),
//! - the compact symplectic group Sp(N): algebra, restricted roots, region,
//!   centralizer group M ≅ ℤ₂ᴺ, full chart and closed-form Jacobian ([`spn`]),
//! - the exceptional group G₂ in its 7×7 realization: generators, Cartan
//!   split, K ≅ SO(4) charts, M = {1,σ,η,ση}, roots and root spaces, full
//!   chart and closed-form Jacobian ([`g2`]),
//! - deterministic quadrature and Monte-Carlo engines over chart domains and
//!   cube×torus domains ([`integrate`]),
//! - the 1/N-admissible function algebra with exact rational exponents, an
//!   exact convex-hull decision for the spectrum, and moment scans
//!   ([`admissible`]),
//! - the reductions lowering structured finite-type functions on Sp(N) and
//!   G₂ to admissible functions with explicit weights on cube×torus domains
//!   ([`transform`]).

pub mod admissible;
pub mod chart;
pub mod g2;
pub mod integrate;
pub mod kak;
pub mod linalg;
pub mod spn;
pub mod sun;
pub mod transform;

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("basis not adapted to involution: {0}")]
    NotAdapted(String),
    #[error("parameters on or near the chart boundary: {0}")]
    Boundary(String),
    #[error("point outside region: {0}")]
    Region(String),
    #[error("matrix fails group membership: {0}")]
    Membership(String),
    #[error("algebra closure failure: {0}")]
    Closure(String),
    #[error("non-rational structure constant: {0}")]
    Structure(String),
    #[error("size guard exceeded: {0}")]
    SizeGuard(String),
    #[error("non-finite integrand sample at {0}")]
    Poisoned(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
