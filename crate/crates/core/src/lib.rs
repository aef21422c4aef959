//! Hermitian triples `(g, J, ω)` on 4-dimensional spaces.
//!
//! * [`pointwise`]: exact linear algebra of a single triple, the self-dual
//!   splitting, the compatibility cone and the spinor fiber.
//! * [`projgeom`]: complex projective geometry of `ℂP³`/`ℂP⁵` with real
//!   structures, Plücker coordinates and the junction construction.
//! * [`hodge`]: cubical discrete exterior calculus on the periodic 4-torus,
//!   harmonic projection and the canonical class map.
//! * [`experiments`]: scenario runners used by the `hermitian4` binary.

pub mod experiments;
pub mod hodge;
pub mod pointwise;
pub mod projgeom;

/// Relative tolerance for pointwise algebraic predicates.
pub const TOL_ALG: f64 = 1e-10;

/// Tolerance on normal-form projective coordinates and rank decisions.
pub const TOL_PROJ: f64 = 1e-9;
