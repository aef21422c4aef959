//! Discrete exterior calculus on the periodic cubical 4-torus.
//!
//! Cochains live on the cells of a uniform grid with `n` cells per axis.
//! The metric enters through Galerkin mass matrices of the lowest-order
//! Whitney forms, with the metric of each cube taken as the mean of its
//! corner metrics. The codifferential is the adjoint of `d` for these inner
//! products, so the discrete Hodge decomposition is exactly orthogonal.

mod grid;
mod io;
mod ops;
mod solver;
mod topology;
mod triple;

pub use grid::{FormField, Grid4, CELLS_PER_VERTEX};
pub use io::{read_form, read_grid, write_form_binary, write_form_text, write_grid_binary, write_grid_text};
pub use ops::{
    asd_defect, cube_components, cube_pairing, d, d_star, d_star_with_tol, d_transpose, inner, laplacian_diagonal,
    mass_apply, mass_diagonal, norm, star, wedge_integral, TOL_MASS,
};
pub use solver::{hodge_decompose, pcg, pcg_scaled, CohomologyClass2, HarmonicNorm, HodgeSolver, HodgeSplit, SolveStats};
pub use triple::{
    conformal_rescale, dstar_omega_diagnostic, harmonic_norm, omega_wedge_harmonic, positivity_integral, positivity_with, tau,
    Positivity, TripleField,
};

use thiserror::Error;

use crate::pointwise::AlgebraError;

/// Default relative residual for the Laplace-type solves.
pub const TOL_SOLVE: f64 = 1e-8;

/// Default threshold on `max |period|` for a nonzero class.
pub const TOL_PS: f64 = 1e-4;

/// Iteration cap `50·n²` for a grid with `n` cells per axis.
pub fn default_max_iter(n: usize) -> usize {
    50 * n * n
}

#[derive(Debug, Error)]
pub enum HodgeError {
    #[error("grid needs at least 4 cells per axis, got {0}")]
    GridTooSmall(usize),
    #[error("expected {expected} values, got {got}")]
    BadLength { expected: usize, got: usize },
    #[error("metric at vertex {0} is not positive definite")]
    MetricNotSpd(usize),
    #[error("operator is not defined on degree {0}")]
    BadDegree(usize),
    #[error("degrees {0} and {1} do not match")]
    DegreeMismatch(usize, usize),
    #[error("grid has {0} cells per axis but the field has {1}")]
    GridMismatch(usize, usize),
    #[error("solver stopped after {iterations} iterations at relative residual {residual:.3e}")]
    SolverDiverged { iterations: usize, residual: f64 },
    #[error("harmonic part has negative square {0:.3e}")]
    NegativeSquare(f64),
    #[error("triple at vertex {0} is invalid")]
    InvalidTriple(usize),
    #[error("structure at vertex {0} has the opposite orientation to vertex 0")]
    MixedOrientation(usize),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error("malformed container: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
