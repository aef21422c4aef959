//! Complex projective geometry over `ℂP³` and `ℂP⁵`.
//!
//! Points and subspaces carry floating-point homogeneous coordinates; all
//! incidence decisions go through singular values with the relative
//! threshold [`TOL_PROJ`](crate::TOL_PROJ). Lines of `ℂP³` attached to an
//! almost complex structure are projectivized `(0,1)`-eigenspaces
//! (`Jv = −iv`), and their Plücker coordinates live in `ℂP⁵` with the
//! order `(01, 02, 03, 12, 13, 23)`.

mod junction;
mod klein;
mod real;
mod ruling;
mod space;

pub use junction::{common_metric, junction, junction_index, JunctionOutcome, JunctionParams, MAX_RETRIES};
pub use klein::{pluecker_embed, pluecker_extract, pluecker_form, KleinPoint};
pub use real::{min_fixed_point_residual, real_point_candidates, real_points_on_real_line, RealKind, RealStructure};
pub use ruling::{acs_from_line, acs_to_ruling_line, ruling_line_to_acs, structure_line, QuadricModel};
pub use space::{intersect, span, ProjPoint, ProjSubspace, Spanning};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use thiserror::Error;

use crate::pointwise::AlgebraError;

pub type CVec = DVector<Complex64>;
pub type CMat = DMatrix<Complex64>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeomError {
    #[error("zero vector has no projective class")]
    ZeroVector,
    #[error("expected a subspace of projective dimension {expected}, got {got}")]
    BadDimension { expected: usize, got: usize },
    #[error("ambient dimensions differ ({0} vs {1})")]
    AmbientMismatch(usize, usize),
    #[error("point violates the Plücker relation (residual {0:.3e})")]
    NotOnGrassmannian(f64),
    #[error("matrix does not define an antiholomorphic involution (residual {0:.3e})")]
    NotInvolutive(f64),
    #[error("real structure is quaternionic and has no real points")]
    QuaternionicStructure,
    #[error("line is not invariant under the real structure (residual {0:.3e})")]
    NotRealLine(f64),
    #[error("no two distinct real points found on the line")]
    NoRealPoints,
    #[error("line is not isotropic for the quadric (residual {0:.3e})")]
    NotIsotropic(f64),
    #[error("line meets its conjugate")]
    RealIntersection,
    #[error("line belongs to the opposite ruling")]
    OppositeRuling,
    #[error("degenerate configuration after {0} attempts")]
    DegenerateConfiguration(usize),
    #[error("structures induce different orientations")]
    IncompatibleOrientation,
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

pub(crate) fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub(crate) fn conj_vec(v: &CVec) -> CVec {
    v.map(|z| z.conj())
}

pub(crate) fn conj_mat(m: &CMat) -> CMat {
    m.map(|z| z.conj())
}

fn svd_threshold(sv: &[f64], rel_tol: f64) -> f64 {
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    rel_tol * smax.max(f64::MIN_POSITIVE)
}

/// Full SVD `(U, σ, V)` with `σ` nonincreasing. nalgebra's SVD loses
/// accuracy on rank-deficient inputs, so the factorization is delegated to
/// faer.
fn full_svd(m: &CMat) -> (CMat, Vec<f64>, CMat) {
    let (r, n) = m.shape();
    let fm = faer::Mat::<Complex64>::from_fn(r, n, |i, j| m[(i, j)]);
    let svd = fm.svd().expect("SVD of a finite matrix converges");
    let u = CMat::from_fn(r, r, |i, j| svd.U()[(i, j)]);
    let v = CMat::from_fn(n, n, |i, j| svd.V()[(i, j)]);
    let s = svd.S().column_vector().iter().map(|z| z.re).collect();
    (u, s, v)
}

fn full_svd_real(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let (r, n) = m.shape();
    let fm = faer::Mat::<f64>::from_fn(r, n, |i, j| m[(i, j)]);
    let svd = fm.svd().expect("SVD of a finite matrix converges");
    let v = DMatrix::from_fn(n, n, |i, j| svd.V()[(i, j)]);
    (svd.S().column_vector().iter().cloned().collect(), v)
}

/// Singular values in nonincreasing order.
pub(crate) fn singular_values(m: &CMat) -> Vec<f64> {
    full_svd(m).1
}

/// Orthonormal basis (columns) of the column space of `m`.
pub(crate) fn orthonormal_columns(m: &CMat, rel_tol: f64) -> CMat {
    let rows = m.nrows();
    if m.ncols() == 0 || m.norm() == 0.0 {
        return CMat::zeros(rows, 0);
    }
    let (u, s, _) = full_svd(m);
    let thr = svd_threshold(&s, rel_tol);
    let rank = s.iter().filter(|&&x| x > thr).count();
    u.columns(0, rank).into_owned()
}

/// Orthonormal basis of `{x : m x = 0}`.
pub(crate) fn null_space(m: &CMat, rel_tol: f64) -> CMat {
    let n = m.ncols();
    let (_, s, v) = full_svd(m);
    let thr = svd_threshold(&s, rel_tol);
    let rank = s.iter().filter(|&&x| x > thr).count();
    v.columns(rank, n - rank).into_owned()
}

/// Real-matrix counterpart of [`null_space`].
pub(crate) fn real_null_space(m: &DMatrix<f64>, rel_tol: f64) -> Vec<DVector<f64>> {
    let n = m.ncols();
    let (s, v) = full_svd_real(m);
    let thr = svd_threshold(&s, rel_tol);
    let rank = s.iter().filter(|&&x| x > thr).count();
    (rank..n).map(|k| v.column(k).into_owned()).collect()
}
