use num_complex::Complex64;

use super::{orthonormal_columns, CMat, CVec, GeomError, ProjPoint, ProjSubspace};
use crate::pointwise::PAIRS;
use crate::TOL_PROJ;

/// Point of the Klein quadric in `ℂP⁵`.
pub type KleinPoint = ProjPoint;

/// Symmetric bilinear form whose quadric is the Grassmannian:
/// `B(p, q) = p₀₁q₂₃ + p₂₃q₀₁ − p₀₂q₁₃ − p₁₃q₀₂ + p₀₃q₁₂ + p₁₂q₀₃`,
/// so that `B(p, p) = 2(p₀₁p₂₃ − p₀₂p₁₃ + p₀₃p₁₂)`.
pub fn pluecker_form(p: &CVec, q: &CVec) -> Complex64 {
    p[0] * q[5] + p[5] * q[0] - p[1] * q[4] - p[4] * q[1] + p[2] * q[3] + p[3] * q[2]
}

/// Plücker coordinates `p_ij = u_i v_j − u_j v_i` of a line of `ℂP³`.
pub fn pluecker_embed(line: &ProjSubspace) -> Result<KleinPoint, GeomError> {
    if line.ambient_dim() != 3 {
        return Err(GeomError::AmbientMismatch(4, line.ambient_dim() + 1));
    }
    if line.dim() != 1 {
        return Err(GeomError::BadDimension { expected: 1, got: line.dim() });
    }
    let b = line.basis();
    let (u, v) = (b.column(0), b.column(1));
    let p = CVec::from_iterator(6, PAIRS.iter().map(|&(i, j)| u[i] * v[j] - u[j] * v[i]));
    ProjPoint::new(p)
}

/// Inverse of [`pluecker_embed`]: the column space of the antisymmetric
/// matrix built from `p`, which has rank 2 exactly on the quadric.
pub fn pluecker_extract(p: &KleinPoint) -> Result<ProjSubspace, GeomError> {
    if p.ambient_dim() != 5 {
        return Err(GeomError::AmbientMismatch(6, p.ambient_dim() + 1));
    }
    let z = p.coords();
    let res = pluecker_form(z, z).norm();
    if res > TOL_PROJ {
        return Err(GeomError::NotOnGrassmannian(res));
    }
    let mut m = CMat::zeros(4, 4);
    for (k, &(i, j)) in PAIRS.iter().enumerate() {
        m[(i, j)] = z[k];
        m[(j, i)] = -z[k];
    }
    // on the quadric the singular values are (s, s, 0, 0)
    let basis = orthonormal_columns(&m, 1e-6);
    if basis.ncols() != 2 {
        return Err(GeomError::NotOnGrassmannian(res));
    }
    ProjSubspace::from_columns(&basis)
}
