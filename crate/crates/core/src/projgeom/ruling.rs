use nalgebra::Vector4;

use super::{c, conj_mat, singular_values, CMat, CVec, GeomError, ProjSubspace};
use crate::pointwise::{AlgebraError, AlmostComplex4, Mat4, Metric4, Orientation};
use crate::TOL_PROJ;

/// Smooth quadric `{vᵀ G v = 0}` of `ℂP³` cut out by a complexified metric,
/// with a chosen ruling recorded as the orientation of its structures.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadricModel {
    gram: CMat,
    orientation: Orientation,
}

impl QuadricModel {
    pub fn from_metric(g: &Metric4, orientation: Orientation) -> Self {
        let gram = CMat::from_fn(4, 4, |i, j| c(g.matrix()[(i, j)], 0.0));
        QuadricModel { gram, orientation }
    }

    pub fn gram(&self) -> &CMat {
        &self.gram
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    pub fn metric(&self) -> Metric4 {
        Metric4::new_unchecked(Mat4::from_fn(|i, j| self.gram[(i, j)].re))
    }

    /// `max |bᵢᵀ G bⱼ| / ‖G‖` over an orthonormal basis of the line.
    pub fn isotropy_residual(&self, line: &ProjSubspace) -> f64 {
        let b = line.basis();
        let m = b.transpose() * &self.gram * b;
        m.iter().map(|z| z.norm()).fold(0.0, f64::max) / self.gram.norm()
    }

    pub fn contains_line(&self, line: &ProjSubspace) -> bool {
        self.isotropy_residual(line) <= TOL_PROJ
    }
}

/// The `−i`-eigenspace of `J`, spanned by the vectors `e + iJe`.
pub fn structure_line(j: &AlmostComplex4) -> ProjSubspace {
    let jm = j.matrix();
    let cols: Vec<CVec> = (0..4)
        .map(|k| {
            let e = Vector4::ith(k, 1.0);
            let je = jm * e;
            CVec::from_fn(4, |i, _| c(e[i], je[i]))
        })
        .collect();
    ProjSubspace::from_vectors(&cols).expect("eigenspace is nonzero")
}

/// The ruling line of `J` on the quadric of `g`.
pub fn acs_to_ruling_line(j: &AlmostComplex4, g: &Metric4) -> Result<(ProjSubspace, QuadricModel), GeomError> {
    let res = j.compatibility_residual(g);
    if res > crate::TOL_ALG {
        return Err(AlgebraError::IncompatiblePair(res).into());
    }
    Ok((structure_line(j), QuadricModel::from_metric(g, j.orientation())))
}

/// `J = −i` on `L`, `+i` on `L̄`; fails when `L` meets `L̄`.
pub fn acs_from_line(line: &ProjSubspace) -> Result<AlmostComplex4, GeomError> {
    if line.ambient_dim() != 3 {
        return Err(GeomError::AmbientMismatch(4, line.ambient_dim() + 1));
    }
    if line.dim() != 1 {
        return Err(GeomError::BadDimension { expected: 1, got: line.dim() });
    }
    let l = line.basis();
    let mut b = CMat::zeros(4, 4);
    b.view_mut((0, 0), (4, 2)).copy_from(l);
    b.view_mut((0, 2), (4, 2)).copy_from(&conj_mat(l));
    let sv = singular_values(&b);
    if sv[3] <= TOL_PROJ * sv[0] {
        return Err(GeomError::RealIntersection);
    }
    let binv = b.clone().try_inverse().ok_or(GeomError::RealIntersection)?;
    let d = CMat::from_diagonal(&CVec::from_vec(vec![c(0.0, -1.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 1.0)]));
    let jc = &b * d * binv;
    let jm = Mat4::from_fn(|i, k| jc[(i, k)].re);
    Ok(AlmostComplex4::new(jm)?)
}

/// Inverse of [`acs_to_ruling_line`]; a line of the other ruling is reported
/// as [`GeomError::OppositeRuling`].
pub fn ruling_line_to_acs(line: &ProjSubspace, q: &QuadricModel) -> Result<AlmostComplex4, GeomError> {
    let res = q.isotropy_residual(line);
    if res > TOL_PROJ {
        return Err(GeomError::NotIsotropic(res));
    }
    let j = acs_from_line(line)?;
    if j.orientation() != q.orientation() {
        return Err(GeomError::OppositeRuling);
    }
    Ok(j)
}
