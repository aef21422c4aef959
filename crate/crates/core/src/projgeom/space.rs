use super::{c, orthonormal_columns, null_space, CMat, CVec, GeomError};
use crate::TOL_PROJ;

/// Point of `ℂPⁿ` in normal form: unit norm, first coordinate of modulus
/// above [`TOL_PROJ`] real and positive.
#[derive(Clone, Debug, PartialEq)]
pub struct ProjPoint {
    coords: CVec,
}

impl ProjPoint {
    pub fn new(v: CVec) -> Result<Self, GeomError> {
        let n = v.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(GeomError::ZeroVector);
        }
        let mut u = v / c(n, 0.0);
        if let Some(z) = u.iter().find(|z| z.norm() > TOL_PROJ).copied() {
            let phase = z.conj() / z.norm();
            u *= phase;
        }
        Ok(ProjPoint { coords: u })
    }

    pub fn from_real(v: &[f64]) -> Result<Self, GeomError> {
        Self::new(CVec::from_iterator(v.len(), v.iter().map(|&x| c(x, 0.0))))
    }

    pub fn coords(&self) -> &CVec {
        &self.coords
    }

    pub fn ambient_dim(&self) -> usize {
        self.coords.len() - 1
    }

    /// `min_φ ‖p − e^{iφ} q‖` for the unit representatives.
    pub fn distance(&self, other: &ProjPoint) -> f64 {
        let ip = other.coords.dotc(&self.coords);
        let phase = if ip.norm() > 0.0 { ip / ip.norm() } else { c(1.0, 0.0) };
        (&self.coords - &other.coords * phase).norm()
    }

    pub fn approx_eq(&self, other: &ProjPoint) -> bool {
        self.distance(other) <= TOL_PROJ
    }
}

/// Projective subspace stored through an orthonormal basis of its cone.
#[derive(Clone, Debug, PartialEq)]
pub struct ProjSubspace {
    basis: CMat,
}

impl ProjSubspace {
    /// Span of the columns of `m`; errors if they are all zero.
    pub fn from_columns(m: &CMat) -> Result<Self, GeomError> {
        let basis = orthonormal_columns(m, TOL_PROJ);
        if basis.ncols() == 0 {
            return Err(GeomError::ZeroVector);
        }
        Ok(ProjSubspace { basis })
    }

    pub fn from_vectors(vs: &[CVec]) -> Result<Self, GeomError> {
        Self::from_columns(&CMat::from_columns(vs))
    }

    pub fn basis(&self) -> &CMat {
        &self.basis
    }

    /// Projective dimension.
    pub fn dim(&self) -> usize {
        self.basis.ncols() - 1
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.nrows() - 1
    }

    pub fn point(&self, coeffs: &CVec) -> Result<ProjPoint, GeomError> {
        ProjPoint::new(&self.basis * coeffs)
    }

    /// `‖v − P v‖ / ‖v‖` for the orthogonal projector `P` onto the subspace.
    pub fn residual(&self, v: &CVec) -> f64 {
        let n = v.norm();
        if n == 0.0 {
            return 0.0;
        }
        let proj = &self.basis * (self.basis.adjoint() * v);
        (v - proj).norm() / n
    }

    pub fn contains_point(&self, p: &ProjPoint) -> bool {
        self.residual(p.coords()) <= TOL_PROJ
    }

    pub fn subspace_residual(&self, other: &ProjSubspace) -> f64 {
        other
            .basis
            .column_iter()
            .map(|col| self.residual(&col.into_owned()))
            .fold(0.0, f64::max)
    }

    pub fn contains(&self, other: &ProjSubspace) -> bool {
        self.subspace_residual(other) <= TOL_PROJ
    }

    pub fn approx_eq(&self, other: &ProjSubspace) -> bool {
        self.dim() == other.dim() && self.contains(other)
    }

    /// The unique point of a 0-dimensional subspace.
    pub fn as_point(&self) -> Result<ProjPoint, GeomError> {
        if self.dim() != 0 {
            return Err(GeomError::BadDimension { expected: 0, got: self.dim() });
        }
        ProjPoint::new(self.basis.column(0).into_owned())
    }
}

/// Anything that spans a subspace: points and subspaces.
pub trait Spanning {
    fn spanning_vectors(&self) -> Vec<CVec>;
}

impl Spanning for ProjPoint {
    fn spanning_vectors(&self) -> Vec<CVec> {
        vec![self.coords.clone()]
    }
}

impl Spanning for ProjSubspace {
    fn spanning_vectors(&self) -> Vec<CVec> {
        self.basis.column_iter().map(|c| c.into_owned()).collect()
    }
}

/// Smallest subspace containing every input.
pub fn span(objs: &[&dyn Spanning]) -> Result<ProjSubspace, GeomError> {
    let vs: Vec<CVec> = objs.iter().flat_map(|o| o.spanning_vectors()).collect();
    if vs.is_empty() {
        return Err(GeomError::ZeroVector);
    }
    let n = vs[0].len();
    if let Some(bad) = vs.iter().find(|v| v.len() != n) {
        return Err(GeomError::AmbientMismatch(n, bad.len()));
    }
    ProjSubspace::from_vectors(&vs)
}

/// Exact linear-algebra intersection; `None` when the cones meet only in 0.
pub fn intersect(a: &ProjSubspace, b: &ProjSubspace) -> Result<Option<ProjSubspace>, GeomError> {
    if a.basis.nrows() != b.basis.nrows() {
        return Err(GeomError::AmbientMismatch(a.basis.nrows(), b.basis.nrows()));
    }
    let (ka, kb) = (a.basis.ncols(), b.basis.ncols());
    let mut m = CMat::zeros(a.basis.nrows(), ka + kb);
    m.view_mut((0, 0), (a.basis.nrows(), ka)).copy_from(&a.basis);
    m.view_mut((0, ka), (a.basis.nrows(), kb)).copy_from(&(-&b.basis));
    let null = null_space(&m, TOL_PROJ);
    if null.ncols() == 0 {
        return Ok(None);
    }
    let coeffs = null.rows(0, ka).into_owned();
    let vecs = &a.basis * coeffs;
    let basis = orthonormal_columns(&vecs, TOL_PROJ);
    if basis.ncols() == 0 {
        return Ok(None);
    }
    Ok(Some(ProjSubspace { basis }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn e(n: usize, i: usize) -> CVec {
        let mut v = CVec::zeros(n);
        v[i] = c(1.0, 0.0);
        v
    }

    fn rand_vec(rng: &mut ChaCha8Rng, n: usize) -> CVec {
        CVec::from_fn(n, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
    }

    #[test]
    fn normal_form_is_scale_invariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let v = rand_vec(&mut rng, 4);
            let s = c(rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0));
            let p = ProjPoint::new(v.clone()).unwrap();
            let q = ProjPoint::new(v * s).unwrap();
            assert!((p.coords() - q.coords()).norm() < 1e-12);
            assert!(p.coords()[0].im.abs() < 1e-15 && p.coords()[0].re > 0.0);
        }
        assert_eq!(ProjPoint::new(CVec::zeros(3)), Err(GeomError::ZeroVector));
    }

    #[test]
    fn span_examples() {
        let p0 = ProjPoint::new(e(4, 0)).unwrap();
        let p1 = ProjPoint::new(e(4, 1)).unwrap();
        let line = span(&[&p0, &p1]).unwrap();
        assert_eq!(line.dim(), 1);
        let mid = ProjPoint::new(e(4, 0) + e(4, 1)).unwrap();
        assert!(span(&[&mid, &line]).unwrap().approx_eq(&line));
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let pts: Vec<ProjPoint> = (0..4).map(|_| ProjPoint::new(rand_vec(&mut rng, 6)).unwrap()).collect();
        let refs: Vec<&dyn Spanning> = pts.iter().map(|p| p as &dyn Spanning).collect();
        assert_eq!(span(&refs).unwrap().dim(), 3);
    }

    #[test]
    fn intersect_examples() {
        let l01 = ProjSubspace::from_vectors(&[e(4, 0), e(4, 1)]).unwrap();
        let l12 = ProjSubspace::from_vectors(&[e(4, 1), e(4, 2)]).unwrap();
        let l23 = ProjSubspace::from_vectors(&[e(4, 2), e(4, 3)]).unwrap();
        let p = intersect(&l01, &l12).unwrap().unwrap().as_point().unwrap();
        assert!(p.approx_eq(&ProjPoint::new(e(4, 1)).unwrap()));
        assert!(intersect(&l01, &l23).unwrap().is_none());
    }

    #[test]
    fn generic_planes_in_p3_meet_in_a_line_and_lines_in_a_plane_meet_in_a_point() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let a = ProjSubspace::from_vectors(&[rand_vec(&mut rng, 4), rand_vec(&mut rng, 4), rand_vec(&mut rng, 4)]).unwrap();
            let b = ProjSubspace::from_vectors(&[rand_vec(&mut rng, 4), rand_vec(&mut rng, 4), rand_vec(&mut rng, 4)]).unwrap();
            let line = intersect(&a, &b).unwrap().unwrap();
            assert_eq!(line.dim(), 1);
            assert!(a.contains(&line) && b.contains(&line));
            // two lines inside a plane of CP^5
            let plane: Vec<CVec> = (0..3).map(|_| rand_vec(&mut rng, 6)).collect();
            let pick = |rng: &mut ChaCha8Rng| -> CVec {
                plane.iter().fold(CVec::zeros(6), |acc, v| acc + v * c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            };
            let l0 = ProjSubspace::from_vectors(&[pick(&mut rng), pick(&mut rng)]).unwrap();
            let l1 = ProjSubspace::from_vectors(&[pick(&mut rng), pick(&mut rng)]).unwrap();
            assert_eq!(intersect(&l0, &l1).unwrap().unwrap().dim(), 0);
        }
    }
}
