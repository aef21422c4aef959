use nalgebra::Vector4;
use serde::{Deserialize, Serialize};

use super::{AlgebraError, AlmostComplex4, Mat4, Metric4};
use crate::TOL_ALG;

/// Parameters `(a, b, c)` of the `J`-invariant symmetric form
/// `[[a, b, 0, 0], [b, c, 0, 0], [0, 0, a, b], [0, 0, b, c]]`
/// in the frame where `J = [[0, −E], [E, 0]]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConePoint {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConeClass {
    Positive,
    Negative,
    Degenerate,
    Indefinite,
}

impl ConePoint {
    pub fn new(a: f64, b: f64, c: f64) -> Self {
        ConePoint { a, b, c }
    }

    /// `ac − b²`.
    pub fn lobachevsky_norm(&self) -> f64 {
        self.a * self.c - self.b * self.b
    }

    pub fn scaled(&self, s: f64) -> Self {
        ConePoint { a: self.a * s, b: self.b * s, c: self.c * s }
    }

    /// The symmetric matrix in the cone frame (no definiteness check).
    pub fn to_metric(&self) -> Metric4 {
        let (a, b, c) = (self.a, self.b, self.c);
        #[rustfmt::skip]
        let m = Mat4::new(
            a, b, 0.0, 0.0,
            b, c, 0.0, 0.0,
            0.0, 0.0, a, b,
            0.0, 0.0, b, c,
        );
        Metric4::new_unchecked(m)
    }

    /// Reads `(a, b, c)` off a metric compatible with `j`, in the frame
    /// `(v₀, v₁, Jv₀, Jv₁)` where `v₀ = e₀` and `v₁` is the first of
    /// `e₁, e₂, e₃` with the largest euclidean residual against `span{v₀, Jv₀}`,
    /// orthonormalized. The frame is orthonormal when `J` is orthogonal.
    pub fn from_metric(g: &Metric4, j: &AlmostComplex4) -> Result<Self, AlgebraError> {
        let res = j.compatibility_residual(g);
        if res > TOL_ALG {
            return Err(AlgebraError::IncompatiblePair(res));
        }
        let jm = j.matrix();
        let v0 = Vector4::x();
        let jv0 = (jm * v0).normalize();
        let mut best: Option<(f64, Vector4<f64>)> = None;
        for k in 1..4 {
            let e = Vector4::ith(k, 1.0);
            let r = e - v0 * v0.dot(&e);
            let r = r - jv0 * jv0.dot(&r);
            let n = r.norm();
            if best.map_or(true, |(bn, _)| n > bn + 1e-12) {
                best = Some((n, r / n));
            }
        }
        let v1 = best.expect("three candidates").1;
        let p = Mat4::from_columns(&[v0, v1, jm * v0, jm * v1]);
        let a = p.transpose() * g.matrix() * p;
        let gamma = a[(0, 3)];
        if gamma.abs() > TOL_ALG * a.norm() {
            return Err(AlgebraError::OffConeSlice(gamma));
        }
        Ok(ConePoint { a: a[(0, 0)], b: a[(0, 1)], c: a[(1, 1)] })
    }
}

pub fn classify_cone(p: &ConePoint) -> ConeClass {
    let det = p.lobachevsky_norm();
    let scale = p.a * p.a + p.b * p.b + p.c * p.c;
    if det.abs() <= TOL_ALG * scale {
        ConeClass::Degenerate
    } else if det < 0.0 {
        ConeClass::Indefinite
    } else if p.a + p.c > 0.0 {
        ConeClass::Positive
    } else {
        ConeClass::Negative
    }
}

/// Radial retraction onto the unit hyperboloid `ac − b² = 1`.
pub fn lobachevsky_normalize(p: &ConePoint) -> Result<ConePoint, AlgebraError> {
    if classify_cone(p) != ConeClass::Positive {
        return Err(AlgebraError::NotInCone);
    }
    Ok(p.scaled(1.0 / p.lobachevsky_norm().sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn classification_examples() {
        assert_eq!(classify_cone(&ConePoint::new(1.0, 0.0, 1.0)), ConeClass::Positive);
        assert_eq!(classify_cone(&ConePoint::new(-1.0, 0.0, -1.0)), ConeClass::Negative);
        assert_eq!(classify_cone(&ConePoint::new(1.0, 1.0, 1.0)), ConeClass::Degenerate);
        assert_eq!(classify_cone(&ConePoint::new(1.0, 2.0, 1.0)), ConeClass::Indefinite);
    }

    #[test]
    fn normalize_examples() {
        assert_eq!(lobachevsky_normalize(&ConePoint::new(4.0, 0.0, 1.0)).unwrap(), ConePoint::new(2.0, 0.0, 0.5));
        assert_eq!(lobachevsky_normalize(&ConePoint::new(1.0, 0.0, 1.0)).unwrap(), ConePoint::new(1.0, 0.0, 1.0));
        assert_eq!(lobachevsky_normalize(&ConePoint::new(2.0, 1.0, 1.0)).unwrap(), ConePoint::new(2.0, 1.0, 1.0));
        assert_eq!(lobachevsky_normalize(&ConePoint::new(-1.0, 0.0, -1.0)), Err(AlgebraError::NotInCone));
    }

    #[test]
    fn cone_metric_is_compatible_with_frame_structure() {
        let p = ConePoint::new(2.0, 0.3, 1.0);
        let g = p.to_metric();
        assert!(g.is_positive_definite());
        let j = AlmostComplex4::cone_frame();
        assert!(j.is_compatible(&g));
        assert_eq!(ConePoint::from_metric(&g, &j).unwrap(), p);
        let neg = ConePoint::new(-2.0, 0.3, -1.0).to_metric();
        assert!(!neg.is_positive_definite());
    }

    #[test]
    fn off_slice_metric_reported() {
        // hermitian form with an imaginary off-diagonal entry
        #[rustfmt::skip]
        let m = Mat4::new(
            1.0, 0.0, 0.0, 0.2,
            0.0, 1.0, -0.2, 0.0,
            0.0, -0.2, 1.0, 0.0,
            0.2, 0.0, 0.0, 1.0,
        );
        let g = Metric4::new(m).unwrap();
        let j = AlmostComplex4::cone_frame();
        assert!(j.is_compatible(&g));
        assert!(matches!(ConePoint::from_metric(&g, &j), Err(AlgebraError::OffConeSlice(_))));
    }

    proptest! {
        #[test]
        fn positive_class_iff_positive_definite(a in -3.0f64..3.0, b in -3.0f64..3.0, c in -3.0f64..3.0) {
            let p = ConePoint::new(a, b, c);
            let class = classify_cone(&p);
            prop_assume!(class != ConeClass::Degenerate);
            let lo = p.to_metric().min_eigenvalue();
            prop_assert_eq!(class == ConeClass::Positive, lo > 0.0);
        }

        #[test]
        fn normalize_idempotent_and_scale_free(a in 0.1f64..5.0, c in 0.1f64..5.0, t in -0.99f64..0.99, s in 0.01f64..100.0) {
            let b = t * (a * c).sqrt();
            let p = ConePoint::new(a, b, c);
            let n = lobachevsky_normalize(&p).unwrap();
            prop_assert!((n.lobachevsky_norm() - 1.0).abs() < 1e-10);
            let nn = lobachevsky_normalize(&n).unwrap();
            prop_assert!((nn.a - n.a).abs() + (nn.b - n.b).abs() + (nn.c - n.c).abs() < 1e-12 * (n.a + n.c));
            let ns = lobachevsky_normalize(&p.scaled(s)).unwrap();
            prop_assert!((ns.a - n.a).abs() + (ns.b - n.b).abs() + (ns.c - n.c).abs() < 1e-10 * (n.a + n.c));
        }
    }
}
