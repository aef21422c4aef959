//! Pointwise linear algebra of hermitian triples on `ℝ⁴`.
//!
//! Conventions used throughout the crate:
//!
//! * the positive orientation is `e⁰∧e¹∧e²∧e³`;
//! * a triple satisfies `ω(u, v) = g(u, Jv)`, so the matrix of `ω` is `g·J`;
//! * 2-forms are stored in the ordered basis
//!   `(e⁰¹, e⁰², e⁰³, e¹², e¹³, e²³)`.
//!
//! With these choices the structure [`AlmostComplex4::standard`] on the
//! euclidean metric gives `ω = e⁰¹ + e²³`.

mod cone;
mod forms;
mod spinor;

pub use cone::{classify_cone, lobachevsky_normalize, ConeClass, ConePoint};
pub use forms::{form_gram, hodge_star_2, sd_asd_split, star_matrix, subsets, Star2, TwoForm4, PAIRS};
pub use spinor::{check_spinc_constraints, clifford_action, sw_quadratic, unitary_frame, SpinorFiber};

use nalgebra::{Matrix4, SymmetricEigen, Vector4};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::TOL_ALG;

pub type Mat4 = Matrix4<f64>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AlgebraError {
    #[error("metric is not symmetric (relative residual {0:.3e})")]
    NotSymmetric(f64),
    #[error("bilinear form is not positive definite (smallest eigenvalue {0:.3e})")]
    NotPositive(f64),
    #[error("endomorphism does not square to -I (relative residual {0:.3e})")]
    NotComplexStructure(f64),
    #[error("metric and structure are incompatible (relative residual {0:.3e})")]
    IncompatiblePair(f64),
    #[error("cone point is not in the positive cone")]
    NotInCone,
    #[error("metric has a component outside the three-parameter cone slice (gamma = {0:.3e})")]
    OffConeSlice(f64),
    #[error("2-form is degenerate")]
    Degenerate,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    Positive,
    Negative,
}

impl Orientation {
    pub fn sign(self) -> f64 {
        match self {
            Orientation::Positive => 1.0,
            Orientation::Negative => -1.0,
        }
    }

    pub fn from_sign(s: f64) -> Self {
        if s >= 0.0 {
            Orientation::Positive
        } else {
            Orientation::Negative
        }
    }

    pub fn flip(self) -> Self {
        match self {
            Orientation::Positive => Orientation::Negative,
            Orientation::Negative => Orientation::Positive,
        }
    }
}

/// `‖a − b‖_F / max(‖a‖_F, ‖b‖_F)`, or the absolute difference when both vanish.
pub fn rel_residual(a: &Mat4, b: &Mat4) -> f64 {
    let scale = a.norm().max(b.norm());
    let diff = (a - b).norm();
    if scale > f64::MIN_POSITIVE {
        diff / scale
    } else {
        diff
    }
}

/// Symmetric positive-definite bilinear form at a point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Metric4(Mat4);

impl Metric4 {
    pub fn new(m: Mat4) -> Result<Self, AlgebraError> {
        let asym = rel_residual(&m, &m.transpose());
        if asym > TOL_ALG {
            return Err(AlgebraError::NotSymmetric(asym));
        }
        let g = Self::new_unchecked(m);
        let lo = g.min_eigenvalue();
        if lo <= TOL_ALG * g.0.norm() {
            return Err(AlgebraError::NotPositive(lo));
        }
        Ok(g)
    }

    /// Symmetrizes but does not check definiteness.
    pub fn new_unchecked(m: Mat4) -> Self {
        Metric4((m + m.transpose()) * 0.5)
    }

    pub fn identity() -> Self {
        Metric4(Mat4::identity())
    }

    pub fn diagonal(d: [f64; 4]) -> Result<Self, AlgebraError> {
        Self::new(Mat4::from_diagonal(&Vector4::from(d)))
    }

    pub fn matrix(&self) -> &Mat4 {
        &self.0
    }

    pub fn scaled(&self, s: f64) -> Self {
        Metric4(self.0 * s)
    }

    pub fn eigenvalues(&self) -> Vector4<f64> {
        SymmetricEigen::new(self.0).eigenvalues
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().min()
    }

    pub fn is_positive_definite(&self) -> bool {
        self.min_eigenvalue() > TOL_ALG * self.0.norm()
    }

    pub fn det(&self) -> f64 {
        self.0.determinant()
    }

    pub fn sqrt_det(&self) -> f64 {
        self.det().max(0.0).sqrt()
    }

    pub fn inverse(&self) -> Mat4 {
        self.0.try_inverse().expect("metric is singular")
    }

    /// Symmetric square root `A` with `A·A = g`.
    pub fn sqrt(&self) -> Mat4 {
        let eig = SymmetricEigen::new(self.0);
        let d = eig.eigenvalues.map(|x| x.max(0.0).sqrt());
        eig.eigenvectors * Mat4::from_diagonal(&d) * eig.eigenvectors.transpose()
    }

    pub fn apply(&self, u: &Vector4<f64>, v: &Vector4<f64>) -> f64 {
        u.dot(&(self.0 * v))
    }
}

/// Endomorphism `J` with `J² = −I`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AlmostComplex4(Mat4);

impl AlmostComplex4 {
    pub fn new(m: Mat4) -> Result<Self, AlgebraError> {
        let res = rel_residual(&(m * m), &(-Mat4::identity()));
        if res > TOL_ALG {
            return Err(AlgebraError::NotComplexStructure(res));
        }
        Ok(AlmostComplex4(m))
    }

    pub fn new_unchecked(m: Mat4) -> Self {
        AlmostComplex4(m)
    }

    /// `Je₀ = −e₁`, `Je₂ = −e₃`; with `g = I` this gives `ω = e⁰¹ + e²³`.
    pub fn standard() -> Self {
        let mut m = Mat4::zeros();
        m[(0, 1)] = 1.0;
        m[(1, 0)] = -1.0;
        m[(2, 3)] = 1.0;
        m[(3, 2)] = -1.0;
        AlmostComplex4(m)
    }

    /// The block structure `[[0, −E], [E, 0]]` of the compatibility-cone frame.
    pub fn cone_frame() -> Self {
        let mut m = Mat4::zeros();
        m[(0, 2)] = -1.0;
        m[(1, 3)] = -1.0;
        m[(2, 0)] = 1.0;
        m[(3, 1)] = 1.0;
        AlmostComplex4(m)
    }

    pub fn matrix(&self) -> &Mat4 {
        &self.0
    }

    pub fn neg(&self) -> Self {
        AlmostComplex4(-self.0)
    }

    /// Conjugate `A·J·A⁻¹`.
    pub fn conjugated_by(&self, a: &Mat4) -> Self {
        let inv = a.try_inverse().expect("singular change of basis");
        AlmostComplex4(a * self.0 * inv)
    }

    pub fn compatibility_residual(&self, g: &Metric4) -> f64 {
        rel_residual(&(self.0.transpose() * g.0 * self.0), &g.0)
    }

    pub fn is_compatible(&self, g: &Metric4) -> bool {
        self.compatibility_residual(g) <= TOL_ALG
    }

    /// Orientation of any basis `(v, Jv, w, Jw)`.
    pub fn orientation(&self) -> Orientation {
        let v = Vector4::x();
        let jv = self.0 * v;
        let mut best = 0.0f64;
        for k in 1..4 {
            let w = Vector4::ith(k, 1.0);
            let jw = self.0 * w;
            let d = Mat4::from_columns(&[v, jv, w, jw]).determinant();
            if d.abs() > best.abs() {
                best = d;
            }
        }
        Orientation::from_sign(best)
    }

    /// A metric compatible with `J`: `(I + JᵀJ)/2`.
    pub fn averaged_metric(&self) -> Metric4 {
        Metric4::new_unchecked((Mat4::identity() + self.0.transpose() * self.0) * 0.5)
    }
}

/// `ω(u, v) = g(u, Jv)`.
pub fn reconstruct_omega(g: &Metric4, j: &AlmostComplex4) -> Result<TwoForm4, AlgebraError> {
    let res = j.compatibility_residual(g);
    if res > TOL_ALG {
        return Err(AlgebraError::IncompatiblePair(res));
    }
    Ok(TwoForm4::from_matrix(&(g.0 * j.0)))
}

/// `J = g⁻¹·ω̂`, polished by one Newton step `(J − J⁻¹)/2`.
pub fn reconstruct_j(g: &Metric4, omega: &TwoForm4) -> Result<AlmostComplex4, AlgebraError> {
    let a = g.inverse() * omega.to_matrix();
    let res = rel_residual(&(a * a), &(-Mat4::identity()));
    if res > TOL_ALG {
        return Err(AlgebraError::IncompatiblePair(res));
    }
    let inv = a.try_inverse().ok_or(AlgebraError::Degenerate)?;
    Ok(AlmostComplex4((a - inv) * 0.5))
}

/// `g(u, v) = ω(Ju, v)`.
pub fn reconstruct_g(j: &AlmostComplex4, omega: &TwoForm4) -> Result<Metric4, AlgebraError> {
    let cand = j.0.transpose() * omega.to_matrix();
    let asym = rel_residual(&cand, &cand.transpose());
    if asym > TOL_ALG {
        return Err(AlgebraError::NotSymmetric(asym));
    }
    let g = Metric4::new_unchecked(cand);
    let lo = g.min_eigenvalue();
    if lo <= TOL_ALG * g.0.norm() {
        return Err(AlgebraError::NotPositive(lo));
    }
    Ok(g)
}

/// Compatible triple `(g, J, ω)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HermitianTriple {
    pub g: Metric4,
    pub j: AlmostComplex4,
    pub omega: TwoForm4,
}

/// Outcome of checking the three defining properties of an almost Kähler form.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TripleCheck {
    pub identity_residual: f64,
    pub type_11_residual: f64,
    pub asd_fraction: f64,
    pub pfaffian: f64,
}

impl TripleCheck {
    pub fn passes(&self) -> bool {
        self.identity_residual <= TOL_ALG
            && self.type_11_residual <= TOL_ALG
            && self.asd_fraction <= TOL_ALG
            && self.pfaffian > 0.0
    }
}

impl HermitianTriple {
    pub fn from_metric_and_structure(g: Metric4, j: AlmostComplex4) -> Result<Self, AlgebraError> {
        let omega = reconstruct_omega(&g, &j)?;
        Ok(HermitianTriple { g, j, omega })
    }

    /// Flat euclidean metric with the standard structure.
    pub fn standard() -> Self {
        Self::from_metric_and_structure(Metric4::identity(), AlmostComplex4::standard())
            .expect("standard triple")
    }

    /// Checks identity, type (1,1), self-duality in the `J` orientation and
    /// nondegeneracy. The Pfaffian is reported relative to the `J` orientation.
    pub fn check(&self) -> TripleCheck {
        let om = self.omega.to_matrix();
        let jm = self.j.0;
        let identity_residual = rel_residual(&om, &(self.g.0 * jm));
        let type_11_residual = rel_residual(&(jm.transpose() * om * jm), &om);
        let orient = self.j.orientation();
        let (_, asd) = sd_asd_split(&self.omega, &self.g, orient);
        let total = self.omega.norm_sq(&self.g).sqrt();
        let asd_fraction = if total > 0.0 { asd.norm_sq(&self.g).sqrt() / total } else { 1.0 };
        TripleCheck {
            identity_residual,
            type_11_residual,
            asd_fraction,
            pfaffian: orient.sign() * self.omega.pfaffian(),
        }
    }

    pub fn is_valid(&self) -> bool {
        self.check().passes()
    }

    /// `(g, −J, −ω)`.
    pub fn conjugate(&self) -> Self {
        HermitianTriple { g: self.g, j: self.j.neg(), omega: -self.omega }
    }

    /// `(e^f g, J, e^f ω)`.
    pub fn conformal(&self, f: f64) -> Self {
        let s = f.exp();
        HermitianTriple { g: self.g.scaled(s), j: self.j, omega: self.omega * s }
    }
}

/// Triple built from a 2-form with positive Pfaffian by the polar
/// construction `g = (−ω̂²)^{1/2}`, `J = g⁻¹ω̂`.
pub fn polar_triple(omega: &TwoForm4) -> Result<HermitianTriple, AlgebraError> {
    if omega.pfaffian() <= 0.0 {
        return Err(AlgebraError::Degenerate);
    }
    let om = omega.to_matrix();
    let p = Metric4::new_unchecked(-(om * om)).sqrt();
    let g = Metric4::new(p)?;
    let j = AlmostComplex4::new(g.inverse() * om)?;
    Ok(HermitianTriple { g, j, omega: *omega })
}

/// Generators of random compatible data, shared by tests and experiments.
pub mod random {
    use super::*;
    use rand::Rng;

    /// Random matrix near the identity with positive determinant and
    /// singular values bounded below by 0.35.
    pub fn frame<R: Rng + ?Sized>(rng: &mut R, spread: f64) -> Mat4 {
        loop {
            let m = Mat4::from_fn(|i, k| {
                let base = if i == k { 1.0 } else { 0.0 };
                base + spread * rng.gen_range(-1.0..1.0)
            });
            let sv = m.singular_values();
            if m.determinant() > 0.0 && sv.min() > 0.35 {
                return m;
            }
        }
    }

    pub fn metric<R: Rng + ?Sized>(rng: &mut R) -> Metric4 {
        let a = frame(rng, 0.6);
        Metric4::new(a.transpose() * a).expect("Gram matrix of a frame is SPD")
    }

    /// `(g, J)` with `J = A⁻¹ J_std A`, `g = Aᵀ A`, positive orientation.
    pub fn compatible_pair<R: Rng + ?Sized>(rng: &mut R) -> (Metric4, AlmostComplex4) {
        let a = frame(rng, 0.6);
        let ainv = a.try_inverse().expect("frame is invertible");
        let j = AlmostComplex4::new_unchecked(ainv * AlmostComplex4::standard().0 * a);
        let g = Metric4::new_unchecked(a.transpose() * a);
        (g, j)
    }

    pub fn triple<R: Rng + ?Sized>(rng: &mut R) -> HermitianTriple {
        let (g, j) = compatible_pair(rng);
        HermitianTriple::from_metric_and_structure(g, j).expect("generated pair is compatible")
    }
}
