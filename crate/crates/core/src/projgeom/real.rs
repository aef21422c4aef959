use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{c, conj_mat, conj_vec, CMat, CVec, GeomError, ProjPoint, ProjSubspace};
use crate::TOL_PROJ;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RealKind {
    /// `Θ² = +1`; the fixed points form a real projective space.
    Standard,
    /// `Θ² = −1` on the cone; no fixed points.
    Quaternionic,
}

/// Antiholomorphic involution `[z] ↦ [M z̄]` of `ℂPⁿ`, with `M M̄ = ±I`
/// after normalization.
#[derive(Clone, Debug, PartialEq)]
pub struct RealStructure {
    m: CMat,
    kind: RealKind,
}

impl RealStructure {
    /// Accepts any `M` with `M M̄ = λ I`, `λ` real and nonzero.
    pub fn new(m: CMat) -> Result<Self, GeomError> {
        let n = m.nrows();
        if n != m.ncols() || n == 0 {
            return Err(GeomError::NotInvolutive(f64::INFINITY));
        }
        let p = &m * conj_mat(&m);
        let lambda = p.trace() / c(n as f64, 0.0);
        let scale = p.norm().max(f64::MIN_POSITIVE);
        let res = (&p - CMat::identity(n, n) * lambda).norm() / scale;
        let res = res.max(lambda.im.abs() / lambda.norm().max(f64::MIN_POSITIVE));
        if res > TOL_PROJ || lambda.re == 0.0 {
            return Err(GeomError::NotInvolutive(res));
        }
        let kind = if lambda.re > 0.0 { RealKind::Standard } else { RealKind::Quaternionic };
        let m = m / c(lambda.re.abs().sqrt(), 0.0);
        Ok(RealStructure { m, kind })
    }

    /// Coordinatewise conjugation on `ℂPⁿ`.
    pub fn standard(n: usize) -> Self {
        RealStructure { m: CMat::identity(n + 1, n + 1), kind: RealKind::Standard }
    }

    /// `(z₀ : z₁ : …) ↦ (−z̄₁ : z̄₀ : −z̄₃ : z̄₂ : …)`; needs `n` odd.
    pub fn quaternionic(n: usize) -> Result<Self, GeomError> {
        if n % 2 == 0 {
            return Err(GeomError::NotInvolutive(f64::INFINITY));
        }
        let mut m = CMat::zeros(n + 1, n + 1);
        for k in (0..=n).step_by(2) {
            m[(k, k + 1)] = c(-1.0, 0.0);
            m[(k + 1, k)] = c(1.0, 0.0);
        }
        Ok(RealStructure { m, kind: RealKind::Quaternionic })
    }

    pub fn kind(&self) -> RealKind {
        self.kind
    }

    pub fn matrix(&self) -> &CMat {
        &self.m
    }

    pub fn apply_vec(&self, v: &CVec) -> CVec {
        &self.m * conj_vec(v)
    }

    pub fn apply_point(&self, p: &ProjPoint) -> ProjPoint {
        ProjPoint::new(self.apply_vec(p.coords())).expect("M is invertible")
    }

    pub fn apply_subspace(&self, s: &ProjSubspace) -> ProjSubspace {
        ProjSubspace::from_columns(&(&self.m * conj_mat(s.basis()))).expect("M is invertible")
    }

    pub fn fixed_residual(&self, p: &ProjPoint) -> f64 {
        p.distance(&self.apply_point(p))
    }

    pub fn is_fixed(&self, p: &ProjPoint) -> bool {
        self.fixed_residual(p) <= TOL_PROJ
    }

    pub fn invariance_residual(&self, s: &ProjSubspace) -> f64 {
        s.subspace_residual(&self.apply_subspace(s))
    }

    pub fn is_invariant(&self, s: &ProjSubspace) -> bool {
        self.invariance_residual(s) <= TOL_PROJ
    }
}

const SAMPLE_COEFFS: [(f64, f64, f64, f64); 6] = [
    (1.0, 0.0, 0.37, 0.21),
    (0.0, 0.0, 1.0, 0.0),
    (1.0, 0.0, 0.0, 0.0),
    (0.61, -0.43, 1.0, 0.0),
    (1.0, 0.0, -0.52, 0.77),
    (0.29, 0.88, -0.74, 0.15),
];

/// Candidate real points `z + Θz` and `i(z − Θz)` built from a fixed list
/// of points `z` of the line. Only genuine fixed points are returned,
/// pairwise distinct; for a quaternionic structure the list is empty.
pub fn real_point_candidates(line: &ProjSubspace, theta: &RealStructure) -> Vec<ProjPoint> {
    let mut out: Vec<ProjPoint> = Vec::new();
    let b = line.basis();
    for &(ar, ai, br, bi) in SAMPLE_COEFFS.iter() {
        let mut coeffs = CVec::zeros(b.ncols());
        coeffs[0] = c(ar, ai);
        if b.ncols() > 1 {
            coeffs[1] = c(br, bi);
        }
        let z = b * coeffs;
        if z.norm() == 0.0 {
            continue;
        }
        let tz = theta.apply_vec(&z);
        let phase_free = [&z + &tz, (&z - &tz) * c(0.0, 1.0)];
        for v in phase_free {
            if v.norm() <= 1e-3 * z.norm() {
                continue;
            }
            let p = ProjPoint::new(v).expect("nonzero");
            if theta.is_fixed(&p) && out.iter().all(|q| q.distance(&p) > 1e-3) {
                out.push(p);
            }
        }
    }
    out
}

/// Two distinct real points on a `Θ`-invariant line.
pub fn real_points_on_real_line(line: &ProjSubspace, theta: &RealStructure) -> Result<(ProjPoint, ProjPoint), GeomError> {
    if line.dim() != 1 {
        return Err(GeomError::BadDimension { expected: 1, got: line.dim() });
    }
    if theta.kind() == RealKind::Quaternionic {
        return Err(GeomError::QuaternionicStructure);
    }
    let res = theta.invariance_residual(line);
    if res > TOL_PROJ {
        return Err(GeomError::NotRealLine(res));
    }
    let pts = real_point_candidates(line, theta);
    if pts.len() < 2 {
        return Err(GeomError::NoRealPoints);
    }
    Ok((pts[0].clone(), pts[1].clone()))
}

/// `min dist(p, Θp)` over a grid of points `cos a · b₀ + e^{iφ} sin a · b₁`
/// of the line.
pub fn min_fixed_point_residual(line: &ProjSubspace, theta: &RealStructure, steps: usize) -> f64 {
    let b = line.basis();
    let steps = steps.max(2);
    let mut best = f64::INFINITY;
    for i in 0..=steps {
        let a = std::f64::consts::FRAC_PI_2 * i as f64 / steps as f64;
        for k in 0..2 * steps {
            let phi = std::f64::consts::PI * k as f64 / steps as f64;
            let mut coeffs = CVec::zeros(b.ncols());
            coeffs[0] = c(a.cos(), 0.0);
            if b.ncols() > 1 {
                coeffs[1] = Complex64::from_polar(a.sin(), phi);
            }
            let p = ProjPoint::new(b * coeffs).expect("unit coefficients");
            best = best.min(theta.fixed_residual(&p));
        }
    }
    best
}
