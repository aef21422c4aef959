use nalgebra::{DMatrix, DVector, Matrix2, Matrix3, SymmetricEigen, Vector2, Vector6};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{
    acs_from_line, c, conj_vec, intersect, pluecker_embed, pluecker_extract, pluecker_form, real_null_space,
    structure_line, CVec, GeomError, ProjPoint, ProjSubspace, RealStructure,
};
use crate::pointwise::{AlmostComplex4, Mat4, Metric4};
use crate::TOL_ALG;

pub const MAX_RETRIES: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct JunctionParams {
    pub seed: u64,
    pub max_retries: usize,
    /// Grid resolution for the real points on `ρ_ℝ ≅ ℝP¹`.
    pub angle_steps: usize,
}

impl Default for JunctionParams {
    fn default() -> Self {
        JunctionParams { seed: 0, max_retries: MAX_RETRIES, angle_steps: 72 }
    }
}

/// `g_p` is compatible with `J₀` and `J_junct`, `g_q` with `J_junct` and `J₁`.
#[derive(Clone, Debug, PartialEq)]
pub struct JunctionOutcome {
    pub j_junct: AlmostComplex4,
    pub g_p: Metric4,
    pub g_q: Metric4,
    /// Number of plane choices tried, 0 for the common-metric shortcut.
    pub attempts: usize,
    /// Smallest positivity margin of the two real 3-planes used.
    pub margin: f64,
}

impl JunctionOutcome {
    /// Largest of the four compatibility residuals.
    pub fn certificate_residual(&self, j0: &AlmostComplex4, j1: &AlmostComplex4) -> f64 {
        [
            j0.compatibility_residual(&self.g_p),
            self.j_junct.compatibility_residual(&self.g_p),
            self.j_junct.compatibility_residual(&self.g_q),
            j1.compatibility_residual(&self.g_q),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}

fn sym_basis() -> Vec<Mat4> {
    let mut out = Vec::with_capacity(10);
    for i in 0..4 {
        for j in i..4 {
            let mut m = Mat4::zeros();
            if i == j {
                m[(i, i)] = 1.0;
            } else {
                let s = std::f64::consts::FRAC_1_SQRT_2;
                m[(i, j)] = s;
                m[(j, i)] = s;
            }
            out.push(m);
        }
    }
    out
}

fn min_eig(m: &Mat4) -> (f64, nalgebra::Vector4<f64>) {
    let eig = SymmetricEigen::new(*m);
    let (k, &v) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("four eigenvalues");
    (v, eig.eigenvectors.column(k).into_owned())
}

/// A positive definite metric compatible with both structures, normalized
/// to trace 4, or `None` if the compatible forms contain no definite one.
///
/// The compatible symmetric forms are the null space of
/// `G ↦ (AᵀGA − G, BᵀGB − G)`; inside it `λ_min` is maximized on the unit
/// sphere by projected subgradient ascent.
pub fn common_metric(a: &AlmostComplex4, b: &AlmostComplex4) -> Option<Metric4> {
    let basis = sym_basis();
    let mut m = DMatrix::zeros(32, 10);
    for (k, e) in basis.iter().enumerate() {
        for (blk, j) in [a.matrix(), b.matrix()].into_iter().enumerate() {
            let r = j.transpose() * e * j - e;
            for (idx, v) in r.iter().enumerate() {
                m[(16 * blk + idx, k)] = *v;
            }
        }
    }
    let null = real_null_space(&m, 1e-9);
    if null.is_empty() {
        return None;
    }
    let gens: Vec<Mat4> = null
        .iter()
        .map(|v| basis.iter().zip(v.iter()).fold(Mat4::zeros(), |acc, (e, &x)| acc + e * x))
        .collect();
    let combine = |coef: &DVector<f64>| gens.iter().zip(coef.iter()).fold(Mat4::zeros(), |acc, (g, &x)| acc + g * x);
    let k = gens.len();

    let mut starts: Vec<DVector<f64>> = Vec::new();
    let trace_dir = DVector::from_iterator(k, gens.iter().map(|g| g.trace()));
    if trace_dir.norm() > 1e-12 {
        starts.push(trace_dir.normalize());
    }
    for i in 0..k {
        for s in [1.0, -1.0] {
            starts.push(DVector::from_fn(k, |r, _| if r == i { s } else { 0.0 }));
        }
    }

    let mut best: Option<(f64, DVector<f64>)> = None;
    for start in starts {
        let mut coef = start;
        let (mut lam, mut vec) = min_eig(&combine(&coef));
        let mut local_best = (lam, coef.clone());
        if k > 1 {
            for it in 0..300 {
                let grad = DVector::from_iterator(k, gens.iter().map(|g| vec.dot(&(g * vec))));
                // tangent part on the sphere
                let tangent = &grad - &coef * grad.dot(&coef);
                if tangent.norm() < 1e-14 {
                    break;
                }
                let step = 0.5 / (1.0 + it as f64).sqrt();
                coef = (&coef + tangent.normalize() * step).normalize();
                let (l, v) = min_eig(&combine(&coef));
                lam = l;
                vec = v;
                if lam > local_best.0 {
                    local_best = (lam, coef.clone());
                }
            }
        }
        if best.as_ref().map_or(true, |(l, _)| local_best.0 > *l) {
            best = Some(local_best);
        }
    }
    let (lam, coef) = best?;
    if lam <= 1e-9 {
        return None;
    }
    let g = combine(&coef);
    let g = (g + g.transpose()) * 0.5;
    let g = g * (4.0 / g.trace());
    Metric4::new(g).ok()
}

fn real_part(v: &CVec) -> Vector6<f64> {
    Vector6::from_fn(|i, _| v[i].re)
}

fn imag_part(v: &CVec) -> Vector6<f64> {
    Vector6::from_fn(|i, _| v[i].im)
}

fn real_form(p: &Vector6<f64>, q: &Vector6<f64>) -> f64 {
    p[0] * q[5] + p[5] * q[0] - p[1] * q[4] - p[4] * q[1] + p[2] * q[3] + p[3] * q[2]
}

/// `sign · λ_min` of the wedge form on an orthonormalized basis of
/// `span(a, b, r)`; positive iff the 3-plane is definite of the given sign.
fn plane_margin(a: &Vector6<f64>, b: &Vector6<f64>, r: &Vector6<f64>, sign: f64) -> f64 {
    let m = nalgebra::Matrix6x3::from_columns(&[*a, *b, *r]);
    let q = m.qr().q();
    let gram = Matrix3::from_fn(|i, j| sign * real_form(&q.column(i).into_owned(), &q.column(j).into_owned()));
    if m.qr().r().diagonal().iter().any(|d| d.abs() < 1e-10) {
        return f64::NEG_INFINITY;
    }
    gram.symmetric_eigenvalues().min()
}

fn frob_inner(a: &Mat4, b: &Mat4) -> f64 {
    a.component_mul(b).sum()
}

/// Gram–Schmidt for the form `sign · B`, which must be positive on the span.
fn form_orthonormal(vs: &[Vector6<f64>], sign: f64) -> Vec<Vector6<f64>> {
    let mut out: Vec<Vector6<f64>> = Vec::new();
    for v in vs {
        let mut r = *v;
        for e in &out {
            r -= e * (sign * real_form(e, &r));
        }
        out.push(r / (sign * real_form(&r, &r)).sqrt());
    }
    out
}

/// `sign · B` restricted to the `B`-orthogonal complement of `plane`, in the
/// basis `u` (the projection along `plane` is applied first).
fn complement_form(u: &[Vector6<f64>; 2], plane: &[Vector6<f64>], sign: f64) -> Matrix2<f64> {
    Matrix2::from_fn(|i, j| {
        let direct = sign * real_form(&u[i], &u[j]);
        let along: f64 = plane.iter().map(|e| real_form(&u[i], e) * real_form(&u[j], e)).sum();
        direct - along
    })
}

/// Number of eigenvalues of `sign · B` on `span(Re l₀, Im l₀, Re l₁, Im l₁)`
/// that are positive. A junction needs a definite 3-plane there, i.e. index 3.
fn definite_index(z0: &CVec, z1: &CVec, sign: f64) -> usize {
    let vs = [real_part(z0), imag_part(z0), real_part(z1), imag_part(z1)];
    let gram = nalgebra::Matrix4::from_fn(|i, j| sign * real_form(&vs[i], &vs[j]));
    let eig = gram.symmetric_eigenvalues();
    let scale = eig.amax();
    eig.iter().filter(|&&x| x > 1e-12 * scale).count()
}

/// Index of the wedge form (signed by the orientation of `J₀`) on the real
/// span of the two Klein points; 3 means a junction exists, 2 means none does.
pub fn junction_index(j0: &AlmostComplex4, j1: &AlmostComplex4) -> Result<usize, GeomError> {
    let z0 = pluecker_embed(&structure_line(j0))?.coords().clone();
    let z1 = pluecker_embed(&structure_line(j1))?.coords().clone();
    let sign = pluecker_form(&z0, &conj_vec(&z0)).re.signum();
    Ok(definite_index(&z0, &z1, sign))
}

/// Builds `J_junct` with metrics `g_p ∈ C(J₀) ∩ C(J_junct)` and
/// `g_q ∈ C(J_junct) ∩ C(J₁)`.
///
/// The `(0,1)`-lines of `J₀`, `J₁` give Klein points `l₀`, `l₁`. A plane
/// `π ⊃ ⟨l₀, l₁⟩` inside `span(l₀, Θl₀, l₁, Θl₁)` meets its conjugate in a
/// real line `ρ`; real points `r₀, r₁ ∈ ρ` are picked so that
/// `span(Re l_k, Im l_k, r_k)` is definite, which makes it the self-dual
/// space of a conformal class. The line `⟨l′, Θl′⟩` through
/// `l′ = ⟨l₀, r₀⟩ ∩ ⟨l₁, r₁⟩` meets the Klein quadric in two conjugate points
/// whose structures are `±J_junct`; the one closer to `J₀` is returned.
/// Pairs that already share a metric return `J₀` itself.
pub fn junction(j0: &AlmostComplex4, j1: &AlmostComplex4, g_ref: &Metric4, params: &JunctionParams) -> Result<JunctionOutcome, GeomError> {
    let orientation = j0.orientation();
    if j1.orientation() != orientation {
        return Err(GeomError::IncompatibleOrientation);
    }
    let shortcut = |g_p: Metric4, g_q: Metric4| JunctionOutcome { j_junct: *j0, g_p, g_q, attempts: 0, margin: f64::INFINITY };
    if j0.is_compatible(g_ref) && j1.is_compatible(g_ref) {
        return Ok(shortcut(*g_ref, *g_ref));
    }

    let theta = RealStructure::standard(5);
    let l0 = pluecker_embed(&structure_line(j0))?;
    let l1 = pluecker_embed(&structure_line(j1))?;
    let (z0, z1) = (l0.coords().clone(), l1.coords().clone());
    let s = ProjSubspace::from_vectors(&[z0.clone(), conj_vec(&z0), z1.clone(), conj_vec(&z1)])?;
    if s.dim() < 3 {
        return match common_metric(j0, j1) {
            Some(g) => Ok(shortcut(g, g)),
            None => Err(GeomError::DegenerateConfiguration(0)),
        };
    }
    let sign = pluecker_form(&z0, &conj_vec(&z0)).re.signum();
    if definite_index(&z0, &z1, sign) < 3 {
        return Err(GeomError::DegenerateConfiguration(0));
    }
    let (re0, im0) = (real_part(&z0), imag_part(&z0));
    let (re1, im1) = (real_part(&z1), imag_part(&z1));
    let plane0 = form_orthonormal(&[re0, im0], sign);
    let plane1 = form_orthonormal(&[re1, im1], sign);

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let steps = params.angle_steps.max(8);
    for attempt in 1..=params.max_retries {
        let coeffs = CVec::from_fn(s.basis().ncols(), |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        let w = s.basis() * coeffs;
        let Ok(pi) = ProjSubspace::from_vectors(&[z0.clone(), z1.clone(), w]) else { continue };
        if pi.dim() != 2 {
            continue;
        }
        let Some(rho) = intersect(&pi, &theta.apply_subspace(&pi))? else { continue };
        if rho.dim() != 1 {
            continue;
        }
        // real basis of ρ_ℝ from z + Θz and i(z − Θz)
        let mut real_basis: Vec<Vector6<f64>> = Vec::new();
        for col in rho.basis().column_iter() {
            let z = col.into_owned();
            let zc = conj_vec(&z);
            for v in [real_part(&(&z + &zc)), real_part(&((&z - &zc) * c(0.0, 1.0)))] {
                let mut r = v;
                for q in &real_basis {
                    r -= q * q.dot(&r);
                }
                if r.norm() > 1e-8 && real_basis.len() < 2 {
                    real_basis.push(r.normalize());
                }
            }
        }
        if real_basis.len() < 2 {
            continue;
        }
        let u = [real_basis[0], real_basis[1]];
        let (q0, q1) = (complement_form(&u, &plane0, sign), complement_form(&u, &plane1, sign));
        let angle = |k: usize| std::f64::consts::PI * k as f64 / steps as f64;
        let r_at = |k: usize| u[0] * angle(k).cos() + u[1] * angle(k).sin();
        let eval = |q: &Matrix2<f64>, k: usize| {
            let v = Vector2::new(angle(k).cos(), angle(k).sin());
            v.dot(&(q * v))
        };
        let m0: Vec<f64> = (0..steps).map(|k| eval(&q0, k)).collect();
        let m1: Vec<f64> = (0..steps).map(|k| eval(&q1, k)).collect();
        let mut choice: Option<(f64, usize, usize)> = None;
        for a in (0..steps).filter(|&a| m0[a] > 0.0) {
            for b in (0..steps).filter(|&b| m1[b] > 0.0 && b != a) {
                let sep = (angle(a) - angle(b)).sin().abs();
                let score = m0[a].min(m1[b]) * sep;
                if choice.map_or(true, |(s, _, _)| score > s) {
                    choice = Some((score, a, b));
                }
            }
        }
        let Some((_, a, b)) = choice else { continue };
        let margin = plane_margin(&re0, &im0, &r_at(a), sign).min(plane_margin(&re1, &im1, &r_at(b), sign));
        let to_c = |v: Vector6<f64>| CVec::from_fn(6, |i, _| c(v[i], 0.0));
        let (r0, r1) = (to_c(r_at(a)), to_c(r_at(b)));
        let line0 = ProjSubspace::from_vectors(&[z0.clone(), r0])?;
        let line1 = ProjSubspace::from_vectors(&[z1.clone(), r1])?;
        let Some(meet) = intersect(&line0, &line1)? else { continue };
        if meet.dim() != 0 {
            continue;
        }
        let x = meet.basis().column(0).into_owned();
        let y = conj_vec(&x);
        // B(tx + y, tx + y) = 0
        let (qa, qb, qc) = (pluecker_form(&x, &x), pluecker_form(&x, &y), pluecker_form(&y, &y));
        let roots: Vec<CVec> = if qa.norm() < 1e-13 {
            vec![x.clone(), y.clone()]
        } else {
            let disc = (qb * qb - qa * qc).sqrt();
            [(-qb + disc) / qa, (-qb - disc) / qa].iter().map(|t| &x * *t + &y).collect()
        };
        let mut best: Option<(f64, AlmostComplex4)> = None;
        for p in roots {
            let Ok(pt) = ProjPoint::new(p) else { continue };
            let Ok(line) = pluecker_extract(&pt) else { continue };
            let Ok(j) = acs_from_line(&line) else { continue };
            if j.orientation() != orientation {
                continue;
            }
            let align = frob_inner(j.matrix(), j0.matrix()) / j.matrix().norm();
            if best.as_ref().map_or(true, |(s, _)| align > *s) {
                best = Some((align, j));
            }
        }
        let Some((_, jj)) = best else { continue };
        let (Some(g_p), Some(g_q)) = (common_metric(j0, &jj), common_metric(&jj, j1)) else { continue };
        let out = JunctionOutcome { j_junct: jj, g_p, g_q, attempts: attempt, margin };
        if out.certificate_residual(j0, j1) <= TOL_ALG {
            return Ok(out);
        }
    }
    Err(GeomError::DegenerateConfiguration(params.max_retries))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pointwise::{random, Orientation};
    use rand::SeedableRng;

    fn random_pair_structure(rng: &mut ChaCha8Rng) -> AlmostComplex4 {
        random::compatible_pair(rng).1
    }

    #[test]
    fn common_metric_examples() {
        let j = AlmostComplex4::standard();
        let g = common_metric(&j, &j).unwrap();
        assert!(j.is_compatible(&g));
        let g = common_metric(&j, &j.neg()).unwrap();
        assert!(j.is_compatible(&g));
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let (gr, jr) = random::compatible_pair(&mut rng);
        let g = common_metric(&jr, &jr).unwrap();
        assert!(jr.is_compatible(&g) && g.is_positive_definite());
        // Je₀ = −e₂, Je₁ = e₃: orthogonal, positively oriented, not ±J_std
        let mut m = Mat4::zeros();
        m[(2, 0)] = -1.0;
        m[(0, 2)] = 1.0;
        m[(3, 1)] = 1.0;
        m[(1, 3)] = -1.0;
        let rotated = AlmostComplex4::new(m).unwrap();
        assert_eq!(rotated.orientation(), Orientation::Positive);
        let a = random::frame(&mut rng, 0.6);
        let ainv = a.try_inverse().unwrap();
        let first = AlmostComplex4::new(ainv * AlmostComplex4::standard().matrix() * a).unwrap();
        let other = AlmostComplex4::new(ainv * rotated.matrix() * a).unwrap();
        let g = common_metric(&first, &other).unwrap();
        let expect = a.transpose() * a;
        let expect = expect * (4.0 / expect.trace());
        assert!((g.matrix() - expect).abs().max() < 1e-9);
        let _ = gr;
    }

    #[test]
    fn generic_pairs_share_no_metric() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..50 {
            let a = random_pair_structure(&mut rng);
            let b = random_pair_structure(&mut rng);
            assert!(common_metric(&a, &b).is_none());
        }
    }

    #[test]
    fn junction_identity_shortcut() {
        let j = AlmostComplex4::standard();
        let out = junction(&j, &j, &Metric4::identity(), &JunctionParams::default()).unwrap();
        assert_eq!(out.j_junct, j);
        assert_eq!(out.attempts, 0);
        assert!(out.certificate_residual(&j, &j) < 1e-12);
    }

    #[test]
    fn junction_rejects_mixed_orientation() {
        let mut m = Mat4::zeros();
        m[(1, 0)] = -1.0;
        m[(0, 1)] = 1.0;
        m[(3, 2)] = 1.0;
        m[(2, 3)] = -1.0;
        let neg = AlmostComplex4::new(m).unwrap();
        assert_eq!(neg.orientation(), Orientation::Negative);
        let err = junction(&AlmostComplex4::standard(), &neg, &Metric4::identity(), &JunctionParams::default());
        assert_eq!(err, Err(GeomError::IncompatibleOrientation));
    }

    #[test]
    fn junction_of_random_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let (mut feasible, mut failures) = (0, 0);
        for trial in 0..200 {
            let j0 = random_pair_structure(&mut rng);
            let j1 = random_pair_structure(&mut rng);
            let params = JunctionParams { seed: trial, ..Default::default() };
            let index = junction_index(&j0, &j1).unwrap();
            match junction(&j0, &j1, &Metric4::identity(), &params) {
                Ok(out) => {
                    assert_eq!(index, 3);
                    assert!(out.certificate_residual(&j0, &j1) < 1e-8);
                    assert!(out.g_p.is_positive_definite() && out.g_q.is_positive_definite());
                    assert_eq!(out.j_junct.orientation(), j0.orientation());
                }
                Err(GeomError::DegenerateConfiguration(_)) if index < 3 => {}
                Err(GeomError::DegenerateConfiguration(_)) => failures += 1,
                Err(e) => panic!("unexpected {e}"),
            }
            if index == 3 {
                feasible += 1;
            }
        }
        assert!(feasible > 100);
        assert!(failures * 100 < feasible, "{failures} of {feasible} feasible pairs failed");
    }
}
