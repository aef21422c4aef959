use nalgebra::Vector4;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{HermitianTriple, Mat4, TwoForm4};

/// Value of a positive spinor `W⁺ = Λ^{0,0} ⊕ Λ^{0,2}` at a point.
///
/// `beta` is the coefficient of the frame element
/// `θ = (f⁰ − i f¹) ∧ (f² − i f³)` of `Λ^{0,2}` built by [`unitary_frame`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpinorFiber {
    pub alpha: Complex64,
    pub beta: Complex64,
}

impl SpinorFiber {
    pub fn new(alpha: Complex64, beta: Complex64) -> Self {
        SpinorFiber { alpha, beta }
    }

    pub fn zero() -> Self {
        Self::new(Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0))
    }
}

/// Clifford multiplication by the triple's own form: `−2i` on `Λ^{0,0}`,
/// `+2i` on `Λ^{0,2}`.
pub fn clifford_action(_triple: &HermitianTriple, s: &SpinorFiber) -> SpinorFiber {
    let i2 = Complex64::new(0.0, 2.0);
    SpinorFiber { alpha: -i2 * s.alpha, beta: i2 * s.beta }
}

/// `g`-orthonormal frame `(u₀, Ju₀, u₂, Ju₂)` adapted to the triple.
///
/// `u₀` is `e₀` normalized; `u₂` is Gram–Schmidt of `e₂` against
/// `span{u₀, Ju₀}`, falling back to `e₁` then `e₃` when the residual is small.
/// Columns of the returned matrix are the frame vectors.
pub fn unitary_frame(triple: &HermitianTriple) -> Mat4 {
    let g = &triple.g;
    let j = triple.j.matrix();
    let unit = |v: Vector4<f64>| v / g.apply(&v, &v).sqrt();
    let u0 = unit(Vector4::x());
    let u1 = j * u0;
    let mut u2 = None;
    for k in [2usize, 1, 3] {
        let e = Vector4::ith(k, 1.0);
        let r = e - u0 * g.apply(&u0, &e) - u1 * g.apply(&u1, &e);
        let n = g.apply(&r, &r).sqrt();
        if n > 0.25 * g.apply(&e, &e).sqrt() {
            u2 = Some(r / n);
            break;
        }
    }
    let u2 = u2.unwrap_or_else(|| {
        // some e_k always has residual ≥ 1/√2 of its length; take the largest
        (1..4)
            .map(|k| {
                let e = Vector4::ith(k, 1.0);
                e - u0 * g.apply(&u0, &e) - u1 * g.apply(&u1, &e)
            })
            .max_by(|a, b| g.apply(a, a).total_cmp(&g.apply(b, b)))
            .map(|r| unit(r))
            .expect("nonempty")
    });
    let u3 = j * u2;
    Mat4::from_columns(&[u0, u1, u2, u3])
}

fn wedge_covectors(f: &Mat4, a: usize, b: usize) -> TwoForm4 {
    let fa = f.row(a);
    let fb = f.row(b);
    let m = Mat4::from_fn(|i, j| fa[i] * fb[j] - fa[j] * fb[i]);
    TwoForm4::from_matrix(&m)
}

/// `(|β|² − |α|²) ω + ᾱβ θ + αβ̄ θ̄`, a real self-dual 2-form.
pub fn sw_quadratic(s: &SpinorFiber, triple: &HermitianTriple) -> TwoForm4 {
    let frame = unitary_frame(triple);
    let coframe = frame.try_inverse().expect("frame is a basis");
    let theta_re = wedge_covectors(&coframe, 0, 2) - wedge_covectors(&coframe, 1, 3);
    let theta_im = -(wedge_covectors(&coframe, 0, 3) + wedge_covectors(&coframe, 1, 2));
    let cross = s.alpha.conj() * s.beta;
    let radial = s.beta.norm_sqr() - s.alpha.norm_sqr();
    triple.omega * radial + theta_re * (2.0 * cross.re) - theta_im * (2.0 * cross.im)
}

/// Only the square condition `K² = 2χ + 3σ`; the parity condition needs a
/// representative of `w₂` and is not checked.
pub fn check_spinc_constraints(chi: i64, sigma: i64, k_sq: i64) -> bool {
    k_sq == 2 * chi + 3 * sigma
}
