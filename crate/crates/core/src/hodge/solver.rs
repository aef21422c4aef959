use std::sync::OnceLock;

use nalgebra::{Matrix6, Vector6};
use serde::Serialize;

use super::ops::{dot, laplacian_diagonal, mass_apply};
use super::{d, d_transpose, default_max_iter, inner, wedge_integral, FormField, Grid4, HodgeError};

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct SolveStats {
    pub iterations: usize,
    /// Final `‖b − Ax‖ / ‖b‖` of the recursion.
    pub residual: f64,
}

/// Jacobi-preconditioned conjugate gradients for a symmetric positive
/// semidefinite operator and a right-hand side in its range, stopping at
/// `‖b − Ax‖ ≤ tol·‖b‖`.
pub fn pcg(
    apply: impl FnMut(&[f64], &mut [f64]),
    diag: &[f64],
    b: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<(Vec<f64>, SolveStats), HodgeError> {
    let bnorm = dot(b, b).sqrt();
    pcg_scaled(apply, diag, b, tol, bnorm, max_iter)
}

/// [`pcg`] stopping at `‖b − Ax‖ ≤ tol·scale`; the reported residual is
/// relative to `scale`.
pub fn pcg_scaled(
    mut apply: impl FnMut(&[f64], &mut [f64]),
    diag: &[f64],
    b: &[f64],
    tol: f64,
    scale: f64,
    max_iter: usize,
) -> Result<(Vec<f64>, SolveStats), HodgeError> {
    let len = b.len();
    let mut x = vec![0.0; len];
    let bnorm = dot(b, b).sqrt();
    if bnorm == 0.0 {
        return Ok((x, SolveStats::default()));
    }
    if bnorm <= tol * scale {
        return Ok((x, SolveStats { iterations: 0, residual: bnorm / scale }));
    }
    let inv: Vec<f64> = diag.iter().map(|&d| if d > 0.0 { 1.0 / d } else { 0.0 }).collect();
    let mut r = b.to_vec();
    let mut z: Vec<f64> = r.iter().zip(&inv).map(|(a, b)| a * b).collect();
    let mut p = z.clone();
    let mut ap = vec![0.0; len];
    let mut rz = dot(&r, &z);
    let mut res = bnorm / scale;
    for it in 1..=max_iter {
        apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            return Err(HodgeError::SolverDiverged { iterations: it, residual: res });
        }
        let alpha = rz / pap;
        for i in 0..len {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        res = dot(&r, &r).sqrt() / scale;
        if res <= tol {
            return Ok((x, SolveStats { iterations: it, residual: res }));
        }
        for i in 0..len {
            z[i] = r[i] * inv[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..len {
            p[i] = z[i] + beta * p[i];
        }
    }
    Err(HodgeError::SolverDiverged { iterations: max_iter, residual: res })
}

/// `ω = harmonic + exact + coexact`, orthogonal for the metric inner product.
#[derive(Clone, Debug, PartialEq)]
pub struct HodgeSplit {
    pub harmonic: FormField,
    pub exact: FormField,
    pub coexact: FormField,
    /// Largest relative residual among the linear solves used.
    pub residual: f64,
}

/// Periods of a closed 2-cochain over the coordinate 2-tori through the
/// origin, in the order `(01, 02, 03, 12, 13, 23)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CohomologyClass2 {
    pub periods: [f64; 6],
    pub tol_ps: f64,
    pub pseudo_symplectic: bool,
}

impl CohomologyClass2 {
    pub fn new(periods: [f64; 6], tol_ps: f64) -> Self {
        let max = periods.iter().fold(0.0f64, |m, p| m.max(p.abs()));
        CohomologyClass2 { periods, tol_ps, pseudo_symplectic: max > tol_ps }
    }

    pub fn max_abs(&self) -> f64 {
        self.periods.iter().fold(0.0, |m, p| m.max(p.abs()))
    }
}

/// `√(∫ ω_H ∧ ω_H)` together with the signed integral and the metric norm².
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HarmonicNorm {
    pub value: f64,
    pub signed_square: f64,
    pub metric_square: f64,
}

#[derive(Debug)]
struct HarmonicBasis {
    /// `h_a = η_a − dρ_a` with `η_a` the constant coordinate forms.
    forms: Vec<FormField>,
    /// `M h_a`.
    mass_forms: Vec<Vec<f64>>,
    gram_inv: Matrix6<f64>,
    residual: f64,
}

/// Hodge decomposition of 2-cochains on a fixed grid, caching the basis of
/// discrete harmonic forms.
///
/// The harmonic space is spanned by `h_a = η_a − dρ_a`, where `η_a` is the
/// constant form `dx^{I_a}` and `ρ_a` solves `dᵀM₂d ρ_a = dᵀM₂ η_a`; each
/// `h_a` is closed and coclosed, with the periods of `η_a`. The exact part is
/// `dρ₁` with `dᵀM₂d ρ₁ = dᵀM₂ ω`, and the coexact part is the remainder,
/// which is orthogonal to all closed cochains and hence lies in the image of
/// `d*`.
#[derive(Debug)]
pub struct HodgeSolver<'g> {
    grid: &'g Grid4,
    tol: f64,
    max_iter: usize,
    basis: OnceLock<HarmonicBasis>,
    diag: OnceLock<Vec<f64>>,
}

impl<'g> HodgeSolver<'g> {
    pub fn new(grid: &'g Grid4, tol: f64) -> Self {
        Self::with_max_iter(grid, tol, default_max_iter(grid.n()))
    }

    pub fn with_max_iter(grid: &'g Grid4, tol: f64, max_iter: usize) -> Self {
        HodgeSolver { grid, tol, max_iter, basis: OnceLock::new(), diag: OnceLock::new() }
    }

    pub fn grid(&self) -> &Grid4 {
        self.grid
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    fn check(&self, omega: &FormField) -> Result<(), HodgeError> {
        self.grid.check_field(omega)?;
        if omega.degree() != 2 {
            return Err(HodgeError::BadDegree(omega.degree()));
        }
        Ok(())
    }

    /// Solves `dᵀM₂d ρ = dᵀM₂ ω` and returns `dρ`. The residual is measured
    /// against `‖M₂ω‖`, so inputs that are already coclosed stop at once.
    fn exact_part(&self, omega: &FormField) -> Result<(FormField, SolveStats), HodgeError> {
        let grid = self.grid;
        let n = grid.n();
        let m_omega = FormField::from_values(2, n, mass_apply(grid, 2, omega.values()))?;
        let scale = dot(m_omega.values(), m_omega.values()).sqrt();
        let rhs = d_transpose(&m_omega)?;
        let diag = self.diag.get_or_init(|| laplacian_diagonal(grid, 1));
        let apply = |x: &[f64], y: &mut [f64]| {
            let rho = FormField::from_values(1, n, x.to_vec()).expect("1-cochain");
            let dr = d(&rho).expect("degree 1");
            let mdr = FormField::from_values(2, n, mass_apply(grid, 2, dr.values())).expect("2-cochain");
            y.copy_from_slice(d_transpose(&mdr).expect("degree 2").values());
        };
        let (rho, stats) = pcg_scaled(apply, diag, rhs.values(), self.tol, scale, self.max_iter)?;
        Ok((d(&FormField::from_values(1, n, rho)?)?, stats))
    }

    fn basis(&self) -> Result<&HarmonicBasis, HodgeError> {
        if let Some(b) = self.basis.get() {
            return Ok(b);
        }
        let n = self.grid.n();
        let mut forms = Vec::with_capacity(6);
        let mut residual: f64 = 0.0;
        for a in 0..6 {
            let mut comps = [0.0; 6];
            comps[a] = 1.0;
            let eta = FormField::constant(2, n, &comps);
            let (exact, stats) = self.exact_part(&eta)?;
            residual = residual.max(stats.residual);
            forms.push(eta - exact);
        }
        let mass_forms: Vec<Vec<f64>> = forms.iter().map(|f| mass_apply(self.grid, 2, f.values())).collect();
        let gram = Matrix6::from_fn(|a, b| dot(forms[a].values(), &mass_forms[b]));
        let gram = (gram + gram.transpose()) * 0.5;
        let gram_inv = gram.cholesky().ok_or(HodgeError::SolverDiverged { iterations: 0, residual })?.inverse();
        let _ = self.basis.set(HarmonicBasis { forms, mass_forms, gram_inv, residual });
        Ok(self.basis.get().expect("just set"))
    }

    /// Coordinates of `ω_H` in the basis `h_a`; these are also its periods.
    pub fn harmonic_coefficients(&self, omega: &FormField) -> Result<[f64; 6], HodgeError> {
        self.check(omega)?;
        let basis = self.basis()?;
        let b = Vector6::from_fn(|a, _| dot(omega.values(), &basis.mass_forms[a]));
        let c = basis.gram_inv * b;
        Ok([c[0], c[1], c[2], c[3], c[4], c[5]])
    }

    /// Orthogonal projection onto the discrete harmonic 2-cochains.
    pub fn harmonic_part(&self, omega: &FormField) -> Result<FormField, HodgeError> {
        let c = self.harmonic_coefficients(omega)?;
        let basis = self.basis()?;
        let mut out = FormField::zeros(2, self.grid.n());
        for (a, f) in basis.forms.iter().enumerate() {
            out.axpy(c[a], f);
        }
        Ok(out)
    }

    pub fn decompose(&self, omega: &FormField) -> Result<HodgeSplit, HodgeError> {
        let harmonic = self.harmonic_part(omega)?;
        let (exact, stats) = self.exact_part(omega)?;
        let mut coexact = omega.clone();
        coexact.axpy(-1.0, &harmonic);
        coexact.axpy(-1.0, &exact);
        let residual = stats.residual.max(self.basis()?.residual);
        Ok(HodgeSplit { harmonic, exact, coexact, residual })
    }

    /// Class of the harmonic part, from its periods over the coordinate tori.
    pub fn class_of(&self, omega: &FormField, tol_ps: f64) -> Result<CohomologyClass2, HodgeError> {
        let p = self.harmonic_part(omega)?.periods();
        Ok(CohomologyClass2::new([p[0], p[1], p[2], p[3], p[4], p[5]], tol_ps))
    }

    pub fn harmonic_norm(&self, omega: &FormField) -> Result<HarmonicNorm, HodgeError> {
        let h = self.harmonic_part(omega)?;
        let signed_square = wedge_integral(&h, &h, self.grid)?;
        let metric_square = inner(self.grid, &h, &h)?;
        if signed_square < -self.tol {
            return Err(HodgeError::NegativeSquare(signed_square));
        }
        Ok(HarmonicNorm { value: signed_square.max(0.0).sqrt(), signed_square, metric_square })
    }
}

/// One-shot decomposition; see [`HodgeSolver`].
pub fn hodge_decompose(omega: &FormField, grid: &Grid4, tol_solve: f64) -> Result<HodgeSplit, HodgeError> {
    HodgeSolver::new(grid, tol_solve).decompose(omega)
}
