use serde::Serialize;

use super::ops::{cube_pairing, mass_apply};
use super::{
    d, d_star, norm, wedge_integral, CohomologyClass2, FormField, Grid4, HarmonicNorm, HodgeError, HodgeSolver,
    TOL_PS, TOL_SOLVE,
};
use crate::pointwise::{AlmostComplex4, HermitianTriple, TwoForm4};

/// A hermitian triple at every vertex of a grid. The grid carries the metrics.
#[derive(Clone, Debug, PartialEq)]
pub struct TripleField {
    grid: Grid4,
    structures: Vec<AlmostComplex4>,
    omegas: Vec<TwoForm4>,
}

impl TripleField {
    /// Checks every triple and that all structures induce one orientation.
    pub fn new(n: usize, triples: Vec<HermitianTriple>) -> Result<Self, HodgeError> {
        let nv = n.pow(4);
        if triples.len() != nv {
            return Err(HodgeError::BadLength { expected: nv, got: triples.len() });
        }
        let orientation = triples[0].j.orientation();
        for (v, t) in triples.iter().enumerate() {
            if !t.is_valid() {
                return Err(HodgeError::InvalidTriple(v));
            }
            if t.j.orientation() != orientation {
                return Err(HodgeError::MixedOrientation(v));
            }
        }
        let grid = Grid4::new(n, triples.iter().map(|t| t.g).collect(), orientation)?;
        Ok(TripleField {
            grid,
            structures: triples.iter().map(|t| t.j).collect(),
            omegas: triples.iter().map(|t| t.omega).collect(),
        })
    }

    /// Samples `triple` at the vertices `xₐ = iₐ/n`.
    pub fn from_fn(n: usize, triple: impl Fn([f64; 4]) -> HermitianTriple) -> Result<Self, HodgeError> {
        if n < 4 {
            return Err(HodgeError::GridTooSmall(n));
        }
        let h = 1.0 / n as f64;
        let triples = (0..n.pow(4))
            .map(|v| {
                let x = super::grid::vertex_coords(n, v);
                triple([x[0] as f64 * h, x[1] as f64 * h, x[2] as f64 * h, x[3] as f64 * h])
            })
            .collect();
        Self::new(n, triples)
    }

    /// Flat metric, standard structure, `ω = e⁰¹ + e²³`.
    pub fn standard(n: usize) -> Result<Self, HodgeError> {
        Self::new(n, vec![HermitianTriple::standard(); n.pow(4)])
    }

    pub fn grid(&self) -> &Grid4 {
        &self.grid
    }

    pub fn n(&self) -> usize {
        self.grid.n()
    }

    pub fn triple(&self, v: usize) -> HermitianTriple {
        HermitianTriple { g: *self.grid.metric(v), j: self.structures[v], omega: self.omegas[v] }
    }

    pub fn omegas(&self) -> &[TwoForm4] {
        &self.omegas
    }

    /// `ω` as a 2-cochain: `h²` times the mean of the four corner values of
    /// the relevant component on each 2-cell.
    pub fn omega_cochain(&self) -> FormField {
        let n = self.n();
        let nv = self.grid.num_vertices();
        let h2 = self.grid.h().powi(2);
        let mut out = FormField::zeros(2, n);
        let vals = out.values_mut();
        for (s, &(i, j)) in crate::pointwise::PAIRS.iter().enumerate() {
            for v in 0..nv {
                let vi = self.grid.shift(v, i);
                let vj = self.grid.shift(v, j);
                let vij = self.grid.shift(vi, j);
                let sum: f64 = [v, vi, vj, vij].iter().map(|&u| self.omegas[u].components()[s]).sum();
                vals[s * nv + v] = h2 * sum / 4.0;
            }
        }
        out
    }

    /// `(g, −J, −ω)` at every vertex.
    pub fn conjugate(&self) -> Self {
        TripleField {
            grid: self.grid.clone(),
            structures: self.structures.iter().map(|j| j.neg()).collect(),
            omegas: self.omegas.iter().map(|w| -*w).collect(),
        }
    }
}

/// `(e^f g, J, e^f ω)` at every vertex; `f` is a 0-cochain.
pub fn conformal_rescale(field: &TripleField, f: &FormField) -> Result<TripleField, HodgeError> {
    field.grid.check_field(f)?;
    if f.degree() != 0 {
        return Err(HodgeError::BadDegree(f.degree()));
    }
    let triples = (0..field.grid.num_vertices()).map(|v| field.triple(v).conformal(f.values()[v])).collect();
    TripleField::new(field.n(), triples)
}

/// Class of the harmonic part of `ω` with the default tolerances.
pub fn tau(field: &TripleField) -> Result<CohomologyClass2, HodgeError> {
    HodgeSolver::new(field.grid(), TOL_SOLVE).class_of(&field.omega_cochain(), TOL_PS)
}

pub fn harmonic_norm(field: &TripleField) -> Result<HarmonicNorm, HodgeError> {
    HodgeSolver::new(field.grid(), TOL_SOLVE).harmonic_norm(&field.omega_cochain())
}

/// Grid norms `(‖dω‖, ‖d*ω‖)` in the metric of the field.
pub fn dstar_omega_diagnostic(field: &TripleField) -> Result<(f64, f64), HodgeError> {
    let omega = field.omega_cochain();
    let grid = field.grid();
    Ok((norm(grid, &d(&omega)?)?, norm(grid, &d_star(&omega, grid)?)?))
}

/// Terms of `∫ e^f ω ∧ ω_H`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Positivity {
    /// `Σ_cubes e^f ⟨ω, ω_H⟩`, using the self-duality of `ω`.
    pub value: f64,
    /// `Σ_cubes e^f (ω ∧ ω_H)` from the cube-center components.
    pub wedge_value: f64,
    /// `e^{min f} ‖ω_H‖²`.
    pub bound: f64,
    /// `‖ω_H‖²` in the metric inner product.
    pub harmonic_square: f64,
    /// Smallest cube density of `s = ⟨ω, ω_H⟩`.
    pub min_s: f64,
    pub negative_cubes: usize,
    pub min_f: f64,
}

/// `∫ e^f ω ∧ ω_H` with `ω_H` the harmonic part of the unrescaled `ω`.
///
/// For self-dual `ω` the integrand is `e^f ⟨ω, ω_H⟩ dvol`, which is summed
/// cube by cube from the Galerkin inner product. The weight on a cube is the
/// mean of `e^f` over its corners. When every cube density `s` is
/// nonnegative, `value ≥ e^{min f} ‖ω_H‖²` holds exactly.
pub fn positivity_integral(field: &TripleField, f: &FormField) -> Result<Positivity, HodgeError> {
    positivity_with(&HodgeSolver::new(field.grid(), TOL_SOLVE), field, f)
}

pub fn positivity_with(solver: &HodgeSolver, field: &TripleField, f: &FormField) -> Result<Positivity, HodgeError> {
    let grid = field.grid();
    grid.check_field(f)?;
    if f.degree() != 0 {
        return Err(HodgeError::BadDegree(f.degree()));
    }
    let omega = field.omega_cochain();
    let harmonic = solver.harmonic_part(&omega)?;
    let harmonic_square = super::ops::dot(harmonic.values(), &mass_apply(grid, 2, harmonic.values()));
    let ef: Vec<f64> = f.values().iter().map(|x| x.exp()).collect();
    let min_f = f.values().iter().copied().fold(f64::INFINITY, f64::min);
    let vol = grid.h().powi(4);
    let (mut value, mut wedge_value, mut min_s, mut negative_cubes) = (0.0, 0.0, f64::INFINITY, 0);
    for c in 0..grid.num_vertices() {
        let weight = grid.corners(c).iter().map(|&v| ef[v]).sum::<f64>() / 16.0;
        let q = cube_pairing(grid, 2, c, omega.values(), harmonic.values());
        let s = q / (grid.cube_metric(c).sqrt_det() * vol);
        min_s = min_s.min(s);
        if s < 0.0 {
            negative_cubes += 1;
        }
        value += weight * q;
        let a = super::cube_components(&omega, grid, c);
        let b = super::cube_components(&harmonic, grid, c);
        let wa = TwoForm4::new([a[0], a[1], a[2], a[3], a[4], a[5]]);
        let wb = TwoForm4::new([b[0], b[1], b[2], b[3], b[4], b[5]]);
        wedge_value += weight * wa.wedge(&wb) * vol;
    }
    wedge_value *= grid.orientation().sign();
    let bound = min_f.exp() * harmonic_square;
    Ok(Positivity { value, wedge_value, bound, harmonic_square, min_s, negative_cubes, min_f })
}

/// `∫ ω ∧ ω_H` with no weight, from [`wedge_integral`].
pub fn omega_wedge_harmonic(solver: &HodgeSolver, field: &TripleField) -> Result<f64, HodgeError> {
    let omega = field.omega_cochain();
    let harmonic = solver.harmonic_part(&omega)?;
    wedge_integral(&omega, &harmonic, field.grid())
}
