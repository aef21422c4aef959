//! Seeded families of triple fields, conformal factors and structure pairs.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::hodge::{d, FormField, Grid4, HodgeError, TripleField};
use crate::pointwise::{polar_triple, random, AlmostComplex4, HermitianTriple, Mat4, Metric4, TwoForm4};

use super::config::{FactorKind, FactorSpec, PairKind};

/// Stream `trial` of the generator seeded by `seed`.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Stream reserved for scenario-wide parameters.
pub fn setup_rng(seed: u64) -> ChaCha8Rng {
    trial_rng(seed, u64::MAX)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mode {
    pub k: [i32; 4],
    pub amp: f64,
    pub phase: f64,
}

/// `c + Σ amp · sin(2π k·x + phase)` on the unit torus.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SmoothFunction {
    pub constant: f64,
    pub modes: Vec<Mode>,
}

impl SmoothFunction {
    pub fn constant(c: f64) -> Self {
        SmoothFunction { constant: c, modes: Vec::new() }
    }

    /// `amplitude · sin(2πx₀) cos(2πx₂)`.
    pub fn bump(amplitude: f64) -> Self {
        let half = 0.5 * amplitude;
        SmoothFunction {
            constant: 0.0,
            modes: vec![
                Mode { k: [1, 0, 1, 0], amp: half, phase: 0.0 },
                Mode { k: [1, 0, -1, 0], amp: half, phase: 0.0 },
            ],
        }
    }

    /// Three modes with wave numbers in `{−2..2}⁴ ∖ 0`, scaled so the largest
    /// vertex value on the `n`-grid has modulus `amplitude`.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, n: usize, amplitude: f64) -> Self {
        let mut modes = Vec::with_capacity(3);
        while modes.len() < 3 {
            let k = [0; 4].map(|_: i32| rng.gen_range(-2..=2));
            if k == [0; 4] {
                continue;
            }
            modes.push(Mode { k, amp: rng.gen_range(-1.0..1.0), phase: rng.gen_range(0.0..TAU) });
        }
        let mut f = SmoothFunction { constant: 0.0, modes };
        let peak = f.to_cochain(n).max_abs();
        if peak > 0.0 {
            for m in &mut f.modes {
                m.amp *= amplitude / peak;
            }
        }
        f
    }

    pub fn from_spec<R: Rng + ?Sized>(spec: &FactorSpec, rng: &mut R, n: usize) -> Self {
        match spec.kind {
            FactorKind::Zero => Self::constant(0.0),
            FactorKind::Constant => Self::constant(spec.amplitude),
            FactorKind::Bump => Self::bump(spec.amplitude),
            FactorKind::Random => Self::random(rng, n, spec.amplitude),
        }
    }

    pub fn eval(&self, x: [f64; 4]) -> f64 {
        self.constant
            + self
                .modes
                .iter()
                .map(|m| {
                    let kx: f64 = (0..4).map(|i| m.k[i] as f64 * x[i]).sum();
                    m.amp * (TAU * kx + m.phase).sin()
                })
                .sum::<f64>()
    }

    /// `∂f/∂xᵢ`.
    pub fn partial(&self, x: [f64; 4], i: usize) -> f64 {
        self.modes
            .iter()
            .map(|m| {
                let kx: f64 = (0..4).map(|j| m.k[j] as f64 * x[j]).sum();
                m.amp * TAU * m.k[i] as f64 * (TAU * kx + m.phase).cos()
            })
            .sum()
    }

    /// Vertex values as a 0-cochain.
    pub fn to_cochain(&self, n: usize) -> FormField {
        FormField::from_density(0, n, |x, _| self.eval(x))
    }
}

/// Random trigonometric 1-form sampled at the lower vertex of each edge.
pub fn random_one_form<R: Rng + ?Sized>(rng: &mut R, n: usize) -> FormField {
    let comps: Vec<SmoothFunction> = (0..4).map(|_| SmoothFunction::random(rng, n, 1.0)).collect();
    FormField::from_density(1, n, |x, s| comps[s].eval(x))
}

/// `dη` for a [`random_one_form`] `η`.
pub fn random_exact_form<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Result<FormField, HodgeError> {
    d(&random_one_form(rng, n))
}

fn random_matrix<R: Rng + ?Sized>(rng: &mut R) -> Mat4 {
    Mat4::from_fn(|_, _| rng.gen_range(-1.0..1.0))
}

/// `J = A⁻¹J_std A`, `g = AᵀA` with `A = exp(ε(p₁(x)K₁ + p₂(x)K₂))` and
/// seeded matrices `K₁`, `K₂`.
#[derive(Clone, Debug, PartialEq)]
pub struct FramePerturbation {
    pub k: [Mat4; 2],
    pub epsilon: f64,
}

impl FramePerturbation {
    pub fn from_seed(seed: u64, epsilon: f64) -> Self {
        let mut rng = setup_rng(seed);
        FramePerturbation { k: [random_matrix(&mut rng), random_matrix(&mut rng)], epsilon }
    }

    pub fn triple(&self, x: [f64; 4]) -> HermitianTriple {
        let p1 = (TAU * x[0]).sin() * (TAU * x[1]).cos();
        let p2 = (TAU * (x[2] + x[3])).sin() + 0.5 * (TAU * x[1]).cos();
        let a = ((self.k[0] * p1 + self.k[1] * p2) * self.epsilon).exp();
        // det A = exp(tr) > 0, so A is invertible
        let ainv = a.try_inverse().expect("matrix exponential is invertible");
        let j = AlmostComplex4::new_unchecked(ainv * AlmostComplex4::standard().matrix() * a);
        let g = Metric4::new_unchecked(a.transpose() * a);
        HermitianTriple::from_metric_and_structure(g, j).expect("AᵀA is compatible with A⁻¹J_std A")
    }

    pub fn field(&self, n: usize) -> Result<TripleField, HodgeError> {
        TripleField::from_fn(n, |x| self.triple(x))
    }
}

/// `g = exp(ε φ(x) S)` with `S` symmetric, commuting with `J_std`, traceless
/// and of Frobenius norm 2, so `J_std` stays compatible and `det g = 1`.
/// Without volume preservation `g` is further scaled by `exp(ε ψ(x))`.
#[derive(Clone, Debug, PartialEq)]
pub struct VolumeDeformation {
    pub s: Mat4,
    pub epsilon: f64,
    pub volume_preserving: bool,
}

impl VolumeDeformation {
    pub fn from_seed(seed: u64, epsilon: f64, volume_preserving: bool) -> Self {
        let mut rng = setup_rng(seed);
        let j = *AlmostComplex4::standard().matrix();
        let a = random_matrix(&mut rng);
        let sym = a + a.transpose();
        let inv = (sym + j.transpose() * sym * j) * 0.5;
        let inv = inv - Mat4::identity() * (inv.trace() / 4.0);
        let s = inv * (2.0 / inv.norm());
        VolumeDeformation { s, epsilon, volume_preserving }
    }

    pub fn metric(&self, x: [f64; 4]) -> Metric4 {
        let phase = (TAU * x[0]).sin() * (TAU * (x[1] + x[2])).cos() + 0.5 * (TAU * x[3]).sin();
        let g = (self.s * (self.epsilon * phase)).exp();
        let g = (g + g.transpose()) * 0.5;
        let g = if self.volume_preserving { g } else { g * (self.epsilon * (TAU * x[1]).cos()).exp() };
        Metric4::new_unchecked(g)
    }

    pub fn triple(&self, x: [f64; 4]) -> HermitianTriple {
        HermitianTriple::from_metric_and_structure(self.metric(x), AlmostComplex4::standard())
            .expect("J-invariant metric is compatible")
    }

    pub fn field(&self, n: usize) -> Result<TripleField, HodgeError> {
        TripleField::from_fn(n, |x| self.triple(x))
    }
}

/// First vertex where `√det g₂ / √det g₁` differs from 1 by more than `tol`,
/// with that relative difference.
pub fn volume_mismatch(g1: &Grid4, g2: &Grid4, tol: f64) -> Option<(usize, f64)> {
    g1.metrics()
        .iter()
        .zip(g2.metrics())
        .map(|(a, b)| (b.sqrt_det() / a.sqrt_det() - 1.0).abs())
        .enumerate()
        .find(|&(_, r)| r > tol)
}

/// `e^{t f} ω_std` with the flat metric scaled by the same factor.
pub fn conformal_standard(f: &SmoothFunction, t: f64, n: usize) -> Result<TripleField, HodgeError> {
    let base = HermitianTriple::standard();
    TripleField::from_fn(n, |x| base.conformal(t * f.eval(x)))
}

/// Polar triple of the closed form `ω_std + dη` with
/// `η = ε sin(2π(x₁+x₂)) dx⁰ + ε cos(2π(x₀+x₃)) dx²`; needs `2πε < 1`.
pub fn closed_curved_triple(x: [f64; 4], epsilon: f64) -> Result<HermitianTriple, HodgeError> {
    let a = TAU * epsilon * (TAU * (x[1] + x[2])).cos();
    let b = TAU * epsilon * (TAU * (x[0] + x[3])).sin();
    let omega = TwoForm4::new([1.0 - a, -a - b, 0.0, 0.0, 0.0, 1.0 + b]);
    Ok(polar_triple(&omega)?)
}

pub fn closed_curved_field(n: usize, epsilon: f64) -> Result<TripleField, HodgeError> {
    if TAU * epsilon >= 1.0 {
        return Err(HodgeError::InvalidTriple(0));
    }
    let mut triples = Vec::with_capacity(n.pow(4));
    let grid = Grid4::flat(n)?;
    for v in 0..grid.num_vertices() {
        triples.push(closed_curved_triple(grid.point(v), epsilon)?);
    }
    TripleField::new(n, triples)
}

/// Reflection in the last coordinate; conjugating by it reverses orientation.
fn reflection() -> Mat4 {
    Mat4::from_diagonal(&nalgebra::Vector4::new(1.0, 1.0, 1.0, -1.0))
}

/// `(g_ref, J₀, J₁)` with `g_ref` compatible with `J₀`.
pub fn junction_pair<R: Rng + ?Sized>(rng: &mut R, kind: PairKind) -> (Metric4, AlmostComplex4, AlmostComplex4) {
    let (g0, j0) = random::compatible_pair(rng);
    let j1 = match kind {
        PairKind::Identical => j0,
        PairKind::Generic => random::compatible_pair(rng).1,
        PairKind::Opposite => random::compatible_pair(rng).1.conjugated_by(&reflection()),
    };
    (g0, j0, j1)
}
