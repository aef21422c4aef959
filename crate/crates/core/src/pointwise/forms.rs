use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, Matrix6, Vector6};
use serde::{Deserialize, Serialize};

use super::{Mat4, Metric4, Orientation};

/// Basis index pairs in storage order.
pub const PAIRS: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

/// Antisymmetric bilinear form on `ℝ⁴`.
#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct TwoForm4 {
    c: [f64; 6],
}

impl TwoForm4 {
    pub fn new(c: [f64; 6]) -> Self {
        TwoForm4 { c }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    /// `eⁱ∧eʲ` for `i < j`.
    pub fn basis(i: usize, j: usize) -> Self {
        let mut c = [0.0; 6];
        let k = PAIRS.iter().position(|&p| p == (i, j)).expect("i < j < 4");
        c[k] = 1.0;
        TwoForm4 { c }
    }

    /// Antisymmetric part of `m`, read as `ω(eᵢ, eⱼ) = m[i][j]`.
    pub fn from_matrix(m: &Mat4) -> Self {
        let mut c = [0.0; 6];
        for (k, &(i, j)) in PAIRS.iter().enumerate() {
            c[k] = 0.5 * (m[(i, j)] - m[(j, i)]);
        }
        TwoForm4 { c }
    }

    pub fn to_matrix(&self) -> Mat4 {
        let mut m = Mat4::zeros();
        for (k, &(i, j)) in PAIRS.iter().enumerate() {
            m[(i, j)] = self.c[k];
            m[(j, i)] = -self.c[k];
        }
        m
    }

    pub fn components(&self) -> [f64; 6] {
        self.c
    }

    pub fn as_vector(&self) -> Vector6<f64> {
        Vector6::from(self.c)
    }

    pub fn from_vector(v: &Vector6<f64>) -> Self {
        TwoForm4 { c: [v[0], v[1], v[2], v[3], v[4], v[5]] }
    }

    pub fn pfaffian(&self) -> f64 {
        let c = &self.c;
        c[0] * c[5] - c[1] * c[4] + c[2] * c[3]
    }

    /// Coefficient of `e⁰¹²³` in `self ∧ other`.
    pub fn wedge(&self, other: &TwoForm4) -> f64 {
        let (a, b) = (&self.c, &other.c);
        a[0] * b[5] + a[5] * b[0] - a[1] * b[4] - a[4] * b[1] + a[2] * b[3] + a[3] * b[2]
    }

    /// Rank of the form: 0, 2 or 4, with relative threshold `tol`.
    pub fn rank(&self, tol: f64) -> usize {
        let scale = self.max_abs();
        if scale == 0.0 {
            return 0;
        }
        if self.pfaffian().abs() > tol * scale * scale {
            4
        } else {
            2
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.c.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn inner(&self, other: &TwoForm4, g: &Metric4) -> f64 {
        let s = gram2(g);
        self.as_vector().dot(&(s * other.as_vector()))
    }

    pub fn norm_sq(&self, g: &Metric4) -> f64 {
        self.inner(self, g)
    }

    /// `ω(Ju, Jv)`, i.e. the pullback by an endomorphism.
    pub fn pullback(&self, a: &Mat4) -> Self {
        Self::from_matrix(&(a.transpose() * self.to_matrix() * a))
    }
}

impl Add for TwoForm4 {
    type Output = TwoForm4;
    fn add(self, o: TwoForm4) -> TwoForm4 {
        TwoForm4 { c: std::array::from_fn(|k| self.c[k] + o.c[k]) }
    }
}

impl Sub for TwoForm4 {
    type Output = TwoForm4;
    fn sub(self, o: TwoForm4) -> TwoForm4 {
        TwoForm4 { c: std::array::from_fn(|k| self.c[k] - o.c[k]) }
    }
}

impl Neg for TwoForm4 {
    type Output = TwoForm4;
    fn neg(self) -> TwoForm4 {
        TwoForm4 { c: self.c.map(|x| -x) }
    }
}

impl Mul<f64> for TwoForm4 {
    type Output = TwoForm4;
    fn mul(self, s: f64) -> TwoForm4 {
        TwoForm4 { c: self.c.map(|x| x * s) }
    }
}

/// Increasing `k`-subsets of `{0,1,2,3}` in lexicographic order.
pub fn subsets(k: usize) -> Vec<Vec<usize>> {
    let sorted: std::collections::BTreeSet<Vec<usize>> = (0u32..16)
        .filter(|m| m.count_ones() as usize == k)
        .map(|m| (0..4).filter(|i| m & (1 << i) != 0).collect())
        .collect();
    sorted.into_iter().collect()
}

fn complement(s: &[usize]) -> Vec<usize> {
    (0..4).filter(|i| !s.contains(i)).collect()
}

fn perm_sign(p: &[usize]) -> f64 {
    let mut inv = 0;
    for a in 0..p.len() {
        for b in a + 1..p.len() {
            if p[a] > p[b] {
                inv += 1;
            }
        }
    }
    if inv % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

fn minor(m: &Mat4, rows: &[usize], cols: &[usize]) -> f64 {
    let k = rows.len();
    if k == 0 {
        return 1.0;
    }
    DMatrix::from_fn(k, k, |a, b| m[(rows[a], cols[b])]).determinant()
}

/// Gram matrix of the coordinate `k`-forms: `⟨dx^I, dx^J⟩ = det(g⁻¹[I, J])`.
pub fn form_gram(g: &Metric4, k: usize) -> DMatrix<f64> {
    let ginv = g.inverse();
    let sets = subsets(k);
    DMatrix::from_fn(sets.len(), sets.len(), |a, b| minor(&ginv, &sets[a], &sets[b]))
}

/// Matrix of the Hodge star from `k`-forms to `(4−k)`-forms, defined by
/// `β ∧ *α = ⟨β, α⟩ vol_g` with `vol_g = ±√det g · e⁰¹²³`.
pub fn star_matrix(g: &Metric4, k: usize, orientation: Orientation) -> DMatrix<f64> {
    let src = subsets(k);
    let dst = subsets(4 - k);
    let gram = form_gram(g, k);
    let scale = orientation.sign() * g.sqrt_det();
    let mut out = DMatrix::zeros(dst.len(), src.len());
    for (kk, set) in src.iter().enumerate() {
        let comp = complement(set);
        let row = dst.iter().position(|d| *d == comp).expect("complement is a subset");
        let mut perm = set.clone();
        perm.extend_from_slice(&comp);
        let eps = perm_sign(&perm);
        for a in 0..src.len() {
            out[(row, a)] += eps * scale * gram[(kk, a)];
        }
    }
    out
}

fn gram2(g: &Metric4) -> Matrix6<f64> {
    let d = form_gram(g, 2);
    Matrix6::from_fn(|a, b| d[(a, b)])
}

/// Hodge star on 2-forms as a 6×6 operator.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Star2(pub Matrix6<f64>);

impl Star2 {
    pub fn apply(&self, w: &TwoForm4) -> TwoForm4 {
        TwoForm4::from_vector(&(self.0 * w.as_vector()))
    }
}

pub fn hodge_star_2(g: &Metric4, orientation: Orientation) -> Star2 {
    let d = star_matrix(g, 2, orientation);
    Star2(Matrix6::from_fn(|a, b| d[(a, b)]))
}

/// `(ω⁺, ω⁻)` with `*ω^± = ±ω^±`.
pub fn sd_asd_split(omega: &TwoForm4, g: &Metric4, orientation: Orientation) -> (TwoForm4, TwoForm4) {
    let s = hodge_star_2(g, orientation).apply(omega);
    ((*omega + s) * 0.5, (*omega - s) * 0.5)
}
