use std::ops::{Add, Mul, Neg, Sub};
use std::sync::OnceLock;

use super::topology::tables;
use super::HodgeError;
use crate::pointwise::{form_gram, Mat4, Metric4, Orientation};

/// Number of cells of each degree per vertex.
pub const CELLS_PER_VERTEX: [usize; 5] = [1, 4, 6, 4, 1];

/// Uniform periodic cubical grid on the unit 4-torus with a metric at every
/// vertex.
///
/// Vertex `(x₀, x₁, x₂, x₃)` has index `((x₀n + x₁)n + x₂)n + x₃`. The cube
/// with lower corner at vertex `v` has index `v`; its metric is the mean of
/// its 16 corner metrics.
#[derive(Debug, Clone)]
pub struct Grid4 {
    n: usize,
    metrics: Vec<Metric4>,
    orientation: Orientation,
    weights: [OnceLock<Vec<f64>>; 5],
    cube_metrics: OnceLock<Vec<Metric4>>,
}

impl PartialEq for Grid4 {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.orientation == other.orientation && self.metrics == other.metrics
    }
}

impl Grid4 {
    pub fn new(n: usize, metrics: Vec<Metric4>, orientation: Orientation) -> Result<Self, HodgeError> {
        if n < 4 {
            return Err(HodgeError::GridTooSmall(n));
        }
        let nv = n.pow(4);
        if metrics.len() != nv {
            return Err(HodgeError::BadLength { expected: nv, got: metrics.len() });
        }
        for (v, g) in metrics.iter().enumerate() {
            if !g.is_positive_definite() {
                return Err(HodgeError::MetricNotSpd(v));
            }
        }
        Ok(Grid4 { n, metrics, orientation, weights: Default::default(), cube_metrics: OnceLock::new() })
    }

    pub fn flat(n: usize) -> Result<Self, HodgeError> {
        Self::new(n, vec![Metric4::identity(); n.pow(4)], Orientation::Positive)
    }

    /// Samples `metric` at the vertices `xₐ = iₐ/n`.
    pub fn from_fn(n: usize, orientation: Orientation, metric: impl Fn([f64; 4]) -> Metric4) -> Result<Self, HodgeError> {
        if n < 4 {
            return Err(HodgeError::GridTooSmall(n));
        }
        let h = 1.0 / n as f64;
        let metrics = (0..n.pow(4))
            .map(|v| {
                let x = vertex_coords(n, v);
                metric([x[0] as f64 * h, x[1] as f64 * h, x[2] as f64 * h, x[3] as f64 * h])
            })
            .collect();
        Self::new(n, metrics, orientation)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn h(&self) -> f64 {
        1.0 / self.n as f64
    }

    pub fn num_vertices(&self) -> usize {
        self.n.pow(4)
    }

    pub fn num_cells(&self, k: usize) -> usize {
        CELLS_PER_VERTEX[k] * self.num_vertices()
    }

    pub fn orientation(&self) -> Orientation {
        self.orientation
    }

    pub fn metrics(&self) -> &[Metric4] {
        &self.metrics
    }

    pub fn metric(&self, v: usize) -> &Metric4 {
        &self.metrics[v]
    }

    pub fn point(&self, v: usize) -> [f64; 4] {
        let x = vertex_coords(self.n, v);
        let h = self.h();
        [x[0] as f64 * h, x[1] as f64 * h, x[2] as f64 * h, x[3] as f64 * h]
    }

    /// Index of the vertex one step up along `axis`, wrapping around.
    pub fn shift(&self, v: usize, axis: usize) -> usize {
        shift(self.n, v, axis)
    }

    /// Indices of the 16 corners of cube `c`, by corner mask.
    pub fn corners(&self, c: usize) -> [usize; 16] {
        let mut out = [c; 16];
        for mask in 1..16usize {
            let low = mask & (mask - 1);
            let axis = (mask ^ low).trailing_zeros() as usize;
            out[mask] = self.shift(out[low], axis);
        }
        out
    }

    pub fn cube_metrics(&self) -> &[Metric4] {
        self.cube_metrics.get_or_init(|| {
            (0..self.num_vertices())
                .map(|c| {
                    let sum = self.corners(c).iter().fold(Mat4::zeros(), |acc, &v| acc + self.metrics[v].matrix());
                    Metric4::new_unchecked(sum / 16.0)
                })
                .collect()
        })
    }

    pub fn cube_metric(&self, c: usize) -> &Metric4 {
        &self.cube_metrics()[c]
    }

    /// Per cube, `√det g · ⟨dx^I, dx^J⟩_g` over the degree-`k` direction sets.
    pub(crate) fn weights(&self, k: usize) -> &[f64] {
        self.weights[k].get_or_init(|| {
            let m = CELLS_PER_VERTEX[k];
            let mut out = Vec::with_capacity(m * m * self.num_vertices());
            for g in self.cube_metrics() {
                let gram = form_gram(g, k);
                let s = g.sqrt_det();
                for i in 0..m {
                    for j in 0..m {
                        out.push(s * gram[(i, j)]);
                    }
                }
            }
            out
        })
    }

    pub fn check_field(&self, f: &FormField) -> Result<(), HodgeError> {
        if f.n() != self.n {
            return Err(HodgeError::GridMismatch(self.n, f.n()));
        }
        Ok(())
    }

    /// Same vertices with every metric replaced by `scale(v) · g(v)`.
    pub fn rescaled(&self, scale: impl Fn(usize) -> f64) -> Result<Self, HodgeError> {
        let metrics = self.metrics.iter().enumerate().map(|(v, g)| g.scaled(scale(v))).collect();
        Self::new(self.n, metrics, self.orientation)
    }
}

pub(crate) fn vertex_coords(n: usize, v: usize) -> [usize; 4] {
    [v / (n * n * n), (v / (n * n)) % n, (v / n) % n, v % n]
}

pub(crate) fn shift(n: usize, v: usize, axis: usize) -> usize {
    let stride = n.pow(3 - axis as u32);
    if (v / stride) % n == n - 1 {
        v + stride - n * stride
    } else {
        v + stride
    }
}

/// Real cochain of degree `k`: one value per `k`-cell.
///
/// Cell `(I, v)` spanned by the directions `I` from vertex `v` has index
/// `s·n⁴ + v`, where `s` is the position of `I` among the lexicographically
/// ordered direction sets of size `k`. The value of a smooth form on a cell
/// is its integral over the cell, so a constant form `a dx^I` has values
/// `a·hᵏ`.
#[derive(Clone, Debug, PartialEq)]
pub struct FormField {
    degree: usize,
    n: usize,
    values: Vec<f64>,
}

impl FormField {
    pub fn zeros(degree: usize, n: usize) -> Self {
        assert!(degree <= 4, "degree is at most 4");
        FormField { degree, n, values: vec![0.0; CELLS_PER_VERTEX[degree] * n.pow(4)] }
    }

    pub fn from_values(degree: usize, n: usize, values: Vec<f64>) -> Result<Self, HodgeError> {
        if degree > 4 {
            return Err(HodgeError::BadDegree(degree));
        }
        if n < 4 {
            return Err(HodgeError::GridTooSmall(n));
        }
        let expected = CELLS_PER_VERTEX[degree] * n.pow(4);
        if values.len() != expected {
            return Err(HodgeError::BadLength { expected, got: values.len() });
        }
        Ok(FormField { degree, n, values })
    }

    /// Cochain of the constant form `Σ comps[s] dx^{I_s}`.
    pub fn constant(degree: usize, n: usize, comps: &[f64]) -> Self {
        assert_eq!(comps.len(), CELLS_PER_VERTEX[degree], "one component per direction set");
        let nv = n.pow(4);
        let scale = (1.0 / n as f64).powi(degree as i32);
        let values = comps.iter().flat_map(|&c| std::iter::repeat(c * scale).take(nv)).collect();
        FormField { degree, n, values }
    }

    /// Values `hᵏ · density(x, s)` with `x` the lower vertex of the cell.
    pub fn from_density(degree: usize, n: usize, density: impl Fn([f64; 4], usize) -> f64) -> Self {
        let mut out = Self::zeros(degree, n);
        let nv = n.pow(4);
        let h = 1.0 / n as f64;
        let scale = h.powi(degree as i32);
        for s in 0..CELLS_PER_VERTEX[degree] {
            for v in 0..nv {
                let x = vertex_coords(n, v);
                let p = [x[0] as f64 * h, x[1] as f64 * h, x[2] as f64 * h, x[3] as f64 * h];
                out.values[s * nv + v] = scale * density(p, s);
            }
        }
        out
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn get(&self, set: usize, v: usize) -> f64 {
        self.values[set * self.n.pow(4) + v]
    }

    /// `self += a · x`.
    pub fn axpy(&mut self, a: f64, x: &FormField) {
        assert_eq!((self.degree, self.n), (x.degree, x.n), "fields live on different spaces");
        for (y, xv) in self.values.iter_mut().zip(&x.values) {
            *y += a * xv;
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// Sums of the values over the `k`-tori spanned by each direction set
    /// through the origin.
    pub fn periods(&self) -> Vec<f64> {
        let t = tables(self.degree);
        let nv = self.n.pow(4);
        (0..t.num_sets())
            .map(|s| {
                let m = t.masks[s];
                (0..nv)
                    .filter(|&v| {
                        let x = vertex_coords(self.n, v);
                        (0..4).all(|a| m & (1 << a) != 0 || x[a] == 0)
                    })
                    .map(|v| self.values[s * nv + v])
                    .sum()
            })
            .collect()
    }
}

impl Add for FormField {
    type Output = FormField;
    fn add(mut self, rhs: FormField) -> FormField {
        self.axpy(1.0, &rhs);
        self
    }
}

impl Sub for FormField {
    type Output = FormField;
    fn sub(mut self, rhs: FormField) -> FormField {
        self.axpy(-1.0, &rhs);
        self
    }
}

impl Mul<f64> for FormField {
    type Output = FormField;
    fn mul(mut self, a: f64) -> FormField {
        self.values.iter_mut().for_each(|x| *x *= a);
        self
    }
}

impl Neg for FormField {
    type Output = FormField;
    fn neg(self) -> FormField {
        self * -1.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn periodic_indexing() {
        let n = 5;
        for v in [0, 4, 24, 124, 624, 311] {
            let x = vertex_coords(n, v);
            for a in 0..4 {
                let y = vertex_coords(n, shift(n, v, a));
                for b in 0..4 {
                    let expect = if a == b { (x[b] + 1) % n } else { x[b] };
                    assert_eq!(y[b], expect);
                }
            }
        }
        let g = Grid4::flat(4).unwrap();
        let c = g.corners(255);
        assert_eq!(c[0], 255);
        assert_eq!(c[15], 0);
    }

    #[test]
    fn constant_field_periods() {
        let f = FormField::constant(2, 6, &[1.0, 0.0, 0.0, 0.0, 0.0, 1.0]);
        let p = f.periods();
        let expect = [1.0, 0.0, 0.0, 0.0, 0.0, 1.0];
        for (a, b) in p.iter().zip(expect) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(Grid4::flat(3), Err(HodgeError::GridTooSmall(3))));
        let bad = Metric4::new_unchecked(-Mat4::identity());
        let mut ms = vec![Metric4::identity(); 256];
        ms[17] = bad;
        assert!(matches!(Grid4::new(4, ms, Orientation::Positive), Err(HodgeError::MetricNotSpd(17))));
        assert!(matches!(FormField::from_values(2, 4, vec![0.0; 10]), Err(HodgeError::BadLength { .. })));
    }
}
