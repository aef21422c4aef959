use super::grid::{shift, CELLS_PER_VERTEX};
use super::topology::tables;
use super::{FormField, Grid4, HodgeError};
use crate::pointwise::{sd_asd_split, star_matrix, TwoForm4};

/// Relative residual for the mass-matrix solves inside [`d_star`].
pub const TOL_MASS: f64 = 1e-13;

/// Coboundary: `(dω)(I, v) = Σₚ (−1)ᵖ [ω(I∖iₚ, v + e_{iₚ}) − ω(I∖iₚ, v)]`.
pub fn d(f: &FormField) -> Result<FormField, HodgeError> {
    let k = f.degree();
    if k > 3 {
        return Err(HodgeError::BadDegree(k));
    }
    let (n, nv) = (f.n(), f.n().pow(4));
    let (lo, hi) = (tables(k), tables(k + 1));
    let x = f.values();
    let mut out = FormField::zeros(k + 1, n);
    let y = out.values_mut();
    for (si, set) in hi.sets.iter().enumerate() {
        for (p, &a) in set.iter().enumerate() {
            let face: Vec<usize> = set.iter().copied().filter(|&b| b != a).collect();
            let fi = lo.set_index(&face);
            let sign = if p % 2 == 0 { 1.0 } else { -1.0 };
            let (src, dst) = (&x[fi * nv..(fi + 1) * nv], &mut y[si * nv..(si + 1) * nv]);
            for v in 0..nv {
                dst[v] += sign * (src[shift(n, v, a)] - src[v]);
            }
        }
    }
    Ok(out)
}

/// Transpose of [`d`] with respect to the euclidean pairing of cochains.
pub fn d_transpose(f: &FormField) -> Result<FormField, HodgeError> {
    let k = f.degree();
    if k == 0 {
        return Err(HodgeError::BadDegree(k));
    }
    let (n, nv) = (f.n(), f.n().pow(4));
    let (lo, hi) = (tables(k - 1), tables(k));
    let y = f.values();
    let mut out = FormField::zeros(k - 1, n);
    let x = out.values_mut();
    for (si, set) in hi.sets.iter().enumerate() {
        for (p, &a) in set.iter().enumerate() {
            let face: Vec<usize> = set.iter().copied().filter(|&b| b != a).collect();
            let fi = lo.set_index(&face);
            let sign = if p % 2 == 0 { 1.0 } else { -1.0 };
            let src = &y[si * nv..(si + 1) * nv];
            let dst = &mut x[fi * nv..(fi + 1) * nv];
            for v in 0..nv {
                let s = sign * src[v];
                dst[shift(n, v, a)] += s;
                dst[v] -= s;
            }
        }
    }
    Ok(out)
}

/// Global indices of the local cells of cube `c`.
fn local_indices(grid: &Grid4, k: usize, c: usize, idx: &mut [usize]) {
    let nv = grid.num_vertices();
    let corners = grid.corners(c);
    for (l, &(s, corner)) in tables(k).local.iter().enumerate() {
        idx[l] = s * nv + corners[corner as usize];
    }
}

/// Galerkin mass matrix of the Whitney forms, `∫ ⟨Wₐ, W_b⟩_g dvol_g`, with the
/// cube metric held constant on each cube.
pub fn mass_apply(grid: &Grid4, k: usize, x: &[f64]) -> Vec<f64> {
    let t = tables(k);
    let (m, nl, nv) = (t.num_sets(), t.local.len(), grid.num_vertices());
    assert_eq!(x.len(), m * nv, "cochain length");
    let w = grid.weights(k);
    let scale = grid.h().powi(4 - 2 * k as i32);
    let mut y = vec![0.0; x.len()];
    let mut idx = vec![0usize; nl];
    let mut xl = vec![0.0; nl];
    for c in 0..nv {
        local_indices(grid, k, c, &mut idx);
        for l in 0..nl {
            xl[l] = x[idx[l]];
        }
        let wc = &w[c * m * m..(c + 1) * m * m];
        for a in 0..nl {
            let wrow = &wc[t.local[a].0 * m..(t.local[a].0 + 1) * m];
            let orow = &t.overlap[a * nl..(a + 1) * nl];
            let mut acc = 0.0;
            for b in 0..nl {
                acc += wrow[t.local[b].0] * orow[b] * xl[b];
            }
            y[idx[a]] += scale * acc;
        }
    }
    y
}

/// Contribution of cube `c` to `⟨x, y⟩_M`.
pub fn cube_pairing(grid: &Grid4, k: usize, c: usize, x: &[f64], y: &[f64]) -> f64 {
    let t = tables(k);
    let (m, nl) = (t.num_sets(), t.local.len());
    let w = &grid.weights(k)[c * m * m..(c + 1) * m * m];
    let mut idx = vec![0usize; nl];
    local_indices(grid, k, c, &mut idx);
    let mut acc = 0.0;
    for a in 0..nl {
        for b in 0..nl {
            acc += x[idx[a]] * w[t.local[a].0 * m + t.local[b].0] * t.overlap[a * nl + b] * y[idx[b]];
        }
    }
    acc * grid.h().powi(4 - 2 * k as i32)
}

pub fn mass_diagonal(grid: &Grid4, k: usize) -> Vec<f64> {
    let t = tables(k);
    let (m, nl, nv) = (t.num_sets(), t.local.len(), grid.num_vertices());
    let w = grid.weights(k);
    let scale = grid.h().powi(4 - 2 * k as i32);
    let mut diag = vec![0.0; m * nv];
    let mut idx = vec![0usize; nl];
    for c in 0..nv {
        local_indices(grid, k, c, &mut idx);
        for (a, &(s, _)) in t.local.iter().enumerate() {
            diag[idx[a]] += scale * w[c * m * m + s * m + s] * t.overlap[a * nl + a];
        }
    }
    diag
}

/// Diagonal of `dᵀ M_{k+1} d` on `k`-cochains, assembled cube by cube.
pub fn laplacian_diagonal(grid: &Grid4, k: usize) -> Vec<f64> {
    let (lo, hi) = (tables(k), tables(k + 1));
    let (m, nh, nv) = (hi.num_sets(), hi.local.len(), grid.num_vertices());
    let w = grid.weights(k + 1);
    let scale = grid.h().powi(4 - 2 * (k + 1) as i32);
    // cofaces of each local k-cell inside the cube
    let mut cofaces: Vec<Vec<(usize, f64)>> = vec![Vec::new(); lo.local.len()];
    for (f, terms) in lo.boundary.iter().enumerate() {
        for &(e, s) in terms {
            cofaces[e].push((f, s));
        }
    }
    let mut diag = vec![0.0; lo.num_sets() * nv];
    let mut idx = vec![0usize; lo.local.len()];
    for c in 0..nv {
        local_indices(grid, k, c, &mut idx);
        let wc = &w[c * m * m..(c + 1) * m * m];
        for (e, list) in cofaces.iter().enumerate() {
            let mut acc = 0.0;
            for &(f, sf) in list {
                for &(g, sg) in list {
                    acc += sf * sg * wc[hi.local[f].0 * m + hi.local[g].0] * hi.overlap[f * nh + g];
                }
            }
            diag[idx[e]] += scale * acc;
        }
    }
    diag
}

/// `⟨a, b⟩_M`, the metric inner product of two cochains.
pub fn inner(grid: &Grid4, a: &FormField, b: &FormField) -> Result<f64, HodgeError> {
    grid.check_field(a)?;
    grid.check_field(b)?;
    if a.degree() != b.degree() {
        return Err(HodgeError::DegreeMismatch(a.degree(), b.degree()));
    }
    let mb = mass_apply(grid, b.degree(), b.values());
    Ok(dot(a.values(), &mb))
}

pub fn norm(grid: &Grid4, a: &FormField) -> Result<f64, HodgeError> {
    Ok(inner(grid, a, a)?.max(0.0).sqrt())
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Hodge star taking the cells at each vertex `v` to the complementary cells
/// at `v`, using the pointwise star of the metric of the cube based at `v`.
pub fn star(f: &FormField, grid: &Grid4) -> Result<FormField, HodgeError> {
    grid.check_field(f)?;
    let k = f.degree();
    let nv = grid.num_vertices();
    let h = grid.h();
    let factor = h.powi(4 - k as i32) / h.powi(k as i32);
    let (ms, md) = (CELLS_PER_VERTEX[k], CELLS_PER_VERTEX[4 - k]);
    let mut out = FormField::zeros(4 - k, grid.n());
    let x = f.values();
    let y = out.values_mut();
    for v in 0..nv {
        let s = star_matrix(grid.cube_metric(v), k, grid.orientation());
        for r in 0..md {
            let mut acc = 0.0;
            for c in 0..ms {
                acc += s[(r, c)] * x[c * nv + v];
            }
            y[r * nv + v] = factor * acc;
        }
    }
    Ok(out)
}

/// Codifferential `d* = M_{k−1}⁻¹ dᵀ M_k`, the adjoint of `d` for the
/// Galerkin inner products.
pub fn d_star(f: &FormField, grid: &Grid4) -> Result<FormField, HodgeError> {
    d_star_with_tol(f, grid, TOL_MASS)
}

pub fn d_star_with_tol(f: &FormField, grid: &Grid4, tol: f64) -> Result<FormField, HodgeError> {
    grid.check_field(f)?;
    let k = f.degree();
    if k == 0 {
        return Err(HodgeError::BadDegree(k));
    }
    let mf = FormField::from_values(k, grid.n(), mass_apply(grid, k, f.values()))?;
    let rhs = d_transpose(&mf)?;
    let diag = mass_diagonal(grid, k - 1);
    let max_iter = 50 * grid.n() * grid.n();
    let (u, _) = super::pcg(|x, y| y.copy_from_slice(&mass_apply(grid, k - 1, x)), &diag, rhs.values(), tol, max_iter)?;
    FormField::from_values(k - 1, grid.n(), u)
}

/// Components of `f` at the center of cube `c`: the mean over the parallel
/// cells of the cube, divided by `hᵏ`.
pub fn cube_components(f: &FormField, grid: &Grid4, c: usize) -> Vec<f64> {
    let k = f.degree();
    let t = tables(k);
    let nv = grid.num_vertices();
    let corners = grid.corners(c);
    let mut out = vec![0.0; t.num_sets()];
    for &(s, corner) in &t.local {
        out[s] += f.values()[s * nv + corners[corner as usize]];
    }
    let per_set = (1usize << (4 - k)) as f64;
    let scale = grid.h().powi(k as i32);
    out.iter().map(|x| x / (per_set * scale)).collect()
}

fn two_form(comps: &[f64]) -> TwoForm4 {
    TwoForm4::new([comps[0], comps[1], comps[2], comps[3], comps[4], comps[5]])
}

/// `∫ a ∧ b` over the oriented torus, from the cube-center components.
///
/// For Whitney forms this is exact: the product of two complementary
/// profiles integrates to the product of their cube means.
pub fn wedge_integral(a: &FormField, b: &FormField, grid: &Grid4) -> Result<f64, HodgeError> {
    grid.check_field(a)?;
    grid.check_field(b)?;
    for f in [a, b] {
        if f.degree() != 2 {
            return Err(HodgeError::BadDegree(f.degree()));
        }
    }
    let vol = grid.h().powi(4);
    let sum: f64 = (0..grid.num_vertices())
        .map(|c| two_form(&cube_components(a, grid, c)).wedge(&two_form(&cube_components(b, grid, c))))
        .sum();
    Ok(grid.orientation().sign() * sum * vol)
}

/// `(‖f⁻‖, ‖f‖)` in the cube-center `L²` norm, `f⁻` the anti-self-dual part.
pub fn asd_defect(f: &FormField, grid: &Grid4) -> Result<(f64, f64), HodgeError> {
    grid.check_field(f)?;
    if f.degree() != 2 {
        return Err(HodgeError::BadDegree(f.degree()));
    }
    let vol = grid.h().powi(4);
    let (mut asd, mut total) = (0.0, 0.0);
    for c in 0..grid.num_vertices() {
        let g = grid.cube_metric(c);
        let w = two_form(&cube_components(f, grid, c));
        let (_, minus) = sd_asd_split(&w, g, grid.orientation());
        let dv = g.sqrt_det() * vol;
        asd += minus.norm_sq(g) * dv;
        total += w.norm_sq(g) * dv;
    }
    Ok((asd.sqrt(), total.sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pointwise::{Metric4, Orientation};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    pub(crate) fn random_field(rng: &mut ChaCha8Rng, k: usize, n: usize) -> FormField {
        let len = CELLS_PER_VERTEX[k] * n.pow(4);
        FormField::from_values(k, n, (0..len).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap()
    }

    fn wavy_grid(n: usize, eps: f64) -> Grid4 {
        use std::f64::consts::TAU;
        Grid4::from_fn(n, Orientation::Positive, |x| {
            let m = crate::pointwise::Mat4::from_fn(|i, j| {
                let base = if i == j { 1.0 } else { 0.0 };
                base + eps * (TAU * (x[i] + 2.0 * x[j])).sin() * (TAU * (x[j] + x[i])).cos()
            });
            Metric4::new_unchecked(m)
        })
        .unwrap()
    }

    #[test]
    fn d_of_constant_vanishes_and_dd_is_zero() {
        let f = FormField::constant(0, 5, &[3.0]);
        assert_eq!(d(&f).unwrap().max_abs(), 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for k in 0..3 {
            // integer values make every sum exact
            let mut x = random_field(&mut rng, k, 5);
            x.values_mut().iter_mut().for_each(|v| *v = (*v * 1000.0).round());
            assert_eq!(d(&d(&x).unwrap()).unwrap().max_abs(), 0.0);
            let x = random_field(&mut rng, k, 5);
            assert!(d(&d(&x).unwrap()).unwrap().max_abs() < 1e-14);
            let y = random_field(&mut rng, k + 2, 5);
            assert!(d_transpose(&d_transpose(&y).unwrap()).unwrap().max_abs() < 1e-14);
        }
        assert!(matches!(d(&FormField::zeros(4, 4)), Err(HodgeError::BadDegree(4))));
    }

    #[test]
    fn d_of_sawtooth_coordinate() {
        // f = x₀ mod 1 sampled at vertices: unit steps of h, one seam of −(n−1)h
        let n = 6;
        let f = FormField::from_density(0, n, |x, _| x[0]);
        let df = d(&f).unwrap();
        let nv = n.pow(4);
        let h = 1.0 / n as f64;
        for v in 0..nv {
            let x0 = super::super::grid::vertex_coords(n, v)[0];
            let expect = if x0 == n - 1 { -(n as f64 - 1.0) * h } else { h };
            assert!((df.get(0, v) - expect).abs() < 1e-14);
            for s in 1..4 {
                assert_eq!(df.get(s, v), 0.0);
            }
        }
    }

    #[test]
    fn d_transpose_is_adjoint() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for k in 0..4 {
            let x = random_field(&mut rng, k, 4);
            let y = random_field(&mut rng, k + 1, 4);
            let lhs = dot(d(&x).unwrap().values(), y.values());
            let rhs = dot(x.values(), d_transpose(&y).unwrap().values());
            assert!((lhs - rhs).abs() < 1e-11 * lhs.abs().max(1.0));
        }
    }

    #[test]
    fn mass_reproduces_constant_form_norms() {
        // ‖dx^I‖² = √det g · det(g⁻¹[I, I]) on the unit torus
        let g = Metric4::new_unchecked(crate::pointwise::Mat4::from_fn(|i, j| if i == j { 2.0 + i as f64 } else { 0.3 }));
        let grid = Grid4::new(4, vec![g; 256], Orientation::Positive).unwrap();
        for k in 0..=4 {
            let gram = crate::pointwise::form_gram(&g, k);
            for s in 0..CELLS_PER_VERTEX[k] {
                let mut comps = vec![0.0; CELLS_PER_VERTEX[k]];
                comps[s] = 1.0;
                let f = FormField::constant(k, 4, &comps);
                let got = inner(&grid, &f, &f).unwrap();
                let expect = g.sqrt_det() * gram[(s, s)];
                assert!((got - expect).abs() < 1e-12 * expect, "k={k} s={s}: {got} vs {expect}");
            }
        }
    }

    #[test]
    fn mass_is_symmetric_positive() {
        let grid = wavy_grid(4, 0.2);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for k in 0..=4 {
            let x = random_field(&mut rng, k, 4);
            let y = random_field(&mut rng, k, 4);
            let a = dot(x.values(), &mass_apply(&grid, k, y.values()));
            let b = dot(y.values(), &mass_apply(&grid, k, x.values()));
            assert!((a - b).abs() < 1e-12 * a.abs().max(1e-3));
            assert!(dot(x.values(), &mass_apply(&grid, k, x.values())) > 0.0);
            let total: f64 = (0..grid.num_vertices()).map(|c| cube_pairing(&grid, k, c, x.values(), y.values())).sum();
            assert!((total - a).abs() < 1e-12 * a.abs().max(1e-3));
        }
    }

    #[test]
    fn diagonals_match_unit_vector_probes() {
        let grid = wavy_grid(4, 0.2);
        let md = mass_diagonal(&grid, 2);
        let ld = laplacian_diagonal(&grid, 1);
        for cell in [0, 77, 255, 256 * 3 + 11, 256 * 5 + 200] {
            let mut e = vec![0.0; grid.num_cells(2)];
            e[cell] = 1.0;
            assert!((mass_apply(&grid, 2, &e)[cell] - md[cell]).abs() < 1e-14);
        }
        for cell in [0, 99, 256 * 2 + 7, 256 * 3 + 255] {
            let mut e = FormField::zeros(1, 4);
            e.values_mut()[cell] = 1.0;
            let de = d(&e).unwrap();
            let probe = dot(de.values(), &mass_apply(&grid, 2, de.values()));
            assert!((probe - ld[cell]).abs() < 1e-14 * probe.abs().max(1.0));
        }
    }

    #[test]
    fn star_examples() {
        let grid = Grid4::flat(4).unwrap();
        let e01 = FormField::constant(2, 4, &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        let e23 = FormField::constant(2, 4, &[0.0, 0.0, 0.0, 0.0, 0.0, 1.0]);
        assert!((star(&e01, &grid).unwrap() - e23).max_abs() < 1e-15);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let g = crate::pointwise::random::metric(&mut rng);
        let grid = Grid4::new(4, vec![g; 256], Orientation::Negative).unwrap();
        for k in 0..=4 {
            let x = random_field(&mut rng, k, 4);
            let back = star(&star(&x, &grid).unwrap(), &grid).unwrap();
            let sign = if k * (4 - k) % 2 == 0 { 1.0 } else { -1.0 };
            assert!((back - x * sign).max_abs() < 1e-12);
        }
    }

    #[test]
    fn star_under_conformal_metric_matches_pointwise_oracle() {
        // g = λ I: on 1-forms * is λ times the flat star, on 2-forms it is the flat star
        let n = 4;
        let lam = |x: [f64; 4]| (0.4 * (std::f64::consts::TAU * (x[0] + x[3])).sin()).exp();
        let grid = Grid4::from_fn(n, Orientation::Positive, |x| Metric4::identity().scaled(lam(x))).unwrap();
        let flat = Grid4::flat(n).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for k in [1usize, 2] {
            let x = random_field(&mut rng, k, n);
            let got = star(&x, &grid).unwrap();
            let base = star(&x, &flat).unwrap();
            for v in 0..grid.num_vertices() {
                let l = grid.cube_metric(v).matrix()[(0, 0)];
                let factor = if k == 1 { l } else { 1.0 };
                for s in 0..CELLS_PER_VERTEX[4 - k] {
                    assert!((got.get(s, v) - factor * base.get(s, v)).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn d_star_is_adjoint() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for grid in [Grid4::flat(4).unwrap(), wavy_grid(4, 0.2)] {
            for k in 1..=4 {
                let a = random_field(&mut rng, k - 1, 4);
                let b = random_field(&mut rng, k, 4);
                let lhs = inner(&grid, &d(&a).unwrap(), &b).unwrap();
                let rhs = inner(&grid, &a, &d_star(&b, &grid).unwrap()).unwrap();
                let scale = norm(&grid, &d(&a).unwrap()).unwrap() * norm(&grid, &b).unwrap();
                assert!((lhs - rhs).abs() < 1e-10 * scale, "k={k}: {lhs} vs {rhs}");
            }
        }
        let c = FormField::constant(2, 4, &[1.0, 0.0, 0.0, 0.0, 0.0, 1.0]);
        assert!(d_star(&c, &Grid4::flat(4).unwrap()).unwrap().max_abs() < 1e-15);
    }

    #[test]
    fn wedge_of_standard_form() {
        let grid = Grid4::flat(4).unwrap();
        let w = FormField::constant(2, 4, &[1.0, 0.0, 0.0, 0.0, 0.0, 1.0]);
        assert!((wedge_integral(&w, &w, &grid).unwrap() - 2.0).abs() < 1e-13);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let a = random_field(&mut rng, 2, 4);
        let b = random_field(&mut rng, 2, 4);
        let ab = wedge_integral(&a, &b, &grid).unwrap();
        assert!((ab - wedge_integral(&b, &a, &grid).unwrap()).abs() < 1e-13);
        // Stokes: ∫ dη ∧ closed = 0
        let eta = random_field(&mut rng, 1, 4);
        let de = d(&eta).unwrap();
        assert!(wedge_integral(&de, &w, &grid).unwrap().abs() < 1e-13);
        assert!(wedge_integral(&de, &d(&random_field(&mut rng, 1, 4)).unwrap(), &grid).unwrap().abs() < 1e-12);
    }

    #[test]
    fn wedge_matches_whitney_quadrature_oracle() {
        // exact ∫ of the wedge of the interpolated Whitney forms over each cube,
        // by 2-point Gauss quadrature per axis (profiles are bilinear)
        let n = 4;
        let grid = Grid4::flat(n).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let a = random_field(&mut rng, 2, n);
        let b = random_field(&mut rng, 2, n);
        let t = tables(2);
        let gauss = [0.5 - 0.5 / 3f64.sqrt(), 0.5 + 0.5 / 3f64.sqrt()];
        let h = grid.h();
        let nv = grid.num_vertices();
        let mut total = 0.0;
        for c in 0..nv {
            let corners = grid.corners(c);
            for q in 0..16 {
                let p: Vec<f64> = (0..4).map(|ax| gauss[(q >> ax) & 1]).collect();
                let mut fa = [0.0; 6];
                let mut fb = [0.0; 6];
                for &(s, corner) in &t.local {
                    let mut prof = 1.0;
                    for ax in 0..4 {
                        if t.masks[s] & (1 << ax) == 0 {
                            prof *= if corner & (1 << ax) != 0 { p[ax] } else { 1.0 - p[ax] };
                        }
                    }
                    let cell = s * nv + corners[corner as usize];
                    fa[s] += a.values()[cell] * prof / (h * h);
                    fb[s] += b.values()[cell] * prof / (h * h);
                }
                total += TwoForm4::new(fa).wedge(&TwoForm4::new(fb)) * h.powi(4) / 16.0;
            }
        }
        assert!((wedge_integral(&a, &b, &grid).unwrap() - total).abs() < 1e-12 * total.abs().max(1.0));
    }
}
