use std::sync::OnceLock;

use crate::pointwise::subsets;

/// Cube-local combinatorics of the cubical complex for one degree `k`.
///
/// A local `k`-cell of the unit cube is a direction set `I` (index into
/// [`Tables::sets`]) together with an offset in `{0, 1}` along each axis not
/// in `I`, stored as a 4-bit corner mask.
#[derive(Debug)]
pub(crate) struct Tables {
    pub sets: Vec<Vec<usize>>,
    pub masks: Vec<u8>,
    pub local: Vec<(usize, u8)>,
    /// `∫₀¹` products of the Whitney profiles, `local × local`, row-major.
    pub overlap: Vec<f64>,
    /// Boundary of each local `(k+1)`-cell as `(local k-cell, sign)`.
    pub boundary: Vec<Vec<(usize, f64)>>,
}

impl Tables {
    pub fn num_sets(&self) -> usize {
        self.sets.len()
    }

    pub fn set_index(&self, set: &[usize]) -> usize {
        self.sets.iter().position(|s| s == set).expect("direction set of this degree")
    }

    fn local_index(&self, set: usize, corner: u8) -> usize {
        self.local
            .iter()
            .position(|&(s, c)| s == set && c == corner)
            .expect("local cell exists")
    }
}

fn mask(set: &[usize]) -> u8 {
    set.iter().fold(0u8, |m, &a| m | (1 << a))
}

fn axis_overlap(in_a: bool, in_b: bool, bit_a: bool, bit_b: bool) -> f64 {
    match (in_a, in_b) {
        (true, true) => 1.0,
        (true, false) | (false, true) => 0.5,
        (false, false) if bit_a == bit_b => 1.0 / 3.0,
        (false, false) => 1.0 / 6.0,
    }
}

fn build(k: usize) -> Tables {
    let sets = subsets(k);
    let masks: Vec<u8> = sets.iter().map(|s| mask(s)).collect();
    let mut local = Vec::new();
    for (si, &m) in masks.iter().enumerate() {
        for corner in 0u8..16 {
            if corner & m == 0 {
                local.push((si, corner));
            }
        }
    }
    let nl = local.len();
    let mut overlap = vec![0.0; nl * nl];
    for (a, &(sa, ca)) in local.iter().enumerate() {
        for (b, &(sb, cb)) in local.iter().enumerate() {
            overlap[a * nl + b] = (0..4)
                .map(|ax| {
                    let bit = 1u8 << ax;
                    axis_overlap(masks[sa] & bit != 0, masks[sb] & bit != 0, ca & bit != 0, cb & bit != 0)
                })
                .product();
        }
    }
    let mut tables = Tables { sets, masks, local, overlap, boundary: Vec::new() };
    if k < 4 {
        let upper = build_cells(k + 1);
        for (set, corner) in upper {
            let mut terms = Vec::new();
            for (p, &a) in set.iter().enumerate() {
                let face: Vec<usize> = set.iter().copied().filter(|&b| b != a).collect();
                let fi = tables.set_index(&face);
                let sign = if p % 2 == 0 { 1.0 } else { -1.0 };
                terms.push((tables.local_index(fi, corner | (1 << a)), sign));
                terms.push((tables.local_index(fi, corner), -sign));
            }
            tables.boundary.push(terms);
        }
    }
    tables
}

fn build_cells(k: usize) -> Vec<(Vec<usize>, u8)> {
    let mut out = Vec::new();
    for set in subsets(k) {
        let m = mask(&set);
        for corner in 0u8..16 {
            if corner & m == 0 {
                out.push((set.clone(), corner));
            }
        }
    }
    out
}

pub(crate) fn tables(k: usize) -> &'static Tables {
    static CELL: OnceLock<Vec<Tables>> = OnceLock::new();
    &CELL.get_or_init(|| (0..=4).map(build).collect())[k]
}
