//! The dihedral group generated by the reflections across the `k` lines
//! through the origin at angles `iπ/k`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::GridField;

/// A 2×2 orthogonal matrix, row-major.
pub type Isometry = [[f64; 2]; 2];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymmetryGroup {
    k: u32,
}

impl SymmetryGroup {
    pub fn new(k: u32) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidParameters("symmetry order k must be positive".into()));
        }
        Ok(SymmetryGroup { k })
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    /// The `k` generating reflections; reflection `i` fixes the line at angle `iπ/k`.
    pub fn reflections(&self) -> Vec<Isometry> {
        (0..self.k)
            .map(|i| {
                let (s, c) = (2.0 * i as f64 * PI / self.k as f64).sin_cos();
                [[c, s], [s, -c]]
            })
            .collect()
    }

    /// All `2k` elements: the rotations by `2πj/k` and the reflections.
    pub fn elements(&self) -> Vec<Isometry> {
        let mut out: Vec<Isometry> = (0..self.k)
            .map(|j| {
                let (s, c) = (2.0 * j as f64 * PI / self.k as f64).sin_cos();
                [[c, -s], [s, c]]
            })
            .collect();
        out.extend(self.reflections());
        out
    }

    /// Elements that permute the nodes of a centred Cartesian grid: those
    /// whose matrix entries are 0 or ±1.
    pub fn grid_exact_elements(&self) -> Vec<[[i32; 2]; 2]> {
        self.elements()
            .into_iter()
            .filter_map(|m| {
                let mut out = [[0i32; 2]; 2];
                for r in 0..2 {
                    for c in 0..2 {
                        let v = m[r][c].round();
                        if (m[r][c] - v).abs() > 1e-12 {
                            return None;
                        }
                        out[r][c] = v as i32;
                    }
                }
                Some(out)
            })
            .collect()
    }

    /// Largest `|u(g·x) - u(x)|` over disk nodes and generators `g`, with
    /// `u(g·x)` by bilinear interpolation.
    pub fn residual(&self, u: &GridField) -> f64 {
        let grid = u.grid();
        let mut worst: f64 = 0.0;
        for m in self.reflections() {
            for idx in 0..grid.len() {
                if !grid.tag(idx).in_disk() {
                    continue;
                }
                let (x, y) = grid.position(idx);
                let v = u.interpolate(m[0][0] * x + m[0][1] * y, m[1][0] * x + m[1][1] * y);
                worst = worst.max((v - u.values()[idx]).abs());
            }
        }
        worst
    }

    /// Largest `|u(g·x) - u(x)|` over disk nodes and the grid-exact elements,
    /// read directly from the node values.
    pub fn grid_exact_residual(&self, u: &GridField) -> f64 {
        let grid = u.grid();
        let mut worst: f64 = 0.0;
        for m in self.grid_exact_elements() {
            for idx in 0..grid.len() {
                if grid.tag(idx).in_disk() {
                    let img = map_node(grid.n(), idx, &m);
                    worst = worst.max((u.values()[img] - u.values()[idx]).abs());
                }
            }
        }
        worst
    }

    /// Average of `u` over the grid-exact elements, computed by permuting
    /// node values (no interpolation).
    pub fn symmetrize_grid_exact(&self, u: &GridField) -> GridField {
        let grid = u.grid();
        let elems = self.grid_exact_elements();
        let inv = 1.0 / elems.len() as f64;
        let mut out = vec![0.0; grid.len()];
        for (idx, slot) in out.iter_mut().enumerate() {
            let sum: f64 = elems.iter().map(|m| u.values()[map_node(grid.n(), idx, m)]).sum();
            *slot = sum * inv;
        }
        GridField::from_raw(grid, out)
    }
}

/// Image of node `idx` under an integer isometry of the centred grid.
fn map_node(n: usize, idx: usize, m: &[[i32; 2]; 2]) -> usize {
    let c = (n / 2) as i64;
    let (i, j) = ((idx % n) as i64 - c, (idx / n) as i64 - c);
    let a = m[0][0] as i64 * i + m[0][1] as i64 * j + c;
    let b = m[1][0] as i64 * i + m[1][1] as i64 * j + c;
    b as usize * n + a as usize
}

/// Average of `u` over all `2k` group elements, reading `u(g·x)` by bilinear
/// interpolation. Exterior nodes are refilled from the ring afterwards.
pub fn symmetrize(u: &GridField, group: &SymmetryGroup) -> GridField {
    let grid = u.grid();
    let elems = group.elements();
    let inv = 1.0 / elems.len() as f64;
    let mut out = u.values().to_vec();
    for (idx, slot) in out.iter_mut().enumerate() {
        if !grid.tag(idx).in_disk() {
            continue;
        }
        let (x, y) = grid.position(idx);
        let sum: f64 = elems
            .iter()
            .map(|m| u.interpolate(m[0][0] * x + m[0][1] * y, m[1][0] * x + m[1][1] * y))
            .sum();
        *slot = sum * inv;
    }
    let mut field = GridField::from_raw(grid, out);
    field.fill_exterior();
    field
}
