//! The 5-point Dirichlet problem `-Δ_h u = f` on the interior nodes of a
//! disk grid, with `u` prescribed on the boundary ring.
//!
//! Unknowns are the interior nodes in row-major order. The matrix
//! `4I - adjacency` is symmetric positive definite with an envelope of about
//! one grid row, so a skyline Cholesky factorization is cheap for the grid
//! sizes used here and turns every later solve into two triangular sweeps.
//! Very large grids fall back to conjugate gradients to bound memory.

use crate::error::{Error, Result};
use crate::grid::{BoundaryTrace, DiskGrid, GridField, NodeTag};

/// Envelope entries above which the direct factorization is not attempted.
const MAX_ENVELOPE: usize = 24_000_000;
const NONE: usize = usize::MAX;

#[derive(Debug)]
pub(crate) struct Factorization {
    /// Grid index → unknown index (`NONE` for non-interior nodes).
    unknown_of: Vec<usize>,
    /// Unknown index → grid index.
    nodes: Vec<usize>,
    cholesky: Option<Skyline>,
}

/// Lower-triangular Cholesky factor stored row by row: row `r` holds
/// columns `first[r]..=r` starting at `start[r]`.
#[derive(Debug)]
struct Skyline {
    first: Vec<usize>,
    start: Vec<usize>,
    data: Vec<f64>,
}

impl Factorization {
    fn build(grid: &DiskGrid) -> Result<Self> {
        let n = grid.n();
        let mut unknown_of = vec![NONE; grid.len()];
        let nodes: Vec<usize> = grid.interior().to_vec();
        for (u, &idx) in nodes.iter().enumerate() {
            unknown_of[idx] = u;
        }
        let m = nodes.len();
        let mut first = Vec::with_capacity(m);
        let mut start = Vec::with_capacity(m + 1);
        let mut total = 0usize;
        for (r, &idx) in nodes.iter().enumerate() {
            let below = unknown_of[idx - n];
            let left = unknown_of[idx - 1];
            let f = [below, left, r].into_iter().filter(|&c| c != NONE).min().unwrap_or(r);
            first.push(f);
            start.push(total);
            total += r - f + 1;
        }
        start.push(total);
        let cholesky = if total <= MAX_ENVELOPE {
            Some(Skyline::factor(&nodes, &unknown_of, n, first, start, total)?)
        } else {
            None
        };
        Ok(Factorization {
            unknown_of,
            nodes,
            cholesky,
        })
    }

    pub(crate) fn get(grid: &DiskGrid) -> Result<&Factorization> {
        if let Some(f) = grid.poisson.get() {
            return Ok(f);
        }
        let built = Factorization::build(grid)?;
        Ok(grid.poisson.get_or_init(|| built))
    }

    /// Solve `(4I - adj) x = b` on the unknowns.
    fn solve(&self, grid: &DiskGrid, b: &[f64], warm: &[f64]) -> Result<Vec<f64>> {
        match &self.cholesky {
            Some(s) => Ok(s.solve(b)),
            None => self.conjugate_gradient(grid, b, warm),
        }
    }

    fn apply(&self, grid: &DiskGrid, x: &[f64], out: &mut [f64]) {
        let n = grid.n();
        for (r, &idx) in self.nodes.iter().enumerate() {
            let mut acc = 4.0 * x[r];
            for nb in [idx - 1, idx + 1, idx - n, idx + n] {
                let c = self.unknown_of[nb];
                if c != NONE {
                    acc -= x[c];
                }
            }
            out[r] = acc;
        }
    }

    fn conjugate_gradient(&self, grid: &DiskGrid, b: &[f64], warm: &[f64]) -> Result<Vec<f64>> {
        let m = b.len();
        let mut x = warm.to_vec();
        let mut ax = vec![0.0; m];
        self.apply(grid, &x, &mut ax);
        let mut r: Vec<f64> = b.iter().zip(&ax).map(|(b, a)| b - a).collect();
        let mut p = r.clone();
        let mut rr: f64 = r.iter().map(|v| v * v).sum();
        let bnorm = b.iter().map(|v| v * v).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
        let mut ap = vec![0.0; m];
        for _ in 0..20 * grid.n() + 1000 {
            if rr.sqrt() <= 1e-15 * bnorm {
                return Ok(x);
            }
            self.apply(grid, &p, &mut ap);
            let alpha = rr / p.iter().zip(&ap).map(|(a, b)| a * b).sum::<f64>();
            for i in 0..m {
                x[i] += alpha * p[i];
                r[i] -= alpha * ap[i];
            }
            let rr_new: f64 = r.iter().map(|v| v * v).sum();
            let beta = rr_new / rr;
            rr = rr_new;
            for i in 0..m {
                p[i] = r[i] + beta * p[i];
            }
        }
        Ok(x)
    }
}

impl Skyline {
    fn factor(
        nodes: &[usize],
        unknown_of: &[usize],
        n: usize,
        first: Vec<usize>,
        start: Vec<usize>,
        total: usize,
    ) -> Result<Self> {
        let mut data = vec![0.0; total];
        // assemble the lower triangle of 4I - adj
        for (r, &idx) in nodes.iter().enumerate() {
            data[start[r] + (r - first[r])] = 4.0;
            for nb in [idx - 1, idx - n] {
                let c = unknown_of[nb];
                if c != NONE {
                    data[start[r] + (c - first[r])] = -1.0;
                }
            }
        }
        for i in 0..nodes.len() {
            let (fi, si) = (first[i], start[i]);
            for j in fi..i {
                let (fj, sj) = (first[j], start[j]);
                let lo = fi.max(fj);
                let mut dot = 0.0;
                let (ri, rj) = (&data[si + (lo - fi)..si + (j - fi)], &data[sj + (lo - fj)..sj + (j - fj)]);
                for (a, b) in ri.iter().zip(rj) {
                    dot += a * b;
                }
                let diag = data[sj + (j - fj)];
                data[si + (j - fi)] = (data[si + (j - fi)] - dot) / diag;
            }
            let row = &data[si..si + (i - fi)];
            let sq: f64 = row.iter().map(|v| v * v).sum();
            let d = data[si + (i - fi)] - sq;
            if d.is_nan() || d <= 0.0 {
                return Err(Error::LinearSolver(format!("non-positive pivot {d:e} at row {i}")));
            }
            data[si + (i - fi)] = d.sqrt();
        }
        Ok(Skyline { first, start, data })
    }

    fn solve(&self, b: &[f64]) -> Vec<f64> {
        let m = b.len();
        let mut y = b.to_vec();
        for i in 0..m {
            let (fi, si) = (self.first[i], self.start[i]);
            let row = &self.data[si..si + (i - fi)];
            let dot: f64 = row.iter().zip(&y[fi..i]).map(|(a, b)| a * b).sum();
            y[i] = (y[i] - dot) / self.data[si + (i - fi)];
        }
        for i in (0..m).rev() {
            let (fi, si) = (self.first[i], self.start[i]);
            y[i] /= self.data[si + (i - fi)];
            let xi = y[i];
            let row = &self.data[si..si + (i - fi)];
            for (yk, l) in y[fi..i].iter_mut().zip(row) {
                *yk -= l * xi;
            }
        }
        y
    }
}

/// `Δ_h u` at interior nodes (5-point stencil), zero elsewhere.
pub fn discrete_laplacian(u: &GridField) -> GridField {
    let grid = u.grid();
    let n = grid.n();
    let inv_h2 = 1.0 / grid.cell_area();
    let v = u.values();
    let mut out = vec![0.0; grid.len()];
    for &idx in grid.interior() {
        out[idx] = (v[idx - 1] + v[idx + 1] + v[idx - n] + v[idx + n] - 4.0 * v[idx]) * inv_h2;
    }
    GridField::from_raw(grid, out)
}

/// Sup-norm of `-Δ_h u - f` over interior nodes.
pub fn poisson_residual(u: &GridField, f: &GridField) -> f64 {
    let lap = discrete_laplacian(u);
    u.grid()
        .interior()
        .iter()
        .map(|&i| (-lap.values()[i] - f.values()[i]).abs())
        .fold(0.0, f64::max)
}

/// Solve `-Δ_h u = f` at interior nodes with `u = g` on the ring, to a
/// residual sup-norm below `1e-10·max(1, sup|f|)`.
pub fn solve_poisson_dirichlet(f: &GridField, g: &BoundaryTrace) -> Result<GridField> {
    solve_poisson_warm(f, g, None)
}

/// As [`solve_poisson_dirichlet`], optionally seeding the iterative fallback
/// with a previous solution.
pub(crate) fn solve_poisson_warm(f: &GridField, g: &BoundaryTrace, warm: Option<&GridField>) -> Result<GridField> {
    let grid = f.grid();
    if !g.is_finite() || f.values().iter().any(|v| !v.is_finite()) {
        return Err(Error::LinearSolver("non-finite data".into()));
    }
    let fact = Factorization::get(grid)?;
    let n = grid.n();
    let h2 = grid.cell_area();
    let mut u = GridField::zeros(grid);
    u.set_trace(g)?;
    let sup_f = grid
        .interior()
        .iter()
        .map(|&i| f.values()[i].abs())
        .fold(0.0, f64::max);
    let tol = 1e-10 * sup_f.max(1.0);

    // right-hand side: h² f plus the known ring neighbours
    let b: Vec<f64> = fact
        .nodes
        .iter()
        .map(|&idx| {
            let mut acc = h2 * f.values()[idx];
            for nb in [idx - 1, idx + 1, idx - n, idx + n] {
                if grid.tag(nb) == NodeTag::BoundaryRing {
                    acc += u.values()[nb];
                }
            }
            acc
        })
        .collect();
    let start: Vec<f64> = match warm {
        Some(w) => fact.nodes.iter().map(|&i| w.values()[i]).collect(),
        None => vec![0.0; b.len()],
    };
    let x = fact.solve(grid, &b, &start)?;
    for (&idx, &v) in fact.nodes.iter().zip(&x) {
        u.values_mut()[idx] = v;
    }

    let mut residual = poisson_residual(&u, f);
    let mut rounds = 0;
    while residual > tol {
        if rounds == 8 {
            return Err(Error::NoConvergence {
                iterations: rounds,
                last_change: residual,
                kappa_candidates: Vec::new(),
            });
        }
        let lap = discrete_laplacian(&u);
        let corr_rhs: Vec<f64> = fact
            .nodes
            .iter()
            .map(|&i| h2 * (f.values()[i] + lap.values()[i]))
            .collect();
        let zero = vec![0.0; corr_rhs.len()];
        let delta = fact.solve(grid, &corr_rhs, &zero)?;
        for (&idx, &d) in fact.nodes.iter().zip(&delta) {
            u.values_mut()[idx] += d;
        }
        residual = poisson_residual(&u, f);
        rounds += 1;
    }
    Ok(u)
}
