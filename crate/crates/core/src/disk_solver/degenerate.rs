//! Symmetric solutions vanishing at the origin, from the boundary datum
//! `g = r^k cos(kθ)` with `k > 2γₚ`.
//!
//! Each sweep averages the source `f(u - u(0))` over the full dihedral group
//! `S_k`, solves `-Δv = Sym f` with `v = g` on the ring, averages `v` over the
//! grid-exact part of the group and relaxes `u ← (1-ω)u + ωv`. At convergence
//! the last solve `u*` is shifted by `κ = u*(0)`, so the result vanishes at
//! the origin and carries trace `g - κ`.
//!
//! Only the reflections across the axes and the half-turn map the Cartesian
//! grid to itself. Without the full average of the source, the iteration
//! drifts to fixed points that are merely invariant under that subgroup and
//! carry a `cos 2θ` mode at the origin. Averaging the source keeps every
//! iterate in the `S_k`-invariant class; the price is that the fixed point
//! solves `-Δ_h u = Sym f(u)`, which differs from `f(u)` by the interpolation
//! error of the average, largest along the free boundary.

use std::sync::Arc;

use serde::Serialize;

use super::poisson::solve_poisson_warm;
use super::{symmetrize, SolveOptions, SymmetryGroup};
use crate::error::{Error, Result};
use crate::grid::{BoundaryTrace, DiskGrid, GridField};
use crate::model::{exponents, Parameters};

#[derive(Debug, Clone)]
pub struct DegenerateSolution {
    pub field: GridField,
    pub kappa: f64,
    pub iterations: usize,
    /// Sup-norm change of the last sweep.
    pub last_change: f64,
    /// Sup-norm change of every sweep.
    pub changes: Vec<f64>,
    /// The boundary datum `g` before the shift by `κ`.
    pub datum: BoundaryTrace,
}

#[derive(Debug, Clone, Serialize)]
pub struct DegenerateSummary {
    pub k: u32,
    pub kappa: f64,
    pub iterations: usize,
    pub last_change: f64,
}

impl DegenerateSolution {
    pub fn summary(&self, k: u32) -> DegenerateSummary {
        DegenerateSummary {
            k,
            kappa: self.kappa,
            iterations: self.iterations,
            last_change: self.last_change,
        }
    }
}

/// One damped sweep of the fixed-point map with boundary data `trace`.
pub fn degenerate_update(
    u: &GridField,
    trace: &BoundaryTrace,
    params: &Parameters,
    group: &SymmetryGroup,
    relaxation: f64,
) -> Result<GridField> {
    let solved = sweep(u, trace, params, group)?;
    Ok(relax(u, &solved, relaxation))
}

fn sweep(u: &GridField, trace: &BoundaryTrace, params: &Parameters, group: &SymmetryGroup) -> Result<GridField> {
    let grid = u.grid();
    let center = u.at_origin();
    let f = GridField::from_raw(
        grid,
        u.values().iter().map(|&v| params.reaction(v - center)).collect(),
    );
    let f = symmetrize(&f, group);
    let v = solve_poisson_warm(&f, trace, Some(u))?;
    let mut v = group.symmetrize_grid_exact(&v);
    v.fill_exterior();
    Ok(v)
}

fn relax(u: &GridField, v: &GridField, omega: f64) -> GridField {
    let vals = u
        .values()
        .iter()
        .zip(v.values())
        .map(|(a, b)| (1.0 - omega) * a + omega * b)
        .collect();
    GridField::from_raw(u.grid(), vals)
}

pub fn construct_degenerate(
    k: u32,
    params: &Parameters,
    grid: &Arc<DiskGrid>,
    opts: &SolveOptions,
) -> Result<DegenerateSolution> {
    opts.validate()?;
    if params.p() <= 1.0 {
        return Err(Error::InvalidParameters(
            "the degenerate construction needs p > 1".into(),
        ));
    }
    let gamma = exponents(params).gamma_p;
    if (k as f64) <= 2.0 * gamma {
        return Err(Error::KTooSmall {
            k,
            bound: 2.0 * gamma,
        });
    }
    let group = SymmetryGroup::new(k)?;
    let kf = k as f64;
    let datum = BoundaryTrace::from_fn(grid, |x, y| x.hypot(y).powf(kf) * (kf * y.atan2(x)).cos());
    let zero = GridField::zeros(grid);
    let mut u = solve_poisson_warm(&zero, &datum, None)?;
    let mut changes = Vec::new();
    let mut kappas = Vec::new();
    for iteration in 1..=opts.max_iters {
        let v = sweep(&u, &datum, params, &group)?;
        let next = relax(&u, &v, opts.relaxation);
        let change = next.sup_diff(&u);
        changes.push(change);
        kappas.push(v.at_origin());
        if change < opts.fixed_point_tol {
            let kappa = v.at_origin();
            let mut field = v;
            field.shift(-kappa);
            // the origin is a node, so this is exactly zero
            let c = grid.center_index();
            field.values_mut()[c] = 0.0;
            return Ok(DegenerateSolution {
                field,
                kappa,
                iterations: iteration,
                last_change: change,
                changes,
                datum,
            });
        }
        if !change.is_finite() {
            break;
        }
        u = next;
    }
    Err(Error::NoConvergence {
        iterations: changes.len(),
        last_change: changes.last().copied().unwrap_or(f64::NAN),
        kappa_candidates: distinct_tail(&kappas),
    })
}

/// Distinct values (to 1e-6 relative) among the last few `κ` iterates, which
/// exposes oscillation between several fixed points.
fn distinct_tail(kappas: &[f64]) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::new();
    for &k in kappas.iter().rev().take(8) {
        if !out.iter().any(|&o| (o - k).abs() <= 1e-6 * o.abs().max(1e-12)) {
            out.push(k);
        }
    }
    out
}
