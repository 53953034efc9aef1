//! Competitors sharing the minimizer's trace, for the minimality check
//! `J(minimizer) ≤ J(v)`.

use nodalab::disk_solver::{energy, energy_change, solve_poisson_dirichlet, symmetrize, SymmetryGroup};
use nodalab::{BoundaryTrace, GridField, Parameters};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct Competitor {
    pub name: String,
    pub energy: f64,
    /// `J(v) - J(minimizer)`, summed term by term.
    pub excess: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BatteryReport {
    pub seed: u64,
    pub minimizer_energy: f64,
    pub competitors: Vec<Competitor>,
    /// Every competitor has non-negative excess.
    pub minimal: bool,
}

/// Number of random bump competitors.
pub const BUMPS: usize = 6;

/// Competitors: the harmonic extension of `g`; blends between it and `u`;
/// `u` plus seeded compactly supported bumps of both signs; and, when a
/// symmetry order is given, the dihedral averages of the perturbed fields
/// with the trace reset to `g`.
pub fn competitor_battery(
    u: &GridField,
    g: &BoundaryTrace,
    params: &Parameters,
    symmetry: Option<u32>,
    seed: u64,
) -> nodalab::Result<BatteryReport> {
    let grid = u.grid();
    let scale = u.sup_norm().max(1e-3);
    let mut fields: Vec<(String, GridField)> = Vec::new();
    let harmonic = solve_poisson_dirichlet(&GridField::zeros(grid), g)?;
    for s in [0.5, 0.9, 1.1] {
        let blend = GridField::from_values(
            grid,
            harmonic
                .values()
                .iter()
                .zip(u.values())
                .map(|(h, v)| h + s * (v - h))
                .collect(),
        )?;
        fields.push((format!("blend-{s}"), blend));
    }
    fields.push(("harmonic-extension".into(), harmonic));

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bumped = Vec::new();
    for i in 0..BUMPS {
        let radius = rng.random_range(0.1..0.35);
        let reach = 0.95 - radius;
        let (cx, cy) = loop {
            let c: (f64, f64) = (rng.random_range(-reach..reach), rng.random_range(-reach..reach));
            if c.0.hypot(c.1) < reach {
                break c;
            }
        };
        let amplitude = if i % 2 == 0 { 0.05 } else { -0.05 } * scale * rng.random_range(0.2..1.0);
        let mut v = GridField::from_fn(grid, |x, y| {
            let s = ((x - cx).powi(2) + (y - cy).powi(2)) / (radius * radius);
            if s < 1.0 {
                amplitude * (1.0 - s).powi(2)
            } else {
                0.0
            }
        });
        v.values_mut().iter_mut().zip(u.values()).for_each(|(b, w)| *b += w);
        v.set_trace(g)?;
        bumped.push((format!("bump-{i}"), v));
    }
    if let Some(k) = symmetry {
        let group = SymmetryGroup::new(k)?;
        for (name, v) in &bumped {
            let mut s = symmetrize(v, &group);
            s.set_trace(g)?;
            fields.push((format!("symmetrized-{name}"), s));
        }
    }
    fields.extend(bumped);

    let minimizer_energy = energy(u, params);
    let competitors: Vec<Competitor> = fields
        .into_iter()
        .map(|(name, v)| {
            let direction: Vec<f64> = v.values().iter().zip(u.values()).map(|(a, b)| a - b).collect();
            Competitor {
                name,
                energy: energy(&v, params),
                excess: energy_change(u, &direction, 1.0, params),
            }
        })
        .collect();
    let minimal = competitors.iter().all(|c| c.excess >= 0.0);
    Ok(BatteryReport {
        seed,
        minimizer_energy,
        competitors,
        minimal,
    })
}
