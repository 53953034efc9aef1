//! Natural and normalized blow-ups `x ↦ u(x₀ + r x)/s` on a reference window
//! covering `[-2, 2]²`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{boundary_mass, Point};
use crate::error::{Error, Result};
use crate::grid::{DiskGrid, GridField, GridSpec};
use crate::model::{exponents, Parameters};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BlowupMode {
    /// Scale by `r^{-γₚ}`.
    Natural,
    /// Scale by `1/h_r` with `h_r = √(H(u, x₀, r)/r^{n-1})`.
    Normalized,
}

/// Reference grid of the rescaled field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReferenceGrid {
    /// Spacing `h/r`, so every reference node is the image of a source node
    /// when the centre is a node; values are copied without interpolation.
    /// The window has `2⌈2r/h⌉ + 1` nodes per axis and covers `[-2, 2]²`.
    Matched,
    /// A fixed `n × n` grid over `[-2, 2]²`, values by bilinear interpolation.
    /// Shared by all radii, which makes rescalings directly comparable.
    Fixed { n: usize },
}

#[derive(Debug, Clone)]
pub struct BlowupField {
    pub field: GridField,
    pub center: Point,
    pub r: f64,
    pub mode: BlowupMode,
    /// The divisor `s`: `r^{γₚ}` or `h_r`.
    pub scale: f64,
}

pub fn blowup(
    u: &GridField,
    center: Point,
    r: f64,
    mode: BlowupMode,
    params: &Parameters,
    reference: ReferenceGrid,
) -> Result<BlowupField> {
    let src = u.grid();
    if !(r > 0.0 && r.is_finite()) || center.0.hypot(center.1) + 2.0 * r > src.radius() * (1.0 + 1e-12) {
        return Err(Error::WindowOutsideDomain { center, radius: r });
    }
    let n_dim = params.n() as f64;
    let scale = match mode {
        BlowupMode::Natural => r.powf(exponents(params).gamma_p),
        BlowupMode::Normalized => {
            let h = boundary_mass(u, center, r)?;
            let hr = (h / r.powf(n_dim - 1.0)).sqrt();
            if !(h > 1e-300 && hr.is_finite() && hr > 0.0) {
                return Err(Error::NormalizationUnderflow { radius: r });
            }
            hr
        }
    };
    let inv = 1.0 / scale;
    let field = match reference {
        ReferenceGrid::Matched => {
            let h = src.spacing();
            let half_nodes = (2.0 * r / h - 1e-9).ceil() as usize;
            let n_ref = 2 * half_nodes + 1;
            let grid = DiskGrid::new(GridSpec {
                n: n_ref,
                half_width: half_nodes as f64 * h / r,
            })?;
            let anchor = src.node_at(center.0, center.1);
            let values = (0..grid.len())
                .map(|idx| {
                    let (di, dj) = (
                        (idx % n_ref) as i64 - half_nodes as i64,
                        (idx / n_ref) as i64 - half_nodes as i64,
                    );
                    let direct = anchor.and_then(|(ci, cj)| {
                        let (i, j) = (ci as i64 + di, cj as i64 + dj);
                        let n = src.n() as i64;
                        (i >= 0 && j >= 0 && i < n && j < n).then(|| u.get(i as usize, j as usize))
                    });
                    let v = direct.unwrap_or_else(|| {
                        u.interpolate_cubic(center.0 + di as f64 * h, center.1 + dj as f64 * h)
                    });
                    v * inv
                })
                .collect();
            GridField::from_values(&grid, values)?
        }
        ReferenceGrid::Fixed { n } => {
            let grid = DiskGrid::new(GridSpec { n, half_width: 2.0 })?;
            sample(&grid, u, center, r, inv)
        }
    };
    Ok(BlowupField {
        field,
        center,
        r,
        mode,
        scale,
    })
}

fn sample(grid: &Arc<DiskGrid>, u: &GridField, center: Point, r: f64, inv: f64) -> GridField {
    GridField::from_fn(grid, |x, y| u.interpolate_cubic(center.0 + r * x, center.1 + r * y) * inv)
}

/// Rescalings at several radii, reported per radius without any claim of
/// convergence as `r → 0`.
#[derive(Debug, Clone)]
pub struct BlowupSequence {
    pub center: Point,
    pub radii: Vec<f64>,
    pub fields: Vec<GridField>,
    pub mode: BlowupMode,
    /// Normalization scalars `h_r` (normalized mode only).
    pub h_r: Option<Vec<f64>>,
}

pub fn blowup_sequence(
    u: &GridField,
    center: Point,
    radii: &[f64],
    mode: BlowupMode,
    params: &Parameters,
    reference: ReferenceGrid,
) -> Result<BlowupSequence> {
    let mut sorted = radii.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let blown = sorted
        .iter()
        .map(|&r| blowup(u, center, r, mode, params, reference))
        .collect::<Result<Vec<_>>>()?;
    let h_r = (mode == BlowupMode::Normalized).then(|| blown.iter().map(|b| b.scale).collect());
    Ok(BlowupSequence {
        center,
        radii: sorted,
        fields: blown.into_iter().map(|b| b.field).collect(),
        mode,
        h_r,
    })
}
