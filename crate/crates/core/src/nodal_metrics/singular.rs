//! Detection of nodal points with small gradient on the interior nodes.

use std::io::Write;

use serde::Serialize;

use crate::error::Result;
use crate::grid::GridField;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum NodalTag {
    /// `|u| < eps_u` and `|∇u| < eps_grad`.
    Singular,
    /// `|u| < eps_u` and `|∇u| ≥ eps_grad`.
    Regular,
}

impl NodalTag {
    pub fn as_str(self) -> &'static str {
        match self {
            NodalTag::Singular => "singular",
            NodalTag::Regular => "regular",
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct NodalPoint {
    pub x: f64,
    pub y: f64,
    pub abs_u: f64,
    pub abs_grad: f64,
    pub tag: NodalTag,
}

#[derive(Debug, Clone, Serialize)]
pub struct SingularSet {
    pub eps_u: f64,
    pub eps_grad: f64,
    pub points: Vec<NodalPoint>,
}

impl SingularSet {
    pub fn singular(&self) -> impl Iterator<Item = &NodalPoint> {
        self.points.iter().filter(|p| p.tag == NodalTag::Singular)
    }

    pub fn regular(&self) -> impl Iterator<Item = &NodalPoint> {
        self.points.iter().filter(|p| p.tag == NodalTag::Regular)
    }

    /// CSV with columns `x, y, abs_u, abs_grad_u, tag`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(writer);
        out.write_record(["x", "y", "abs_u", "abs_grad_u", "tag"])?;
        for p in &self.points {
            out.write_record([
                p.x.to_string(),
                p.y.to_string(),
                p.abs_u.to_string(),
                p.abs_grad.to_string(),
                p.tag.as_str().to_string(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}

/// `(10·h^{min(γ,2)}, 10·h)` for grid spacing `h`.
pub fn default_thresholds(spacing: f64, gamma: f64) -> (f64, f64) {
    (10.0 * spacing.powf(gamma.min(2.0)), 10.0 * spacing)
}

/// Interior nodes with `|u| < eps_u`, tagged singular when also
/// `|∇u| < eps_grad` (centred differences) and regular otherwise.
pub fn singular_set(u: &GridField, eps_u: f64, eps_grad: f64) -> SingularSet {
    let grid = u.grid();
    let n = grid.n();
    let points = grid
        .interior()
        .iter()
        .filter_map(|&idx| {
            let abs_u = u.values()[idx].abs();
            if abs_u >= eps_u {
                return None;
            }
            let (gx, gy) = u.gradient_at(idx % n, idx / n);
            let abs_grad = gx.hypot(gy);
            let (x, y) = grid.position(idx);
            let tag = if abs_grad < eps_grad {
                NodalTag::Singular
            } else {
                NodalTag::Regular
            };
            Some(NodalPoint {
                x,
                y,
                abs_u,
                abs_grad,
                tag,
            })
        })
        .collect();
    SingularSet {
        eps_u,
        eps_grad,
        points,
    }
}
