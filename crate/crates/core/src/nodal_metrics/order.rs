//! Vanishing-order estimates from the growth of the boundary mass, and the
//! finite-radius degeneracy proxy.

use serde::Serialize;

use super::{boundary_mass, check_ball, Point};
use crate::error::{Error, Result};
use crate::grid::GridField;

/// `r_max, r_max/2, r_max/4, …` down to `r_min` (inclusive up to rounding).
pub fn dyadic_radii(r_min: f64, r_max: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut r = r_max;
    while r >= r_min * (1.0 - 1e-12) && r > 0.0 {
        out.push(r);
        r *= 0.5;
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct OrderEstimate {
    /// Half the fitted slope of `log(H/r)` against `log r`.
    pub order: f64,
    /// Root-mean-square residual of the fit, in units of `log H`.
    pub fit_residual: f64,
    pub radii: Vec<f64>,
    pub masses: Vec<f64>,
}

/// Least-squares slope of `log(H(r)/r^{n-1})` against `log r` over the
/// dyadic radii in `[r_min, r_max]`, halved (planar, `n = 2`).
pub fn vanishing_order(u: &GridField, center: Point, r_min: f64, r_max: f64) -> Result<OrderEstimate> {
    if !(r_min > 0.0 && r_min <= r_max) {
        return Err(Error::DegenerateFit(format!(
            "radius range [{r_min}, {r_max}] is empty"
        )));
    }
    let radii = dyadic_radii(r_min, r_max);
    let masses = radii
        .iter()
        .map(|&r| boundary_mass(u, center, r))
        .collect::<Result<Vec<_>>>()?;
    let points: Vec<(f64, f64)> = radii
        .iter()
        .zip(&masses)
        .filter(|(_, &h)| h > 1e-300 && h.is_finite())
        .map(|(&r, &h)| (r.ln(), (h / r).ln()))
        .collect();
    if points.len() < 2 {
        return Err(Error::DegenerateFit(format!(
            "boundary mass usable at {} of {} radii",
            points.len(),
            radii.len()
        )));
    }
    let m = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / m;
    let my = points.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let fit_residual = (points
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum::<f64>()
        / m)
        .sqrt();
    Ok(OrderEstimate {
        order: 0.5 * slope,
        fit_residual,
        radii,
        masses,
    })
}

/// Finite-radius stand-in for γ-degeneracy: `sup_{B_r}|u|/r^γ` must shrink
/// along the decreasing radii *and* the fitted order must exceed `γ + 0.2`.
#[derive(Debug, Clone, Serialize)]
pub struct DegeneracyReport {
    pub gamma: f64,
    /// Radii in decreasing order.
    pub radii: Vec<f64>,
    pub sup_ratios: Vec<f64>,
    pub ratios_decreasing: bool,
    pub order: f64,
    pub order_threshold: f64,
    pub order_exceeds: bool,
    pub degenerate: bool,
}

pub fn degeneracy_report(u: &GridField, center: Point, radii: &[f64], gamma: f64, order: f64) -> Result<DegeneracyReport> {
    let mut radii = radii.to_vec();
    radii.sort_by(|a, b| b.total_cmp(a));
    let grid = u.grid();
    let mut sup_ratios = Vec::with_capacity(radii.len());
    for &r in &radii {
        check_ball(u, center, r)?;
        let sup = (0..grid.len())
            .filter(|&idx| {
                let (x, y) = grid.position(idx);
                (x - center.0).hypot(y - center.1) <= r * (1.0 + 1e-12)
            })
            .map(|idx| u.values()[idx].abs())
            .fold(0.0, f64::max);
        sup_ratios.push(sup / r.powf(gamma));
    }
    let ratios_decreasing = sup_ratios.windows(2).all(|w| w[1] < w[0]);
    let order_threshold = gamma + 0.2;
    let order_exceeds = order > order_threshold;
    Ok(DegeneracyReport {
        gamma,
        radii,
        sup_ratios,
        ratios_decreasing,
        order,
        order_threshold,
        order_exceeds,
        degenerate: ratios_decreasing && order_exceeds,
    })
}
