//! Diagnostics on grid fields: boundary mass `H`, Dirichlet term `D_t`,
//! Weiss functionals and their derivative identity, blow-ups, vanishing
//! order and singular-set detection.
//!
//! Circle integrals use the angular trapezoid rule on values interpolated by
//! tensor-product cubics; ball integrals use the same angular rule on
//! Gauss–Legendre radii, with gradients from fourth-order centred
//! differences. Both are fourth-order accurate on smooth fields, which the
//! Weiss functional needs: it cancels most of `D_t` against `γH/r`.

mod blowup;
mod order;
mod singular;

use std::f64::consts::PI;
use std::io::Write;

use serde::Serialize;

pub use blowup::{blowup, blowup_sequence, BlowupField, BlowupMode, BlowupSequence, ReferenceGrid};
pub use order::{degeneracy_report, dyadic_radii, vanishing_order, DegeneracyReport, OrderEstimate};
pub use singular::{default_thresholds, singular_set, NodalPoint, NodalTag, SingularSet};

use crate::error::{Error, Result};
use crate::grid::GridField;
use crate::model::{exponents, Parameters};

pub type Point = (f64, f64);

fn check_ball(u: &GridField, center: Point, r: f64) -> Result<()> {
    let reach = center.0.hypot(center.1) + r;
    if !(r > 0.0 && r.is_finite()) || reach > u.grid().radius() * (1.0 + 1e-12) {
        return Err(Error::BallOutsideDomain { center, radius: r });
    }
    Ok(())
}

/// Number of angular samples on a circle of radius `r`.
pub fn circle_samples(r: f64, spacing: f64) -> usize {
    64usize.max(4 * (2.0 * PI * r / spacing).ceil() as usize)
}

/// `∫_{∂B_r(center)} g(x, y) dσ` by the trapezoid rule in angle.
fn circle_integral(u: &GridField, center: Point, r: f64, g: impl Fn(f64, f64) -> f64) -> f64 {
    let m = circle_samples(r, u.grid().spacing());
    let dtheta = 2.0 * PI / m as f64;
    let sum: f64 = (0..m)
        .map(|j| {
            let (s, c) = (j as f64 * dtheta).sin_cos();
            g(center.0 + r * c, center.1 + r * s)
        })
        .sum();
    sum * r * dtheta
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`, four points.
const GAUSS4: [(f64, f64); 4] = [
    (-0.861_136_311_594_052_6, 0.347_854_845_137_453_9),
    (-0.339_981_043_584_856_3, 0.652_145_154_862_546_1),
    (0.339_981_043_584_856_3, 0.652_145_154_862_546_1),
    (0.861_136_311_594_052_6, 0.347_854_845_137_453_9),
];

/// `∫_{B_r(center)} g(u, |∇u|²) dx` in polar coordinates: composite
/// four-point Gauss–Legendre in the radius (panels no wider than the grid
/// spacing) and the trapezoid rule in angle, with `u` and the fourth-order
/// centred gradient interpolated by [`GridField::interpolate_cubic`].
fn ball_integral(u: &GridField, center: Point, r: f64, g: impl Fn(f64, f64) -> f64) -> f64 {
    let grid = u.grid();
    let h = grid.spacing();
    let n = grid.n();
    let mut gx = vec![0.0; grid.len()];
    let mut gy = vec![0.0; grid.len()];
    for j in 0..n {
        for i in 0..n {
            let (a, b) = gradient4(u, i, j);
            gx[j * n + i] = a;
            gy[j * n + i] = b;
        }
    }
    let gx = GridField::from_raw(grid, gx);
    let gy = GridField::from_raw(grid, gy);
    let panels = ((r / h).ceil() as usize).max(2);
    let width = r / panels as f64;
    let mut total = 0.0;
    for k in 0..panels {
        let mid = (k as f64 + 0.5) * width;
        for &(xi, wi) in &GAUSS4 {
            let rho = mid + 0.5 * width * xi;
            let m = circle_samples(rho, h);
            let dtheta = 2.0 * PI / m as f64;
            let ring: f64 = (0..m)
                .map(|j| {
                    let (s, c) = (j as f64 * dtheta).sin_cos();
                    let (x, y) = (center.0 + rho * c, center.1 + rho * s);
                    let (a, b) = (gx.interpolate_cubic(x, y), gy.interpolate_cubic(x, y));
                    g(u.interpolate_cubic(x, y), a * a + b * b)
                })
                .sum();
            total += 0.5 * width * wi * ring * rho * dtheta;
        }
    }
    total
}

/// Fourth-order centred gradient, falling back to the second-order one within
/// two nodes of the array edge.
fn gradient4(u: &GridField, i: usize, j: usize) -> (f64, f64) {
    let n = u.grid().n();
    if i < 2 || j < 2 || i + 2 >= n || j + 2 >= n {
        return u.gradient_at(i, j);
    }
    let h12 = 12.0 * u.grid().spacing();
    let gx = (u.get(i - 2, j) - 8.0 * u.get(i - 1, j) + 8.0 * u.get(i + 1, j) - u.get(i + 2, j)) / h12;
    let gy = (u.get(i, j - 2) - 8.0 * u.get(i, j - 1) + 8.0 * u.get(i, j + 1) - u.get(i, j + 2)) / h12;
    (gx, gy)
}

/// `H(r) = ∫_{∂B_r(center)} u² dσ`.
pub fn boundary_mass(u: &GridField, center: Point, r: f64) -> Result<f64> {
    check_ball(u, center, r)?;
    Ok(circle_integral(u, center, r, |x, y| {
        let v = u.interpolate_cubic(x, y);
        v * v
    }))
}

/// `D_t(r) = ∫_{B_r(center)} (|∇u|² - t·F(u)) dx`.
pub fn dirichlet_term(u: &GridField, center: Point, r: f64, t: f64, params: &Parameters) -> Result<f64> {
    check_ball(u, center, r)?;
    Ok(ball_integral(u, center, r, |v, g2| g2 - t * params.potential(v)))
}

/// `∫_{B_r(center)} g(u) dx` for a pointwise integrand, with the same cell
/// weights as [`dirichlet_term`].
pub fn ball_quadrature(u: &GridField, center: Point, r: f64, g: impl Fn(f64) -> f64) -> Result<f64> {
    check_ball(u, center, r)?;
    Ok(ball_integral(u, center, r, |v, _| g(v)))
}

/// `W_{γ,t}(r) = r^{-(n-2+2γ)} D_t(r) - γ r^{-(n-1+2γ)} H(r)`.
pub fn weiss(u: &GridField, center: Point, r: f64, gamma: f64, t: f64, params: &Parameters) -> Result<f64> {
    let n = params.n() as f64;
    let d = dirichlet_term(u, center, r, t, params)?;
    let h = boundary_mass(u, center, r)?;
    Ok(r.powf(-(n - 2.0 + 2.0 * gamma)) * d - gamma * r.powf(-(n - 1.0 + 2.0 * gamma)) * h)
}

/// Both sides of the radial derivative formula for `W_{γ,t}`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DerivativeIdentity {
    pub r: f64,
    /// Centred difference of `W` in `r`.
    pub lhs: f64,
    pub rhs: f64,
    /// The four terms of the formula, summing to `rhs`.
    pub terms: [f64; 4],
    /// `|lhs - rhs| / Σ|terms|`.
    pub mismatch: f64,
}

/// `d/dr W_{γ,t}` two ways. With `a = n - 2 + 2γ` and `C = 2n - t(n-2)`:
///
/// ```text
/// dW/dr = 2 r^{-a} ∫_{∂B_r} (∂_r u - γu/r)² dσ
///       + (2 - t) r^{-a} ∫_{∂B_r} F(u) dσ
///       - (C - 2γ(t - p)) / (p r^{a+1}) ∫_{B_r} λ₊(u⁺)^p dx
///       - (C - 2γ(t - q)) / (q r^{a+1}) ∫_{B_r} λ₋(u⁻)^q dx
/// ```
///
/// The left side is the centred difference of [`weiss`] with increment
/// `2·spacing`; `∂_r u` is the fourth-order centred difference along the
/// ray with step `spacing`.
pub fn weiss_derivative_identity(
    u: &GridField,
    center: Point,
    r: f64,
    gamma: f64,
    t: f64,
    params: &Parameters,
) -> Result<DerivativeIdentity> {
    let h = u.grid().spacing();
    let delta = 2.0 * h;
    if r - delta <= 0.0 {
        return Err(Error::BallOutsideDomain { center, radius: r - delta });
    }
    let w_plus = weiss(u, center, r + delta, gamma, t, params)?;
    let w_minus = weiss(u, center, r - delta, gamma, t, params)?;
    let lhs = (w_plus - w_minus) / (2.0 * delta);

    let n = params.n() as f64;
    let a = n - 2.0 + 2.0 * gamma;
    let c = 2.0 * n - t * (n - 2.0);
    let p = params.p();
    let radial = circle_integral(u, center, r, |x, y| {
        let (ex, ey) = ((x - center.0) / r, (y - center.1) / r);
        let at = |s: f64| u.interpolate_cubic(x + s * h * ex, y + s * h * ey);
        let ur = (at(-2.0) - 8.0 * at(-1.0) + 8.0 * at(1.0) - at(2.0)) / (12.0 * h);
        let e = ur - gamma * u.interpolate_cubic(x, y) / r;
        e * e
    });
    let surface_f = circle_integral(u, center, r, |x, y| params.potential(u.interpolate_cubic(x, y)));
    let positive = ball_integral(u, center, r, |v, _| {
        if v > 0.0 {
            params.lambda_plus() * v.powf(p)
        } else {
            0.0
        }
    });
    let t1 = 2.0 * r.powf(-a) * radial;
    let t2 = (2.0 - t) * r.powf(-a) * surface_f;
    let t3 = -(c - 2.0 * gamma * (t - p)) / (p * r.powf(a + 1.0)) * positive;
    let t4 = match params.q() {
        Some(q) if params.two_phase() => {
            let negative = ball_integral(u, center, r, |v, _| {
                if v < 0.0 {
                    params.lambda_minus() * (-v).powf(q)
                } else {
                    0.0
                }
            });
            -(c - 2.0 * gamma * (t - q)) / (q * r.powf(a + 1.0)) * negative
        }
        _ => 0.0,
    };
    let terms = [t1, t2, t3, t4];
    let rhs = terms.iter().sum::<f64>();
    let scale = terms.iter().map(|v| v.abs()).sum::<f64>();
    let mismatch = if scale > 0.0 { (lhs - rhs).abs() / scale } else { (lhs - rhs).abs() };
    Ok(DerivativeIdentity {
        r,
        lhs,
        rhs,
        terms,
        mismatch,
    })
}

/// Sampled `H`, `D_t` and `W_{γ,t}` along a list of radii.
#[derive(Debug, Clone, Serialize)]
pub struct RadialTrace {
    pub center: Point,
    pub radii: Vec<f64>,
    pub h: Vec<f64>,
    pub d: Vec<f64>,
    pub w: Vec<f64>,
    pub gamma: f64,
    pub t: f64,
    /// `W + C r^e` when a monotonicity correction was calibrated.
    pub corrected_w: Option<Vec<f64>>,
    /// Calibrated constant `C` of the correction.
    pub correction_constant: Option<f64>,
    /// Exponent `e = γₚ(q - p) + εq` of the correction.
    pub correction_exponent: Option<f64>,
}

impl RadialTrace {
    pub fn is_empty(&self) -> bool {
        self.radii.is_empty()
    }

    /// Relative spread `(max W - min W) / max |W|`.
    pub fn relative_spread(&self) -> f64 {
        let max = self.w.iter().cloned().fold(f64::MIN, f64::max);
        let min = self.w.iter().cloned().fold(f64::MAX, f64::min);
        let scale = self.w.iter().map(|v| v.abs()).fold(0.0, f64::max);
        if scale == 0.0 {
            0.0
        } else {
            (max - min) / scale
        }
    }

    /// Plot-ready CSV. The header names the exponents, e.g.
    /// `r,H,D_t=2,W_gamma=4_t=2,corrected_W`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        if self.is_empty() {
            return Err(Error::EmptyTrace);
        }
        let mut out = csv::Writer::from_writer(writer);
        let mut header = vec![
            "r".to_string(),
            "H".to_string(),
            format!("D_t={}", self.t),
            format!("W_gamma={}_t={}", self.gamma, self.t),
        ];
        if self.corrected_w.is_some() {
            header.push("corrected_W".into());
        }
        out.write_record(&header)?;
        for i in 0..self.radii.len() {
            let mut row = vec![
                self.radii[i].to_string(),
                self.h[i].to_string(),
                self.d[i].to_string(),
                self.w[i].to_string(),
            ];
            if let Some(c) = &self.corrected_w {
                row.push(c[i].to_string());
            }
            out.write_record(&row)?;
        }
        out.flush()?;
        Ok(())
    }
}

pub fn radial_trace(
    u: &GridField,
    center: Point,
    radii: &[f64],
    gamma: f64,
    t: f64,
    params: &Parameters,
) -> Result<RadialTrace> {
    if radii.is_empty() {
        return Err(Error::EmptyTrace);
    }
    let n = params.n() as f64;
    let mut hs = Vec::with_capacity(radii.len());
    let mut ds = Vec::with_capacity(radii.len());
    let mut ws = Vec::with_capacity(radii.len());
    for &r in radii {
        let h = boundary_mass(u, center, r)?;
        let d = dirichlet_term(u, center, r, t, params)?;
        ws.push(r.powf(-(n - 2.0 + 2.0 * gamma)) * d - gamma * r.powf(-(n - 1.0 + 2.0 * gamma)) * h);
        hs.push(h);
        ds.push(d);
    }
    Ok(RadialTrace {
        center,
        radii: radii.to_vec(),
        h: hs,
        d: ds,
        w: ws,
        gamma,
        t,
        corrected_w: None,
        correction_constant: None,
        correction_exponent: None,
    })
}

/// `W_{γₚ,2}(r) + C r^e` with `e = γₚ(q - p) + εq` and the smallest `C ≥ 0`
/// making the sampled sequence non-decreasing in `r`. Without a negative
/// phase the correction is absent and `C = 0`.
pub fn corrected_weiss(
    u: &GridField,
    center: Point,
    radii: &[f64],
    params: &Parameters,
    epsilon: f64,
) -> Result<RadialTrace> {
    let mut sorted = radii.to_vec();
    sorted.sort_by(f64::total_cmp);
    let gamma = exponents(params).gamma_p;
    let mut trace = radial_trace(u, center, &sorted, gamma, 2.0, params)?;
    let (constant, exponent) = match params.q() {
        Some(q) if params.two_phase() => {
            let e = gamma * (q - params.p()) + epsilon * q;
            let mut c: f64 = 0.0;
            for i in 0..sorted.len().saturating_sub(1) {
                let drop = trace.w[i] - trace.w[i + 1];
                let gain = sorted[i + 1].powf(e) - sorted[i].powf(e);
                if drop > 0.0 && gain > 0.0 {
                    c = c.max(drop / gain);
                }
            }
            (c, e)
        }
        _ => (0.0, 0.0),
    };
    let corrected = sorted
        .iter()
        .zip(&trace.w)
        .map(|(r, w)| if constant > 0.0 { w + constant * r.powf(exponent) } else { *w })
        .collect();
    trace.corrected_w = Some(corrected);
    trace.correction_constant = Some(constant);
    trace.correction_exponent = Some(exponent);
    Ok(trace)
}
