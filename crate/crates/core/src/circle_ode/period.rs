//! The period map `M ↦ T(M)`: length of the positive arc of the circle ODE
//! as a function of its maximum, and its inverse.

use crate::error::{Error, Result};
use crate::model::{exponents, gamma_of, Parameters};
use crate::quadrature::integrate;

pub const PERIOD_REL_TOL: f64 = 1e-12;

/// `T(M) = 2∫₀¹ dt / √(γₚ²(1-t²) + 2λ₊/(p M^{2-p}) (1-t^p))`.
///
/// With `t = 1 - s²` the inverse square-root singularity at `t = 1` cancels
/// against the Jacobian and the integrand becomes
/// `4 / √(γₚ²(2-s²) + c·(1-(1-s²)^p)/s²)`, bounded on `[0, 1]`.
pub fn period_map(max_value: f64, params: &Parameters) -> Result<f64> {
    if !(max_value.is_finite() && max_value > 0.0) {
        return Err(Error::InvalidParameters(format!(
            "arc maximum M = {max_value} must be positive"
        )));
    }
    let p = params.p();
    let gamma = gamma_of(p);
    let c = 2.0 * params.lambda_plus() / (p * max_value.powf(2.0 - p));
    let integrand = |s: f64| {
        let s2 = s * s;
        let ratio = if s2 == 0.0 {
            p
        } else {
            // (1 - (1 - s²)^p) / s² without cancellation
            -(p * (-s2).ln_1p()).exp_m1() / s2
        };
        4.0 / (gamma * gamma * (2.0 - s2) + c * ratio).sqrt()
    };
    Ok(integrate(integrand, 0.0, 1.0, PERIOD_REL_TOL, 0.0, 2000)?.value)
}

/// Unique `M > 0` with `T(M) = target`, by bisection in `ln M`.
pub fn invert_period(target: f64, params: &Parameters) -> Result<f64> {
    let theta_p = exponents(params).theta_p;
    if !(target > 0.0 && target < theta_p) {
        return Err(Error::OutOfRange { target, theta_p });
    }
    let period_at = |log_m: f64| period_map(log_m.exp(), params);
    let growth = 1e4f64.ln();
    let floor = 1e-300f64.ln();
    let ceiling = 1e300f64.ln();

    let mut lo = 1e-8f64.ln();
    while period_at(lo)? >= target {
        lo -= growth;
        if lo < floor {
            return Err(Error::BracketFailure { target });
        }
    }
    let mut hi = 1e8f64.ln();
    while period_at(hi)? <= target {
        hi += growth;
        if hi > ceiling {
            return Err(Error::BracketFailure { target });
        }
    }
    for _ in 0..300 {
        let mid = 0.5 * (lo + hi);
        let t = period_at(mid)?;
        if t < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-14 || (t - target).abs() <= 1e-15 * theta_p {
            break;
        }
    }
    Ok((0.5 * (lo + hi)).exp())
}

/// Closed form of the period map for `p = 1`, where the positive arc solves
/// the linear equation `-φ'' - γ²φ = λ₊`.
pub fn period_map_obstacle(max_value: f64, lambda_plus: f64) -> f64 {
    let gamma = 2.0;
    let shift = lambda_plus / (gamma * gamma);
    2.0 / gamma * (shift / (max_value + shift)).acos()
}

/// Inverse of [`period_map_obstacle`].
pub fn invert_period_obstacle(target: f64, lambda_plus: f64) -> f64 {
    let gamma = 2.0;
    let shift = lambda_plus / (gamma * gamma);
    shift * (1.0 / (0.5 * gamma * target).cos() - 1.0)
}
