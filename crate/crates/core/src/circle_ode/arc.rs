//! Integration of the positive arc `-φ'' - γₚ²φ = λ₊ φ^{p-1}`, `φ > 0`,
//! started at a zero with the slope fixed by the Hamiltonian level.

use crate::error::{Error, Result};
use crate::model::{gamma_of, positive_power, Parameters};

use super::hamiltonian_level;
use super::period::{invert_period_obstacle, period_map, period_map_obstacle};

/// Local error tolerance of the embedded Runge–Kutta pair.
pub const STEP_TOL: f64 = 1e-12;
/// Hamiltonian change allowed in a single accepted step, relative to `h`.
pub const STEP_DRIFT_TOL: f64 = 2e-12;
/// Relative drift of the Hamiltonian over a whole arc.
pub const ARC_DRIFT_TOL: f64 = 1e-8;

/// Samples of one positive arc on `[0, length]`.
#[derive(Debug, Clone)]
pub struct PositiveArc {
    pub max_value: f64,
    pub level: f64,
    pub length: f64,
    pub offsets: Vec<f64>,
    pub values: Vec<f64>,
    pub derivs: Vec<f64>,
    /// Worst `|H(φ,φ') - h| / h` seen at any accepted step.
    pub max_drift: f64,
}

/// Hamiltonian level of the arc with maximum `M`: `γₚ²M²/2 + λ₊M^p/p`.
pub fn level_from_max(max_value: f64, params: &Parameters) -> f64 {
    hamiltonian_level(max_value, 0.0, params)
}

/// Arc on `steps + 1` uniform samples of `[0, T(M)]`.
pub fn solve_positive_arc(max_value: f64, params: &Parameters, steps: usize) -> Result<PositiveArc> {
    if !(max_value.is_finite() && max_value > 0.0) {
        return Err(Error::InvalidParameters(format!(
            "arc maximum M = {max_value} must be positive"
        )));
    }
    let steps = steps.max(2);
    let length = arc_length(max_value, params)?;
    let offsets: Vec<f64> = (0..=steps)
        .map(|i| length * i as f64 / steps as f64)
        .collect();
    sample_positive_arc(max_value, length, params, &offsets)
}

pub(crate) fn arc_length(max_value: f64, params: &Parameters) -> Result<f64> {
    if params.p() == 1.0 {
        Ok(period_map_obstacle(max_value, params.lambda_plus()))
    } else {
        period_map(max_value, params)
    }
}

pub(crate) fn max_for_length(length: f64, params: &Parameters) -> Result<f64> {
    if params.p() == 1.0 {
        Ok(invert_period_obstacle(length, params.lambda_plus()))
    } else {
        super::period::invert_period(length, params)
    }
}

/// Arc of maximum `M` and length `length = T(M)`, sampled at the given
/// ascending offsets in `[0, length]`.
pub(crate) fn sample_positive_arc(
    max_value: f64,
    length: f64,
    params: &Parameters,
    offsets: &[f64],
) -> Result<PositiveArc> {
    let level = level_from_max(max_value, params);
    if params.p() == 1.0 {
        return Ok(obstacle_arc(max_value, length, level, params, offsets));
    }
    let slope = (2.0 * level).sqrt();
    let mut stepper = Stepper::new(params, max_value, slope, level);
    let mut state = [0.0, slope];
    let mut theta = 0.0;
    let mut values = Vec::with_capacity(offsets.len());
    let mut derivs = Vec::with_capacity(offsets.len());
    for &target in offsets {
        if target < theta {
            return Err(Error::IntegrationFailure("output offsets must be ascending".into()));
        }
        stepper.advance(&mut theta, &mut state, target)?;
        values.push(state[0]);
        derivs.push(state[1]);
    }
    if stepper.max_drift > ARC_DRIFT_TOL {
        return Err(Error::IntegrationFailure(format!(
            "relative Hamiltonian drift {:e} exceeds {ARC_DRIFT_TOL:e}",
            stepper.max_drift
        )));
    }
    Ok(PositiveArc {
        max_value,
        level,
        length,
        offsets: offsets.to_vec(),
        values,
        derivs,
        max_drift: stepper.max_drift,
    })
}

/// `p = 1`: `φ(θ) = -λ₊/γ² + (M + λ₊/γ²) cos(γ(θ - T/2))` with `γ = 2`.
fn obstacle_arc(
    max_value: f64,
    length: f64,
    level: f64,
    params: &Parameters,
    offsets: &[f64],
) -> PositiveArc {
    let gamma = 2.0;
    let shift = params.lambda_plus() / (gamma * gamma);
    let amp = max_value + shift;
    let mut max_drift: f64 = 0.0;
    let mut values = Vec::with_capacity(offsets.len());
    let mut derivs = Vec::with_capacity(offsets.len());
    for &t in offsets {
        let arg = gamma * (t - 0.5 * length);
        let v = -shift + amp * arg.cos();
        let d = -gamma * amp * arg.sin();
        max_drift = max_drift.max((hamiltonian_level(v, d, params) - level).abs() / level);
        values.push(v);
        derivs.push(d);
    }
    PositiveArc {
        max_value,
        level,
        length,
        offsets: offsets.to_vec(),
        values,
        derivs,
        max_drift,
    }
}

// Dormand–Prince 5(4) tableau; the system is autonomous so the nodes are not needed.
const A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

struct Stepper<'a> {
    params: &'a Parameters,
    gamma2: f64,
    scale: [f64; 2],
    level: f64,
    step: f64,
    min_step: f64,
    max_drift: f64,
}

impl<'a> Stepper<'a> {
    fn new(params: &'a Parameters, max_value: f64, slope: f64, level: f64) -> Self {
        let gamma = gamma_of(params.p());
        // natural angular scale of the arc: M / slope
        let scale_theta = (max_value / slope).min(1.0);
        Stepper {
            params,
            gamma2: gamma * gamma,
            scale: [max_value, slope],
            level,
            step: 1e-3 * scale_theta,
            min_step: 1e-14 * scale_theta,
            max_drift: 0.0,
        }
    }

    fn rhs(&self, y: [f64; 2]) -> [f64; 2] {
        let p = self.params.p();
        [
            y[1],
            -self.gamma2 * y[0] - self.params.lambda_plus() * positive_power(y[0], p - 1.0),
        ]
    }

    fn advance(&mut self, theta: &mut f64, y: &mut [f64; 2], target: f64) -> Result<()> {
        while *theta < target {
            let remaining = target - *theta;
            let last = self.step >= remaining;
            let h = if last { remaining } else { self.step };
            let (next, err) = self.trial(*y, h);
            let h_next = hamiltonian_level(next[0], next[1], self.params);
            let drift_step = (h_next - hamiltonian_level(y[0], y[1], self.params)).abs() / self.level;
            let err_norm = err
                .iter()
                .zip(self.scale.iter())
                .zip(next.iter())
                .map(|((e, s), v)| e.abs() / (STEP_TOL * (s + v.abs())))
                .fold(0.0f64, f64::max);
            let drift_norm = drift_step / STEP_DRIFT_TOL;
            let norm = err_norm.max(drift_norm);
            if norm <= 1.0 || h <= self.min_step {
                *theta = if last { target } else { *theta + h };
                *y = next;
                self.max_drift = self.max_drift.max((h_next - self.level).abs() / self.level);
                let factor = if norm == 0.0 { 5.0 } else { (0.9 * norm.powf(-0.2)).clamp(0.2, 5.0) };
                if !last || factor < 1.0 {
                    self.step = h * factor;
                }
            } else {
                self.step = h * (0.9 * norm.powf(-0.2)).clamp(0.1, 0.9);
                if !self.step.is_finite() {
                    return Err(Error::IntegrationFailure("non-finite step size".into()));
                }
                self.step = self.step.max(self.min_step);
            }
        }
        Ok(())
    }

    fn trial(&self, y: [f64; 2], h: f64) -> ([f64; 2], [f64; 2]) {
        let mut k = [[0.0; 2]; 7];
        for stage in 0..7 {
            let mut ys = y;
            for (j, kj) in k.iter().enumerate().take(stage) {
                let a = A[stage][j];
                if a != 0.0 {
                    ys[0] += h * a * kj[0];
                    ys[1] += h * a * kj[1];
                }
            }
            k[stage] = self.rhs(ys);
        }
        let mut high = y;
        let mut err = [0.0; 2];
        for stage in 0..7 {
            for c in 0..2 {
                high[c] += h * B5[stage] * k[stage][c];
                err[c] += h * (B5[stage] - B4[stage]) * k[stage][c];
            }
        }
        (high, err)
    }
}
