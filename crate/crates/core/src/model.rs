//! Problem parameters and the critical exponents derived from them.
//!
//! One [`Parameters`] value describes both equations handled by the crate:
//!
//! ```text
//! -Δu = λ₊ (u⁺)^{p-1} - λ₋ (u⁻)^{q-1}     (λ₋ > 0, 1 ≤ p < q < 2)
//! -Δu = λ₊ (u⁺)^{p-1}                     (λ₋ = 0, q unused)
//! ```

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance used to decide whether `gamma_p` is an integer.
pub const INTEGRALITY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParameters", into = "RawParameters")]
pub struct Parameters {
    p: f64,
    q: Option<f64>,
    lambda_plus: f64,
    lambda_minus: f64,
    n: usize,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
struct RawParameters {
    p: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    q: Option<f64>,
    lambda_plus: f64,
    #[serde(default)]
    lambda_minus: f64,
    #[serde(default = "default_dimension")]
    n: usize,
}

fn default_dimension() -> usize {
    2
}

impl TryFrom<RawParameters> for Parameters {
    type Error = Error;

    fn try_from(raw: RawParameters) -> Result<Self> {
        Parameters::new(raw.p, raw.q, raw.lambda_plus, raw.lambda_minus)?.with_dimension(raw.n)
    }
}

impl From<Parameters> for RawParameters {
    fn from(params: Parameters) -> Self {
        RawParameters {
            p: params.p,
            q: params.q,
            lambda_plus: params.lambda_plus,
            lambda_minus: params.lambda_minus,
            n: params.n,
        }
    }
}

impl Parameters {
    /// Validated constructor for the planar problem (`n = 2`).
    ///
    /// `q` is required when `lambda_minus > 0` and ignored otherwise.
    pub fn new(p: f64, q: Option<f64>, lambda_plus: f64, lambda_minus: f64) -> Result<Self> {
        let invalid = |msg: String| Err(Error::InvalidParameters(msg));
        if !p.is_finite() || !(1.0..2.0).contains(&p) {
            return invalid(format!("p = {p} must satisfy 1 <= p < 2"));
        }
        if !(lambda_plus.is_finite() && lambda_plus > 0.0) {
            return invalid(format!("lambda_plus = {lambda_plus} must be positive"));
        }
        if !(lambda_minus.is_finite() && lambda_minus >= 0.0) {
            return invalid(format!("lambda_minus = {lambda_minus} must be non-negative"));
        }
        if lambda_minus > 0.0 {
            match q {
                Some(q) if q.is_finite() && p < q && q < 2.0 => {}
                Some(q) => return invalid(format!("q = {q} must satisfy p < q < 2")),
                None => return invalid("q is required when lambda_minus > 0".into()),
            }
        } else if let Some(q) = q {
            if !q.is_finite() || !(1.0..2.0).contains(&q) {
                return invalid(format!("q = {q} must lie in [1, 2)"));
            }
        }
        Ok(Parameters {
            p,
            q,
            lambda_plus,
            lambda_minus,
            n: 2,
        })
    }

    /// The one-phase problem with `lambda_minus = 0`.
    pub fn one_phase(p: f64, lambda_plus: f64) -> Result<Self> {
        Parameters::new(p, None, lambda_plus, 0.0)
    }

    pub fn with_dimension(mut self, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameters("dimension n must be positive".into()));
        }
        self.n = n;
        Ok(self)
    }

    /// Copy with both coefficients set to zero, so the energy reduces to the
    /// Dirichlet integral. Only meant for calibrating the discrete operators.
    pub fn without_potential(mut self) -> Self {
        self.lambda_plus = 0.0;
        self.lambda_minus = 0.0;
        self
    }

    /// Coefficients seen by the natural blow-up `r^{-γₚ} u(x₀ + r x)`:
    /// λ₊ is unchanged and λ₋ picks up the factor `r^{(q-p)γₚ}`.
    pub fn rescaled_for_blowup(mut self, r: f64) -> Self {
        if let Some(q) = self.q {
            let gamma_p = 2.0 / (2.0 - self.p);
            self.lambda_minus *= r.powf((q - self.p) * gamma_p);
        }
        self
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> Option<f64> {
        self.q
    }

    pub fn lambda_plus(&self) -> f64 {
        self.lambda_plus
    }

    pub fn lambda_minus(&self) -> f64 {
        self.lambda_minus
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// True when the negative phase is active.
    pub fn two_phase(&self) -> bool {
        self.lambda_minus > 0.0 && self.q.is_some()
    }

    /// Right-hand side `λ₊(u⁺)^{p-1} - λ₋(u⁻)^{q-1}`. For `p = 1` the positive
    /// part is the indicator of `{u > 0}`.
    pub fn reaction(&self, u: f64) -> f64 {
        if u > 0.0 {
            self.lambda_plus * positive_power(u, self.p - 1.0)
        } else if u < 0.0 && self.two_phase() {
            -self.lambda_minus * positive_power(-u, self.q.unwrap_or(2.0) - 1.0)
        } else {
            0.0
        }
    }

    /// Potential `F(u) = λ₊/p (u⁺)^p + λ₋/q (u⁻)^q`.
    pub fn potential(&self, u: f64) -> f64 {
        self.positive_potential(u) + self.negative_potential(u)
    }

    /// `λ₊/p (u⁺)^p`.
    pub fn positive_potential(&self, u: f64) -> f64 {
        if u > 0.0 {
            self.lambda_plus / self.p * u.powf(self.p)
        } else {
            0.0
        }
    }

    /// `λ₋/q (u⁻)^q`.
    pub fn negative_potential(&self, u: f64) -> f64 {
        match self.q {
            Some(q) if u < 0.0 && self.lambda_minus > 0.0 => self.lambda_minus / q * (-u).powf(q),
            _ => 0.0,
        }
    }
}

/// `x^e` for `x > 0`, zero otherwise (so `e = 0` gives the indicator of `x > 0`).
pub fn positive_power(x: f64, e: f64) -> f64 {
    if x > 0.0 {
        x.powf(e)
    } else {
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalExponents {
    /// Homogeneity degree `2/(2-p)`.
    pub gamma_p: f64,
    /// `2/(2-q)` when the negative phase is present.
    pub gamma_q: Option<f64>,
    /// Largest integer strictly below `gamma_p`.
    pub beta_p: u32,
    /// Opening `π/γₚ` of every negative cone of a homogeneous solution.
    pub theta_p: f64,
}

pub fn gamma_of(exponent: f64) -> f64 {
    2.0 / (2.0 - exponent)
}

pub fn exponents(params: &Parameters) -> CriticalExponents {
    let gamma_p = gamma_of(params.p);
    let gamma_q = params.q.filter(|_| params.two_phase()).map(gamma_of);
    let nearest = gamma_p.round();
    let beta_p = if (gamma_p - nearest).abs() < INTEGRALITY_TOL {
        nearest as u32 - 1
    } else {
        gamma_p.floor() as u32
    };
    CriticalExponents {
        gamma_p,
        gamma_q,
        beta_p,
        theta_p: PI / gamma_p,
    }
}

/// Integers `k` with `γₚ < k < 2γₚ`, ascending. These are the wave numbers of
/// the planar γₚ-homogeneous solutions (one solution with `2k` zeros each).
pub fn admissible_wave_numbers(params: &Parameters) -> Vec<u32> {
    let gamma_p = gamma_of(params.p);
    let lo = (gamma_p + INTEGRALITY_TOL).floor() as u32 + 1;
    (lo..)
        .take_while(|&k| (k as f64) < 2.0 * gamma_p - INTEGRALITY_TOL)
        .collect()
}
