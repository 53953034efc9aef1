//! Planar γₚ-homogeneous solutions `u = r^{γₚ} φ(θ)` of `-Δu = λ₊(u⁺)^{p-1}`.
//!
//! The angular part solves the circle ODE `-φ'' - γₚ²φ = λ₊(φ⁺)^{p-1}` and is
//! built one fundamental cell `[0, T_k]`, `T_k = 2π/k`, at a time: a negative
//! arc `-A sin(γₚθ)` on `[0, θₚ]` followed by a positive arc on `[θₚ, T_k]`
//! whose length fixes its maximum through the period map.

mod arc;
mod period;

use std::io::Write;
use std::sync::Arc;

use rayon::prelude::*;
use serde::Serialize;

pub use arc::{level_from_max, solve_positive_arc, PositiveArc, ARC_DRIFT_TOL};
pub use period::{
    invert_period, invert_period_obstacle, period_map, period_map_obstacle, PERIOD_REL_TOL,
};

use crate::error::{Error, Result};
use crate::grid::{DiskGrid, GridField};
use crate::model::{exponents, gamma_of, positive_power, Parameters};

/// Default number of uniform samples per fundamental cell.
pub const DEFAULT_SAMPLES_PER_CELL: usize = 4096;

/// `½φ'² + γₚ²φ²/2 + (λ₊/p)(φ⁺)^p`.
pub fn hamiltonian_level(phi: f64, dphi: f64, params: &Parameters) -> f64 {
    let gamma = gamma_of(params.p());
    0.5 * dphi * dphi + 0.5 * gamma * gamma * phi * phi + params.positive_potential(phi)
}

/// One homogeneous solution on the circle, sampled on `[0, 2π]`.
///
/// `thetas` holds `k·samples_per_cell + 1` uniform angles; the last sample
/// repeats the first at `2π`.
#[derive(Debug, Clone, Serialize)]
pub struct AngularProfile {
    pub thetas: Vec<f64>,
    pub values: Vec<f64>,
    pub derivs: Vec<f64>,
    pub k: u32,
    /// Hamiltonian level.
    pub h: f64,
    /// Amplitude of the negative arcs `-A sin(γₚθ)`.
    pub amplitude_a: f64,
    /// Maximum of the positive arcs.
    pub max_m: f64,
    pub gamma_p: f64,
    pub theta_p: f64,
    pub samples_per_cell: usize,
    /// `φ'(0⁺)`, the slope leaving the cell start on the negative arc.
    pub slope_start: f64,
    /// `φ'(T_k⁻)`, the slope of the integrated positive arc at the cell end.
    pub slope_end: f64,
    /// Worst relative Hamiltonian drift reported by the arc integrator.
    pub arc_drift: f64,
}

impl AngularProfile {
    /// Profile from raw periodic samples on `[0, 2π]` (last sample at `2π`).
    /// Cell metadata not implied by the samples is left at zero.
    pub fn from_samples(
        thetas: Vec<f64>,
        values: Vec<f64>,
        derivs: Vec<f64>,
        k: u32,
        gamma_p: f64,
    ) -> Result<Self> {
        if thetas.len() < 3 || thetas.len() != values.len() || thetas.len() != derivs.len() {
            return Err(Error::InvalidParameters(
                "profile samples must have equal length of at least 3".into(),
            ));
        }
        if k == 0 {
            return Err(Error::InvalidParameters("wave number must be positive".into()));
        }
        let samples_per_cell = (thetas.len() - 1) / k as usize;
        Ok(AngularProfile {
            thetas,
            values,
            derivs,
            k,
            h: 0.0,
            amplitude_a: 0.0,
            max_m: 0.0,
            gamma_p,
            theta_p: std::f64::consts::PI / gamma_p,
            samples_per_cell,
            slope_start: 0.0,
            slope_end: 0.0,
            arc_drift: 0.0,
        })
    }

    /// Number of distinct samples in one period (the `2π` duplicate excluded).
    fn period_len(&self) -> usize {
        self.thetas.len() - 1
    }

    pub fn cell_length(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.k as f64
    }

    /// Zeros in `[0, 2π)`, ascending. Transversal crossings between samples
    /// are located on the cubic Hermite interpolant.
    pub fn zeros(&self) -> Vec<f64> {
        let n = self.period_len();
        let v = &self.values;
        let sign = |x: f64| {
            if x > 0.0 {
                1
            } else if x < 0.0 {
                -1
            } else {
                0
            }
        };
        let mut zeros = Vec::new();
        for i in 0..n {
            let prev = v[(i + n - 1) % n];
            let next = v[(i + 1) % n];
            if v[i] == 0.0 {
                if sign(prev) * sign(next) < 0 {
                    zeros.push(self.thetas[i]);
                }
                continue;
            }
            if sign(v[i]) * sign(next) < 0 {
                zeros.push(self.hermite_root(i));
            }
        }
        zeros.sort_by(f64::total_cmp);
        zeros
    }

    pub fn zero_count(&self) -> usize {
        self.zeros().len()
    }

    /// Lengths of the maximal negative arcs, in order of their left endpoint.
    pub fn negative_arc_lengths(&self) -> Vec<f64> {
        let zeros = self.zeros();
        let two_pi = 2.0 * std::f64::consts::PI;
        let m = zeros.len();
        let mut out = Vec::new();
        for j in 0..m {
            let a = zeros[j];
            let b = if j + 1 < m { zeros[j + 1] } else { zeros[0] + two_pi };
            if self.eval(0.5 * (a + b)).0 < 0.0 {
                out.push(b - a);
            }
        }
        out
    }

    /// Worst `|H(φ, φ') - h|/h` over the samples, including the integrator's
    /// own step-level monitor.
    pub fn hamiltonian_drift(&self, params: &Parameters) -> f64 {
        let sampled = self
            .values
            .iter()
            .zip(self.derivs.iter())
            .map(|(&v, &d)| (hamiltonian_level(v, d, params) - self.h).abs() / self.h)
            .fold(0.0, f64::max);
        sampled.max(self.arc_drift)
    }

    /// Cubic Hermite interpolation of `(φ, φ')` at any angle (taken mod 2π).
    pub fn eval(&self, theta: f64) -> (f64, f64) {
        let two_pi = 2.0 * std::f64::consts::PI;
        let n = self.period_len();
        let t = theta.rem_euclid(two_pi);
        let step = two_pi / n as f64;
        let i = ((t / step).floor() as usize).min(n - 1);
        let (a, b) = (self.thetas[i], self.thetas[i + 1]);
        let s = ((t - a) / (b - a)).clamp(0.0, 1.0);
        hermite(
            self.values[i],
            self.derivs[i],
            self.values[i + 1],
            self.derivs[i + 1],
            b - a,
            s,
        )
    }

    fn hermite_root(&self, i: usize) -> f64 {
        let j = i + 1; // thetas has the 2π sample, so i + 1 ≤ n is valid
        let (a, b) = (self.thetas[i], self.thetas[j]);
        let (f0, d0, f1, d1) = (self.values[i], self.derivs[i], self.values[j], self.derivs[j]);
        let width = b - a;
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        let lo_sign = f0 < 0.0;
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            let (v, _) = hermite(f0, d0, f1, d1, width, mid);
            if (v < 0.0) == lo_sign {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        a + 0.5 * (lo + hi) * width
    }

    /// CSV with columns `theta, phi, dphi`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(writer);
        out.write_record(["theta", "phi", "dphi"])?;
        for ((t, v), d) in self.thetas.iter().zip(&self.values).zip(&self.derivs) {
            out.write_record([t.to_string(), v.to_string(), d.to_string()])?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Cubic Hermite interpolant on an interval of width `w` at fraction `s`,
/// returning value and derivative.
fn hermite(f0: f64, d0: f64, f1: f64, d1: f64, w: f64, s: f64) -> (f64, f64) {
    let s2 = s * s;
    let s3 = s2 * s;
    let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    let h10 = s3 - 2.0 * s2 + s;
    let h01 = -2.0 * s3 + 3.0 * s2;
    let h11 = s3 - s2;
    let value = h00 * f0 + h10 * w * d0 + h01 * f1 + h11 * w * d1;
    let dh00 = 6.0 * s2 - 6.0 * s;
    let dh10 = 3.0 * s2 - 4.0 * s + 1.0;
    let dh01 = -dh00;
    let dh11 = 3.0 * s2 - 2.0 * s;
    let deriv = (dh00 * f0 + dh01 * f1) / w + dh10 * d0 + dh11 * d1;
    (value, deriv)
}

/// The homogeneous solution with `2k` zeros, at the default resolution.
pub fn build_profile(k: u32, params: &Parameters) -> Result<AngularProfile> {
    build_profile_with(k, params, DEFAULT_SAMPLES_PER_CELL)
}

pub fn build_profile_with(k: u32, params: &Parameters, samples_per_cell: usize) -> Result<AngularProfile> {
    let ex = exponents(params);
    let (gamma, theta_p) = (ex.gamma_p, ex.theta_p);
    let kf = k as f64;
    if !(kf > gamma && kf < 2.0 * gamma) {
        return Err(Error::NotAdmissible {
            k,
            lower: gamma,
            upper: 2.0 * gamma,
        });
    }
    let samples_per_cell = samples_per_cell.max(8);
    let cell = 2.0 * std::f64::consts::PI / kf;
    let arc_len = cell - theta_p;
    let max_m = arc::max_for_length(arc_len, params)?;

    let cell_thetas: Vec<f64> = (0..samples_per_cell)
        .map(|i| cell * i as f64 / samples_per_cell as f64)
        .collect();
    let first_positive = cell_thetas.partition_point(|&t| t < theta_p);
    let mut offsets: Vec<f64> = cell_thetas[first_positive..]
        .iter()
        .map(|&t| t - theta_p)
        .collect();
    offsets.push(arc_len);
    let positive = arc::sample_positive_arc(max_m, arc_len, params, &offsets)?;
    let h = positive.level;
    let slope = (2.0 * h).sqrt();
    let amplitude_a = slope / gamma;

    let mut cell_values = Vec::with_capacity(samples_per_cell);
    let mut cell_derivs = Vec::with_capacity(samples_per_cell);
    for &t in &cell_thetas[..first_positive] {
        let (s, c) = (gamma * t).sin_cos();
        cell_values.push(-amplitude_a * s);
        cell_derivs.push(-amplitude_a * gamma * c);
    }
    let m = offsets.len() - 1;
    cell_values.extend_from_slice(&positive.values[..m]);
    cell_derivs.extend_from_slice(&positive.derivs[..m]);
    let slope_end = positive.derivs[m];

    let total = samples_per_cell * k as usize;
    let step = cell / samples_per_cell as f64;
    let mut thetas = Vec::with_capacity(total + 1);
    let mut values = Vec::with_capacity(total + 1);
    let mut derivs = Vec::with_capacity(total + 1);
    for c in 0..k as usize {
        for i in 0..samples_per_cell {
            thetas.push((c * samples_per_cell + i) as f64 * step);
            values.push(cell_values[i]);
            derivs.push(cell_derivs[i]);
        }
    }
    thetas.push(2.0 * std::f64::consts::PI);
    values.push(values[0]);
    derivs.push(derivs[0]);

    Ok(AngularProfile {
        thetas,
        values,
        derivs,
        k,
        h,
        amplitude_a,
        max_m,
        gamma_p: gamma,
        theta_p,
        samples_per_cell,
        slope_start: -amplitude_a * gamma,
        slope_end,
        arc_drift: positive.max_drift,
    })
}

/// All planar homogeneous solutions at fixed `p`, one per admissible `k`.
#[derive(Debug, Clone)]
pub struct ClassificationReport {
    pub params: Parameters,
    pub gamma_p: f64,
    pub profiles: Vec<AngularProfile>,
    pub residual_max: f64,
}

#[derive(Debug, Serialize)]
struct ReportJson {
    p: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    q: Option<f64>,
    lambda_plus: f64,
    gamma_p: f64,
    ks: Vec<u32>,
    zeros: Vec<usize>,
    h: Vec<f64>,
    residual_max: f64,
    max_m: Vec<f64>,
    amplitude_a: Vec<f64>,
    hamiltonian_drift: Vec<f64>,
}

impl ClassificationReport {
    pub fn ks(&self) -> Vec<u32> {
        self.profiles.iter().map(|p| p.k).collect()
    }

    pub fn to_json(&self) -> serde_json::Value {
        let body = ReportJson {
            p: self.params.p(),
            q: self.params.q(),
            lambda_plus: self.params.lambda_plus(),
            gamma_p: self.gamma_p,
            ks: self.ks(),
            zeros: self.profiles.iter().map(|p| p.zero_count()).collect(),
            h: self.profiles.iter().map(|p| p.h).collect(),
            residual_max: self.residual_max,
            max_m: self.profiles.iter().map(|p| p.max_m).collect(),
            amplitude_a: self.profiles.iter().map(|p| p.amplitude_a).collect(),
            hamiltonian_drift: self
                .profiles
                .iter()
                .map(|p| p.hamiltonian_drift(&self.params))
                .collect(),
        };
        serde_json::to_value(body).expect("report is plain data")
    }
}

pub fn classify(params: &Parameters) -> Result<ClassificationReport> {
    classify_with(params, DEFAULT_SAMPLES_PER_CELL)
}

/// Classification with a chosen cell resolution; the `k` values are solved in parallel.
pub fn classify_with(params: &Parameters, samples_per_cell: usize) -> Result<ClassificationReport> {
    let ks = crate::model::admissible_wave_numbers(params);
    let profiles = ks
        .par_iter()
        .map(|&k| build_profile_with(k, params, samples_per_cell))
        .collect::<Result<Vec<_>>>()?;
    let residual_max = profiles
        .iter()
        .map(|p| ode_residual(p, params))
        .fold(0.0, f64::max);
    Ok(ClassificationReport {
        params: *params,
        gamma_p: gamma_of(params.p()),
        profiles,
        residual_max,
    })
}

/// Largest `|-φ'' - γₚ²φ - λ₊(φ⁺)^{p-1}|` over interior samples, with `φ''`
/// from the fourth-order centred second difference
/// `(-φ₋₂ + 16φ₋₁ - 30φ₀ + 16φ₁ - φ₂)/(12δ²)` on the uniform samples.
/// Samples whose stencil meets a sign change are skipped, since `(φ⁺)^{p-1}`
/// is only Hölder there.
pub fn ode_residual(profile: &AngularProfile, params: &Parameters) -> f64 {
    let gamma = gamma_of(params.p());
    let (t, v) = (&profile.thetas, &profile.values);
    if v.len() < 5 {
        return 0.0;
    }
    let mut worst: f64 = 0.0;
    for i in 2..v.len() - 2 {
        let stencil = &v[i - 2..=i + 2];
        let positive = stencil.iter().all(|&x| x > 0.0);
        let negative = stencil.iter().all(|&x| x < 0.0);
        let zero = stencil.iter().all(|&x| x == 0.0);
        if !(positive || negative || zero) {
            continue;
        }
        let d = 0.25 * (t[i + 2] - t[i - 2]);
        let second = (-stencil[0] + 16.0 * stencil[1] - 30.0 * stencil[2] + 16.0 * stencil[3] - stencil[4])
            / (12.0 * d * d);
        let b = stencil[2];
        let r = -second - gamma * gamma * b - params.lambda_plus() * positive_power(b, params.p() - 1.0);
        worst = worst.max(r.abs());
    }
    worst
}

/// Samples `r^{γₚ} φ(θ)` at every node of `grid`; the origin gets 0.
pub fn extend_to_plane(profile: &AngularProfile, grid: &Arc<DiskGrid>) -> GridField {
    GridField::from_fn(grid, |x, y| {
        let r = x.hypot(y);
        if r == 0.0 {
            return 0.0;
        }
        r.powf(profile.gamma_p) * profile.eval(y.atan2(x)).0
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn params(p: f64) -> Parameters {
        Parameters::one_phase(p, 1.0).unwrap()
    }

    #[test]
    fn hamiltonian_examples() {
        let pr = params(1.5);
        let h: f64 = 0.37;
        assert!((hamiltonian_level(0.0, (2.0 * h).sqrt(), &pr) - h).abs() < 1e-15);
        let m: f64 = 0.8;
        let expected = 16.0 * m * m / 2.0 + m.powf(1.5) / 1.5;
        assert!((hamiltonian_level(m, 0.0, &pr) - expected).abs() < 1e-14);
        assert!((hamiltonian_level(-0.5, 0.0, &pr) - 16.0 * 0.25 / 2.0).abs() < 1e-15);
    }

    #[test]
    fn profile_structure_p12_k4() {
        let pr = params(1.2);
        let prof = build_profile(4, &pr).unwrap();
        assert_eq!(prof.zero_count(), 8);
        let theta_p = 2.0 * PI / 5.0;
        for len in prof.negative_arc_lengths() {
            assert!((len - theta_p).abs() < 1e-7, "{len}");
        }
        assert!((prof.slope_end - prof.slope_start).abs() < 1e-6 * (2.0 * prof.h).sqrt());
        assert!(prof.hamiltonian_drift(&pr) < 1e-8);
        // negative arc only vanishes at 0 and θₚ
        let zeros = prof.zeros();
        assert!(zeros[0].abs() < 1e-12);
        assert!((zeros[1] - theta_p).abs() < 1e-7);
    }

    #[test]
    fn not_admissible() {
        let pr = params(1.5);
        assert!(matches!(build_profile(4, &pr), Err(Error::NotAdmissible { .. })));
        assert!(matches!(build_profile(8, &pr), Err(Error::NotAdmissible { .. })));
    }

    #[test]
    fn classification_counts() {
        let r = classify(&params(1.5)).unwrap();
        assert_eq!(r.ks(), vec![5, 6, 7]);
        let zeros: Vec<_> = r.profiles.iter().map(|p| p.zero_count()).collect();
        assert_eq!(zeros, vec![10, 12, 14]);
        let r = classify(&params(1.2)).unwrap();
        assert_eq!(r.ks(), vec![3, 4]);
        let r = classify(&params(1.0)).unwrap();
        assert_eq!(r.ks(), vec![3]);
        assert_eq!(r.profiles[0].zero_count(), 6);
        assert!((r.profiles[0].h - 1.0 / 24.0).abs() < 1e-14);
        let json = r.to_json();
        assert_eq!(json["ks"], serde_json::json!([3]));
        assert!(json.get("q").is_none());
    }

    #[test]
    fn residual_of_pure_sine_and_zero() {
        let pr = params(1.5).without_potential();
        let gamma = 4.0;
        let n = 4096 * 6;
        let thetas: Vec<f64> = (0..=n).map(|i| 2.0 * PI * i as f64 / n as f64).collect();
        let values: Vec<f64> = thetas.iter().map(|t| -(gamma * t).sin()).collect();
        let derivs: Vec<f64> = thetas.iter().map(|t| -gamma * (gamma * t).cos()).collect();
        let prof = AngularProfile::from_samples(thetas.clone(), values, derivs, 6, gamma).unwrap();
        let res = ode_residual(&prof, &pr);
        assert!(res < 1e-8 * gamma * gamma, "{res}");
        let zero = AngularProfile::from_samples(thetas, vec![0.0; n + 1], vec![0.0; n + 1], 6, gamma).unwrap();
        assert_eq!(ode_residual(&zero, &params(1.5)), 0.0);
    }

    #[test]
    fn residual_decreases_under_refinement() {
        // the residual is dominated by the Hölder behaviour next to the
        // zeros and decays like the square root of the sample spacing
        let pr = params(1.5);
        let coarse = build_profile_with(6, &pr, 1024).unwrap();
        let fine = build_profile_with(6, &pr, 4096).unwrap();
        let (rc, rf) = (ode_residual(&coarse, &pr), ode_residual(&fine, &pr));
        assert!(rf < 0.6 * rc, "{rc:e} -> {rf:e}");
        let scale = 16.0 * fine.max_m;
        assert!(rf < 1e-3 * scale, "{rf:e}");
    }

    #[test]
    fn extension_vanishes_on_nodal_rays() {
        let pr = params(1.5);
        let prof = build_profile(6, &pr).unwrap();
        let grid = DiskGrid::unit(65).unwrap();
        let u = extend_to_plane(&prof, &grid);
        assert_eq!(u.at_origin(), 0.0);
        let scale = prof.amplitude_a;
        for z in prof.zeros() {
            for i in 1..10 {
                let r = 0.1 * i as f64;
                let v = r.powf(4.0) * prof.eval(z).0;
                assert!(v.abs() < 1e-10 * scale);
            }
        }
        assert!(u.sup_norm() > 0.0);
    }

    #[test]
    fn csv_columns() {
        let prof = build_profile_with(3, &params(1.0), 16).unwrap();
        let mut out = Vec::new();
        prof.write_csv(&mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert!(text.starts_with("theta,phi,dphi\n"));
        assert_eq!(text.lines().count(), 3 * 16 + 2);
    }
}
