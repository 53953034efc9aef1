//! The experiment pipelines behind each subcommand.

use std::f64::consts::PI;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use nodalab::circle_ode::{build_profile_with, classify_with, extend_to_plane};
use nodalab::disk_solver::{construct_degenerate, minimize_with_trace, pde_residual, SymmetryGroup};
use nodalab::nodal_metrics::{
    blowup_sequence, boundary_mass, corrected_weiss, default_thresholds, degeneracy_report, dyadic_radii,
    radial_trace, singular_set, vanishing_order, weiss_derivative_identity, BlowupMode, RadialTrace,
    ReferenceGrid,
};
use nodalab::{exponents, BoundaryTrace, DiskGrid, GridField};
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::battery::competitor_battery;
use crate::config::{Command, ExperimentConfig, FieldSpec, TraceSpec};
use crate::error::CliError;

/// One output file as listed in the manifest.
#[derive(Debug, Clone, Serialize)]
pub struct FileEntry {
    /// Path relative to the output directory.
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub versions: Value,
    pub command: &'static str,
    pub config: ExperimentConfig,
    pub seed: u64,
    pub runtime_ms: Value,
    pub results: Value,
    pub files: Vec<FileEntry>,
}

pub const MANIFEST: &str = "manifest.json";
pub const ERROR_RECORD: &str = "error.json";

/// Collects the files written into the output directory.
struct Outputs {
    dir: PathBuf,
    files: Vec<FileEntry>,
}

impl Outputs {
    fn new(dir: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        Ok(Outputs {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    fn write(
        &mut self,
        name: &str,
        body: impl FnOnce(&mut BufWriter<File>) -> Result<(), CliError>,
    ) -> Result<PathBuf, CliError> {
        let path = self.dir.join(name);
        let file = File::create(&path).map_err(|e| CliError::io(&path, e))?;
        let mut writer = BufWriter::new(file);
        body(&mut writer)?;
        writer.flush().map_err(|e| CliError::io(&path, e))?;
        drop(writer);
        self.files.push(file_entry(&self.dir, name)?);
        Ok(path)
    }

    fn json(&mut self, name: &str, value: &impl Serialize) -> Result<PathBuf, CliError> {
        self.write(name, |w| {
            serde_json::to_writer_pretty(&mut *w, value)?;
            w.write_all(b"\n").map_err(|e| CliError::io(Path::new(name), e))
        })
    }

    fn field(&mut self, stem: &str, u: &GridField) -> Result<(), CliError> {
        self.write(&format!("{stem}.csv"), |w| Ok(u.write_csv(w)?))?;
        self.write(&format!("{stem}.bin"), |w| Ok(u.write_binary(w)?))?;
        Ok(())
    }
}

fn file_entry(dir: &Path, name: &str) -> Result<FileEntry, CliError> {
    let path = dir.join(name);
    let bytes = fs::read(&path).map_err(|e| CliError::io(&path, e))?;
    Ok(FileEntry {
        path: name.to_string(),
        sha256: sha256_hex(&bytes),
        bytes: bytes.len() as u64,
    })
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Write a radial trace as plot-ready CSV; the header names `γ` and `t`.
/// The output depends only on the trace, so identical inputs give identical
/// bytes.
pub fn emit_plot_data(trace: &RadialTrace, path: &Path) -> Result<(), CliError> {
    if trace.is_empty() {
        return Err(nodalab::Error::EmptyTrace.into());
    }
    let file = File::create(path).map_err(|e| CliError::io(path, e))?;
    let mut writer = BufWriter::new(file);
    trace.write_csv(&mut writer)?;
    writer.flush().map_err(|e| CliError::io(path, e))
}

/// Run the configured pipeline, writing all outputs and `manifest.json`.
pub fn run(config: &ExperimentConfig) -> Result<Manifest, CliError> {
    let start = Instant::now();
    let mut out = Outputs::new(&config.out)?;
    // A stale failure record from an earlier run would contradict this one.
    let stale = config.out.join(ERROR_RECORD);
    if stale.exists() {
        fs::remove_file(&stale).map_err(|e| CliError::io(&stale, e))?;
    }
    let results = match config.command {
        Command::Classify => classify_cmd(config, &mut out)?,
        Command::Solve => solve_cmd(config, &mut out)?,
        Command::Degenerate => degenerate_cmd(config, &mut out)?,
        Command::Weiss => weiss_cmd(config, &mut out)?,
        Command::Blowup => blowup_cmd(config, &mut out)?,
        Command::Order => order_cmd(config, &mut out)?,
        Command::Singular => singular_cmd(config, &mut out)?,
    };
    let manifest = Manifest {
        tool: "nodalab",
        versions: json!({
            "nodalab-cli": env!("CARGO_PKG_VERSION"),
            "nodalab": nodalab::VERSION,
        }),
        command: config.command.name(),
        config: config.clone(),
        seed: config.seed,
        runtime_ms: json!({ "total": start.elapsed().as_secs_f64() * 1e3 }),
        results,
        files: out.files.clone(),
    };
    let path = config.out.join(MANIFEST);
    let text = serde_json::to_string_pretty(&manifest)? + "\n";
    fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
    Ok(manifest)
}

/// Write the failure record for `err` into `dir` (best effort) and return it
/// as JSON text.
pub fn write_error_record(dir: Option<&Path>, command: Option<&str>, err: &CliError) -> String {
    let text = serde_json::to_string_pretty(&err.record(command)).unwrap_or_else(|_| err.to_string());
    if let Some(dir) = dir {
        if fs::create_dir_all(dir).is_ok() {
            let _ = fs::write(dir.join(ERROR_RECORD), format!("{text}\n"));
        }
    }
    text
}

fn grid_of(config: &ExperimentConfig) -> Result<Arc<DiskGrid>, CliError> {
    Ok(DiskGrid::unit(config.n)?)
}

fn harmonic(m: u32) -> impl Fn(f64, f64) -> f64 {
    move |x: f64, y: f64| {
        let mf = m as f64;
        x.hypot(y).powf(mf) * (mf * y.atan2(x)).cos()
    }
}

/// Boundary trace for the configured preset, and the symmetry order it has.
pub fn build_trace(config: &ExperimentConfig, grid: &Arc<DiskGrid>) -> Result<(BoundaryTrace, Option<u32>), CliError> {
    match &config.trace {
        TraceSpec::Harmonic { m } => Ok((BoundaryTrace::from_fn(grid, harmonic(*m)), (*m > 0).then_some(*m))),
        TraceSpec::Homogeneous { k } => {
            let profile = build_profile_with(*k, &config.params, config.samples)?;
            Ok((BoundaryTrace::from_fn(grid, |x, y| profile.eval(y.atan2(x)).0), Some(*k)))
        }
        TraceSpec::Csv { path } => {
            let samples = read_angular_csv(path)?;
            Ok((BoundaryTrace::from_fn(grid, |x, y| periodic_lerp(&samples, y.atan2(x))), None))
        }
    }
}

/// `(theta, value)` pairs from the first two columns of a headed CSV,
/// sorted by angle reduced to `[0, 2π)`.
fn read_angular_csv(path: &Path) -> Result<Vec<(f64, f64)>, CliError> {
    let mut reader = csv::Reader::from_path(path)
        .map_err(|e| CliError::Config(format!("cannot read trace {}: {e}", path.display())))?;
    let mut samples = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| CliError::Config(format!("trace {}: {e}", path.display())))?;
        let field = |i: usize| -> Result<f64, CliError> {
            record
                .get(i)
                .and_then(|s| s.trim().parse::<f64>().ok())
                .filter(|v| v.is_finite())
                .ok_or_else(|| CliError::Config(format!("trace {}: bad number on row {}", path.display(), line + 2)))
        };
        samples.push((field(0)?.rem_euclid(2.0 * PI), field(1)?));
    }
    if samples.len() < 2 {
        return Err(CliError::Config(format!("trace {} needs at least two rows", path.display())));
    }
    samples.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(samples)
}

fn periodic_lerp(samples: &[(f64, f64)], theta: f64) -> f64 {
    let t = theta.rem_euclid(2.0 * PI);
    let pos = samples.partition_point(|s| s.0 <= t);
    let (a, b) = match pos {
        0 => {
            let last = samples[samples.len() - 1];
            ((last.0 - 2.0 * PI, last.1), samples[0])
        }
        p if p == samples.len() => {
            let first = samples[0];
            (samples[p - 1], (first.0 + 2.0 * PI, first.1))
        }
        p => (samples[p - 1], samples[p]),
    };
    if b.0 == a.0 {
        return a.1;
    }
    a.1 + (b.1 - a.1) * (t - a.0) / (b.0 - a.0)
}

/// The field analysed by weiss/blowup/order/singular, with a summary of how
/// it was obtained.
fn build_field(config: &ExperimentConfig) -> Result<(GridField, Value), CliError> {
    match &config.field {
        FieldSpec::Solve => {
            let grid = grid_of(config)?;
            let (g, _) = build_trace(config, &grid)?;
            let rep = minimize_with_trace(&g, &config.params, &grid, &config.solve)?;
            let info = json!({
                "source": "solve",
                "iterations": rep.iterations,
                "converged": rep.converged,
                "residual": rep.residual,
            });
            Ok((rep.field, info))
        }
        FieldSpec::Degenerate => {
            let grid = grid_of(config)?;
            let k = config.k.expect("validated");
            let sol = construct_degenerate(k, &config.params, &grid, &config.solve)?;
            let info = json!({ "source": "degenerate", "k": k, "kappa": sol.kappa, "iterations": sol.iterations });
            Ok((sol.field, info))
        }
        FieldSpec::Harmonic { m } => {
            let grid = grid_of(config)?;
            Ok((GridField::from_fn(&grid, harmonic(*m)), json!({ "source": "harmonic", "m": m })))
        }
        FieldSpec::Homogeneous { k } => {
            let grid = grid_of(config)?;
            let profile = build_profile_with(*k, &config.params, config.samples)?;
            let info = json!({ "source": "homogeneous", "k": k, "h": profile.h });
            Ok((extend_to_plane(&profile, &grid), info))
        }
        FieldSpec::Bin { path } => {
            let u = GridField::load_binary(path)?;
            Ok((u, json!({ "source": "bin", "path": path })))
        }
    }
}

fn center(config: &ExperimentConfig) -> (f64, f64) {
    (config.center[0], config.center[1])
}

fn radii(config: &ExperimentConfig) -> Vec<f64> {
    let mut r = config.radii.clone().expect("validated");
    r.sort_by(f64::total_cmp);
    r
}

fn classify_cmd(config: &ExperimentConfig, out: &mut Outputs) -> Result<Value, CliError> {
    let report = classify_with(&config.params, config.samples)?;
    let body = report.to_json();
    out.json("classification.json", &body)?;
    for profile in &report.profiles {
        out.write(&format!("profile_k{}.csv", profile.k), |w| Ok(profile.write_csv(w)?))?;
    }
    Ok(body)
}

fn solve_cmd(config: &ExperimentConfig, out: &mut Outputs) -> Result<Value, CliError> {
    let grid = grid_of(config)?;
    let (g, symmetry) = build_trace(config, &grid)?;
    let rep = minimize_with_trace(&g, &config.params, &grid, &config.solve)?;
    let battery = competitor_battery(&rep.field, &g, &config.params, symmetry, config.seed)?;
    out.field("field", &rep.field)?;
    out.write("energies.csv", |w| {
        let mut csv = csv::Writer::from_writer(w);
        csv.write_record(["iteration", "energy"]).map_err(nodalab::Error::from)?;
        for (i, e) in rep.energies.iter().enumerate() {
            csv.write_record([i.to_string(), e.to_string()]).map_err(nodalab::Error::from)?;
        }
        csv.flush().map_err(|e| CliError::io(Path::new("energies.csv"), e))
    })?;
    let body = json!({
        "iterations": rep.iterations,
        "converged": rep.converged,
        "grad_norm": rep.grad_norm,
        "residual": rep.residual,
        "rejected_steps": rep.rejected_steps,
        "energy": rep.energies.last().copied(),
        "options": config.solve,
        "battery": battery,
    });
    out.json("solve.json", &body)?;
    Ok(body)
}

fn degenerate_cmd(config: &ExperimentConfig, out: &mut Outputs) -> Result<Value, CliError> {
    let grid = grid_of(config)?;
    let k = config.k.expect("validated");
    let sol = construct_degenerate(k, &config.params, &grid, &config.solve)?;
    let group = SymmetryGroup::new(k)?;
    out.field("field", &sol.field)?;
    let body = json!({
        "k": k,
        "kappa": sol.kappa,
        "u_origin": sol.field.at_origin(),
        "iterations": sol.iterations,
        "last_change": sol.last_change,
        "pde_residual": pde_residual(&sol.field, &config.params),
        "symmetry_residual_grid_exact": group.grid_exact_residual(&sol.field),
        "symmetry_residual_interpolated": group.residual(&sol.field),
        "options": config.solve,
    });
    out.json("degenerate.json", &body)?;
    Ok(body)
}

fn weiss_cmd(config: &ExperimentConfig, out: &mut Outputs) -> Result<Value, CliError> {
    let (u, source) = build_field(config)?;
    let params = &config.params;
    let gamma = config.gamma.unwrap_or(exponents(params).gamma_p);
    let radii = radii(config);
    let trace = radial_trace(&u, center(config), &radii, gamma, config.t, params)?;
    let path = out.dir.join("weiss.csv");
    emit_plot_data(&trace, &path)?;
    out.files.push(file_entry(&out.dir, "weiss.csv")?);
    let mut identities = Vec::new();
    for &r in &radii {
        match weiss_derivative_identity(&u, center(config), r, gamma, config.t, params) {
            Ok(id) => identities.push(id),
            // radii too close to the centre or the boundary for the
            // centred difference are left out of the identity table
            Err(nodalab::Error::BallOutsideDomain { .. }) => {}
            Err(e) => return Err(e.into()),
        }
    }
    out.write("identity.csv", |w| {
        let mut csv = csv::Writer::from_writer(w);
        let e = |e: csv::Error| CliError::from(nodalab::Error::from(e));
        csv.write_record(["r", "lhs", "rhs", "term1", "term2", "term3", "term4", "mismatch"]).map_err(e)?;
        for id in &identities {
            let mut row = vec![id.r.to_string(), id.lhs.to_string(), id.rhs.to_string()];
            row.extend(id.terms.iter().map(|t| t.to_string()));
            row.push(id.mismatch.to_string());
            csv.write_record(&row).map_err(e)?;
        }
        csv.flush().map_err(|err| CliError::io(Path::new("identity.csv"), err))
    })?;
    let mut body = json!({
        "field": source,
        "gamma": gamma,
        "t": config.t,
        "relative_spread": trace.relative_spread(),
        "w_non_decreasing": trace.w.windows(2).all(|w| w[1] >= w[0]),
        "identity_max_mismatch": identities.iter().map(|i| i.mismatch).fold(0.0, f64::max),
    });
    if let Some(eps) = config.epsilon {
        let corrected = corrected_weiss(&u, center(config), &radii, params, eps)?;
        let path = out.dir.join("weiss_corrected.csv");
        emit_plot_data(&corrected, &path)?;
        out.files.push(file_entry(&out.dir, "weiss_corrected.csv")?);
        body["correction_constant"] = json!(corrected.correction_constant);
        body["correction_exponent"] = json!(corrected.correction_exponent);
    }
    out.json("weiss.json", &body)?;
    Ok(body)
}

fn blowup_cmd(config: &ExperimentConfig, out: &mut Outputs) -> Result<Value, CliError> {
    let (u, source) = build_field(config)?;
    let reference = match config.ref_n {
        Some(n) => ReferenceGrid::Fixed { n },
        None => ReferenceGrid::Matched,
    };
    let seq = blowup_sequence(&u, center(config), &radii(config), config.mode, &config.params, reference)?;
    let mut masses = Vec::new();
    for (i, field) in seq.fields.iter().enumerate() {
        out.field(&format!("blowup_{i}"), field)?;
        masses.push(boundary_mass(field, (0.0, 0.0), 1.0)?);
    }
    let body = json!({
        "field": source,
        "mode": seq.mode,
        "reference": reference,
        "radii": seq.radii,
        "h_r": seq.h_r,
        "unit_circle_mass": masses,
        "normalized": config.mode == BlowupMode::Normalized,
    });
    out.json("blowup.json", &body)?;
    Ok(body)
}

fn order_cmd(config: &ExperimentConfig, out: &mut Outputs) -> Result<Value, CliError> {
    let (u, source) = build_field(config)?;
    let radii = radii(config);
    let (r_min, r_max) = (radii[0], radii[radii.len() - 1]);
    let estimate = vanishing_order(&u, center(config), r_min, r_max)?;
    let gamma = config.gamma.unwrap_or(exponents(&config.params).gamma_p);
    let degeneracy = degeneracy_report(&u, center(config), &dyadic_radii(r_min, r_max), gamma, estimate.order)?;
    let n = config.params.n() as f64;
    out.write("order.csv", |w| {
        let mut csv = csv::Writer::from_writer(w);
        let e = |e: csv::Error| CliError::from(nodalab::Error::from(e));
        csv.write_record(["r".to_string(), "H".to_string(), format!("H_over_r^(n-1+2*{gamma})")])
            .map_err(e)?;
        for (r, h) in estimate.radii.iter().zip(&estimate.masses) {
            let trend = h / r.powf(n - 1.0 + 2.0 * gamma);
            csv.write_record([r.to_string(), h.to_string(), trend.to_string()]).map_err(e)?;
        }
        csv.flush().map_err(|err| CliError::io(Path::new("order.csv"), err))
    })?;
    let body = json!({ "field": source, "estimate": estimate, "degeneracy": degeneracy });
    out.json("order.json", &body)?;
    Ok(body)
}

fn singular_cmd(config: &ExperimentConfig, out: &mut Outputs) -> Result<Value, CliError> {
    let (u, source) = build_field(config)?;
    let gamma = config.gamma.unwrap_or(exponents(&config.params).gamma_p);
    let (du, dg) = default_thresholds(u.grid().spacing(), gamma);
    let (eps_u, eps_grad) = (config.eps_u.unwrap_or(du), config.eps_grad.unwrap_or(dg));
    let set = singular_set(&u, eps_u, eps_grad);
    out.write("singular.csv", |w| Ok(set.write_csv(w)?))?;
    let body = json!({
        "field": source,
        "eps_u": eps_u,
        "eps_grad": eps_grad,
        "singular": set.singular().count(),
        "regular": set.regular().count(),
    });
    out.json("singular.json", &body)?;
    Ok(body)
}

#[cfg(test)]
mod tests {
    use std::process::ExitCode;

    use super::*;
    use crate::main_from_args;

    fn call(args: &[&str]) -> ExitCode {
        main_from_args(std::iter::once("nodalab").chain(args.iter().copied()))
    }

    fn read_json(path: &Path) -> Value {
        serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
    }

    fn out_arg(dir: &Path) -> String {
        dir.to_str().unwrap().to_string()
    }

    #[test]
    fn classify_writes_report_and_hashed_manifest() {
        let dir = tempfile::tempdir().unwrap();
        let out = out_arg(dir.path());
        assert_eq!(call(&["classify", "--p", "1.5", "--lambda-plus", "1", "--out", &out]), ExitCode::SUCCESS);
        let report = read_json(&dir.path().join("classification.json"));
        assert_eq!(report["ks"], json!([5, 6, 7]));
        let manifest = read_json(&dir.path().join(MANIFEST));
        assert_eq!(manifest["command"], "classify");
        assert_eq!(manifest["config"]["params"]["p"], 1.5);
        assert!(manifest["versions"]["nodalab"].is_string());
        assert!(manifest["runtime_ms"]["total"].is_number());
        let files = manifest["files"].as_array().unwrap();
        assert_eq!(files.len(), 4);
        for f in files {
            let bytes = fs::read(dir.path().join(f["path"].as_str().unwrap())).unwrap();
            assert_eq!(f["sha256"], sha256_hex(&bytes));
        }
    }

    #[test]
    fn invalid_p_is_a_config_error_with_record() {
        let dir = tempfile::tempdir().unwrap();
        let out = out_arg(dir.path());
        assert_eq!(call(&["classify", "--p", "2.0", "--out", &out]), ExitCode::from(2));
        let record = read_json(&dir.path().join(ERROR_RECORD));
        assert_eq!(record["kind"], "config-invalid");
        assert_eq!(record["module"], "model");
        assert_eq!(record["command"], "classify");
        assert!(!dir.path().join(MANIFEST).exists());
    }

    #[test]
    fn engine_errors_name_their_module() {
        let dir = tempfile::tempdir().unwrap();
        let out = out_arg(dir.path());
        let code = call(&["weiss", "--p", "1.5", "--N", "33", "--field", "harmonic:2", "--radii", "0.5:1.5:3", "--out", &out]);
        assert_eq!(code, ExitCode::from(1));
        let record = read_json(&dir.path().join(ERROR_RECORD));
        assert_eq!(record["module"], "nodal-metrics");
        assert_eq!(record["kind"], "ball-outside-domain");
        let code = call(&["degenerate", "--p", "1.5", "--k", "6", "--N", "33", "--out", &out]);
        assert_eq!(code, ExitCode::from(1));
        let record = read_json(&dir.path().join(ERROR_RECORD));
        assert_eq!(record["module"], "disk-solver");
        assert_eq!(record["kind"], "k-too-small");
    }

    #[test]
    fn degenerate_reports_kappa_and_vanishes_at_origin() {
        let dir = tempfile::tempdir().unwrap();
        let out = out_arg(dir.path());
        assert_eq!(call(&["degenerate", "--p", "1.2", "--k", "6", "--N", "65", "--out", &out]), ExitCode::SUCCESS);
        let manifest = read_json(&dir.path().join(MANIFEST));
        assert!(manifest["results"]["kappa"].is_number());
        assert_eq!(manifest["results"]["u_origin"], 0.0);
        let u = GridField::load_binary(&dir.path().join("field.bin")).unwrap();
        assert_eq!(u.at_origin(), 0.0);
        let csv = fs::read_to_string(dir.path().join("field.csv")).unwrap();
        assert!(csv.starts_with("x,y,mask,value\n"));
    }

    #[test]
    fn identical_configs_give_identical_csv_bytes() {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        for dir in [&a, &b] {
            let out = out_arg(dir.path());
            let code = call(&["solve", "--p", "1.5", "--q", "1.8", "--lambda-minus", "1", "--N", "33", "--seed", "7", "--out", &out]);
            assert_eq!(code, ExitCode::SUCCESS);
        }
        for name in ["field.csv", "energies.csv", "field.bin", "solve.json"] {
            assert_eq!(fs::read(a.path().join(name)).unwrap(), fs::read(b.path().join(name)).unwrap(), "{name}");
        }
        let manifest = read_json(&a.path().join(MANIFEST));
        assert_eq!(manifest["seed"], 7);
        assert_eq!(manifest["results"]["battery"]["minimal"], true);
    }

    #[test]
    fn config_file_is_overridden_by_flags() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("cfg.json");
        fs::write(&cfg, r#"{"p": 1.9, "lambda-plus": 2.0, "N": 33}"#).unwrap();
        let out = dir.path().join("out");
        let code = call(&["classify", "--config", cfg.to_str().unwrap(), "--p", "1.5", "--out", out.to_str().unwrap()]);
        assert_eq!(code, ExitCode::SUCCESS);
        let manifest = read_json(&out.join(MANIFEST));
        assert_eq!(manifest["config"]["params"]["p"], 1.5);
        assert_eq!(manifest["config"]["params"]["lambda_plus"], 2.0);
        assert_eq!(manifest["config"]["N"], 33);
    }

    #[test]
    fn weiss_trace_header_names_exponents() {
        let dir = tempfile::tempdir().unwrap();
        let out = out_arg(dir.path());
        let code = call(&[
            "weiss", "--p", "1.5", "--N", "257", "--field", "homogeneous:6", "--radii", "0.2:0.8:5", "--out", &out,
        ]);
        assert_eq!(code, ExitCode::SUCCESS);
        let csv = fs::read_to_string(dir.path().join("weiss.csv")).unwrap();
        assert!(csv.starts_with("r,H,D_t=2,W_gamma=4_t=2\n"), "{csv}");
        let body = read_json(&dir.path().join("weiss.json"));
        assert!(body["relative_spread"].as_f64().unwrap() < 0.01, "{body}");
    }

    #[test]
    fn emit_plot_data_rejects_empty_trace_and_is_bit_stable() {
        let dir = tempfile::tempdir().unwrap();
        let grid = DiskGrid::unit(65).unwrap();
        let params = nodalab::Parameters::one_phase(1.5, 1.0).unwrap();
        let u = GridField::from_fn(&grid, |x, y| x * y);
        let mut trace = radial_trace(&u, (0.0, 0.0), &[0.2, 0.4], 2.0, 0.0, &params).unwrap();
        let (p1, p2) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
        emit_plot_data(&trace, &p1).unwrap();
        emit_plot_data(&trace, &p2).unwrap();
        assert_eq!(fs::read(&p1).unwrap(), fs::read(&p2).unwrap());
        trace.radii.clear();
        assert!(matches!(
            emit_plot_data(&trace, &p1),
            Err(CliError::Engine(nodalab::Error::EmptyTrace))
        ));
    }

    #[test]
    fn analyzers_run_on_presets() {
        let dir = tempfile::tempdir().unwrap();
        let base = ["--p", "1.5", "--N", "65", "--field", "harmonic:3"];
        for (cmd, extra, file) in [
            ("order", vec!["--radii", "0.1:0.8:2"], "order.json"),
            ("singular", vec![], "singular.csv"),
            ("blowup", vec!["--radii", "0.1:0.3:3", "--mode", "normalized"], "blowup.json"),
        ] {
            let out = dir.path().join(cmd);
            let mut args = vec![cmd];
            args.extend(base);
            args.extend(extra);
            args.extend(["--out", out.to_str().unwrap()]);
            assert_eq!(call(&args), ExitCode::SUCCESS, "{cmd}");
            assert!(out.join(file).exists());
        }
        let order = read_json(&dir.path().join("order/order.json"));
        assert!((order["estimate"]["order"].as_f64().unwrap() - 3.0).abs() < 0.05);
        let blow = read_json(&dir.path().join("blowup/blowup.json"));
        for m in blow["unit_circle_mass"].as_array().unwrap() {
            assert!((m.as_f64().unwrap() - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn csv_trace_round_trips_a_profile() {
        let dir = tempfile::tempdir().unwrap();
        let trace = dir.path().join("trace.csv");
        fs::write(&trace, "theta,value\n0,1\n1.5707963267948966,0\n3.141592653589793,-1\n4.71238898038469,0\n").unwrap();
        let out = dir.path().join("out");
        let code = call(&[
            "solve", "--p", "1.5", "--N", "33",
            "--trace", &format!("csv:{}", trace.display()), "--out", out.to_str().unwrap(),
        ]);
        assert_eq!(code, ExitCode::SUCCESS);
        assert_eq!(periodic_lerp(&[(0.0, 1.0), (PI, -1.0)], 1.5 * PI), 0.0);
    }
}
