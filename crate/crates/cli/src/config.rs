//! Experiment configuration: command-line flags merged over an optional JSON
//! file, then resolved and validated into an [`ExperimentConfig`].

use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nodalab::disk_solver::SolveOptions;
use nodalab::nodal_metrics::BlowupMode;
use nodalab::Parameters;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "nodalab", version, about = "Free-boundary numerical laboratory")]
pub struct Cli {
    #[command(subcommand)]
    pub command: CommandLine,
}

#[derive(Debug, Subcommand)]
pub enum CommandLine {
    /// Classify the planar homogeneous solutions (angular profiles).
    Classify(Settings),
    /// Minimize the energy with a prescribed boundary trace.
    Solve(Settings),
    /// Build a symmetric solution vanishing at the origin from r^k cos(kθ).
    Degenerate(Settings),
    /// Boundary mass, Dirichlet term and Weiss functional along radii.
    Weiss(Settings),
    /// Natural or normalized blow-ups at a centre.
    Blowup(Settings),
    /// Vanishing-order estimate and degeneracy proxy at a centre.
    Order(Settings),
    /// Nodal points with small gradient.
    Singular(Settings),
}

impl CommandLine {
    pub fn split(self) -> (Command, Settings) {
        match self {
            CommandLine::Classify(s) => (Command::Classify, s),
            CommandLine::Solve(s) => (Command::Solve, s),
            CommandLine::Degenerate(s) => (Command::Degenerate, s),
            CommandLine::Weiss(s) => (Command::Weiss, s),
            CommandLine::Blowup(s) => (Command::Blowup, s),
            CommandLine::Order(s) => (Command::Order, s),
            CommandLine::Singular(s) => (Command::Singular, s),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Classify,
    Solve,
    Degenerate,
    Weiss,
    Blowup,
    Order,
    Singular,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Classify => "classify",
            Command::Solve => "solve",
            Command::Degenerate => "degenerate",
            Command::Weiss => "weiss",
            Command::Blowup => "blowup",
            Command::Order => "order",
            Command::Singular => "singular",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum ModeArg {
    Natural,
    Normalized,
}

impl From<ModeArg> for BlowupMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Natural => BlowupMode::Natural,
            ModeArg::Normalized => BlowupMode::Normalized,
        }
    }
}

/// A point given as `x,y` on the command line or `[x, y]` / `"x,y"` in JSON.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PointRepr", into = "[f64; 2]")]
pub struct PointArg(pub f64, pub f64);

#[derive(Deserialize)]
#[serde(untagged)]
enum PointRepr {
    Pair([f64; 2]),
    Text(String),
}

impl TryFrom<PointRepr> for PointArg {
    type Error = String;

    fn try_from(r: PointRepr) -> Result<Self, String> {
        match r {
            PointRepr::Pair([x, y]) => Ok(PointArg(x, y)),
            PointRepr::Text(s) => s.parse(),
        }
    }
}

impl From<PointArg> for [f64; 2] {
    fn from(p: PointArg) -> Self {
        [p.0, p.1]
    }
}

impl FromStr for PointArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != 2 {
            return Err(format!("expected `x,y`, got `{s}`"));
        }
        let x = parts[0].parse::<f64>().map_err(|e| format!("bad x in `{s}`: {e}"))?;
        let y = parts[1].parse::<f64>().map_err(|e| format!("bad y in `{s}`: {e}"))?;
        Ok(PointArg(x, y))
    }
}

/// Log-spaced radii `r1:r2:count` (both ends included).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct RadiiArg {
    pub first: f64,
    pub last: f64,
    pub count: usize,
}

impl RadiiArg {
    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.first];
        }
        let (a, b) = (self.first.ln(), self.last.ln());
        (0..self.count)
            .map(|i| {
                if i == 0 {
                    self.first
                } else if i + 1 == self.count {
                    self.last
                } else {
                    (a + (b - a) * i as f64 / (self.count - 1) as f64).exp()
                }
            })
            .collect()
    }
}

impl FromStr for RadiiArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(format!("expected `r1:r2:count`, got `{s}`"));
        }
        let first = parts[0].parse::<f64>().map_err(|e| format!("bad r1 in `{s}`: {e}"))?;
        let last = parts[1].parse::<f64>().map_err(|e| format!("bad r2 in `{s}`: {e}"))?;
        let count = parts[2].parse::<usize>().map_err(|e| format!("bad count in `{s}`: {e}"))?;
        if !(first > 0.0 && last > 0.0 && first.is_finite() && last.is_finite()) || count == 0 {
            return Err(format!("radii `{s}` must be positive with a positive count"));
        }
        Ok(RadiiArg { first, last, count })
    }
}

impl TryFrom<String> for RadiiArg {
    type Error = String;

    fn try_from(s: String) -> Result<Self, String> {
        s.parse()
    }
}

impl From<RadiiArg> for String {
    fn from(r: RadiiArg) -> Self {
        format!("{}:{}:{}", r.first, r.last, r.count)
    }
}

/// Every setting, all optional. Parsed from flags and from the JSON config
/// file with identical names; flags take precedence.
#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct Settings {
    /// Sublinear exponent of the positive phase, in [1, 2).
    #[arg(long)]
    pub p: Option<f64>,
    /// Exponent of the negative phase, in [1, 2).
    #[arg(long)]
    pub q: Option<f64>,
    #[arg(long)]
    pub lambda_plus: Option<f64>,
    #[arg(long)]
    pub lambda_minus: Option<f64>,
    /// Grid nodes per axis (odd).
    #[arg(long = "N")]
    #[serde(rename = "N", alias = "n")]
    pub n: Option<usize>,
    /// Wave number.
    #[arg(long)]
    pub k: Option<u32>,
    /// Analysis centre `x,y`.
    #[arg(long)]
    pub center: Option<PointArg>,
    /// Log-spaced radii `r1:r2:count`.
    #[arg(long)]
    pub radii: Option<RadiiArg>,
    /// Scaling exponent of the Weiss functional (defaults to γₚ).
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Potential weight of the Weiss functional (defaults to 2).
    #[arg(long)]
    pub t: Option<f64>,
    /// Exponent slack of the corrected Weiss functional.
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON file with any of these settings; flags override it.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Seed of the competitor battery.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Boundary trace: `harmonic:m`, `homogeneous:k` or `csv:PATH`.
    #[arg(long)]
    pub trace: Option<String>,
    /// Field analysed by weiss/blowup/order/singular: `solve`,
    /// `degenerate`, `harmonic:m`, `homogeneous:k` or `bin:PATH`.
    #[arg(long)]
    pub field: Option<String>,
    /// Blow-up scaling.
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    /// Nodes per axis of a fixed blow-up reference grid over [-2, 2]²
    /// (default: grid matched to the source spacing).
    #[arg(long)]
    pub ref_n: Option<usize>,
    /// Nodal threshold on |u| (defaults to 10·h^{min(γ,2)}).
    #[arg(long)]
    pub eps_u: Option<f64>,
    /// Threshold on |∇u| (defaults to 10·h).
    #[arg(long)]
    pub eps_grad: Option<f64>,
    /// Angular samples per cell of a classified profile.
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub grad_tol: Option<f64>,
    #[arg(long)]
    pub max_iters: Option<usize>,
    #[arg(long)]
    pub fixed_point_tol: Option<f64>,
    #[arg(long)]
    pub relaxation: Option<f64>,
}

macro_rules! overlay {
    ($top:expr, $base:expr; $($field:ident),*) => {
        Settings { $($field: $top.$field.or($base.$field),)* }
    };
}

impl Settings {
    /// Fields set in `self` win over those of `base`.
    pub fn over(self, base: Settings) -> Settings {
        overlay!(self, base; p, q, lambda_plus, lambda_minus, n, k, center, radii, gamma, t,
            epsilon, out, config, seed, trace, field, mode, ref_n, eps_u, eps_grad, samples,
            grad_tol, max_iters, fixed_point_tol, relaxation)
    }

    pub fn load(path: &Path) -> Result<Settings, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("invalid config {}: {e}", path.display())))
    }
}

/// Where a boundary trace comes from.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TraceSpec {
    /// `r^m cos(mθ)`.
    Harmonic { m: u32 },
    /// The classified profile with wave number `k`, at `r = 1`.
    Homogeneous { k: u32 },
    /// A CSV whose first two columns are `theta, value`.
    Csv { path: PathBuf },
}

impl FromStr for TraceSpec {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        let bad = || CliError::Config(format!("unknown trace `{s}`; use harmonic:m, homogeneous:k or csv:PATH"));
        let (kind, arg) = s.split_once(':').ok_or_else(bad)?;
        match kind {
            "harmonic" => Ok(TraceSpec::Harmonic { m: arg.parse().map_err(|_| bad())? }),
            "homogeneous" => Ok(TraceSpec::Homogeneous { k: arg.parse().map_err(|_| bad())? }),
            "csv" if !arg.is_empty() => Ok(TraceSpec::Csv { path: arg.into() }),
            _ => Err(bad()),
        }
    }
}

/// Where an analysed field comes from.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum FieldSpec {
    /// The energy minimizer for the configured trace.
    Solve,
    /// The symmetric degenerate construction for the configured `k`.
    Degenerate,
    /// `Re((x + iy)^m)` sampled on the grid.
    Harmonic { m: u32 },
    /// `r^{γₚ} φ_k(θ)` sampled on the grid.
    Homogeneous { k: u32 },
    /// A binary field dump.
    Bin { path: PathBuf },
}

impl FromStr for FieldSpec {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        let bad = || {
            CliError::Config(format!(
                "unknown field `{s}`; use solve, degenerate, harmonic:m, homogeneous:k or bin:PATH"
            ))
        };
        match s.split_once(':') {
            None if s == "solve" => Ok(FieldSpec::Solve),
            None if s == "degenerate" => Ok(FieldSpec::Degenerate),
            Some(("harmonic", m)) => Ok(FieldSpec::Harmonic { m: m.parse().map_err(|_| bad())? }),
            Some(("homogeneous", k)) => Ok(FieldSpec::Homogeneous { k: k.parse().map_err(|_| bad())? }),
            Some(("bin", path)) if !path.is_empty() => Ok(FieldSpec::Bin { path: path.into() }),
            _ => Err(bad()),
        }
    }
}

/// Fully resolved configuration, echoed into the manifest.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentConfig {
    pub command: Command,
    pub params: Parameters,
    #[serde(rename = "N")]
    pub n: usize,
    pub k: Option<u32>,
    pub center: [f64; 2],
    pub radii: Option<Vec<f64>>,
    pub radii_spec: Option<String>,
    pub gamma: Option<f64>,
    pub t: f64,
    pub epsilon: Option<f64>,
    pub out: PathBuf,
    pub seed: u64,
    pub trace: TraceSpec,
    pub field: FieldSpec,
    pub mode: BlowupMode,
    pub ref_n: Option<usize>,
    pub eps_u: Option<f64>,
    pub eps_grad: Option<f64>,
    pub samples: usize,
    pub solve: SolveOptions,
}

pub const DEFAULT_N: usize = 129;
pub const DEFAULT_TRACE: &str = "harmonic:3";

impl ExperimentConfig {
    /// Merge flags over the config file (if any) and validate.
    pub fn resolve(command: Command, flags: Settings) -> Result<Self, CliError> {
        let settings = match &flags.config {
            Some(path) => {
                let file = Settings::load(path)?;
                flags.over(file)
            }
            None => flags,
        };
        Self::from_settings(command, settings)
    }

    pub fn from_settings(command: Command, s: Settings) -> Result<Self, CliError> {
        let p = s.p.ok_or_else(|| CliError::Config("missing required setting `p`".into()))?;
        let params = Parameters::new(p, s.q, s.lambda_plus.unwrap_or(1.0), s.lambda_minus.unwrap_or(0.0))
            .map_err(|e| CliError::InvalidParameters(e.to_string()))?;
        let n = s.n.unwrap_or(DEFAULT_N);
        if n < 5 || n.is_multiple_of(2) {
            return Err(CliError::Config(format!("N must be odd and at least 5, got {n}")));
        }
        let mut solve = SolveOptions::default();
        if let Some(v) = s.grad_tol {
            solve.grad_tol = v;
        }
        if let Some(v) = s.max_iters {
            solve.max_iters = v;
        }
        if let Some(v) = s.fixed_point_tol {
            solve.fixed_point_tol = v;
        }
        if let Some(v) = s.relaxation {
            solve.relaxation = v;
        }
        solve.validate().map_err(|e| CliError::Config(e.to_string()))?;
        let trace: TraceSpec = s.trace.as_deref().unwrap_or(DEFAULT_TRACE).parse()?;
        let field: FieldSpec = s.field.as_deref().unwrap_or("solve").parse()?;
        let uses_k = command == Command::Degenerate
            || (field == FieldSpec::Degenerate
                && matches!(command, Command::Weiss | Command::Blowup | Command::Order | Command::Singular));
        if uses_k && s.k.is_none() {
            return Err(CliError::Config(format!("`{}` needs --k", command.name())));
        }
        let needs_radii = matches!(command, Command::Weiss | Command::Blowup | Command::Order);
        if needs_radii && s.radii.is_none() {
            return Err(CliError::Config(format!("`{}` needs --radii r1:r2:count", command.name())));
        }
        if let Some(r) = s.ref_n {
            if r < 5 || r % 2 == 0 {
                return Err(CliError::Config(format!("ref-n must be odd and at least 5, got {r}")));
            }
        }
        let samples = s.samples.unwrap_or(nodalab::circle_ode::DEFAULT_SAMPLES_PER_CELL);
        if samples < 8 {
            return Err(CliError::Config("samples must be at least 8".into()));
        }
        Ok(ExperimentConfig {
            command,
            params,
            n,
            k: s.k,
            center: s.center.map(<[f64; 2]>::from).unwrap_or([0.0, 0.0]),
            radii: s.radii.map(|r| r.values()),
            radii_spec: s.radii.map(String::from),
            gamma: s.gamma,
            t: s.t.unwrap_or(2.0),
            epsilon: s.epsilon,
            out: s.out.unwrap_or_else(|| PathBuf::from("out")),
            seed: s.seed.unwrap_or(0),
            trace,
            field,
            mode: s.mode.unwrap_or(ModeArg::Natural).into(),
            ref_n: s.ref_n,
            eps_u: s.eps_u,
            eps_grad: s.eps_grad,
            samples,
            solve,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn radii_are_log_spaced_with_exact_ends() {
        let r: RadiiArg = "0.1:0.8:4".parse().unwrap();
        let v = r.values();
        assert_eq!(v.len(), 4);
        assert_eq!(v[0], 0.1);
        assert_eq!(v[3], 0.8);
        assert!((v[1] / v[0] - 2.0).abs() < 1e-12);
        assert!("0.1:0.8".parse::<RadiiArg>().is_err());
        assert!("-1:0.8:3".parse::<RadiiArg>().is_err());
    }

    #[test]
    fn points_parse_from_text_and_json() {
        assert_eq!("0.1, -0.2".parse::<PointArg>().unwrap(), PointArg(0.1, -0.2));
        let s: Settings = serde_json::from_str(r#"{"center": [0.5, 0.25], "N": 65}"#).unwrap();
        assert_eq!(s.center, Some(PointArg(0.5, 0.25)));
        assert_eq!(s.n, Some(65));
        let s: Settings = serde_json::from_str(r#"{"center": "1,2", "radii": "0.1:0.2:2"}"#).unwrap();
        assert_eq!(s.center, Some(PointArg(1.0, 2.0)));
        assert!(serde_json::from_str::<Settings>(r#"{"bogus": 1}"#).is_err());
    }

    #[test]
    fn flags_override_file() {
        let flags = Settings {
            p: Some(1.5),
            ..Default::default()
        };
        let file = Settings {
            p: Some(1.2),
            k: Some(6),
            ..Default::default()
        };
        let s = flags.over(file);
        assert_eq!(s.p, Some(1.5));
        assert_eq!(s.k, Some(6));
    }

    #[test]
    fn validation() {
        let base = Settings {
            p: Some(1.5),
            ..Default::default()
        };
        assert!(ExperimentConfig::from_settings(Command::Classify, base.clone()).is_ok());
        let bad_p = Settings { p: Some(2.0), ..base.clone() };
        assert!(matches!(
            ExperimentConfig::from_settings(Command::Classify, bad_p),
            Err(CliError::InvalidParameters(_))
        ));
        let even = Settings { n: Some(64), ..base.clone() };
        assert!(ExperimentConfig::from_settings(Command::Solve, even).is_err());
        assert!(ExperimentConfig::from_settings(Command::Degenerate, base.clone()).is_err());
        assert!(ExperimentConfig::from_settings(Command::Weiss, base.clone()).is_err());
        let trace = Settings { trace: Some("polar:3".into()), ..base };
        assert!(ExperimentConfig::from_settings(Command::Solve, trace).is_err());
    }
}
