use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised by the engines. Each variant belongs to exactly one module,
/// reported by [`Error::module`].
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),

    #[error("quadrature failed to reach tolerance {tolerance:e} (estimated error {estimate:e})")]
    QuadratureFailure { tolerance: f64, estimate: f64 },

    #[error("target arc length {target} outside (0, {theta_p})")]
    OutOfRange { target: f64, theta_p: f64 },

    #[error("could not bracket target arc length {target}")]
    BracketFailure { target: f64 },

    #[error("arc integration failed: {0}")]
    IntegrationFailure(String),

    #[error("wave number {k} is not admissible: need {lower} < k < {upper}")]
    NotAdmissible { k: u32, lower: f64, upper: f64 },

    #[error("wave number {k} too small: need k > 2 gamma_p = {bound}")]
    KTooSmall { k: u32, bound: f64 },

    #[error("fixed-point iteration did not converge after {iterations} iterations (last change {last_change:e}); kappa candidates {kappa_candidates:?}")]
    NoConvergence {
        iterations: usize,
        last_change: f64,
        kappa_candidates: Vec<f64>,
    },

    #[error("linear solver failed: {0}")]
    LinearSolver(String),

    #[error("ball of radius {radius} about ({}, {}) leaves the domain", center.0, center.1)]
    BallOutsideDomain { center: (f64, f64), radius: f64 },

    #[error("blow-up window of scale {radius} about ({}, {}) leaves the domain", center.0, center.1)]
    WindowOutsideDomain { center: (f64, f64), radius: f64 },

    #[error("boundary mass underflow at radius {radius}")]
    NormalizationUnderflow { radius: f64 },

    #[error("degenerate log-log fit: {0}")]
    DegenerateFit(String),

    #[error("empty radial trace")]
    EmptyTrace,

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("malformed input: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Name of the engine module that raised the error.
    pub fn module(&self) -> &'static str {
        match self {
            Error::InvalidParameters(_) => "model",
            Error::QuadratureFailure { .. }
            | Error::OutOfRange { .. }
            | Error::BracketFailure { .. }
            | Error::IntegrationFailure(_)
            | Error::NotAdmissible { .. } => "circle-ode",
            Error::KTooSmall { .. }
            | Error::NoConvergence { .. }
            | Error::LinearSolver(_)
            | Error::GridMismatch(_) => "disk-solver",
            Error::BallOutsideDomain { .. }
            | Error::WindowOutsideDomain { .. }
            | Error::NormalizationUnderflow { .. }
            | Error::DegenerateFit(_)
            | Error::EmptyTrace => "nodal-metrics",
            Error::Parse(_) | Error::Io(_) | Error::Csv(_) => "io",
        }
    }

    /// Stable machine-readable tag for the error kind.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidParameters(_) => "invalid-parameters",
            Error::QuadratureFailure { .. } => "quadrature-failure",
            Error::OutOfRange { .. } => "out-of-range",
            Error::BracketFailure { .. } => "bracket-failure",
            Error::IntegrationFailure(_) => "integration-failure",
            Error::NotAdmissible { .. } => "not-admissible",
            Error::KTooSmall { .. } => "k-too-small",
            Error::NoConvergence { .. } => "no-convergence",
            Error::LinearSolver(_) => "linear-solver",
            Error::BallOutsideDomain { .. } => "ball-outside-domain",
            Error::WindowOutsideDomain { .. } => "window-outside-domain",
            Error::NormalizationUnderflow { .. } => "normalization-underflow",
            Error::DegenerateFit(_) => "degenerate-fit",
            Error::EmptyTrace => "empty-trace",
            Error::GridMismatch(_) => "grid-mismatch",
            Error::Parse(_) => "parse",
            Error::Io(_) => "io-failure",
            Error::Csv(_) => "io-failure",
        }
    }
}
