//! Numerical laboratory for the sublinear free-boundary equation
//! `-Δu = λ₊(u⁺)^{p-1} - λ₋(u⁻)^{q-1}` in the plane.
//!
//! * [`model`]: parameters and critical exponents.
//! * [`circle_ode`]: classification of the planar homogeneous solutions.
//! * [`grid`]: disk-masked Cartesian grids and fields.
//! * [`disk_solver`]: energy minimization, Poisson solves, symmetric
//!   degenerate solutions.
//! * [`nodal_metrics`]: boundary mass, Weiss functionals, blow-ups,
//!   vanishing order and singular-set detection.

pub mod circle_ode;
pub mod disk_solver;
pub mod error;
pub mod grid;
pub mod model;
pub mod nodal_metrics;
pub mod quadrature;

pub use error::{Error, Result};
pub use grid::{BoundaryTrace, DiskGrid, GridField, GridSpec, NodeTag};
pub use model::{admissible_wave_numbers, exponents, CriticalExponents, Parameters};

/// Version of the engine crate, recorded in experiment manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
