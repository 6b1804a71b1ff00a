//! Adiabatic transport of free zero modes: ∂-derivatives of the metric, the
//! connection A = g⁻¹∂g, parallel transport along control paths, holonomy
//! and curvature.

mod connection;
mod curvature;
mod derivative;
mod holonomy;
pub mod ode;
mod path;

pub use connection::{confined_connection, connection, connection_along, pure_gauge_connection, Connection};
pub use curvature::{
    curvature_abelian, curvature_flux_annulus, curvature_grid, curvature_nonabelian, curvature_nonabelian_norm,
    CurvatureOptions,
};
pub use derivative::{d_metric, d_metric_directional, Derivative, DerivativeOptions};
pub use holonomy::{holonomy, parallel_transport, HolonomyResult, TransportOptions, TransportResult};
pub use ode::StepStats;
pub use path::{ControlPath, Profile, Segment};

use thiserror::Error;

use crate::config::ConfigError;
use crate::metric::MetricError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TransportError {
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("finite-difference error estimate {error:e} exceeds the budget {budget:e}")]
    StepTooLarge { error: f64, budget: f64 },
    #[error("metric condition number {0:e} exceeds 1e12")]
    IllConditionedMetric(f64),
    #[error("fluxons {a} and {b} came within {distance:e} (guard {guard:e}) on segment {segment}")]
    CollisionGuardTripped { a: usize, b: usize, distance: f64, guard: f64, segment: usize },
    #[error("step size underflow at s = {s} on segment {segment}")]
    OdeStepUnderflow { segment: usize, s: f64 },
    #[error("step budget exhausted at s = {s} on segment {segment}")]
    OdeTooManySteps { segment: usize, s: f64 },
    #[error("holonomy needs a closed path")]
    ClosedPathRequired,
    #[error("invalid path: {0}")]
    InvalidPath(String),
    #[error("path starts at a different configuration than the one given")]
    PathStartMismatch,
    #[error("operation needs D_f = 1, found {0}")]
    NotAbelian(usize),
    #[error("operation needs D_f = N − 1 (found D_f = {d_f}, N = {n})")]
    NotMaximalFreeModes { d_f: usize, n: usize },
    #[error("fluxon {0} carries no confined mode")]
    NotConfined(usize),
}

impl TransportError {
    /// Whether the failure is numerical (as opposed to bad input).
    pub fn is_convergence(&self) -> bool {
        match self {
            TransportError::Metric(m) => m.is_convergence(),
            TransportError::StepTooLarge { .. }
            | TransportError::IllConditionedMetric(_)
            | TransportError::OdeStepUnderflow { .. }
            | TransportError::OdeTooManySteps { .. } => true,
            _ => false,
        }
    }
}
