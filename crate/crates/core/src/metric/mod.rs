//! The metric g_jk = ⟨z^j ψ₀ | z^k ψ₀⟩ on the free-mode space, computed by
//! direct 2D quadrature and through the factorization g = Ψ*GΨ.

mod bruteforce;
mod contour;
mod factorized;
mod gmatrix;

pub use bruteforce::{metric_bruteforce, metric_bruteforce_with, BruteForceOptions};
pub use contour::{psi_matrix, psi_matrix_in_direction, segment_integral, Gauge, PsiMatrix};
pub use factorized::{metric_factorized, metric_factorized_in_direction, FactorizedMetric};
pub use gmatrix::{g_matrix, g_matrix_factored, g_matrix_identical, GMatrix};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::{ConfigError, ValidatedConfig};
use crate::linalg::CMatrix;
use crate::quadrature::NotConverged;

pub const DEFAULT_FACTORIZED_TOL: f64 = 1e-8;
pub const DEFAULT_BRUTEFORCE_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricError {
    #[error("no free modes (D_f = 0)")]
    NoFreeModes,
    #[error("reduced total flux ΣΦ' = {0} is not positive; free modes are undefined")]
    FreeModesUndefined(f64),
    #[error("integral diverges: {0}")]
    DivergentIntegral(String),
    #[error("G is singular at integer total flux (Φ_T = {total})")]
    ThresholdSingularity { total: f64 },
    #[error("cannot route an integration path: {0}")]
    PathBlocked(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("quadrature did not converge (estimated error {error:e})")]
    QuadratureNotConverged { error: f64 },
}

impl From<NotConverged> for MetricError {
    fn from(e: NotConverged) -> Self {
        MetricError::QuadratureNotConverged { error: e.error }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Bruteforce,
    Factorized,
}

/// D_f × D_f hermitian positive matrix in the monomial basis z^j ψ₀.
#[derive(Debug, Clone, PartialEq)]
pub struct Metric {
    pub g: CMatrix,
    pub method: Method,
    /// Estimated absolute error of the entries.
    pub error_estimate: f64,
}

fn check_free_modes(config: &ValidatedConfig) -> Result<usize, MetricError> {
    let reduced = config.counts().reduced_total();
    if reduced <= 0.0 {
        return Err(MetricError::FreeModesUndefined(reduced));
    }
    let d = config.d_f();
    if d == 0 {
        return Err(MetricError::NoFreeModes);
    }
    for (a, &f) in config.phi_prime().iter().enumerate() {
        if f >= 1.0 {
            return Err(MetricError::DivergentIntegral(format!(
                "reduced flux Φ'_{a} = {f} is not below 1"
            )));
        }
    }
    Ok(d)
}

impl MetricError {
    /// Whether the failure is numerical (as opposed to bad input).
    pub fn is_convergence(&self) -> bool {
        matches!(self, MetricError::QuadratureNotConverged { .. })
    }
}
