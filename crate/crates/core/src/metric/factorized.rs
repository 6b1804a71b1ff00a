//! g = Ψ*GΨ.

use num_complex::Complex64;

use super::contour::{psi_matrix_in_direction, Gauge};
use super::gmatrix::g_matrix;
use super::{Metric, MetricError, Method};
use crate::config::{working_direction, ValidatedConfig};
use crate::linalg::CMatrix;

/// Factorized metric with the cut direction picked automatically.
pub fn metric_factorized(config: &ValidatedConfig, tol: f64) -> Result<Metric, MetricError> {
    let d = working_direction(config.config());
    metric_factorized_in_direction(config, d, Gauge::Auto, tol)
}

/// Factorized metric for cuts along `direction`, integrating from `gauge`.
/// The result does not depend on either choice.
pub fn metric_factorized_in_direction(
    config: &ValidatedConfig,
    direction: Complex64,
    gauge: Gauge,
    tol: f64,
) -> Result<Metric, MetricError> {
    let psi = psi_matrix_in_direction(config, gauge, direction, tol)?;
    let n = config.len();
    let order = &psi.cut.order;
    let fluxes: Vec<f64> = order.iter().map(|&a| config.phi_prime()[a]).collect();
    let g_cut = g_matrix(&fluxes)?.g;
    let pos = psi.cut.positions();
    let g_full = CMatrix::from_fn(n, n, |a, b| g_cut[(pos[a], pos[b])]);
    let m = psi.psi.adjoint() * &g_full * &psi.psi;
    let g = (&m + m.adjoint()).scale(0.5);
    // Entries are sums of products that can cancel, so scale the error by
    // the size of the factors rather than of g.
    let error_estimate = 2.0 * g_full.norm() * psi.psi.norm() * psi.error + f64::EPSILON * m.norm();
    Ok(Metric { g, method: Method::Factorized, error_estimate })
}

/// Evaluator with a fixed cut direction and tolerance, for repeated use on
/// nearby configurations (finite-difference stencils, transport).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FactorizedMetric {
    pub direction: Complex64,
    pub tol: f64,
}

impl FactorizedMetric {
    pub fn for_config(config: &ValidatedConfig, tol: f64) -> Self {
        Self { direction: working_direction(config.config()), tol }
    }

    pub fn eval(&self, config: &ValidatedConfig) -> Result<CMatrix, MetricError> {
        metric_factorized_in_direction(config, self.direction, Gauge::Auto, self.tol).map(|m| m.g)
    }

    /// Metric at the same fluxes moved to `positions`.
    pub fn eval_at(&self, config: &ValidatedConfig, positions: &[Complex64]) -> Result<CMatrix, MetricError> {
        let moved = config.moved(positions.to_vec())?;
        self.eval(&moved)
    }
}
