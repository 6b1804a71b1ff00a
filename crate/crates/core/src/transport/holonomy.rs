//! Parallel transport dp/ds = −g⁻¹(Σ_a ζ̇_a ∂_a g) p and holonomies.

use num_complex::Complex64;

use super::connection::checked_inverse;
use super::derivative::{directional_with, DerivativeOptions};
use super::ode::{dopri5, OdeFailure, OdeOptions, StepStats};
use super::path::ControlPath;
use super::TransportError;
use crate::config::ValidatedConfig;
use crate::linalg::{eigenvalues, CMatrix};
use crate::metric::FactorizedMetric;
use crate::modes::ModeVector;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransportOptions {
    pub ode_tol: f64,
    pub derivative: DerivativeOptions,
    /// Minimum allowed fluxon separation; defaults to 1e-2 × diameter.
    pub collision_guard: Option<f64>,
}

impl Default for TransportOptions {
    fn default() -> Self {
        Self { ode_tol: 1e-8, derivative: DerivativeOptions::default(), collision_guard: None }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransportResult {
    pub p: ModeVector,
    /// |p*g p − p₀*g₀ p₀| / p₀*g₀ p₀.
    pub drift: f64,
    pub stats: StepStats,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HolonomyResult {
    /// p ↦ u p on coefficients in the monomial basis.
    pub u: CMatrix,
    pub eigenvalues: Vec<Complex64>,
    /// Arguments of the eigenvalues in (−π, π].
    pub eigenphases: Vec<f64>,
    /// ‖u*g u − g‖ / ‖g‖ at the base point.
    pub drift: f64,
    pub base_metric: CMatrix,
    pub stats: StepStats,
}

fn metric_at(config: &ValidatedConfig, tol: f64) -> Result<CMatrix, TransportError> {
    Ok(FactorizedMetric::for_config(config, tol).eval(config)?)
}

/// Transports the columns of `p0` (D_f × m) along `path`.
fn transport_columns(
    config: &ValidatedConfig,
    path: &ControlPath,
    p0: CMatrix,
    opts: &TransportOptions,
) -> Result<(CMatrix, StepStats), TransportError> {
    if path.start() != config.positions() {
        return Err(TransportError::PathStartMismatch);
    }
    let guard = opts.collision_guard.unwrap_or(1e-2 * config.config().diameter());
    let (rows, cols) = p0.shape();
    let mut y: Vec<Complex64> = p0.iter().copied().collect();
    let mut stats = StepStats::default();
    for k in 0..path.segments() {
        check_guard(path, k, guard)?;
        let rhs = |s: f64, y: &[Complex64]| -> Result<Vec<Complex64>, TransportError> {
            let (pos, vel) = path.eval(k, s);
            if vel.iter().all(|v| v.norm() == 0.0) {
                return Ok(vec![Complex64::new(0.0, 0.0); y.len()]);
            }
            let here = config.moved(pos)?;
            let field = FactorizedMetric::for_config(&here, opts.derivative.metric_tol);
            let g = field.eval(&here)?;
            let dg = directional_with(&here, &vel, &opts.derivative, &field)?.value;
            let p = CMatrix::from_column_slice(rows, cols, y);
            let dp = -(checked_inverse(&g)? * dg * p);
            Ok(dp.iter().copied().collect())
        };
        let (out, st) = dopri5(rhs, 0.0, 1.0, y, &OdeOptions::new(opts.ode_tol)).map_err(|e| match e {
            OdeFailure::Rhs(e) => e,
            OdeFailure::StepUnderflow { t } => TransportError::OdeStepUnderflow { segment: k, s: t },
            OdeFailure::TooManySteps { t } => TransportError::OdeTooManySteps { segment: k, s: t },
        })?;
        y = out;
        stats += st;
    }
    Ok((CMatrix::from_column_slice(rows, cols, &y), stats))
}

fn check_guard(path: &ControlPath, k: usize, guard: f64) -> Result<(), TransportError> {
    const SAMPLES: usize = 512;
    for i in 0..=SAMPLES {
        let (pos, _) = path.eval(k, i as f64 / SAMPLES as f64);
        for a in 0..pos.len() {
            for b in a + 1..pos.len() {
                let distance = (pos[a] - pos[b]).norm();
                if distance < guard {
                    return Err(TransportError::CollisionGuardTripped { a, b, distance, guard, segment: k });
                }
            }
        }
    }
    Ok(())
}

/// Transports one mode vector along `path`, which must start at `config`.
pub fn parallel_transport(
    config: &ValidatedConfig,
    path: &ControlPath,
    p0: &ModeVector,
    opts: &TransportOptions,
) -> Result<TransportResult, TransportError> {
    let d = config.d_f();
    let col = CMatrix::from_column_slice(d, 1, p0.coeffs());
    let (p1, stats) = transport_columns(config, path, col.clone(), opts)?;
    let g0 = metric_at(config, opts.derivative.metric_tol)?;
    let g1 = metric_at(&config.moved(path.end().to_vec())?, opts.derivative.metric_tol)?;
    let n0 = (col.adjoint() * &g0 * &col)[(0, 0)].re;
    let n1 = (p1.adjoint() * &g1 * &p1)[(0, 0)].re;
    let p = ModeVector::new(p1.iter().copied().collect(), d).map_err(|_| TransportError::IllConditionedMetric(0.0))?;
    Ok(TransportResult { p, drift: (n1 - n0).abs() / n0, stats })
}

/// Holonomy of a closed path. The end may relabel the start if the swapped
/// fluxons carry equal fluxes.
pub fn holonomy(config: &ValidatedConfig, path: &ControlPath, opts: &TransportOptions) -> Result<HolonomyResult, TransportError> {
    let perm = path.end_permutation().ok_or(TransportError::ClosedPathRequired)?;
    if perm.iter().enumerate().any(|(a, &b)| config.fluxes()[a] != config.fluxes()[b]) {
        return Err(TransportError::ClosedPathRequired);
    }
    let d = config.d_f();
    let (u, stats) = transport_columns(config, path, CMatrix::identity(d, d), opts)?;
    let g = metric_at(config, opts.derivative.metric_tol)?;
    let drift = (u.adjoint() * &g * &u - &g).norm() / g.norm();
    let eigenvalues = eigenvalues(&u);
    let eigenphases = eigenvalues.iter().map(|z| z.arg()).collect();
    Ok(HolonomyResult { u, eigenvalues, eigenphases, drift, base_metric: g, stats })
}
