//! Holomorphic derivatives Σ v_a ∂_a g by Richardson-extrapolated central
//! differences. With D_w g = d/dε g(ζ + εw) for real ε,
//! Σ v_a ∂_a g = ½ (D_v g − i D_{iv} g).

use num_complex::Complex64;
use rayon::prelude::*;

use super::TransportError;
use crate::config::ValidatedConfig;
use crate::linalg::CMatrix;
use crate::metric::FactorizedMetric;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivativeOptions {
    /// Step as a fraction of the smallest fluxon separation.
    pub rel_step: f64,
    /// Relative tolerance of each metric evaluation.
    pub metric_tol: f64,
}

impl Default for DerivativeOptions {
    fn default() -> Self {
        Self { rel_step: 1e-3, metric_tol: 1e-12 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Derivative {
    pub value: CMatrix,
    /// Richardson error estimate (Frobenius norm).
    pub error: f64,
}

/// Central difference at h and h/2 combined to fourth order, from values at
/// ε = h, −h, h/2, −h/2.
pub(crate) fn richardson(values: &[CMatrix], h: f64) -> (CMatrix, f64) {
    let coarse = (&values[0] - &values[1]).scale(0.5 / h);
    let fine = (&values[2] - &values[3]).scale(1.0 / h);
    let extrapolated = (fine.scale(4.0) - &coarse).scale(1.0 / 3.0);
    let err = (&extrapolated - &fine).norm();
    (extrapolated, err)
}

pub(crate) fn shifted(positions: &[Complex64], v: &[Complex64], eps: Complex64) -> Vec<Complex64> {
    positions.iter().zip(v).map(|(z, w)| z + w * eps).collect()
}

/// Σ_a v_a ∂_a g at the given configuration.
pub fn d_metric_directional(
    config: &ValidatedConfig,
    v: &[Complex64],
    opts: &DerivativeOptions,
) -> Result<Derivative, TransportError> {
    let field = FactorizedMetric::for_config(config, opts.metric_tol);
    directional_with(config, v, opts, &field)
}

pub(crate) fn directional_with(
    config: &ValidatedConfig,
    v: &[Complex64],
    opts: &DerivativeOptions,
    field: &FactorizedMetric,
) -> Result<Derivative, TransportError> {
    let d = config.d_f();
    let speed = v.iter().map(|w| w.norm()).fold(0.0, f64::max);
    if speed == 0.0 {
        return Ok(Derivative { value: CMatrix::zeros(d, d), error: 0.0 });
    }
    let h = opts.rel_step * config.config().min_separation() / speed;
    let i = Complex64::i();
    let offsets = [h, -h, 0.5 * h, -0.5 * h];
    let stencil: Vec<Complex64> =
        [Complex64::new(1.0, 0.0), i].iter().flat_map(|&rot| offsets.map(|e| rot * e)).collect();
    let values: Vec<CMatrix> = stencil
        .par_iter()
        .map(|&eps| field.eval_at(config, &shifted(config.positions(), v, eps)))
        .collect::<Result<_, _>>()?;
    let (dv, ev) = richardson(&values[..4], h);
    let (div, eiv) = richardson(&values[4..], h);
    let value = (dv - div * i).scale(0.5);
    let error = 0.5 * (ev + eiv);
    let gnorm = values.iter().map(|g| g.norm()).fold(0.0, f64::max);
    let budget = 1e-5 * gnorm * speed / config.config().min_separation();
    if error > budget {
        return Err(TransportError::StepTooLarge { error, budget });
    }
    Ok(Derivative { value, error })
}

/// ∂g/∂ζ_a.
pub fn d_metric(config: &ValidatedConfig, a: usize, opts: &DerivativeOptions) -> Result<Derivative, TransportError> {
    let mut v = vec![Complex64::new(0.0, 0.0); config.len()];
    v[a] = Complex64::new(1.0, 0.0);
    d_metric_directional(config, &v, opts)
}
