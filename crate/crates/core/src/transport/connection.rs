//! The connection A = g⁻¹∂g, its pure-gauge form Ψ□⁻¹∂Ψ□ when D_f = N − 1,
//! and the 1×1 block of a mode confined to a supercritical fluxon.

use num_complex::Complex64;
use rayon::prelude::*;

use super::derivative::{directional_with, richardson, shifted, DerivativeOptions};
use super::TransportError;
use crate::config::{working_direction, ValidatedConfig};
use crate::linalg::{hermitian_condition, inverse, CMatrix};
use crate::metric::{psi_matrix_in_direction, FactorizedMetric, Gauge};

const MAX_CONDITION: f64 = 1e12;

/// A = Σ_a A_a dζ_a at one configuration, with the metric it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct Connection {
    pub g: CMatrix,
    pub a: Vec<CMatrix>,
}

pub(crate) fn checked_inverse(g: &CMatrix) -> Result<CMatrix, TransportError> {
    let cond = hermitian_condition(g);
    if !(cond <= MAX_CONDITION) {
        return Err(TransportError::IllConditionedMetric(cond));
    }
    inverse(g).ok_or(TransportError::IllConditionedMetric(f64::INFINITY))
}

/// A_a = g⁻¹ ∂_a g for every fluxon.
pub fn connection(config: &ValidatedConfig, opts: &DerivativeOptions) -> Result<Connection, TransportError> {
    let field = FactorizedMetric::for_config(config, opts.metric_tol);
    let g = field.eval(config)?;
    let ginv = checked_inverse(&g)?;
    let n = config.len();
    let mut a = Vec::with_capacity(n);
    for k in 0..n {
        let mut v = vec![Complex64::new(0.0, 0.0); n];
        v[k] = Complex64::new(1.0, 0.0);
        a.push(&ginv * directional_with(config, &v, opts, &field)?.value);
    }
    Ok(Connection { g, a })
}

/// g⁻¹ Σ_a v_a ∂_a g.
pub fn connection_along(
    config: &ValidatedConfig,
    v: &[Complex64],
    opts: &DerivativeOptions,
) -> Result<CMatrix, TransportError> {
    let field = FactorizedMetric::for_config(config, opts.metric_tol);
    let g = field.eval(config)?;
    Ok(checked_inverse(&g)? * directional_with(config, v, opts, &field)?.value)
}

/// Ψ□⁻¹ ∂_a Ψ□ for every fluxon, with ξ₀ = ζ_N so that the last row of Ψ
/// vanishes and the rest is square. Needs D_f = N − 1.
pub fn pure_gauge_connection(
    config: &ValidatedConfig,
    opts: &DerivativeOptions,
) -> Result<Vec<CMatrix>, TransportError> {
    let n = config.len();
    let d = config.d_f();
    if d + 1 != n {
        return Err(TransportError::NotMaximalFreeModes { d_f: d, n });
    }
    let dir = working_direction(config.config());
    let square = |positions: &[Complex64]| -> Result<CMatrix, TransportError> {
        let moved = config.moved(positions.to_vec())?;
        let psi = psi_matrix_in_direction(&moved, Gauge::Fluxon(n - 1), dir, opts.metric_tol)?.psi;
        Ok(psi.rows(0, d).into_owned())
    };
    let base = square(config.positions())?;
    let base_inv = inverse(&base).ok_or(TransportError::IllConditionedMetric(f64::INFINITY))?;
    let h = opts.rel_step * config.config().min_separation();
    (0..n)
        .map(|k| {
            let mut v = vec![Complex64::new(0.0, 0.0); n];
            v[k] = Complex64::new(1.0, 0.0);
            // Ψ is holomorphic in ζ, so a real-direction difference gives ∂_k Ψ.
            let values: Vec<CMatrix> = [h, -h, 0.5 * h, -0.5 * h]
                .par_iter()
                .map(|&e| square(&shifted(config.positions(), &v, Complex64::new(e, 0.0))))
                .collect::<Result<_, _>>()?;
            let (dpsi, _) = richardson(&values, h);
            Ok(&base_inv * dpsi)
        })
        .collect()
}

/// Coefficients c_b of A = Σ_b c_b dζ_b for the mode confined to fluxon `a`:
/// A = ∂ log g with g ∝ Π_{b≠a} |ζ_a − ζ_b|^{−2Φ'_b}.
pub fn confined_connection(config: &ValidatedConfig, a: usize) -> Result<Vec<Complex64>, TransportError> {
    if config.counts().n[a] == 0 {
        return Err(TransportError::NotConfined(a));
    }
    let pos = config.positions();
    let mut c = vec![Complex64::new(0.0, 0.0); config.len()];
    for (b, &f) in config.phi_prime().iter().enumerate() {
        if b != a {
            let w = f / (pos[a] - pos[b]);
            c[a] -= w;
            c[b] += w;
        }
    }
    Ok(c)
}
