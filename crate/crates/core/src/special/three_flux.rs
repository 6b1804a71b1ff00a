//! Closed forms for three fluxons normalized to ζ = (0, 1, u).
//!
//! Each entry of Ψ in the gauge ξ₀ = ζ₁ = 0 is an Euler integral,
//!
//!   ∫₀^1 x^{j−Φ₁}(x−1)^{−Φ₂}(x−u)^{−Φ₃} dx  and  ∫₀^u (same) dx,
//!
//! which evaluate to Γ(α)Γ(β)·₂F̃₁ with arguments 1/u and u. The reference
//! branch takes every factor on its principal branch with straight paths from
//! 0, the real segment [0,1] being traversed on the side that faces u. This
//! choice is single-valued on the closed half plane containing u, so the two
//! rows are consistent and the result is a genuine Ψ matrix.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::elliptic::elliptic_k;
use super::gamma::gamma;
use super::hyp2f1::{hyp2f1_reg, Hyp2F1Params};
use super::SpecialError;
use crate::config::ValidatedConfig;

fn g(x: f64) -> Result<Complex64, SpecialError> {
    gamma(Complex64::new(x, 0.0))
}

/// Ψ (3 × D_f) for fluxes of `config` placed at (0, 1, u). The caller supplies
/// u, the image of ζ₃ under the affine map sending ζ₁ → 0 and ζ₂ → 1.
pub fn psi_analytic_3(
    config: &ValidatedConfig,
    u: Complex64,
) -> Result<DMatrix<Complex64>, SpecialError> {
    if config.len() != 3 {
        return Err(SpecialError::UnsupportedN(config.len()));
    }
    let d = config.d_f();
    if !(1..=2).contains(&d) {
        return Err(SpecialError::UnsupportedDf(d));
    }
    if u.im == 0.0 {
        return Err(SpecialError::RealCrossRatio(u));
    }
    let f = config.phi_prime();
    let (f1, f2, f3) = (f[0], f[1], f[2]);
    let sigma = u.im.signum();
    let phase = Complex64::from_polar(1.0, sigma * PI * (f3 - f2));
    let mut psi = DMatrix::zeros(3, d);
    for j in 0..d {
        let jf = j as f64;
        // Row ζ₂ = 1: x = t, factor (x − u)^{−Φ₃} = (−u)^{−Φ₃}(1 − t/u)^{−Φ₃}.
        let r2 = g(1.0 + jf - f1)? * g(1.0 - f2)?
            * u.powf(-f3)
            * hyp2f1_reg(Hyp2F1Params::real(f3, 1.0 + jf - f1, 2.0 + jf - f1 - f2, u.inv()))?;
        // Row ζ₃ = u: x = u t.
        let r3 = g(1.0 + jf - f1)? * g(1.0 - f3)?
            * u.powf(1.0 + jf - f1 - f3)
            * hyp2f1_reg(Hyp2F1Params::real(f2, 1.0 + jf - f1, 2.0 + jf - f1 - f3, u))?;
        psi[(1, j)] = phase * r2;
        psi[(2, j)] = phase * r3;
    }
    Ok(psi)
}

/// Metric of three half fluxes at (0, 1, u): 8 Re(K(u) K(1−u)*).
pub fn metric_half_fluxes(u: Complex64) -> Result<f64, SpecialError> {
    if u.norm() < 1e-12 || (u - 1.0).norm() < 1e-12 {
        return Err(SpecialError::SingularAtCollision(u));
    }
    let k = elliptic_k(u)?;
    let kc = elliptic_k(1.0 - u)?;
    Ok(8.0 * (k * kc.conj()).re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{validate, FluxConfig};

    fn half_config() -> ValidatedConfig {
        let pos = vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0), Complex64::new(0.3, 0.4)];
        validate(FluxConfig::new(vec![0.5; 3], pos)).unwrap()
    }

    #[test]
    fn half_fluxes_reduce_to_elliptic_integrals() {
        let u = Complex64::new(0.3, 0.4);
        let psi = psi_analytic_3(&half_config(), u).unwrap();
        assert_eq!(psi[(0, 0)], Complex64::new(0.0, 0.0));
        let r2 = 2.0 / u.sqrt() * elliptic_k(u.inv()).unwrap();
        let r3 = 2.0 * elliptic_k(u).unwrap();
        assert!((psi[(1, 0)] - r2).norm() < 1e-12 * r2.norm());
        assert!((psi[(2, 0)] - r3).norm() < 1e-12 * r3.norm());
    }

    #[test]
    fn half_flux_metric_symmetries() {
        for &u in &[Complex64::new(0.5, 0.0), Complex64::new(0.2, 0.7), Complex64::new(-0.6, 0.3)] {
            let g = metric_half_fluxes(u).unwrap();
            assert!(g > 0.0);
            assert!((metric_half_fluxes(1.0 - u).unwrap() - g).abs() < 1e-12 * g);
            assert!((metric_half_fluxes(u.conj()).unwrap() - g).abs() < 1e-12 * g);
        }
        assert!(metric_half_fluxes(Complex64::new(0.0, 0.0)).is_err());
    }
}
