//! Pointwise free zero modes: densities, holomorphic-gauge values and
//! analytic continuation with unwound arguments.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use thiserror::Error;

use crate::config::ValidatedConfig;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModeError {
    #[error("evaluation point coincides with fluxon {0}")]
    EvaluationAtFluxon(usize),
    #[error("evaluation point lies on the cut of fluxon {0}")]
    OnCut(usize),
    #[error("mode index {k} out of range (D_f = {d_f})")]
    KOutOfRange { k: usize, d_f: usize },
    #[error("mode vector has length {got}, expected D_f = {expected}")]
    DimensionMismatch { got: usize, expected: usize },
    #[error("mode vector is zero")]
    ZeroModeVector,
    #[error("continuation step turns by {0} rad around a fluxon; refine the path")]
    StepTooCoarse(f64),
}

/// Coefficients of P(z) = Σ p_j z^j for a free zero mode P·ψ₀.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeVector(Vec<Complex64>);

impl ModeVector {
    pub fn new(coeffs: Vec<Complex64>, d_f: usize) -> Result<Self, ModeError> {
        if coeffs.len() != d_f {
            return Err(ModeError::DimensionMismatch { got: coeffs.len(), expected: d_f });
        }
        if coeffs.iter().all(|c| c.norm() == 0.0) {
            return Err(ModeError::ZeroModeVector);
        }
        Ok(Self(coeffs))
    }

    /// Monomial z^k.
    pub fn unit(k: usize, d_f: usize) -> Result<Self, ModeError> {
        if k >= d_f {
            return Err(ModeError::KOutOfRange { k, d_f });
        }
        let mut v = vec![Complex64::new(0.0, 0.0); d_f];
        v[k] = Complex64::new(1.0, 0.0);
        Ok(Self(v))
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<Complex64> {
        self.0
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        self.0.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, c| acc * z + c)
    }
}

/// Branch of each factor (z − ζ_a)^{−Φ'_a}: its argument is taken in the
/// window (c_a, c_a + 2π), i.e. the cut of fluxon a is the ray at angle c_a.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchSheet {
    pub cut_angles: Vec<f64>,
}

impl BranchSheet {
    /// All cuts along +x, arguments in (0, 2π).
    pub fn standard(n: usize) -> Self {
        Self { cut_angles: vec![0.0; n] }
    }

    /// All cuts along the ray at `angle`.
    pub fn uniform(n: usize, angle: f64) -> Self {
        Self { cut_angles: vec![angle; n] }
    }

    /// Principal branches (cuts along −x, arguments in (−π, π)).
    pub fn principal(n: usize) -> Self {
        Self::uniform(n, -PI)
    }

    /// Argument of `w` in the window (c, c + 2π).
    pub fn arg_in_window(w: Complex64, c: f64) -> f64 {
        c + (w.arg() - c).rem_euclid(TAU)
    }
}

fn check_point(z: Complex64, config: &ValidatedConfig) -> Result<(), ModeError> {
    let scale = config.config().diameter().max(1.0);
    for (a, &p) in config.positions().iter().enumerate() {
        if (z - p).norm() <= 1e-14 * scale {
            return Err(ModeError::EvaluationAtFluxon(a));
        }
    }
    Ok(())
}

/// |P(z)|² Π |z − ζ_a|^{−2Φ'_a}, the gauge-invariant (unnormalized) density.
pub fn density(z: Complex64, config: &ValidatedConfig, p: &ModeVector) -> Result<f64, ModeError> {
    let d_f = config.d_f();
    if p.coeffs().len() != d_f {
        return Err(ModeError::DimensionMismatch { got: p.coeffs().len(), expected: d_f });
    }
    check_point(z, config)?;
    let log_abs: f64 = config
        .positions()
        .iter()
        .zip(config.phi_prime())
        .map(|(&zeta, &f)| -2.0 * f * (z - zeta).norm().ln())
        .sum();
    Ok(p.eval(z).norm_sqr() * log_abs.exp())
}

/// z^k Π (z − ζ_a)^{−Φ'_a} on the given sheet.
pub fn mode_value(
    z: Complex64,
    k: usize,
    config: &ValidatedConfig,
    sheet: &BranchSheet,
) -> Result<Complex64, ModeError> {
    let d_f = config.d_f();
    if k >= d_f {
        return Err(ModeError::KOutOfRange { k, d_f });
    }
    check_point(z, config)?;
    let scale = config.config().diameter().max(1.0);
    let mut thetas = Vec::with_capacity(config.len());
    for (a, (&zeta, &c)) in config.positions().iter().zip(&sheet.cut_angles).enumerate() {
        let w = z - zeta;
        let dir = Complex64::from_polar(1.0, c);
        let along = (w * dir.conj()).re;
        let across = (w * dir.conj()).im;
        if along > 0.0 && across.abs() <= 1e-10 * scale {
            return Err(ModeError::OnCut(a));
        }
        thetas.push(BranchSheet::arg_in_window(w, c));
    }
    Ok(value_with_args(z, k, config, &thetas))
}

fn value_with_args(z: Complex64, k: usize, config: &ValidatedConfig, thetas: &[f64]) -> Complex64 {
    let mut log = Complex64::new(0.0, 0.0);
    for ((&zeta, &f), &th) in config.positions().iter().zip(config.phi_prime()).zip(thetas) {
        log -= f * Complex64::new((z - zeta).norm().ln(), th);
    }
    z.powu(k as u32) * log.exp()
}

/// Analytic continuation of the holomorphic-gauge mode along a polyline.
///
/// The argument of each z − ζ_a is unwound step by step, so going once
/// counter-clockwise around ζ_a multiplies the value by ν_a exactly.
#[derive(Debug, Clone)]
pub struct BranchTracker<'a> {
    config: &'a ValidatedConfig,
    z: Complex64,
    thetas: Vec<f64>,
}

impl<'a> BranchTracker<'a> {
    pub fn new(config: &'a ValidatedConfig, sheet: &BranchSheet, z: Complex64) -> Result<Self, ModeError> {
        check_point(z, config)?;
        let thetas = config
            .positions()
            .iter()
            .zip(&sheet.cut_angles)
            .map(|(&zeta, &c)| BranchSheet::arg_in_window(z - zeta, c))
            .collect();
        Ok(Self { config, z, thetas })
    }

    pub fn advance(&mut self, z: Complex64) -> Result<(), ModeError> {
        check_point(z, self.config)?;
        for (th, &zeta) in self.thetas.iter_mut().zip(self.config.positions()) {
            let step = ((z - zeta) / (self.z - zeta)).arg();
            if step.abs() > 0.5 * PI {
                return Err(ModeError::StepTooCoarse(step));
            }
            *th += step;
        }
        self.z = z;
        Ok(())
    }

    pub fn value(&self, k: usize) -> Complex64 {
        value_with_args(self.z, k, self.config, &self.thetas)
    }

    pub fn args(&self) -> &[f64] {
        &self.thetas
    }
}

/// Continues mode k along `path` starting on `sheet`; returns the final value.
pub fn continue_along(
    path: &[Complex64],
    k: usize,
    config: &ValidatedConfig,
    sheet: &BranchSheet,
) -> Result<Complex64, ModeError> {
    let d_f = config.d_f();
    if k >= d_f {
        return Err(ModeError::KOutOfRange { k, d_f });
    }
    let (first, rest) = path.split_first().expect("path needs at least one point");
    let mut tracker = BranchTracker::new(config, sheet, *first)?;
    for &z in rest {
        tracker.advance(z)?;
    }
    Ok(tracker.value(k))
}

/// Estimated exponent s in r·⟨|ψ_k|²⟩_circle ∝ r^s between radii r1 < r2,
/// from angular averages of the density. The mode is normalizable at
/// infinity iff s < −1.
pub fn radial_tail_exponent(
    config: &ValidatedConfig,
    k: usize,
    centre: Complex64,
    r1: f64,
    r2: f64,
) -> Result<f64, ModeError> {
    let n = config.len();
    // Build the density of z^k directly: ModeVector caps k at D_f − 1, but the
    // point of this estimate is to probe k beyond it as well.
    let avg = |r: f64| -> f64 {
        const M: usize = 256;
        (0..M)
            .map(|i| {
                let z = centre + Complex64::from_polar(r, TAU * (i as f64 + 0.5) / M as f64);
                let mut log = 2.0 * k as f64 * z.norm().ln();
                for a in 0..n {
                    log -= 2.0 * config.phi_prime()[a] * (z - config.positions()[a]).norm().ln();
                }
                log.exp()
            })
            .sum::<f64>()
            / M as f64
    };
    let (f1, f2) = (r1 * avg(r1), r2 * avg(r2));
    Ok((f2 / f1).ln() / (r2 / r1).ln())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{validate, FluxConfig};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn single_half_flux_on_negative_axis() {
        // A lone half flux has no free mode; a distant partner supplies one
        // and its factor is divided out below.
        let cfg = validate(FluxConfig::new(vec![0.5, 0.75], vec![c(0., 0.), c(0., 100.)])).unwrap();
        let v = mode_value(c(-1., 0.), 0, &cfg, &BranchSheet::standard(2)).unwrap();
        let other = Complex64::new(-1.0, -100.0).powf(-0.75);
        let expected = c(0., -1.) * other.norm()
            * Complex64::from_polar(1.0, -0.75 * BranchSheet::arg_in_window(c(-1., -100.), 0.0));
        assert!((v - expected).norm() < 1e-14 * expected.norm());
    }

    #[test]
    fn density_of_single_half_flux() {
        let cfg = validate(FluxConfig::new(vec![0.5, 0.75], vec![c(0., 0.), c(5., 0.)])).unwrap();
        let p = ModeVector::unit(0, cfg.d_f()).unwrap();
        let z = c(0.3, -0.2);
        let d = density(z, &cfg, &p).unwrap();
        let expected = 1.0 / z.norm() * (z - c(5., 0.)).norm().powf(-1.5);
        assert!((d - expected).abs() < 1e-14 * expected);
    }

    #[test]
    fn zero_vector_rejected() {
        assert_eq!(ModeVector::new(vec![c(0., 0.)], 1), Err(ModeError::ZeroModeVector));
    }
}
