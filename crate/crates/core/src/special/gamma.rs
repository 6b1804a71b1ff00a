use std::f64::consts::PI;

use num_complex::Complex64;

use super::SpecialError;

// B_{2k} / (2k(2k-1)) for k = 1..8.
const STIRLING: [f64; 8] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360360.0,
    1.0 / 156.0,
    -3617.0 / 122400.0,
];

fn is_pole(z: Complex64) -> bool {
    z.im == 0.0 && z.re <= 0.0 && z.re == z.re.round()
}

/// Principal branch of log Γ(z), analytic off the negative real axis.
///
/// Shifts z up by recurrence until Re z ≥ 15, then uses the Stirling series.
/// Each subtracted log(z + k) has its cut inside (−∞, 0], so the result has
/// a single cut there.
pub fn log_gamma(z: Complex64) -> Result<Complex64, SpecialError> {
    if is_pole(z) {
        return Err(SpecialError::PoleAtNonpositiveInteger(z.re));
    }
    let mut w = z;
    let mut shift = Complex64::new(0.0, 0.0);
    while w.re < 15.0 {
        shift += w.ln();
        w += 1.0;
    }
    let inv = w.inv();
    let inv2 = inv * inv;
    let mut series = Complex64::new(0.0, 0.0);
    let mut p = inv;
    for c in STIRLING {
        series += p * c;
        p *= inv2;
    }
    let lg = (w - 0.5) * w.ln() - w + 0.5 * (2.0 * PI).ln() + series;
    Ok(lg - shift)
}

pub fn gamma(z: Complex64) -> Result<Complex64, SpecialError> {
    log_gamma(z).map(Complex64::exp)
}

/// 1/Γ(z), entire; zero at the poles of Γ.
pub fn rgamma(z: Complex64) -> Complex64 {
    match log_gamma(z) {
        Ok(lg) => (-lg).exp(),
        Err(_) => Complex64::new(0.0, 0.0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn classical_values() {
        assert!(log_gamma(c(1.0, 0.0)).unwrap().norm() < 1e-14);
        assert!(log_gamma(c(2.0, 0.0)).unwrap().norm() < 1e-14);
        let half = log_gamma(c(0.5, 0.0)).unwrap();
        assert!((half - c(0.5 * PI.ln(), 0.0)).norm() < 1e-14);
        let g5 = gamma(c(5.0, 0.0)).unwrap();
        assert!((g5 - c(24.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn poles() {
        assert!(log_gamma(c(0.0, 0.0)).is_err());
        assert!(log_gamma(c(-3.0, 0.0)).is_err());
        assert_eq!(rgamma(c(-2.0, 0.0)), c(0.0, 0.0));
    }

    #[test]
    fn recurrence_and_reflection() {
        for &z in &[c(0.3, 0.7), c(-2.4, 0.1), c(4.5, -3.0), c(-0.5, -5.0), c(0.01, 0.0)] {
            let lhs = gamma(z + 1.0).unwrap();
            let rhs = z * gamma(z).unwrap();
            assert!((lhs - rhs).norm() < 1e-12 * rhs.norm(), "{z}");
            let refl = gamma(z).unwrap() * gamma(1.0 - z).unwrap() * (PI * z).sin();
            assert!((refl - PI).norm() < 1e-12 * PI, "{z}");
        }
    }

    #[test]
    fn negative_half_integer() {
        // Γ(−5/2) = −8√π/15
        let g = gamma(c(-2.5, 0.0)).unwrap();
        assert!((g.re + 8.0 * PI.sqrt() / 15.0).abs() < 1e-13);
        assert!(g.im.abs() < 1e-13);
    }
}
