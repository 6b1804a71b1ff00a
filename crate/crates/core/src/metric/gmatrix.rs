//! The position-independent hermitian matrix G with g = Ψ*GΨ.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::MetricError;
use crate::config::{nu, THRESHOLD_BAND};
use crate::linalg::{inverse, CMatrix};

/// G for fluxes listed in cut order, with the fluxes it was built from.
#[derive(Debug, Clone, PartialEq)]
pub struct GMatrix {
    pub g: CMatrix,
    pub fluxes: Vec<f64>,
}

fn check_threshold(fluxes: &[f64]) -> Result<f64, MetricError> {
    let total: f64 = fluxes.iter().sum();
    if (total - total.round()).abs() < THRESHOLD_BAND {
        return Err(MetricError::ThresholdSingularity { total });
    }
    Ok(total)
}

/// Closed form: diagonal −sin(πΦ_a) sin(π(Φ_T−Φ_a))/sin(πΦ_T); above the
/// diagonal sin(πΦ_a) sin(πΦ_b)/sin(πΦ_T) · exp[iπ(Φ_T − Σ_{c=a}^{b−1}(Φ_c+Φ_{c+1}))];
/// below it by hermiticity.
pub fn g_matrix(fluxes: &[f64]) -> Result<GMatrix, MetricError> {
    let total = check_threshold(fluxes)?;
    let n = fluxes.len();
    let s = |x: f64| (PI * x).sin();
    let st = s(total);
    let mut g = CMatrix::zeros(n, n);
    for a in 0..n {
        g[(a, a)] = Complex64::new(-s(fluxes[a]) * s(total - fluxes[a]) / st, 0.0);
        let mut partial = 0.0;
        for b in a + 1..n {
            partial += fluxes[b - 1] + fluxes[b];
            let v = Complex64::from_polar(s(fluxes[a]) * s(fluxes[b]) / st, PI * (total - partial));
            g[(a, b)] = v;
            g[(b, a)] = v.conj();
        }
    }
    Ok(GMatrix { g, fluxes: fluxes.to_vec() })
}

/// G assembled from its factors, G = (Ḡ₁*(G₂⁻¹)* − 1)G₁ with
/// G₁ = diag((i/2)(1 − ν̄_a)) and (G₂)_{ab} = (i/2)(δ_{ab}ν_a − δ_{a,b+1}),
/// indices cyclic. Independent route to the closed form.
pub fn g_matrix_factored(fluxes: &[f64]) -> Result<CMatrix, MetricError> {
    check_threshold(fluxes)?;
    let n = fluxes.len();
    let half_i = Complex64::new(0.0, 0.5);
    let g1 = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        n,
        fluxes.iter().map(|&f| half_i * (1.0 - nu(f).conj())),
    ));
    let mut g2 = CMatrix::zeros(n, n);
    for a in 0..n {
        g2[(a, a)] += half_i * nu(fluxes[a]);
        g2[(a, (a + n - 1) % n)] -= half_i;
    }
    let g2inv = inverse(&g2).ok_or(MetricError::ThresholdSingularity { total: fluxes.iter().sum() })?;
    let g1bar = g1.map(|z| z.conj());
    Ok((g1bar.adjoint() * g2inv.adjoint() - CMatrix::identity(n, n)) * g1)
}

/// Toeplitz form for N identical fluxes.
pub fn g_matrix_identical(phi: f64, n: usize) -> Result<CMatrix, MetricError> {
    check_threshold(&vec![phi; n])?;
    let nf = n as f64;
    let s = |x: f64| (PI * x).sin();
    let denom = s(nf * phi);
    let mut g = CMatrix::zeros(n, n);
    for a in 0..n {
        g[(a, a)] = Complex64::new(-s(phi) * s(phi * (nf - 1.0)) / denom, 0.0);
        for b in a + 1..n {
            let k = (b - a) as f64;
            let v = Complex64::from_polar(s(phi) * s(phi) / denom, PI * phi * (nf - 2.0 * k));
            g[(a, b)] = v;
            g[(b, a)] = v.conj();
        }
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{hermitian_eigenvalues, hermiticity_defect};

    #[test]
    fn two_identical_fluxes() {
        let phi = 0.75;
        let g = g_matrix(&[phi, phi]).unwrap().g;
        let t = 0.5 * (PI * phi).tan();
        let expected = [[-t, t], [t, -t]];
        for a in 0..2 {
            for b in 0..2 {
                assert!((g[(a, b)] - Complex64::new(expected[a][b], 0.0)).norm() < 1e-14);
            }
        }
        let ev = hermitian_eigenvalues(&g);
        assert!(ev[0].abs() < 1e-14 || ev[1].abs() < 1e-14);
        assert!((ev[1] + (PI * phi).tan()).abs() < 1e-13);
    }

    #[test]
    fn three_routes_agree() {
        for fl in [vec![0.9, 0.9, 0.9], vec![0.4, 0.5, 0.6], vec![0.3, 0.7, 0.6, 0.2]] {
            let closed = g_matrix(&fl).unwrap().g;
            let fact = g_matrix_factored(&fl).unwrap();
            assert!((&closed - &fact).norm() < 1e-12, "{fl:?}");
            assert!(hermiticity_defect(&closed) < 1e-15);
        }
        let toep = g_matrix_identical(0.9, 3).unwrap();
        assert!((g_matrix(&[0.9; 3]).unwrap().g - toep).norm() < 1e-12);
    }

    #[test]
    fn threshold_rejected() {
        assert!(matches!(g_matrix(&[0.5, 0.5]), Err(MetricError::ThresholdSingularity { .. })));
    }
}
