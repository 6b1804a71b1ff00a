use std::f64::consts::PI;

use num_complex::Complex64;

use super::SpecialError;

/// Arithmetic–geometric mean with the "right" choice of square root at each
/// step (|a' − b'| ≤ |a' + b'|), which for Re b > 0 gives the principal value.
pub fn agm(mut a: Complex64, mut b: Complex64) -> Complex64 {
    for _ in 0..64 {
        if (a - b).norm() <= 1e-16 * a.norm() {
            break;
        }
        let an = 0.5 * (a + b);
        let mut bn = (a * b).sqrt();
        if (an - bn).norm() > (an + bn).norm() {
            bn = -bn;
        }
        a = an;
        b = bn;
    }
    0.5 * (a + b)
}

/// Complete elliptic integral of the first kind in the parameter convention,
/// K(m) = ∫₀^{π/2} (1 − m sin²θ)^{−1/2} dθ, analytically continued off the
/// cut m ∈ [1, ∞).
pub fn elliptic_k(m: Complex64) -> Result<Complex64, SpecialError> {
    if m == Complex64::new(1.0, 0.0) {
        return Err(SpecialError::SingularAtOne);
    }
    let kp = (1.0 - m).sqrt();
    Ok(PI / (2.0 * agm(Complex64::new(1.0, 0.0), kp)))
}
