//! Regularized Gauss hypergeometric function ₂F̃₁(a,b;c;z) = ₂F₁/Γ(c).
//!
//! Small |z| uses the Maclaurin series, the half plane Re z < ½ the Pfaff
//! transformation, and everything else analytic continuation of the
//! hypergeometric ODE by Taylor stepping from |z| = ½. Stepping avoids the
//! connection formulas around z = 1, which degenerate when c − a − b is an
//! integer (the identical half-flux case sits exactly there).

use num_complex::Complex64;

use super::gamma::rgamma;
use super::SpecialError;

const SERIES_RADIUS: f64 = 0.6;
const MAX_TERMS: usize = 5000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hyp2F1Params {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
    pub z: Complex64,
}

impl Hyp2F1Params {
    pub fn real(a: f64, b: f64, c: f64, z: Complex64) -> Self {
        Self { a: a.into(), b: b.into(), c: c.into(), z }
    }
}

fn nonpositive_integer(x: Complex64) -> Option<usize> {
    (x.im == 0.0 && x.re <= 0.0 && x.re == x.re.round()).then(|| (-x.re) as usize)
}

/// ₂F₁(a,b;c;z)/Γ(c) on the principal sheet (cut along real z ≥ 1).
pub fn hyp2f1_reg(p: Hyp2F1Params) -> Result<Complex64, SpecialError> {
    let Hyp2F1Params { a, b, c, z } = p;
    if z.im == 0.0 && z.re >= 1.0 {
        return Err(SpecialError::OnBranchCut(z));
    }
    if let Some(m) = nonpositive_integer(c) {
        // F̃(a,b;−m;z) = (a)_{m+1}(b)_{m+1} z^{m+1} F̃(a+m+1, b+m+1; m+2; z)
        let k = m + 1;
        let mut pre = z.powu(k as u32);
        for i in 0..k {
            pre *= (a + i as f64) * (b + i as f64);
        }
        if pre == Complex64::new(0.0, 0.0) {
            return Ok(pre);
        }
        let inner = Hyp2F1Params { a: a + k as f64, b: b + k as f64, c: Complex64::new(k as f64 + 1.0, 0.0), z };
        return Ok(pre * hyp2f1_reg(inner)?);
    }
    if z.norm() == 0.0 || a.norm() == 0.0 || b.norm() == 0.0 {
        return Ok(rgamma(c));
    }
    if nonpositive_integer(a).is_some() || nonpositive_integer(b).is_some() || z.norm() <= SERIES_RADIUS {
        return series(a, b, c, z);
    }
    let w = z / (z - 1.0);
    if w.norm() <= SERIES_RADIUS {
        return Ok((1.0 - z).powc(-a) * series(a, c - b, c, w)?);
    }
    continue_ode(a, b, c, z)
}

/// Unregularized ₂F₁. Fails where c is a nonpositive integer only if the
/// regularized value is nonzero there.
pub fn hyp2f1(p: Hyp2F1Params) -> Result<Complex64, SpecialError> {
    let reg = hyp2f1_reg(p)?;
    Ok(reg * super::gamma::gamma(p.c)?)
}

fn series(a: Complex64, b: Complex64, c: Complex64, z: Complex64) -> Result<Complex64, SpecialError> {
    let mut term = rgamma(c);
    let mut sum = term;
    let mut small = 0;
    for n in 0..MAX_TERMS {
        let nf = n as f64;
        term *= (a + nf) * (b + nf) / ((nf + 1.0) * (c + nf)) * z;
        sum += term;
        if term.norm() <= 1e-17 * sum.norm() {
            small += 1;
            // Two quiet terms in a row, or an exact polynomial.
            if small >= 2 || term.norm() == 0.0 {
                return Ok(sum);
            }
        } else {
            small = 0;
        }
    }
    Err(SpecialError::NotConverged { attained: term.norm() / sum.norm() })
}

/// Value and derivative at `z0`, |z0| ≤ ½, then Taylor steps along a path
/// that keeps clear of the singular points 0 and 1.
fn continue_ode(a: Complex64, b: Complex64, c: Complex64, z: Complex64) -> Result<Complex64, SpecialError> {
    let z0 = z * (0.5 / z.norm());
    let mut w = series(a, b, c, z0)?;
    let mut dw = a * b * series(a + 1.0, b + 1.0, c + 1.0, z0)?;
    let mut path = vec![z0];
    if z.im != 0.0 {
        let one = Complex64::new(1.0, 0.0);
        let d = distance_to_segment(one, z0, z);
        if d < 0.35 && (z - one).norm() > d + 1e-12 {
            path.push(Complex64::new(1.0, 0.6_f64.copysign(z.im)));
        }
    }
    path.push(z);
    let mut pos = z0;
    for target in path.into_iter().skip(1) {
        while (target - pos).norm() > 0.0 {
            let rho = pos.norm().min((pos - 1.0).norm());
            let remaining = target - pos;
            let h = if remaining.norm() <= 0.5 * rho {
                remaining
            } else {
                remaining * (0.5 * rho / remaining.norm())
            };
            let (nw, ndw) = taylor_step(a, b, c, pos, w, dw, h)?;
            w = nw;
            dw = ndw;
            pos = if h == remaining { target } else { pos + h };
        }
    }
    Ok(w)
}

fn distance_to_segment(p: Complex64, a: Complex64, b: Complex64) -> f64 {
    let ab = b - a;
    let t = ((p - a) * ab.conj()).re / ab.norm_sqr();
    (a + ab * t.clamp(0.0, 1.0) - p).norm()
}

/// Advances w'' from centre `zc` by `h` using the power series of the
/// solution of z(1−z)w'' + (c − (a+b+1)z)w' − ab·w = 0 about zc.
fn taylor_step(
    a: Complex64,
    b: Complex64,
    c: Complex64,
    zc: Complex64,
    w: Complex64,
    dw: Complex64,
    h: Complex64,
) -> Result<(Complex64, Complex64), SpecialError> {
    let p0 = zc * (1.0 - zc);
    let p1 = 1.0 - 2.0 * zc;
    let q0 = c - (a + b + 1.0) * zc;
    let q1 = -(a + b + 1.0);
    let r = -a * b;
    // s_n = t_n h^n
    let (mut s0, mut s1) = (w, dw * h);
    let mut value = s0 + s1;
    let mut deriv = s1;
    let mut quiet = 0;
    for n in 0..MAX_TERMS {
        let nf = n as f64;
        let s2 = -((p1 * nf + q0) * (nf + 1.0) * s1 * h + (-nf * (nf - 1.0) + q1 * nf + r) * s0 * h * h)
            / (p0 * (nf + 2.0) * (nf + 1.0));
        value += s2;
        deriv += s2 * (nf + 2.0);
        let scale = value.norm() + deriv.norm();
        if s2.norm() * (nf + 3.0) <= 1e-17 * scale {
            quiet += 1;
            if quiet >= 3 {
                return Ok((value, deriv / h));
            }
        } else {
            quiet = 0;
        }
        s0 = s1;
        s1 = s2;
    }
    Err(SpecialError::NotConverged { attained: s1.norm() / value.norm() })
}
