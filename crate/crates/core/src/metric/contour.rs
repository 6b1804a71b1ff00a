//! Contour integrals Ψ_{aj} = ∫_{ξ₀}^{ζ_a} ξ^j ψ₀(ξ) dξ.
//!
//! Work is done in a frame rotated so that all cuts point along +x. Paths
//! leave the base point horizontally to a vertical line left of every
//! fluxon, run along it to the height of ζ_a and approach ζ_a from the left,
//! so they never cross a cut. The final approach uses s = t^{1/(1−Φ'_a)} to
//! flatten the endpoint singularity.

use num_complex::Complex64;

use super::{check_free_modes, MetricError};
use crate::config::{cut_order_in_direction, CutConvention, ValidatedConfig};
use crate::linalg::CMatrix;
use crate::modes::BranchSheet;
use crate::quadrature::{integrate, QuadOptions};

/// Choice of the lower integration limit ξ₀ (the columns of Ψ are defined up
/// to additive constants, which do not affect the metric).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gauge {
    /// A point left of and below every fluxon, chosen automatically.
    Auto,
    /// A given point ξ₀ (original coordinates), off every cut.
    Point(Complex64),
    /// ξ₀ = ζ_k: row k of Ψ vanishes.
    Fluxon(usize),
}

/// N × D_f matrix Ψ with the conventions it was computed in.
#[derive(Debug, Clone, PartialEq)]
pub struct PsiMatrix {
    pub psi: CMatrix,
    pub gauge: Gauge,
    /// Cut convention of the branch of ψ₀ used for the integrand.
    pub cut: CutConvention,
    /// Estimated absolute error of the entries.
    pub error: f64,
}

struct Integrand<'a> {
    positions: &'a [Complex64],
    fluxes: &'a [f64],
    angles: &'a [f64],
    dim: usize,
}

impl Integrand<'_> {
    /// ξ^j Π_{b≠skip} (ξ−ζ_b)^{−Φ_b} · factor, written into `out`.
    fn eval(&self, xi: Complex64, skip: Option<usize>, factor: Complex64, out: &mut [Complex64]) {
        let mut log = Complex64::new(0.0, 0.0);
        for (b, ((&z, &f), &c)) in self.positions.iter().zip(self.fluxes).zip(self.angles).enumerate() {
            if Some(b) == skip {
                continue;
            }
            let w = xi - z;
            log -= f * Complex64::new(w.norm().ln(), BranchSheet::arg_in_window(w, c));
        }
        let mut v = log.exp() * factor;
        for o in out.iter_mut().take(self.dim) {
            *o = v;
            v *= xi;
        }
    }

    /// Parameters in [0,1] of the points on P→Q closest to each fluxon.
    fn breakpoints(&self, p: Complex64, q: Complex64) -> Vec<f64> {
        let d = q - p;
        let mut ts: Vec<f64> = self
            .positions
            .iter()
            .map(|&z| ((z - p) * d.conj()).re / d.norm_sqr())
            .filter(|&t| t > 1e-9 && t < 1.0 - 1e-9)
            .collect();
        ts.push(0.0);
        ts.push(1.0);
        ts.sort_by(f64::total_cmp);
        ts.dedup();
        ts
    }

    /// ∫_P^Q along a straight line with no fluxon at either end.
    fn plain(&self, p: Complex64, q: Complex64, tol: f64) -> Result<(Vec<Complex64>, f64), MetricError> {
        if p == q {
            return Ok((vec![Complex64::new(0.0, 0.0); self.dim], 0.0));
        }
        let d = q - p;
        let r = integrate(
            |t, out| self.eval(p + d * t, None, d, out),
            &self.breakpoints(p, q),
            self.dim,
            &QuadOptions::relative(tol),
        )?;
        Ok((r.value, r.error))
    }

    /// ∫ from fluxon `a` to Q along a straight line, endpoint flattened.
    fn integral_from_fluxon(&self, a: usize, q: Complex64, tol: f64) -> Result<(Vec<Complex64>, f64), MetricError> {
        let p = self.positions[a];
        let len = (q - p).norm();
        let e = (q - p) / len;
        let phi = self.fluxes[a];
        let beta = 1.0 / (1.0 - phi);
        let theta = BranchSheet::arg_in_window(e, self.angles[a]);
        let factor = e * beta * Complex64::from_polar(1.0, -phi * theta);
        let tmax = len.powf(1.0 / beta);
        let mut pts: Vec<f64> = self
            .breakpoints(p, q)
            .into_iter()
            .map(|t| (t * len).powf(1.0 / beta))
            .collect();
        pts[0] = 0.0;
        *pts.last_mut().expect("nonempty") = tmax;
        let r = integrate(
            |t, out| self.eval(p + e * t.powf(beta), Some(a), factor, out),
            &pts,
            self.dim,
            &QuadOptions::relative(tol),
        )?;
        Ok((r.value, r.error))
    }
}

fn add(acc: &mut (Vec<Complex64>, f64), part: (Vec<Complex64>, f64), sign: f64) {
    for (x, y) in acc.0.iter_mut().zip(part.0) {
        *x += sign * y;
    }
    acc.1 += part.1;
}

/// Ψ with cuts along +x (fails with PathBlocked if two cuts are collinear).
pub fn psi_matrix(config: &ValidatedConfig, gauge: Gauge, tol: f64) -> Result<PsiMatrix, MetricError> {
    psi_matrix_in_direction(config, gauge, Complex64::new(1.0, 0.0), tol)
}

/// Ψ for cuts along `direction`: the factor (ξ−ζ_b)^{−Φ'_b} takes its
/// argument in (α, α+2π), α = arg(direction).
pub fn psi_matrix_in_direction(
    config: &ValidatedConfig,
    gauge: Gauge,
    direction: Complex64,
    tol: f64,
) -> Result<PsiMatrix, MetricError> {
    let dim = check_free_modes(config)?;
    let cut = cut_order_in_direction(config.config(), direction)
        .map_err(|e| MetricError::PathBlocked(e.to_string()))?;
    let d = cut.direction;
    let n = config.len();
    let w: Vec<Complex64> = config.positions().iter().map(|z| z * d.conj()).collect();
    let fluxes = config.phi_prime();
    let angles = vec![0.0; n];
    let f = Integrand { positions: &w, fluxes, angles: &angles, dim };

    let scale = config.config().diameter().max(1e-300);
    let min_re = w.iter().map(|z| z.re).fold(f64::INFINITY, f64::min);
    let min_im = w.iter().map(|z| z.im).fold(f64::INFINITY, f64::min);
    let base_rot = match gauge {
        Gauge::Point(xi) => Some(xi * d.conj()),
        _ => None,
    };
    let x_left = min_re.min(base_rot.map_or(f64::INFINITY, |b| b.re)) - 0.5 * scale;

    // Common leg from the base point to the vertical line x = x_left.
    let (start_y, lead) = match base_rot {
        Some(b) => {
            for (k, z) in w.iter().enumerate() {
                if z.re < b.re && (z.im - b.im).abs() <= 1e-12 * scale {
                    return Err(MetricError::PathBlocked(format!("base point lies on the cut of fluxon {k}")));
                }
            }
            (b.im, f.plain(b, Complex64::new(x_left, b.im), tol)?)
        }
        None => (min_im, (vec![Complex64::new(0.0, 0.0); dim], 0.0)),
    };

    let mut psi = CMatrix::zeros(n, dim);
    let mut error = 0.0;
    for a in 0..n {
        let corner = Complex64::new(x_left, w[a].im);
        let mut acc = lead.clone();
        add(&mut acc, f.plain(Complex64::new(x_left, start_y), corner, tol)?, 1.0);
        add(&mut acc, f.integral_from_fluxon(a, corner, tol)?, -1.0);
        for j in 0..dim {
            psi[(a, j)] = acc.0[j];
        }
        error += acc.1;
    }

    if let Gauge::Fluxon(k) = gauge {
        let row = psi.row(k).into_owned();
        for a in 0..n {
            let r = psi.row(a) - &row;
            psi.set_row(a, &r);
        }
        error *= 2.0;
    }

    // Back to the original frame: ξ = d·x gives ξ^j dξ = d^{j+1} x^j dx and
    // (ξ − ζ_b)^{−Φ} = e^{−iΦα} (x − w_b)^{−Φ}.
    let total: f64 = fluxes.iter().sum();
    let alpha = d.arg();
    let mut col_factor = Complex64::from_polar(1.0, -total * alpha) * d;
    for j in 0..dim {
        for a in 0..n {
            psi[(a, j)] *= col_factor;
        }
        col_factor *= d;
    }
    Ok(PsiMatrix { psi, gauge, cut, error })
}

/// ∫_P^Q ξ^j ψ₀(ξ) dξ (j < D_f) along the straight segment on a given sheet.
/// Either end may sit on a fluxon. The segment must not cross any cut.
pub fn segment_integral(
    config: &ValidatedConfig,
    sheet: &BranchSheet,
    p: Complex64,
    q: Complex64,
    tol: f64,
) -> Result<(Vec<Complex64>, f64), MetricError> {
    let dim = check_free_modes(config)?;
    let f = Integrand { positions: config.positions(), fluxes: config.phi_prime(), angles: &sheet.cut_angles, dim };
    let scale = config.config().diameter().max(1e-300);
    let at = |z: Complex64| config.positions().iter().position(|&w| (w - z).norm() <= 1e-14 * scale);
    let (pa, qa) = (at(p), at(q));
    for (b, (&z, &c)) in config.positions().iter().zip(&sheet.cut_angles).enumerate() {
        if Some(b) == pa || Some(b) == qa {
            continue;
        }
        if crosses_ray(p, q, z, Complex64::from_polar(1.0, c)) {
            return Err(MetricError::PathBlocked(format!("segment crosses the cut of fluxon {b}")));
        }
    }
    let mut acc = (vec![Complex64::new(0.0, 0.0); dim], 0.0);
    match (pa, qa) {
        (None, None) => add(&mut acc, f.plain(p, q, tol)?, 1.0),
        (Some(a), None) => add(&mut acc, f.integral_from_fluxon(a, q, tol)?, 1.0),
        (None, Some(b)) => add(&mut acc, f.integral_from_fluxon(b, p, tol)?, -1.0),
        (Some(a), Some(b)) => {
            let m = 0.5 * (p + q);
            add(&mut acc, f.integral_from_fluxon(a, m, tol)?, 1.0);
            add(&mut acc, f.integral_from_fluxon(b, m, tol)?, -1.0);
        }
    }
    Ok(acc)
}

fn crosses_ray(p: Complex64, q: Complex64, origin: Complex64, dir: Complex64) -> bool {
    // Solve p + τ(q−p) = origin + λ·dir.
    let d = q - p;
    let cross = |u: Complex64, v: Complex64| u.re * v.im - u.im * v.re;
    let den = cross(d, dir);
    let r = origin - p;
    if den == 0.0 {
        // Parallel: overlapping only if collinear and the ray reaches the segment.
        if cross(r, d).abs() > 1e-14 * d.norm() * r.norm().max(1.0) {
            return false;
        }
        let t0 = (r * d.conj()).re / d.norm_sqr();
        let ahead = (dir * d.conj()).re > 0.0;
        return if ahead { t0 < 1.0 } else { t0 > 0.0 };
    }
    let tau = cross(r, dir) / den;
    let lambda = cross(r, d) / den;
    tau > 0.0 && tau < 1.0 && lambda >= 0.0
}
