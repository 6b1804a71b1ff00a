//! Direct quadrature of g_jk = ∫ z̄^j z^k Π|z−ζ_a|^{−2Φ'_a} d²z.
//!
//! The plane is split by a smooth partition of unity
//! w_a = 1 / (1 + Σ_{b≠a} (|z−ζ_a|/|z−ζ_b|)^6), and each piece is integrated
//! in polar coordinates about its own fluxon. w_a vanishes to sixth order at
//! the other fluxons, so every piece has a single singular point at its
//! centre. Three radial ranges: a disk flattened by r = s^{1/(2−2Φ'_a)}, a
//! middle range with breakpoints at the other fluxons' radii, and an
//! algebraic tail map r = R t^{−1/γ} with γ = 2(Φ'_T − D_f) set by the slowest
//! decaying entry.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rayon::prelude::*;

use super::{check_free_modes, Metric, MetricError, Method};
use crate::config::ValidatedConfig;
use crate::linalg::CMatrix;
use crate::quadrature::{integrate, QuadOptions, QuadResult};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BruteForceOptions {
    pub tol: f64,
    pub max_intervals: usize,
}

impl BruteForceOptions {
    pub fn new(tol: f64) -> Self {
        Self { tol, max_intervals: 4000 }
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Piece {
    Disk,
    Middle,
    Tail,
}

struct Setup<'a> {
    pos: &'a [Complex64],
    phi: &'a [f64],
    total: f64,
    d: usize,
    entries: Vec<(usize, usize)>,
}

impl Setup<'_> {
    fn weight(&self, a: usize, z: Complex64, r: f64) -> f64 {
        let r2 = r * r;
        let mut s = 1.0;
        for (b, &zb) in self.pos.iter().enumerate() {
            if b != a {
                let q = r2 / (z - zb).norm_sqr();
                s += q * q * q;
            }
        }
        1.0 / s
    }

    /// Angular integrand for piece `piece` of partition `a` at radius r.
    fn angular(&self, a: usize, r: f64, piece: Piece, theta: f64, out: &mut [Complex64]) {
        let e = Complex64::from_polar(1.0, theta);
        let z = self.pos[a] + e * r;
        let w = self.weight(a, z, r);
        let mut log = 0.0;
        for (b, (&zb, &f)) in self.pos.iter().zip(self.phi).enumerate() {
            if piece == Piece::Disk && b == a {
                continue;
            }
            let dist = (z - zb).norm();
            log -= 2.0 * f * if piece == Piece::Tail { (dist / r).ln() } else { dist.ln() };
        }
        let base = w * log.exp() * if piece == Piece::Middle { r } else { 1.0 };
        let zz = if piece == Piece::Tail { z / r } else { z };
        let mut pw = vec![Complex64::new(1.0, 0.0); self.d];
        for j in 1..self.d {
            pw[j] = pw[j - 1] * zz;
        }
        for (o, &(j, k)) in out.iter_mut().zip(&self.entries) {
            *o = pw[j].conj() * pw[k] * base;
        }
    }

    fn circle(&self, a: usize, r: f64, piece: Piece, tol: f64) -> QuadResult {
        let mut cuts: Vec<f64> = self
            .pos
            .iter()
            .enumerate()
            .filter(|&(b, _)| b != a)
            .map(|(_, &zb)| (zb - self.pos[a]).arg().rem_euclid(TAU))
            .collect();
        cuts.push(0.0);
        cuts.push(TAU);
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        let opts = QuadOptions { abs_tol: 0.0, rel_tol: tol, max_intervals: 2000 };
        match integrate(|t, out| self.angular(a, r, piece, t, out), &cuts, self.entries.len(), &opts) {
            Ok(r) => r,
            // Keep the best estimate; the outer rule sees the noise and the
            // reported error carries it.
            Err(e) => QuadResult { value: e.value, error: e.error, evaluations: 0 },
        }
    }
}

/// Brute-force metric at relative tolerance `tol`.
pub fn metric_bruteforce(config: &ValidatedConfig, tol: f64) -> Result<Metric, MetricError> {
    metric_bruteforce_with(config, BruteForceOptions::new(tol))
}

pub fn metric_bruteforce_with(config: &ValidatedConfig, opts: BruteForceOptions) -> Result<Metric, MetricError> {
    let d = check_free_modes(config)?;
    let phi = config.phi_prime();
    let total: f64 = phi.iter().sum();
    let gamma = 2.0 * (total - d as f64);
    if gamma <= 0.0 {
        return Err(MetricError::DivergentIntegral(format!("Φ'_T = {total} does not exceed D_f = {d}")));
    }
    let mut entries = Vec::new();
    for j in 0..d {
        for k in j..d {
            entries.push((j, k));
        }
    }
    let setup = Setup { pos: config.positions(), phi, total, d, entries };
    let n = config.len();
    let inner_tol = opts.tol / 20.0;
    let outer = QuadOptions { abs_tol: 0.0, rel_tol: opts.tol / 4.0, max_intervals: opts.max_intervals };
    let m = setup.entries.len();

    let tasks: Vec<(usize, Piece)> =
        (0..n).flat_map(|a| [Piece::Disk, Piece::Middle, Piece::Tail].map(|p| (a, p))).collect();
    let parts: Vec<Result<QuadResult, MetricError>> = tasks
        .par_iter()
        .map(|&(a, piece)| {
            let s = &setup;
            let rho = 0.5 * config.config().nearest_distance(a);
            let radii: Vec<f64> = (0..n).filter(|&b| b != a).map(|b| (s.pos[b] - s.pos[a]).norm()).collect();
            let r_far = 2.0 * radii.iter().cloned().fold(rho, f64::max);
            let r = match piece {
                Piece::Disk => {
                    let beta = 1.0 / (2.0 - 2.0 * phi[a]);
                    integrate(
                        |t, out| {
                            let c = s.circle(a, t.powf(beta), Piece::Disk, inner_tol);
                            for (o, v) in out.iter_mut().zip(c.value) {
                                *o = v * beta;
                            }
                        },
                        &[0.0, rho.powf(1.0 / beta)],
                        m,
                        &outer,
                    )?
                }
                Piece::Middle => {
                    let mut pts = vec![rho, r_far];
                    pts.extend(radii.iter().copied().filter(|&x| x > rho && x < r_far));
                    pts.sort_by(f64::total_cmp);
                    integrate(
                        |r, out| {
                            let c = s.circle(a, r, Piece::Middle, inner_tol);
                            out.copy_from_slice(&c.value);
                        },
                        &pts,
                        m,
                        &outer,
                    )?
                }
                Piece::Tail => integrate(
                    |t, out| {
                        let log_r = r_far.ln() - t.ln() / gamma;
                        let r = log_r.min(550.0).exp();
                        let c = s.circle(a, r, Piece::Tail, inner_tol);
                        for (o, (v, &(j, k))) in out.iter_mut().zip(c.value.into_iter().zip(&s.entries)) {
                            let extra = (2 * d - 2 - j - k) as f64 / gamma;
                            let pre = ((2.0 + (j + k) as f64 - 2.0 * s.total) * r_far.ln() + extra * t.ln()).exp()
                                / gamma;
                            *o = v * pre;
                        }
                    },
                    &[0.0, 1.0],
                    m,
                    &outer,
                )?,
            };
            Ok(r)
        })
        .collect();

    let mut sum = vec![Complex64::new(0.0, 0.0); m];
    let mut error = 0.0;
    for p in parts {
        let p = p?;
        for (s, v) in sum.iter_mut().zip(p.value) {
            *s += v;
        }
        error += p.error;
    }
    let mut g = CMatrix::zeros(d, d);
    for (v, &(j, k)) in sum.iter().zip(&setup.entries) {
        g[(j, k)] = *v;
        g[(k, j)] = v.conj();
    }
    for j in 0..d {
        g[(j, j)].im = 0.0;
    }
    Ok(Metric { g, method: Method::Bruteforce, error_estimate: error })
}
