//! Analytic monodromy of Ψ under braiding and the holonomy it induces on the
//! free modes when D_f = N − 1.
//!
//! Monodromy matrices act on rows of Ψ. Inside a word they are built in
//! cut-order positions (position p is the p-th cut met counter-clockwise at
//! infinity, i.e. ascending imaginary part for +x cuts) and returned in
//! fluxon labels. A word m₁m₂…m_k, performed left to right, has monodromy
//! M₁M₂…M_k: each later loop continues every branch of the earlier result.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::{cut_order, nu, ConfigError, ValidatedConfig};
use crate::linalg::{eigenvalues, inverse, CMatrix};
use crate::metric::{metric_factorized, psi_matrix, Gauge, MetricError};
use crate::transport::{HolonomyResult, StepStats};

/// Tolerance on flux equality for exchanges.
pub const IDENTICAL_FLUX_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MonodromyError {
    #[error("fluxons {a} and {b} are not adjacent in cut order")]
    NonAdjacentEncircle { a: usize, b: usize },
    #[error("exchanges need all fluxes equal")]
    ExchangeOnDistinctFluxes,
    #[error("index {0} out of range")]
    IndexOutOfRange(usize),
    #[error("analytic holonomy needs D_f = N − 1 (found D_f = {d_f}, N = {n})")]
    NotMaximalFreeModes { d_f: usize, n: usize },
    #[error("fluxon {0} carries no confined mode")]
    NotConfined(usize),
    #[error("reduced Ψ is singular")]
    SingularPsi,
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Metric(#[from] MetricError),
}

impl MonodromyError {
    pub fn is_convergence(&self) -> bool {
        match self {
            MonodromyError::Metric(m) => m.is_convergence(),
            MonodromyError::SingularPsi => true,
            _ => false,
        }
    }
}

/// A braid generator. Encircle takes fluxon labels, Exchange a strand
/// position (the pair at positions i, i+1). Positive powers are
/// counter-clockwise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Move {
    Encircle { a: usize, b: usize, power: i32 },
    Exchange { strand: usize, power: i32 },
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct BraidWord {
    pub moves: Vec<Move>,
}

impl BraidWord {
    pub fn new(moves: Vec<Move>) -> Self {
        Self { moves }
    }

    /// The word undoing this one.
    pub fn inverse(&self) -> Self {
        let moves = self
            .moves
            .iter()
            .rev()
            .map(|m| match *m {
                Move::Encircle { a, b, power } => Move::Encircle { a, b, power: -power },
                Move::Exchange { strand, power } => Move::Exchange { strand, power: -power },
            })
            .collect();
        Self { moves }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonodromyMatrix {
    /// N × N, rows and columns indexed by fluxon label.
    pub m: CMatrix,
    pub word: BraidWord,
}

/// Block for fluxon a encircling its successor b counter-clockwise.
pub fn encircle_block(nu_a: Complex64, nu_b: Complex64) -> CMatrix {
    let one = Complex64::new(1.0, 0.0);
    CMatrix::from_row_slice(2, 2, &[one - nu_a + nu_a * nu_b, nu_a * (one - nu_b), one - nu_a, nu_a])
}

/// Burau block for exchanging two identical fluxons.
pub fn exchange_block(nu: Complex64) -> CMatrix {
    let one = Complex64::new(1.0, 0.0);
    CMatrix::from_row_slice(2, 2, &[one - nu, nu, one, Complex64::new(0.0, 0.0)])
}

fn embed(block: &CMatrix, at: usize, n: usize) -> CMatrix {
    let mut m = CMatrix::identity(n, n);
    m.view_mut((at, at), (2, 2)).copy_from(block);
    m
}

fn power(block: CMatrix, inverse: CMatrix, k: i32) -> CMatrix {
    let base = if k < 0 { inverse } else { block };
    let mut out = CMatrix::identity(2, 2);
    for _ in 0..k.unsigned_abs() {
        out = &out * &base;
    }
    out
}

/// M(ν_a, ν_b)⁻¹ = σ_x M(ν̄_b, ν̄_a) σ_x for unimodular ν, which keeps unit row
/// sums exact where a numerical inverse would not.
fn encircle_inverse(nu_a: Complex64, nu_b: Complex64) -> CMatrix {
    let m = encircle_block(nu_b.conj(), nu_a.conj());
    CMatrix::from_row_slice(2, 2, &[m[(1, 1)], m[(1, 0)], m[(0, 1)], m[(0, 0)]])
}

fn exchange_inverse(nu: Complex64) -> CMatrix {
    let one = Complex64::new(1.0, 0.0);
    CMatrix::from_row_slice(2, 2, &[Complex64::new(0.0, 0.0), one, nu.conj(), one - nu.conj()])
}

/// Monodromy of `word` for `fluxes` with cut order `order` (order[p] is the
/// label at position p), returned in label indexing.
pub fn word_to_monodromy_ordered(
    word: &BraidWord,
    fluxes: &[f64],
    order: &[usize],
) -> Result<MonodromyMatrix, MonodromyError> {
    let n = fluxes.len();
    let mut assign = order.to_vec();
    let mut m = CMatrix::identity(n, n);
    for mv in &word.moves {
        match *mv {
            Move::Encircle { a, b, power: k } => {
                for i in [a, b] {
                    if i >= n {
                        return Err(MonodromyError::IndexOutOfRange(i));
                    }
                }
                let pa = assign.iter().position(|&x| x == a).expect("permutation");
                let pb = assign.iter().position(|&x| x == b).expect("permutation");
                if pa.abs_diff(pb) != 1 {
                    return Err(MonodromyError::NonAdjacentEncircle { a, b });
                }
                // A full loop of a around b is the same braid as b around a.
                let lo = pa.min(pb);
                let (na, nb) = (nu(fluxes[assign[lo]]), nu(fluxes[assign[lo + 1]]));
                m *= embed(&power(encircle_block(na, nb), encircle_inverse(na, nb), k), lo, n);
            }
            Move::Exchange { strand, power: k } => {
                if strand + 1 >= n {
                    return Err(MonodromyError::IndexOutOfRange(strand));
                }
                if fluxes.iter().any(|f| (f - fluxes[0]).abs() > IDENTICAL_FLUX_TOL) {
                    return Err(MonodromyError::ExchangeOnDistinctFluxes);
                }
                let v = nu(fluxes[0]);
                m *= embed(&power(exchange_block(v), exchange_inverse(v), k), strand, n);
                if k % 2 != 0 {
                    assign.swap(strand, strand + 1);
                }
            }
        }
    }
    // Every block fixes 1_N; restore that exactly after rounding in the products.
    for a in 0..n {
        let off: Complex64 = (0..n).filter(|&b| b != a).map(|b| m[(a, b)]).sum();
        m[(a, a)] = Complex64::new(1.0, 0.0) - off;
    }
    // Position p holds label order[p]: M_label = Pᵀ M P with P[p][order[p]] = 1.
    let m = CMatrix::from_fn(n, n, |a, b| {
        let pa = order.iter().position(|&x| x == a).expect("permutation");
        let pb = order.iter().position(|&x| x == b).expect("permutation");
        m[(pa, pb)]
    });
    Ok(MonodromyMatrix { m, word: word.clone() })
}

/// Monodromy of `word` in the +x cut convention of `config`.
pub fn word_to_monodromy(word: &BraidWord, config: &ValidatedConfig) -> Result<MonodromyMatrix, MonodromyError> {
    let order = cut_order(config)?.order;
    word_to_monodromy_ordered(word, config.fluxes(), &order)
}

/// Coordinates of v + ℂ1_N in the basis e_a − e_N (a < N): v_a − mean(v).
fn quotient_coords(v: impl Iterator<Item = Complex64> + Clone, n: usize) -> Vec<Complex64> {
    let mean = v.clone().sum::<Complex64>() / n as f64;
    v.take(n - 1).map(|x| x - mean).collect()
}

/// Matrix of the map induced on ℂ^N/ℂ1_N in the basis e_a − e_N.
pub fn reduce(m: &CMatrix) -> CMatrix {
    let n = m.nrows();
    let l = n - 1;
    let mut out = CMatrix::zeros(l, l);
    for b in 0..l {
        let image = m.column(b) - m.column(l);
        for (a, x) in quotient_coords(image.iter().copied(), n).into_iter().enumerate() {
            out[(a, b)] = x;
        }
    }
    out
}

/// Ψ mapped into the quotient, in the same basis as `reduce`.
pub fn reduce_psi(psi: &CMatrix) -> CMatrix {
    let n = psi.nrows();
    let mut out = CMatrix::zeros(n - 1, psi.ncols());
    for j in 0..psi.ncols() {
        for (a, x) in quotient_coords(psi.column(j).iter().copied(), n).into_iter().enumerate() {
            out[(a, j)] = x;
        }
    }
    out
}

/// Hermitian form induced by G on the quotient, same basis.
pub fn reduce_form(g: &CMatrix) -> CMatrix {
    let l = g.nrows() - 1;
    CMatrix::from_fn(l, l, |a, b| g[(a, b)] - g[(a, l)] - g[(l, b)] + g[(l, l)])
}

/// u = Ψ̃⁻¹ M̃⁻¹ Ψ̃ (D_f = N − 1).
pub fn holonomy_analytic(config: &ValidatedConfig, word: &BraidWord, tol: f64) -> Result<HolonomyResult, MonodromyError> {
    let n = config.len();
    let d = config.d_f();
    if d + 1 != n {
        return Err(MonodromyError::NotMaximalFreeModes { d_f: d, n });
    }
    let mono = word_to_monodromy(word, config)?;
    let psi = reduce_psi(&psi_matrix(config, Gauge::Auto, tol)?.psi);
    let psi_inv = inverse(&psi).ok_or(MonodromyError::SingularPsi)?;
    let m_inv = inverse(&reduce(&mono.m)).ok_or(MonodromyError::SingularPsi)?;
    let u = &psi_inv * m_inv * &psi;
    let g = metric_factorized(config, tol)?.g;
    let drift = (u.adjoint() * &g * &u - &g).norm() / g.norm();
    let eigenvalues = eigenvalues(&u);
    let eigenphases = eigenvalues.iter().map(|z| z.arg()).collect();
    Ok(HolonomyResult { u, eigenvalues, eigenphases, drift, base_metric: g, stats: StepStats::default() })
}

/// Aharonov–Bohm phase of the mode confined to fluxon `a` when fluxon b
/// winds windings[b] times around it: Σ_b 2π w_b Φ'_b.
pub fn confined_phase(windings: &[i32], a: usize, fluxes: &[f64]) -> Result<f64, MonodromyError> {
    if a >= fluxes.len() {
        return Err(MonodromyError::IndexOutOfRange(a));
    }
    if windings.len() != fluxes.len() {
        return Err(MonodromyError::IndexOutOfRange(windings.len()));
    }
    let counts = crate::config::count_modes(fluxes);
    if counts.n[a] == 0 {
        return Err(MonodromyError::NotConfined(a));
    }
    Ok(windings
        .iter()
        .zip(&counts.phi_prime)
        .enumerate()
        .filter(|&(b, _)| b != a)
        .map(|(_, (&w, &f))| TAU * w as f64 * f)
        .sum())
}

/// Berry phase 2π(Φ'_T − k − 1) of mode z^k under one rigid 2π rotation.
pub fn rigid_rotation_phase(k: usize, phi_t_prime: f64) -> f64 {
    TAU * (phi_t_prime - k as f64 - 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn encircle_block_properties() {
        let one = c(1., 0.);
        assert_eq!(encircle_block(one, one), CMatrix::identity(2, 2));
        let m = encircle_block(c(0., 1.), c(0., 1.));
        let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
        assert!((det + 1.0).norm() < 1e-15);
        let ev = eigenvalues(&m);
        assert!((ev[0] - c(-1., 0.)).norm() < 1e-12 || (ev[1] - c(-1., 0.)).norm() < 1e-12);
    }

    #[test]
    fn exchange_squares_to_encircle() {
        let v = Complex64::from_polar(1.0, 0.7);
        let e = exchange_block(v);
        assert!((&e * &e - encircle_block(v, v)).norm() < 1e-14);
        assert_eq!(exchange_block(c(1., 0.)), CMatrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)]));
    }

    #[test]
    fn labels_follow_cut_order() {
        // Labels 0,1,2 at positions 2,0,1: encircling 1 and 2 acts on labels 1, 2.
        let word = BraidWord::new(vec![Move::Encircle { a: 1, b: 2, power: 1 }]);
        let m = word_to_monodromy_ordered(&word, &[0.3, 0.4, 0.6], &[1, 2, 0]).unwrap().m;
        assert_eq!(m[(0, 0)], c(1., 0.));
        assert_eq!(m[(0, 1)], c(0., 0.));
        let block = encircle_block(nu(0.4), nu(0.6));
        assert!((m[(1, 2)] - block[(0, 1)]).norm() < 1e-15);
        let bad = BraidWord::new(vec![Move::Encircle { a: 0, b: 1, power: 1 }]);
        assert!(matches!(
            word_to_monodromy_ordered(&bad, &[0.3, 0.4, 0.6], &[1, 2, 0]),
            Err(MonodromyError::NonAdjacentEncircle { .. })
        ));
    }

    #[test]
    fn confined_phase_values() {
        let f = [2.5, 0.3, 0.6];
        assert!((confined_phase(&[0, 1, 0], 0, &f).unwrap() - TAU * 0.3).abs() < 1e-15);
        assert!((confined_phase(&[0, 2, 0], 0, &f).unwrap() - 1.2 * std::f64::consts::PI).abs() < 1e-14);
        assert_eq!(confined_phase(&[0, 0, 0], 0, &f).unwrap(), 0.0);
        assert_eq!(confined_phase(&[1, 0, 0], 1, &f), Err(MonodromyError::NotConfined(1)));
    }
}
