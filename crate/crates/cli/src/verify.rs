//! Randomized invariant suite. Every draw comes from one ChaCha stream seeded
//! by --seed and properties run in a fixed order, so a seed fixes the report.

use std::f64::consts::TAU;

use fluxon_core::config::{count_modes, cut_separation, validate, working_direction, FluxConfig, ValidatedConfig};
use fluxon_core::linalg::{hermitian_eigenvalues, hermiticity_defect, relative_difference, CMatrix};
use fluxon_core::metric::{
    g_matrix, g_matrix_factored, metric_bruteforce, metric_factorized, metric_factorized_in_direction, Gauge,
    DEFAULT_BRUTEFORCE_TOL,
};
use fluxon_core::monodromy::{holonomy_analytic, word_to_monodromy_ordered, BraidWord, Move};
use fluxon_core::special::metric_half_fluxes;
use fluxon_core::transport::{holonomy, ControlPath, Segment, TransportOptions};
use fluxon_core::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::schema::{PropertyResult, RunManifest, VerifyReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    /// Closed forms and factorized metrics only.
    Quick,
    /// Adds brute-force quadrature and numerical transport.
    Full,
}

/// Factorized metrics in the suite are computed at this tolerance.
const FAC_TOL: f64 = 1e-10;

type Check = Result<f64, String>;

struct Suite {
    rng: ChaCha8Rng,
    results: Vec<PropertyResult>,
}

impl Suite {
    /// Runs `cases` draws of `case`, keeping the largest defect. The first
    /// error stops the property and fails it.
    fn property(&mut self, name: &str, cases: usize, tolerance: f64, mut case: impl FnMut(&mut ChaCha8Rng) -> Check) {
        let mut worst: f64 = 0.0;
        let mut error = None;
        for _ in 0..cases {
            match case(&mut self.rng) {
                Ok(d) => worst = worst.max(d),
                Err(e) => {
                    error = Some(e);
                    break;
                }
            }
        }
        let passed = error.is_none() && worst <= tolerance;
        self.results.push(PropertyResult { name: name.into(), cases, worst, tolerance, passed, error });
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn err(e: impl std::fmt::Display) -> String {
    e.to_string()
}

/// Subcritical fluxes whose total stays clear of integers.
fn fluxes(rng: &mut ChaCha8Rng, n: usize, min_total: f64) -> Vec<f64> {
    loop {
        let f: Vec<f64> = (0..n).map(|_| rng.gen_range(0.05..0.95)).collect();
        let t: f64 = f.iter().sum();
        if t > min_total && (t - t.round()).abs() > 0.02 {
            return f;
        }
    }
}

/// Positions in a box with pairwise separation at least 0.3.
fn positions(rng: &mut ChaCha8Rng, n: usize) -> Vec<Complex64> {
    loop {
        let p: Vec<Complex64> = (0..n).map(|_| c(rng.gen_range(-1.5..1.5), rng.gen_range(-1.5..1.5))).collect();
        if FluxConfig::new(vec![0.5; n], p.clone()).min_separation() >= 0.3 {
            return p;
        }
    }
}

fn config(rng: &mut ChaCha8Rng, n: usize) -> Result<ValidatedConfig, String> {
    let f = fluxes(rng, n, 1.0);
    let p = positions(rng, n);
    validate(FluxConfig::new(f, p)).map_err(err)
}

/// Largest integer strictly below x, counted rather than computed.
fn integers_below(x: f64) -> usize {
    let mut k = 0;
    while ((k + 1) as f64) < x {
        k += 1;
    }
    k
}

fn random_word(rng: &mut ChaCha8Rng, n: usize, identical: bool) -> Vec<Move> {
    // Encircles are drawn by cut position and relabelled as exchanges permute strands.
    let mut assign: Vec<usize> = (0..n).collect();
    (0..rng.gen_range(1..=8))
        .map(|_| {
            let i = rng.gen_range(0..n - 1);
            let power = [-2, -1, 1, 2][rng.gen_range(0..4)];
            if identical && rng.gen_bool(0.5) {
                if power % 2 != 0 {
                    assign.swap(i, i + 1);
                }
                Move::Exchange { strand: i, power }
            } else {
                Move::Encircle { a: assign[i], b: assign[i + 1], power }
            }
        })
        .collect()
}

fn monodromy_case(rng: &mut ChaCha8Rng) -> Result<(Vec<f64>, CMatrix), String> {
    let n = rng.gen_range(2..=5);
    let identical = rng.gen_bool(0.5);
    let f = if identical { vec![fluxes(rng, 1, 0.0)[0]; n] } else { fluxes(rng, n, 0.0) };
    let moves = random_word(rng, n, identical);
    let order: Vec<usize> = (0..n).collect();
    let m = word_to_monodromy_ordered(&BraidWord::new(moves), &f, &order).map_err(err)?.m;
    Ok((f, m))
}

/// Angle between two points on the unit circle.
fn angle_gap(a: f64, b: f64) -> f64 {
    (a - b).rem_euclid(TAU).min((b - a).rem_euclid(TAU))
}

fn quick(s: &mut Suite) {
    s.property("mode_bookkeeping", 200, 0.0, |rng| {
        let n = rng.gen_range(1..=6);
        let f: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..3.5)).collect();
        let k = count_modes(&f);
        let total: f64 = f.iter().sum();
        let reduced: f64 = f.iter().map(|&x| x - integers_below(x) as f64).sum();
        let direct = k.d.abs_diff(integers_below(total)) + k.d_f.abs_diff(integers_below(reduced));
        // D = Σn + D_f needs every flux positive.
        let positive: Vec<f64> = f.iter().map(|x| x.abs().max(0.01)).collect();
        let kp = count_modes(&positive);
        let split = kp.d.abs_diff(kp.n.iter().sum::<usize>() + kp.d_f);
        Ok((split + direct) as f64)
    });
    s.property("g_matrix_structure", 200, 1e-12, |rng| {
        let n = rng.gen_range(2..=6);
        let f = fluxes(rng, n, 0.0);
        let g = g_matrix(&f).map_err(err)?.g;
        let ones = CMatrix::from_element(n, 1, c(1., 0.));
        let positive = hermitian_eigenvalues(&g).iter().filter(|&&e| e > 1e-10 * g.norm()).count();
        if positive != count_modes(&f).d_f {
            return Ok(f64::MAX);
        }
        Ok(((&g * ones).norm() / g.norm()).max(hermiticity_defect(&g)))
    });
    s.property("g_matrix_closed_form_vs_factored", 200, 1e-12, |rng| {
        let n = rng.gen_range(2..=6);
        let f = fluxes(rng, n, 0.0);
        Ok(relative_difference(&g_matrix_factored(&f).map_err(err)?, &g_matrix(&f).map_err(err)?.g))
    });
    s.property("monodromy_pseudo_unitarity", 100, 1e-12, |rng| {
        let (f, m) = monodromy_case(rng)?;
        let g = g_matrix(&f).map_err(err)?.g;
        // Indefinite form: rounding in M*GM scales with ‖M‖²‖G‖.
        Ok((m.adjoint() * &g * &m - &g).norm() / (m.norm().powi(2) * g.norm()))
    });
    s.property("monodromy_row_sums", 100, 1e-13, |rng| {
        let (f, m) = monodromy_case(rng)?;
        let ones = CMatrix::from_element(f.len(), 1, c(1., 0.));
        Ok((&m * &ones - &ones).norm())
    });
    s.property("metric_hermitian_positive", 10, 1e-12, |rng| {
        let n = rng.gen_range(2..=4);
        let v = config(rng, n)?;
        let g = metric_factorized(&v, FAC_TOL).map_err(err)?.g;
        let min = hermitian_eigenvalues(&g).into_iter().fold(f64::INFINITY, f64::min);
        Ok(if min > 0.0 { hermiticity_defect(&g) } else { f64::MAX })
    });
    s.property("metric_cut_direction_independence", 10, 1e-7, |rng| {
        let n = rng.gen_range(2..=4);
        let v = config(rng, n)?;
        let home = working_direction(v.config());
        let other = [0.9, 1.7, 2.5]
            .map(|t| Complex64::from_polar(1.0, t))
            .into_iter()
            .max_by(|a, b| cut_separation(v.config(), *a).total_cmp(&cut_separation(v.config(), *b)))
            .expect("three candidates");
        let a = metric_factorized_in_direction(&v, home, Gauge::Auto, FAC_TOL).map_err(err)?.g;
        let b = metric_factorized_in_direction(&v, other, Gauge::Auto, FAC_TOL).map_err(err)?.g;
        Ok(relative_difference(&b, &a))
    });
    s.property("metric_gauge_independence", 10, 1e-9, |rng| {
        let n = rng.gen_range(2..=4);
        let v = config(rng, n)?;
        let home = working_direction(v.config());
        let k = rng.gen_range(0..n);
        let a = metric_factorized_in_direction(&v, home, Gauge::Auto, FAC_TOL).map_err(err)?.g;
        let b = metric_factorized_in_direction(&v, home, Gauge::Fluxon(k), FAC_TOL).map_err(err)?.g;
        Ok(relative_difference(&b, &a))
    });
    s.property("half_flux_factorized_vs_elliptic", 10, 1e-8, |rng| {
        let u = half_flux_point(rng);
        let v = validate(FluxConfig::new(vec![0.5; 3], vec![c(0., 0.), c(1., 0.), u])).map_err(err)?;
        let g = metric_factorized(&v, FAC_TOL).map_err(err)?.g[(0, 0)].re;
        let exact = metric_half_fluxes(u).map_err(err)?;
        Ok((g - exact).abs() / exact)
    });
}

/// Third half flux position at least 0.3 from the other two.
fn half_flux_point(rng: &mut ChaCha8Rng) -> Complex64 {
    loop {
        let u = c(rng.gen_range(-1.0..2.0), rng.gen_range(-1.0..1.0));
        if u.norm() > 0.3 && (u - 1.0).norm() > 0.3 && u.im.abs() > 1e-3 {
            return u;
        }
    }
}

fn full(s: &mut Suite) {
    let fac_tol = FAC_TOL;
    s.property("metric_bruteforce_vs_factorized", 4, 5.0 * (DEFAULT_BRUTEFORCE_TOL + fac_tol), |rng| {
        let v = config(rng, 3)?;
        let bf = metric_bruteforce(&v, DEFAULT_BRUTEFORCE_TOL).map_err(err)?.g;
        let fac = metric_factorized(&v, fac_tol).map_err(err)?.g;
        Ok(relative_difference(&bf, &fac))
    });
    s.property("metric_bruteforce_vs_elliptic", 3, 1e-5, |rng| {
        let u = half_flux_point(rng);
        let v = validate(FluxConfig::new(vec![0.5; 3], vec![c(0., 0.), c(1., 0.), u])).map_err(err)?;
        let g = metric_bruteforce(&v, DEFAULT_BRUTEFORCE_TOL).map_err(err)?.g[(0, 0)].re;
        let exact = metric_half_fluxes(u).map_err(err)?;
        Ok((g - exact).abs() / exact)
    });
    s.property("two_fluxon_topological_phase", 3, 1e-5, |rng| {
        let f = fluxes(rng, 2, 1.0);
        let p = positions(rng, 2);
        let v = validate(FluxConfig::new(f.clone(), p.clone())).map_err(err)?;
        let path = ControlPath::new(p.clone(), vec![Segment::Circle { mover: 1, center: p[0], turns: 1.0 }]).map_err(err)?;
        let h = holonomy(&v, &path, &TransportOptions::default()).map_err(err)?;
        Ok(angle_gap(h.eigenphases[0], TAU * (f[0] + f[1] - 1.0)))
    });
    s.property("braid_holonomy_numeric_vs_analytic", 1, 1e-4, |_| {
        let p = vec![c(0., 0.), c(1., 0.4), c(-0.5, 1.2)];
        let v = validate(FluxConfig::new(vec![0.9; 3], p.clone())).map_err(err)?;
        let path = ControlPath::new(p, vec![Segment::Circle { mover: 1, center: c(0., 0.), turns: 1.0 }]).map_err(err)?;
        let numeric = holonomy(&v, &path, &TransportOptions::default()).map_err(err)?;
        let word = BraidWord::new(vec![Move::Encircle { a: 1, b: 0, power: 1 }]);
        let analytic = holonomy_analytic(&v, &word, FAC_TOL).map_err(err)?;
        Ok((&numeric.u - &analytic.u).iter().map(|z| z.norm()).fold(0.0, f64::max))
    });
}

pub fn verify(level: Level, seed: u64, manifest: RunManifest) -> VerifyReport {
    let mut suite = Suite { rng: ChaCha8Rng::seed_from_u64(seed), results: Vec::new() };
    quick(&mut suite);
    if level == Level::Full {
        full(&mut suite);
    }
    let passed = suite.results.iter().all(|r| r.passed);
    let level = match level {
        Level::Quick => "quick",
        Level::Full => "full",
    };
    VerifyReport { manifest, level: level.into(), properties: suite.results, passed }
}
