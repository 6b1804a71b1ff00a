//! Globally adaptive Gauss–Kronrod (10/21) quadrature for vector-valued
//! complex integrands, plus fixed Gauss–Legendre rules.

#![allow(clippy::excessive_precision)]

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex64;
use thiserror::Error;

const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_208_067_064_957,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

// Gauss weights for XGK[1], XGK[3], ..., XGK[9].
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl QuadOptions {
    pub fn relative(rel_tol: f64) -> Self {
        Self { abs_tol: 0.0, rel_tol, max_intervals: 4000 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadResult {
    pub value: Vec<Complex64>,
    /// Estimated absolute error (max over components).
    pub error: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("quadrature did not converge: estimated error {error:e} after {intervals} intervals")]
pub struct NotConverged {
    pub error: f64,
    pub intervals: usize,
    pub value: Vec<Complex64>,
}

struct Interval {
    a: f64,
    b: f64,
    value: Vec<Complex64>,
    error: f64,
    // Error estimate is pure rounding; splitting cannot reduce it.
    at_floor: bool,
}

impl PartialEq for Interval {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Interval {}
impl PartialOrd for Interval {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Interval {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn max_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// One 21-point Kronrod panel on [a,b]. `scratch` holds 21·dim values.
fn kronrod<F>(f: &mut F, a: f64, b: f64, dim: usize, scratch: &mut [Complex64]) -> Interval
where
    F: FnMut(f64, &mut [Complex64]),
{
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    // Node order: centre, then ±XGK[i] for i = 0..10.
    f(c, &mut scratch[..dim]);
    for i in 0..10 {
        let dx = h * XGK[i];
        f(c - dx, &mut scratch[(1 + 2 * i) * dim..(2 + 2 * i) * dim]);
        f(c + dx, &mut scratch[(2 + 2 * i) * dim..(3 + 2 * i) * dim]);
    }
    let at = |node: usize, k: usize| scratch[node * dim + k];
    let mut value = vec![Complex64::new(0.0, 0.0); dim];
    let mut error: f64 = 0.0;
    let mut at_floor = true;
    for k in 0..dim {
        let fc = at(0, k);
        let mut rk = fc * WGK[10];
        let mut rg = Complex64::new(0.0, 0.0);
        let mut rabs = fc.norm() * WGK[10];
        for i in 0..10 {
            let (m, p) = (at(1 + 2 * i, k), at(2 + 2 * i, k));
            rk += (m + p) * WGK[i];
            rabs += (m.norm() + p.norm()) * WGK[i];
            if i % 2 == 1 {
                rg += (m + p) * WG[i / 2];
            }
        }
        let mean = rk * 0.5;
        let mut rasc = WGK[10] * (fc - mean).norm();
        for i in 0..10 {
            rasc += WGK[i] * ((at(1 + 2 * i, k) - mean).norm() + (at(2 + 2 * i, k) - mean).norm());
        }
        let (rabs, rasc) = (rabs * h.abs(), rasc * h.abs());
        let mut err = ((rk - rg) * h).norm();
        if rasc != 0.0 && err != 0.0 {
            err = rasc * (200.0 * err / rasc).powf(1.5).min(1.0);
        }
        let floor = 50.0 * f64::EPSILON * rabs;
        if rabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) && err <= floor {
            err = floor;
        } else {
            at_floor = false;
        }
        value[k] = rk * h;
        error = error.max(err);
    }
    Interval { a, b, value, error, at_floor }
}

/// Integrates `f` over the piecewise interval given by `points` (sorted,
/// at least two entries). `f(x, out)` writes `dim` values into `out`.
pub fn integrate<F>(
    mut f: F,
    points: &[f64],
    dim: usize,
    opts: &QuadOptions,
) -> Result<QuadResult, NotConverged>
where
    F: FnMut(f64, &mut [Complex64]),
{
    assert!(points.len() >= 2, "need at least one interval");
    let mut scratch = vec![Complex64::new(0.0, 0.0); 21 * dim];
    let mut heap = BinaryHeap::new();
    let mut done = Vec::new();
    let mut evaluations = 0;
    for w in points.windows(2) {
        if w[1] > w[0] {
            let iv = kronrod(&mut f, w[0], w[1], dim, &mut scratch);
            evaluations += 21;
            if iv.at_floor {
                done.push(iv);
            } else {
                heap.push(iv);
            }
        }
    }
    let total = |heap: &BinaryHeap<Interval>, done: &[Interval]| {
        let mut v = vec![Complex64::new(0.0, 0.0); dim];
        let mut e = 0.0;
        for iv in heap.iter().chain(done.iter()) {
            for (s, x) in v.iter_mut().zip(&iv.value) {
                *s += x;
            }
            e += iv.error;
        }
        (v, e)
    };
    loop {
        let (value, error) = total(&heap, &done);
        let target = opts.abs_tol.max(opts.rel_tol * max_norm(&value));
        if error <= target || heap.is_empty() {
            return Ok(finish(heap, done, dim, evaluations));
        }
        if heap.len() + done.len() >= opts.max_intervals {
            return Err(NotConverged { error, intervals: heap.len() + done.len(), value });
        }
        let worst = heap.pop().expect("nonempty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Cannot be split further in floating point.
            done.push(worst);
            continue;
        }
        for (lo, hi) in [(worst.a, mid), (mid, worst.b)] {
            let iv = kronrod(&mut f, lo, hi, dim, &mut scratch);
            if iv.at_floor {
                done.push(iv);
            } else {
                heap.push(iv);
            }
        }
        evaluations += 42;
    }
}

// Sums in order of position so the result does not depend on heap layout.
fn finish(
    heap: BinaryHeap<Interval>,
    mut done: Vec<Interval>,
    dim: usize,
    evaluations: usize,
) -> QuadResult {
    done.extend(heap);
    done.sort_by(|x, y| x.a.total_cmp(&y.a));
    let mut value = vec![Complex64::new(0.0, 0.0); dim];
    let mut error = 0.0;
    for iv in &done {
        for (s, x) in value.iter_mut().zip(&iv.value) {
            *s += x;
        }
        error += iv.error;
    }
    QuadResult { value, error, evaluations }
}

/// Scalar convenience wrapper.
pub fn integrate_scalar<F>(
    mut f: F,
    points: &[f64],
    opts: &QuadOptions,
) -> Result<(Complex64, f64), NotConverged>
where
    F: FnMut(f64) -> Complex64,
{
    let r = integrate(|x, out| out[0] = f(x), points, 1, opts)?;
    Ok((r.value[0], r.error))
}

/// Gauss–Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_exact() {
        let (v, _) =
            integrate_scalar(|x| Complex64::new(x.powi(5), x * x), &[0.0, 2.0], &QuadOptions::relative(1e-14))
                .unwrap();
        assert!((v.re - 64.0 / 6.0).abs() < 1e-12);
        assert!((v.im - 8.0 / 3.0).abs() < 1e-13);
    }

    #[test]
    fn endpoint_singularity_converges() {
        let (v, _) = integrate_scalar(
            |x| Complex64::new(x.powf(-0.5), 0.0),
            &[0.0, 1.0],
            &QuadOptions::relative(1e-10),
        )
        .unwrap();
        assert!((v.re - 2.0).abs() < 1e-9);
    }

    #[test]
    fn oscillatory_vector() {
        let r = integrate(
            |x, out| {
                out[0] = Complex64::from_polar(1.0, 3.0 * x);
                out[1] = Complex64::new(x.exp(), 0.0);
            },
            &[0.0, 1.0, 2.0],
            2,
            &QuadOptions::relative(1e-13),
        )
        .unwrap();
        let exact0 = (Complex64::from_polar(1.0, 6.0) - 1.0) / Complex64::new(0.0, 3.0);
        assert!((r.value[0] - exact0).norm() < 1e-12);
        assert!((r.value[1].re - (2f64.exp() - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn legendre_rule() {
        for n in [1usize, 2, 5, 12, 20] {
            let (x, w) = gauss_legendre(n);
            let s: f64 = w.iter().sum();
            assert!((s - 2.0).abs() < 1e-13, "n={n}");
            let m: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(2 * n as i32 - 2)).sum();
            assert!((m - 2.0 / (2 * n - 1) as f64).abs() < 1e-13, "n={n}");
        }
    }
}
