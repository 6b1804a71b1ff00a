//! Dormand–Prince 5(4) with error-per-unit-step control on complex vectors.

use num_complex::Complex64;

const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
/// Fifth-order weights minus the embedded fourth-order ones.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeOptions {
    pub tol: f64,
    pub initial_step: f64,
    pub min_step: f64,
    pub max_steps: usize,
}

impl OdeOptions {
    pub fn new(tol: f64) -> Self {
        Self { tol, initial_step: 0.05, min_step: 1e-10, max_steps: 20_000 }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

impl std::ops::AddAssign for StepStats {
    fn add_assign(&mut self, o: Self) {
        self.accepted += o.accepted;
        self.rejected += o.rejected;
        self.evaluations += o.evaluations;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum OdeFailure<E> {
    Rhs(E),
    StepUnderflow { t: f64 },
    TooManySteps { t: f64 },
}

fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Integrates y' = f(t, y) from t0 to t1. The local error estimate is held
/// below tol·h·‖y‖, so the accumulated error over the interval is of order
/// tol·(t1 − t0)·‖y‖.
pub fn dopri5<F, E>(
    mut f: F,
    t0: f64,
    t1: f64,
    y0: Vec<Complex64>,
    opts: &OdeOptions,
) -> Result<(Vec<Complex64>, StepStats), OdeFailure<E>>
where
    F: FnMut(f64, &[Complex64]) -> Result<Vec<Complex64>, E>,
{
    let span = t1 - t0;
    let mut stats = StepStats::default();
    let mut t = t0;
    let mut y = y0;
    let mut h = opts.initial_step * span;
    let mut k0 = f(t, &y).map_err(OdeFailure::Rhs)?;
    stats.evaluations += 1;
    let n = y.len();
    while t < t1 {
        if stats.accepted + stats.rejected >= opts.max_steps {
            return Err(OdeFailure::TooManySteps { t });
        }
        if h < opts.min_step * span {
            return Err(OdeFailure::StepUnderflow { t });
        }
        let last = t + h >= t1;
        if last {
            h = t1 - t;
        }
        let mut k: Vec<Vec<Complex64>> = Vec::with_capacity(7);
        k.push(k0.clone());
        let mut y5 = y.clone();
        for s in 1..7 {
            let mut ys = y.clone();
            for (j, kj) in k.iter().enumerate() {
                let a = A[s][j];
                if a != 0.0 {
                    for i in 0..n {
                        ys[i] += kj[i] * (a * h);
                    }
                }
            }
            if s == 6 {
                y5 = ys.clone();
            }
            k.push(f(t + C[s] * h, &ys).map_err(OdeFailure::Rhs)?);
            stats.evaluations += 1;
        }
        let mut err = vec![Complex64::new(0.0, 0.0); n];
        for (kj, &e) in k.iter().zip(&E) {
            for i in 0..n {
                err[i] += kj[i] * (e * h);
            }
        }
        let scale = opts.tol * h.abs() / span.abs() * norm(&y).max(norm(&y5)).max(f64::MIN_POSITIVE);
        let ratio = norm(&err) / scale;
        if ratio <= 1.0 {
            t = if last { t1 } else { t + h };
            y = y5;
            k0 = k.pop().expect("seven stages");
            stats.accepted += 1;
        } else {
            stats.rejected += 1;
        }
        // Error per unit step scales as h^4.
        let factor = if ratio == 0.0 { 4.0 } else { (0.9 * ratio.powf(-0.25)).clamp(0.2, 4.0) };
        if !(ratio <= 1.0 && last) {
            h *= if ratio > 1.0 { factor.min(0.9) } else { factor };
        }
    }
    Ok((y, stats))
}
