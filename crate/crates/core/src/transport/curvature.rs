//! Adiabatic curvature by finite differences of the metric: the abelian
//! R = ∂∂̄ log g = ¼Δ log g in one fluxon's coordinate, and the matrix
//! coefficients R_ab̄ = ∂̄_b(g⁻¹∂_a g).

use num_complex::Complex64;
use rayon::prelude::*;

use super::connection::checked_inverse;
use super::TransportError;
use crate::config::ValidatedConfig;
use crate::linalg::CMatrix;
use crate::metric::FactorizedMetric;
use crate::quadrature::gauss_legendre;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvatureOptions {
    /// Step as a fraction of the relevant fluxon separation.
    pub rel_step: f64,
    pub metric_tol: f64,
}

impl Default for CurvatureOptions {
    fn default() -> Self {
        Self { rel_step: 1e-2, metric_tol: 1e-12 }
    }
}

fn moved_metric(
    config: &ValidatedConfig,
    field: &FactorizedMetric,
    mover: usize,
    z: Complex64,
) -> Result<CMatrix, TransportError> {
    let mut pos = config.positions().to_vec();
    pos[mover] = z;
    Ok(field.eval_at(config, &pos)?)
}

/// ∂_u∂_ū log g with u the position of `mover` (D_f = 1).
pub fn curvature_abelian(config: &ValidatedConfig, mover: usize, opts: &CurvatureOptions) -> Result<f64, TransportError> {
    if config.d_f() != 1 {
        return Err(TransportError::NotAbelian(config.d_f()));
    }
    let field = FactorizedMetric::for_config(config, opts.metric_tol);
    let dist = config.config().nearest_distance(mover);
    let h = opts.rel_step * dist;
    let z0 = config.positions()[mover];
    let mut points = vec![z0];
    for s in [h, 0.5 * h] {
        for w in [Complex64::new(s, 0.0), Complex64::new(-s, 0.0), Complex64::new(0.0, s), Complex64::new(0.0, -s)] {
            points.push(z0 + w);
        }
    }
    let logs: Vec<f64> = points
        .par_iter()
        .map(|&z| moved_metric(config, &field, mover, z).map(|g| g[(0, 0)].re.ln()))
        .collect::<Result<_, _>>()?;
    let lap = |k: usize, s: f64| (logs[k..k + 4].iter().sum::<f64>() - 4.0 * logs[0]) / (s * s);
    let coarse = lap(1, h);
    let fine = lap(5, 0.5 * h);
    let value = 0.25 * (4.0 * fine - coarse) / 3.0;
    let error = 0.25 * (value * 4.0 - fine).abs();
    let budget = 1e-4 / (dist * dist) + 1e-3 * value.abs();
    if error > budget {
        return Err(TransportError::StepTooLarge { error, budget });
    }
    Ok(value)
}

/// Gradient and Hessian of g in the 2N real coordinates (x₁, y₁, …), fourth
/// order in h after Richardson extrapolation.
fn real_jet(
    config: &ValidatedConfig,
    field: &FactorizedMetric,
    h: f64,
) -> Result<(CMatrix, Vec<CMatrix>, Vec<Vec<CMatrix>>), TransportError> {
    let m = 2 * config.len();
    let unit = |k: usize| -> Vec<Complex64> {
        let mut v = vec![Complex64::new(0.0, 0.0); config.len()];
        v[k / 2] = if k.is_multiple_of(2) { Complex64::new(1.0, 0.0) } else { Complex64::i() };
        v
    };
    // Stencil offsets as (coordinate, step) pairs.
    let mut stencil: Vec<Vec<(usize, f64)>> = vec![vec![]];
    for s in [h, 0.5 * h] {
        for p in 0..m {
            stencil.push(vec![(p, s)]);
            stencil.push(vec![(p, -s)]);
        }
        for p in 0..m {
            for q in p + 1..m {
                for (sp, sq) in [(s, s), (s, -s), (-s, s), (-s, -s)] {
                    stencil.push(vec![(p, sp), (q, sq)]);
                }
            }
        }
    }
    let values: Vec<CMatrix> = stencil
        .par_iter()
        .map(|offs| {
            let mut pos = config.positions().to_vec();
            for &(k, s) in offs {
                for (z, u) in pos.iter_mut().zip(unit(k)) {
                    *z += u * s;
                }
            }
            Ok::<_, TransportError>(field.eval_at(config, &pos)?)
        })
        .collect::<Result<_, _>>()?;
    let g0 = values[0].clone();
    let block = 2 * m + 4 * m * (m - 1) / 2;
    let jet = |base: usize, s: f64| {
        let grad: Vec<CMatrix> =
            (0..m).map(|p| (&values[base + 2 * p] - &values[base + 2 * p + 1]).scale(0.5 / s)).collect();
        let mut hess = vec![vec![CMatrix::zeros(g0.nrows(), g0.ncols()); m]; m];
        for p in 0..m {
            hess[p][p] = (&values[base + 2 * p] + &values[base + 2 * p + 1] - g0.scale(2.0)).scale(1.0 / (s * s));
        }
        let mut idx = base + 2 * m;
        for p in 0..m {
            for q in p + 1..m {
                let v = (&values[idx] - &values[idx + 1] - &values[idx + 2] + &values[idx + 3]).scale(0.25 / (s * s));
                hess[p][q] = v.clone();
                hess[q][p] = v;
                idx += 4;
            }
        }
        (grad, hess)
    };
    let (gc, hc) = jet(1, h);
    let (gf, hf) = jet(1 + block, 0.5 * h);
    let ex = |c: &CMatrix, f: &CMatrix| (f.scale(4.0) - c).scale(1.0 / 3.0);
    let grad = gc.iter().zip(&gf).map(|(c, f)| ex(c, f)).collect();
    let hess = hc.iter().zip(&hf).map(|(rc, rf)| rc.iter().zip(rf).map(|(c, f)| ex(c, f)).collect()).collect();
    Ok((g0, grad, hess))
}

/// R_ab̄ = g⁻¹∂_a∂̄_b g − g⁻¹(∂̄_b g)g⁻¹(∂_a g) for all pairs, indexed [a][b].
pub fn curvature_nonabelian(
    config: &ValidatedConfig,
    opts: &CurvatureOptions,
) -> Result<Vec<Vec<CMatrix>>, TransportError> {
    let field = FactorizedMetric::for_config(config, opts.metric_tol);
    let h = opts.rel_step * config.config().min_separation();
    let (g, grad, hess) = real_jet(config, &field, h)?;
    let ginv = checked_inverse(&g)?;
    let i = Complex64::i();
    let n = config.len();
    let del = |a: usize| (&grad[2 * a] - grad[2 * a + 1].clone() * i).scale(0.5);
    let delbar = |b: usize| (&grad[2 * b] + grad[2 * b + 1].clone() * i).scale(0.5);
    let mut out = Vec::with_capacity(n);
    for a in 0..n {
        let mut row = Vec::with_capacity(n);
        let da = del(a);
        for b in 0..n {
            let (xa, ya, xb, yb) = (2 * a, 2 * a + 1, 2 * b, 2 * b + 1);
            let mixed = (&hess[xa][xb] + &hess[ya][yb] + (&hess[xa][yb] - &hess[ya][xb]) * i).scale(0.25);
            row.push(&ginv * mixed - &ginv * delbar(b) * &ginv * &da);
        }
        out.push(row);
    }
    Ok(out)
}

/// (Σ_ab ‖R_ab̄‖²)^{1/2}.
pub fn curvature_nonabelian_norm(config: &ValidatedConfig, opts: &CurvatureOptions) -> Result<f64, TransportError> {
    let r = curvature_nonabelian(config, opts)?;
    Ok(r.iter().flatten().map(|m| m.norm_squared()).sum::<f64>().sqrt())
}

/// ∫∫ R dA over the annulus r_in < |u − centre| < r_out swept by `mover`:
/// Gauss–Legendre in the radius, trapezoid (spectral for periodic
/// integrands) in the angle.
pub fn curvature_flux_annulus(
    config: &ValidatedConfig,
    mover: usize,
    centre: Complex64,
    radii: (f64, f64),
    nodes: (usize, usize),
    opts: &CurvatureOptions,
) -> Result<f64, TransportError> {
    let (r_in, r_out) = radii;
    let (nr, nt) = nodes;
    let (x, w) = gauss_legendre(nr);
    let half = 0.5 * (r_out - r_in);
    let mut jobs = Vec::with_capacity(nr * nt);
    for (xi, wi) in x.iter().zip(&w) {
        let r = r_in + half * (xi + 1.0);
        for k in 0..nt {
            let th = std::f64::consts::TAU * k as f64 / nt as f64;
            jobs.push((centre + Complex64::from_polar(r, th), wi * half * r * std::f64::consts::TAU / nt as f64));
        }
    }
    let terms: Vec<f64> = jobs
        .par_iter()
        .map(|&(z, wt)| {
            let mut pos = config.positions().to_vec();
            pos[mover] = z;
            Ok::<_, TransportError>(curvature_abelian(&config.moved(pos)?, mover, opts)? * wt)
        })
        .collect::<Result<_, _>>()?;
    Ok(terms.iter().sum())
}

/// Abelian curvature with `mover` placed at each grid point (x outer, y
/// inner). Points within `guard` of another fluxon give None.
pub fn curvature_grid(
    config: &ValidatedConfig,
    mover: usize,
    xs: &[f64],
    ys: &[f64],
    guard: f64,
    opts: &CurvatureOptions,
) -> Result<Vec<(f64, f64, Option<f64>)>, TransportError> {
    if config.d_f() != 1 {
        return Err(TransportError::NotAbelian(config.d_f()));
    }
    let cells: Vec<(f64, f64)> = xs.iter().flat_map(|&x| ys.iter().map(move |&y| (x, y))).collect();
    cells
        .par_iter()
        .map(|&(x, y)| {
            let z = Complex64::new(x, y);
            let blocked = config
                .positions()
                .iter()
                .enumerate()
                .any(|(b, &w)| b != mover && (w - z).norm() < guard);
            if blocked {
                return Ok((x, y, None));
            }
            let mut pos = config.positions().to_vec();
            pos[mover] = z;
            let here = config.moved(pos)?;
            Ok((x, y, Some(curvature_abelian(&here, mover, opts)?)))
        })
        .collect()
}
