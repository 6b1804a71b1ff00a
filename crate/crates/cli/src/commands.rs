//! Drivers behind each subcommand. They return reports; printing and exit
//! codes are left to the binary.

use std::fmt::Write as _;
use std::path::Path;

use fluxon_core::config::{validate, validate_with, FluxConfig, ValidatedConfig, ValidationOptions, Warning};
use fluxon_core::linalg::{hermitian_eigenvalues, relative_difference};
use fluxon_core::metric::{metric_bruteforce, metric_factorized, Metric, DEFAULT_BRUTEFORCE_TOL, DEFAULT_FACTORIZED_TOL};
use fluxon_core::monodromy::holonomy_analytic;
use fluxon_core::transport::{curvature_grid, holonomy, CurvatureOptions, DerivativeOptions, TransportOptions};

use crate::error::CliError;
use crate::schema::{
    rows, HolonomyBlock, HolonomyReport, MetricBlock, MetricReport, ModesReport, PathSpec, RunManifest, WordSpec,
};

/// Fluxes within this distance of 1 are reported as critical.
const CRITICAL_BAND: f64 = 1e-12;

/// Tolerance of the Ψ contour integrals behind the analytic holonomy.
const ANALYTIC_TOL: f64 = 1e-10;

pub fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Validation(format!("cannot read {}: {e}", path.display())))?;
    Ok(serde_json::from_str(&text)?)
}

pub fn load_config(path: &Path) -> Result<FluxConfig, CliError> {
    read_json(path)
}

fn derivative_options(m: &RunManifest) -> DerivativeOptions {
    let mut d = DerivativeOptions::default();
    if let Some(h) = m.fd_step {
        d.rel_step = h;
    }
    d
}

fn curvature_options(m: &RunManifest) -> CurvatureOptions {
    let mut c = CurvatureOptions::default();
    if let Some(h) = m.fd_step {
        c.rel_step = h;
    }
    c
}

pub fn modes(config: FluxConfig, manifest: RunManifest) -> Result<ModesReport, CliError> {
    let total_flux = config.total_flux();
    let v = validate_with(config, ValidationOptions::counting())?;
    let counts = v.counts();
    let classification = v
        .fluxes()
        .iter()
        .map(|&f| {
            if (f - 1.0).abs() < CRITICAL_BAND {
                "critical"
            } else if f > 1.0 {
                "supercritical"
            } else {
                "subcritical"
            }
            .to_string()
        })
        .collect();
    let confined: usize = counts.n.iter().sum();
    let summary = if counts.d == 0 {
        "no zero modes".to_string()
    } else {
        let plural = if counts.d == 1 { "" } else { "s" };
        format!("{} zero mode{plural}: {confined} confined, {} free", counts.d, counts.d_f)
    };
    let warnings = v
        .warnings()
        .iter()
        .map(|w| match w {
            Warning::NonpositiveReducedFlux { total } => {
                format!("reduced total flux ΣΦ' = {total} is not positive; free modes are undefined")
            }
        })
        .collect();
    Ok(ModesReport {
        manifest,
        total_flux,
        d: counts.d,
        d_f: counts.d_f,
        n: counts.n.clone(),
        phi_prime: counts.phi_prime.clone(),
        classification,
        summary,
        warnings,
    })
}

fn metric_block(m: &Metric) -> MetricBlock {
    MetricBlock {
        g: rows(&m.g),
        method: m.method,
        eigenvalues: hermitian_eigenvalues(&m.g),
        error_estimate: m.error_estimate,
    }
}

/// --quad-tol, when given, applies to both methods; otherwise each uses its
/// own default.
pub fn metric(config: FluxConfig, factorized_only: bool, manifest: RunManifest) -> Result<MetricReport, CliError> {
    let v = validate(config)?;
    let fac = metric_factorized(&v, manifest.quad_tol.unwrap_or(DEFAULT_FACTORIZED_TOL))?;
    let bf = if factorized_only {
        None
    } else {
        Some(metric_bruteforce(&v, manifest.quad_tol.unwrap_or(DEFAULT_BRUTEFORCE_TOL))?)
    };
    Ok(MetricReport {
        manifest,
        d_f: v.d_f(),
        factorized: metric_block(&fac),
        discrepancy: bf.as_ref().map(|b| relative_difference(&b.g, &fac.g)),
        bruteforce: bf.as_ref().map(metric_block),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    pub min: f64,
    pub max: f64,
    pub n: usize,
}

impl Axis {
    /// Parses "min:max:n".
    pub fn parse(s: &str) -> Result<Self, CliError> {
        let bad = || CliError::Validation(format!("grid axis {s:?} is not min:max:n"));
        let parts: Vec<&str> = s.split(':').collect();
        let [min, max, n] = parts[..] else { return Err(bad()) };
        let (min, max): (f64, f64) = (min.trim().parse().map_err(|_| bad())?, max.trim().parse().map_err(|_| bad())?);
        let n: usize = n.trim().parse().map_err(|_| bad())?;
        if !(min.is_finite() && max.is_finite()) || n == 0 || (n > 1 && max <= min) {
            return Err(bad());
        }
        Ok(Self { min, max, n })
    }

    pub fn points(&self) -> Vec<f64> {
        if self.n == 1 {
            return vec![self.min];
        }
        let h = (self.max - self.min) / (self.n - 1) as f64;
        (0..self.n).map(|k| self.min + h * k as f64).collect()
    }
}

/// Default exclusion radius: the transport collision guard.
fn default_guard(config: &ValidatedConfig) -> f64 {
    1e-2 * config.config().diameter()
}

/// CSV with header x,y,R; excluded cells carry "nan". `mover` is 1-based.
pub fn curvature_map(
    config: FluxConfig,
    mover: usize,
    x: Axis,
    y: Axis,
    manifest: &RunManifest,
) -> Result<String, CliError> {
    let v = validate(config)?;
    if !(1..=v.len()).contains(&mover) {
        return Err(CliError::Validation(format!("mover {mover} outside 1..={}", v.len())));
    }
    let guard = manifest.collision_guard.unwrap_or_else(|| default_guard(&v));
    let cells = curvature_grid(&v, mover - 1, &x.points(), &y.points(), guard, &curvature_options(manifest))?;
    let mut out = String::from("x,y,R\n");
    for (x, y, r) in cells {
        match r {
            Some(r) => writeln!(out, "{x},{y},{r:e}"),
            None => writeln!(out, "{x},{y},nan"),
        }
        .expect("writing to a String");
    }
    Ok(out)
}

pub fn holonomy_report(
    config: FluxConfig,
    path: Option<&PathSpec>,
    word: Option<&WordSpec>,
    manifest: RunManifest,
) -> Result<HolonomyReport, CliError> {
    if path.is_none() && word.is_none() {
        return Err(CliError::Validation("holonomy needs --path, --word or both".into()));
    }
    let v = validate(config)?;
    let numeric = match path {
        Some(spec) => {
            let path = spec.to_path(v.positions())?;
            let opts = TransportOptions {
                ode_tol: manifest.ode_tol.unwrap_or(TransportOptions::default().ode_tol),
                derivative: derivative_options(&manifest),
                collision_guard: manifest.collision_guard,
            };
            Some(holonomy(&v, &path, &opts)?)
        }
        None => None,
    };
    let analytic = match word {
        Some(spec) => Some(holonomy_analytic(&v, &spec.to_word(v.len())?, manifest.quad_tol.unwrap_or(ANALYTIC_TOL))?),
        None => None,
    };
    let discrepancy = match (&numeric, &analytic) {
        (Some(n), Some(a)) => Some((&n.u - &a.u).iter().map(|z| z.norm()).fold(0.0, f64::max)),
        _ => None,
    };
    Ok(HolonomyReport {
        manifest,
        numeric: numeric.as_ref().map(HolonomyBlock::from),
        analytic: analytic.as_ref().map(HolonomyBlock::from),
        discrepancy,
    })
}
