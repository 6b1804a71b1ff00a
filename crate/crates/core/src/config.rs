//! Fluxon configurations, flux bookkeeping and the cut convention.
//!
//! Every other module consumes a [`ValidatedConfig`]. Validation comes in two
//! strengths: the strict default rejects total fluxes near an integer (the
//! metric diverges there), while [`ValidationOptions::counting`] only checks
//! what mode counting needs.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Width of the band around positive integers in which total fluxes are
/// rejected for metric work.
pub const THRESHOLD_BAND: f64 = 1e-3;

/// Relative separation (in units of the configuration diameter) below which
/// two fluxons, or two cut rays, are considered coincident.
pub const COINCIDENCE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("configuration has no fluxons")]
    Empty,
    #[error("{fluxes} fluxes but {positions} positions")]
    LengthMismatch { fluxes: usize, positions: usize },
    #[error("fluxon {index} has a non-finite flux or position")]
    NonFinite { index: usize },
    #[error("fluxons {a} and {b} coincide")]
    CoincidentFluxons { a: usize, b: usize },
    #[error("total flux {total} is not positive")]
    NonpositiveTotalFlux { total: f64 },
    #[error("total flux Φ_T = {total} lies within {band} of an integer")]
    NearIntegerTotalFlux { total: f64, band: f64 },
    #[error("reduced total flux ΣΦ' = {total} lies within {band} of an integer")]
    NearIntegerReducedFlux { total: f64, band: f64 },
    #[error("flux Φ_{index} = {flux} lies within {band} of a nonzero integer")]
    NearIntegerFlux { index: usize, flux: f64, band: f64 },
    #[error("fluxons {a} and {b} have cuts on the same line; ordering is ambiguous")]
    AmbiguousOrdering { a: usize, b: usize },
}

/// Positions ζ_a and fluxes Φ_a (in flux quanta) of N point-like fluxons.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FluxConfig {
    pub fluxes: Vec<f64>,
    #[serde(with = "xy_pairs")]
    pub positions: Vec<Complex64>,
}

impl FluxConfig {
    pub fn new(fluxes: Vec<f64>, positions: Vec<Complex64>) -> Self {
        Self { fluxes, positions }
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn total_flux(&self) -> f64 {
        self.fluxes.iter().sum()
    }

    /// Largest pairwise distance (0 for a single fluxon).
    pub fn diameter(&self) -> f64 {
        let mut d: f64 = 0.0;
        for (i, a) in self.positions.iter().enumerate() {
            for b in &self.positions[i + 1..] {
                d = d.max((a - b).norm());
            }
        }
        d
    }

    /// Smallest pairwise distance (infinite for a single fluxon).
    pub fn min_separation(&self) -> f64 {
        let mut d = f64::INFINITY;
        for (i, a) in self.positions.iter().enumerate() {
            for b in &self.positions[i + 1..] {
                d = d.min((a - b).norm());
            }
        }
        d
    }

    /// Distance from fluxon `a` to its nearest neighbour.
    pub fn nearest_distance(&self, a: usize) -> f64 {
        self.positions
            .iter()
            .enumerate()
            .filter(|&(b, _)| b != a)
            .map(|(_, z)| (z - self.positions[a]).norm())
            .fold(f64::INFINITY, f64::min)
    }

    pub fn with_positions(&self, positions: Vec<Complex64>) -> Self {
        Self { fluxes: self.fluxes.clone(), positions }
    }
}

/// Zero-mode bookkeeping for a flux vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeCounts {
    /// Total number of zero modes, ⌈Φ_T⌉ − 1.
    pub d: usize,
    /// Number of free modes, max(0, ⌈ΣΦ'⌉ − 1).
    pub d_f: usize,
    /// Confined modes bound by each fluxon.
    pub n: Vec<usize>,
    /// Reduced fluxes Φ'_a = Φ_a − n_a.
    pub phi_prime: Vec<f64>,
}

impl ModeCounts {
    pub fn reduced_total(&self) -> f64 {
        self.phi_prime.iter().sum()
    }
}

/// Counts zero modes for a flux vector. Total fluxes ≤ 0 give no modes.
pub fn count_modes(fluxes: &[f64]) -> ModeCounts {
    let total: f64 = fluxes.iter().sum();
    let d = ceil_minus_one(total);
    let n: Vec<usize> = fluxes.iter().map(|&f| ceil_minus_one(f)).collect();
    let phi_prime: Vec<f64> = fluxes.iter().zip(&n).map(|(&f, &k)| f - k as f64).collect();
    let d_f = ceil_minus_one(phi_prime.iter().sum());
    ModeCounts { d, d_f, n, phi_prime }
}

fn ceil_minus_one(x: f64) -> usize {
    if x > 0.0 {
        (x.ceil() - 1.0) as usize
    } else {
        0
    }
}

/// Ordering of the +direction cut rays, counter-clockwise at infinity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutConvention {
    /// Unit vector along which every cut ray leaves its fluxon.
    pub direction: Complex64,
    /// `order[k]` is the fluxon whose cut is met k-th.
    pub order: Vec<usize>,
}

impl CutConvention {
    pub fn angle(&self) -> f64 {
        self.direction.arg()
    }

    /// Inverse permutation: cut position of each fluxon.
    pub fn positions(&self) -> Vec<usize> {
        let mut pos = vec![0; self.order.len()];
        for (k, &a) in self.order.iter().enumerate() {
            pos[a] = k;
        }
        pos
    }
}

/// Cut ordering for rays leaving each fluxon along `direction`.
///
/// A large counter-clockwise circle meets rays in order of the coordinate
/// perpendicular to the rays, Im(ζ·d̄).
pub fn cut_order_in_direction(
    config: &FluxConfig,
    direction: Complex64,
) -> Result<CutConvention, ConfigError> {
    let d = direction / direction.norm();
    let perp: Vec<f64> = config.positions.iter().map(|z| (z * d.conj()).im).collect();
    let mut order: Vec<usize> = (0..config.len()).collect();
    order.sort_by(|&a, &b| perp[a].total_cmp(&perp[b]));
    let tol = COINCIDENCE_TOL * config.diameter().max(f64::MIN_POSITIVE);
    for w in order.windows(2) {
        if perp[w[1]] - perp[w[0]] <= tol {
            let (a, b) = (w[0].min(w[1]), w[0].max(w[1]));
            return Err(ConfigError::AmbiguousOrdering { a, b });
        }
    }
    Ok(CutConvention { direction: d, order })
}

/// Smallest gap between perpendicular coordinates of cut rays, relative to
/// the diameter. Zero for coincident rays; 1 for a single fluxon.
pub fn cut_separation(config: &FluxConfig, direction: Complex64) -> f64 {
    if config.len() < 2 {
        return 1.0;
    }
    let d = direction / direction.norm();
    let mut perp: Vec<f64> = config.positions.iter().map(|z| (z * d.conj()).im).collect();
    perp.sort_by(f64::total_cmp);
    let gap = perp.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    gap / config.diameter()
}

/// Cut direction used for numerical work: +x when its rays are reasonably
/// separated, otherwise the best of a fixed fan of directions.
pub fn working_direction(config: &FluxConfig) -> Complex64 {
    const FAN: usize = 48;
    const GOOD_ENOUGH: f64 = 0.15;
    let plus_x = Complex64::new(1.0, 0.0);
    let base = cut_separation(config, plus_x);
    let mut best = (base, plus_x);
    if base >= GOOD_ENOUGH {
        return plus_x;
    }
    for k in 1..FAN {
        let d = Complex64::from_polar(1.0, PI * k as f64 / FAN as f64);
        let s = cut_separation(config, d);
        if s > best.0 {
            best = (s, d);
        }
    }
    best.1
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidationOptions {
    /// Band around integers rejected for Φ_T, ΣΦ' and individual nonzero
    /// integer fluxes. Zero disables the threshold checks.
    pub threshold_band: f64,
}

impl Default for ValidationOptions {
    fn default() -> Self {
        Self { threshold_band: THRESHOLD_BAND }
    }
}

impl ValidationOptions {
    /// Checks needed for mode counting only: integer total fluxes allowed.
    pub fn counting() -> Self {
        Self { threshold_band: 0.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Warning {
    /// ΣΦ' ≤ 0 while Φ_T > 0: free modes are not defined and free-mode
    /// operations refuse to run.
    NonpositiveReducedFlux { total: f64 },
}

/// A configuration that passed validation, with its mode counts.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidatedConfig {
    config: FluxConfig,
    counts: ModeCounts,
    warnings: Vec<Warning>,
    strict: bool,
}

impl ValidatedConfig {
    pub fn config(&self) -> &FluxConfig {
        &self.config
    }
    pub fn counts(&self) -> &ModeCounts {
        &self.counts
    }
    pub fn warnings(&self) -> &[Warning] {
        &self.warnings
    }
    pub fn positions(&self) -> &[Complex64] {
        &self.config.positions
    }
    pub fn fluxes(&self) -> &[f64] {
        &self.config.fluxes
    }
    pub fn phi_prime(&self) -> &[f64] {
        &self.counts.phi_prime
    }
    pub fn len(&self) -> usize {
        self.config.len()
    }
    pub fn is_empty(&self) -> bool {
        self.config.is_empty()
    }
    pub fn d_f(&self) -> usize {
        self.counts.d_f
    }
    /// Whether the threshold band was enforced.
    pub fn is_strict(&self) -> bool {
        self.strict
    }

    /// Same fluxes at new positions, validated with the same strength.
    pub fn moved(&self, positions: Vec<Complex64>) -> Result<ValidatedConfig, ConfigError> {
        check_positions(&positions)?;
        Ok(ValidatedConfig {
            config: self.config.with_positions(positions),
            counts: self.counts.clone(),
            warnings: self.warnings.clone(),
            strict: self.strict,
        })
    }
}

fn check_positions(positions: &[Complex64]) -> Result<(), ConfigError> {
    let n = positions.len();
    let mut diam: f64 = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            diam = diam.max((positions[i] - positions[j]).norm());
        }
    }
    let tol = COINCIDENCE_TOL * diam;
    for i in 0..n {
        for j in i + 1..n {
            if (positions[i] - positions[j]).norm() <= tol {
                return Err(ConfigError::CoincidentFluxons { a: i, b: j });
            }
        }
    }
    Ok(())
}

fn near_positive_integer(x: f64, band: f64) -> bool {
    band > 0.0 && x > 0.5 && (x - x.round()).abs() < band
}

/// Strict validation (threshold band enforced).
pub fn validate(config: FluxConfig) -> Result<ValidatedConfig, ConfigError> {
    validate_with(config, ValidationOptions::default())
}

pub fn validate_with(
    config: FluxConfig,
    options: ValidationOptions,
) -> Result<ValidatedConfig, ConfigError> {
    if config.fluxes.is_empty() && config.positions.is_empty() {
        return Err(ConfigError::Empty);
    }
    if config.fluxes.len() != config.positions.len() {
        return Err(ConfigError::LengthMismatch {
            fluxes: config.fluxes.len(),
            positions: config.positions.len(),
        });
    }
    for (i, (f, z)) in config.fluxes.iter().zip(&config.positions).enumerate() {
        if !f.is_finite() || !z.re.is_finite() || !z.im.is_finite() {
            return Err(ConfigError::NonFinite { index: i });
        }
    }
    check_positions(&config.positions)?;
    let total = config.total_flux();
    if total <= 0.0 {
        return Err(ConfigError::NonpositiveTotalFlux { total });
    }
    let band = options.threshold_band;
    if near_positive_integer(total, band) {
        return Err(ConfigError::NearIntegerTotalFlux { total, band });
    }
    let counts = count_modes(&config.fluxes);
    let reduced = counts.reduced_total();
    if near_positive_integer(reduced, band) {
        return Err(ConfigError::NearIntegerReducedFlux { total: reduced, band });
    }
    for (index, &flux) in config.fluxes.iter().enumerate() {
        if band > 0.0 && flux.abs() > 0.5 && (flux - flux.round()).abs() < band {
            return Err(ConfigError::NearIntegerFlux { index, flux, band });
        }
    }
    let mut warnings = Vec::new();
    if reduced <= 0.0 {
        warnings.push(Warning::NonpositiveReducedFlux { total: reduced });
    }
    Ok(ValidatedConfig { config, counts, warnings, strict: band > 0.0 })
}

pub fn mode_counts(config: &ValidatedConfig) -> &ModeCounts {
    config.counts()
}

/// Cut ordering in the default +x convention.
pub fn cut_order(config: &ValidatedConfig) -> Result<CutConvention, ConfigError> {
    cut_order_in_direction(config.config(), Complex64::new(1.0, 0.0))
}

/// Aharonov–Bohm factor ν = e^{−2πiΦ}.
pub fn nu(phi: f64) -> Complex64 {
    // Reduce first so that nu(phi + 1) == nu(phi) to rounding.
    let r = phi - phi.round();
    Complex64::from_polar(1.0, -2.0 * PI * r)
}

mod xy_pairs {
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[Complex64], s: S) -> Result<S::Ok, S::Error> {
        v.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Complex64>, D::Error> {
        let pairs = Vec::<[f64; 2]>::deserialize(d)?;
        Ok(pairs.into_iter().map(|[x, y]| Complex64::new(x, y)).collect())
    }
}
