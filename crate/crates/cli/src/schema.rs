//! JSON input and report types. Complex numbers are [re, im] pairs, matrices
//! are arrays of rows, and every fluxon index is 1-based.

use fluxon_core::linalg::CMatrix;
use fluxon_core::metric::Method;
use fluxon_core::monodromy::{BraidWord, Move};
use fluxon_core::transport::{ControlPath, HolonomyResult, Profile, Segment, StepStats};
use fluxon_core::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub type Pair = [f64; 2];

pub fn pair(z: Complex64) -> Pair {
    [z.re, z.im]
}

fn complex(p: Pair) -> Complex64 {
    Complex64::new(p[0], p[1])
}

pub fn rows(m: &CMatrix) -> Vec<Vec<Pair>> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| pair(m[(i, j)])).collect()).collect()
}

pub fn from_rows(rows: &[Vec<Pair>]) -> CMatrix {
    let n = rows.len();
    let m = rows.first().map_or(0, Vec::len);
    CMatrix::from_fn(n, m, |i, j| complex(rows[i][j]))
}

fn label(index: usize, n: usize) -> Result<usize, CliError> {
    if (1..=n).contains(&index) {
        Ok(index - 1)
    } else {
        Err(CliError::Validation(format!("fluxon index {index} outside 1..={n}")))
    }
}

/// What was run, with which tolerances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub config: Option<String>,
    pub quad_tol: Option<f64>,
    pub ode_tol: Option<f64>,
    pub fd_step: Option<f64>,
    pub collision_guard: Option<f64>,
    /// Left out of reports so that identical runs give identical bytes
    /// wherever they are written.
    #[serde(skip)]
    pub output: Option<String>,
    pub seed: Option<u64>,
}

impl RunManifest {
    pub fn check(&self) -> Result<(), CliError> {
        for (name, v) in [
            ("--quad-tol", self.quad_tol),
            ("--ode-tol", self.ode_tol),
            ("--fd-step", self.fd_step),
            ("--collision-guard", self.collision_guard),
        ] {
            if let Some(v) = v {
                if !(v > 0.0 && v.is_finite()) {
                    return Err(CliError::Validation(format!("{name} must be positive, got {v}")));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum SegmentSpec {
    Circle { mover: usize, center: Pair, turns: f64 },
    Ellipse { mover: usize, center: Pair, ratio: f64, angle: f64, turns: f64 },
    Line { mover: usize, to: Pair },
    Rotation { center: Pair, turns: f64 },
    Exchange { pair: [usize; 2], half_turns: i32 },
}

/// {"profile": "uniform"|"eased", "segments": [...]}.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathSpec {
    #[serde(default)]
    pub profile: Profile,
    pub segments: Vec<SegmentSpec>,
}

impl PathSpec {
    pub fn to_path(&self, start: &[Complex64]) -> Result<ControlPath, CliError> {
        let n = start.len();
        let segments = self
            .segments
            .iter()
            .map(|s| {
                Ok(match *s {
                    SegmentSpec::Circle { mover, center, turns } => {
                        Segment::Circle { mover: label(mover, n)?, center: complex(center), turns }
                    }
                    SegmentSpec::Ellipse { mover, center, ratio, angle, turns } => {
                        Segment::Ellipse { mover: label(mover, n)?, center: complex(center), ratio, angle, turns }
                    }
                    SegmentSpec::Line { mover, to } => Segment::Line { mover: label(mover, n)?, to: complex(to) },
                    SegmentSpec::Rotation { center, turns } => Segment::Rotation { center: complex(center), turns },
                    SegmentSpec::Exchange { pair: [a, b], half_turns } => {
                        Segment::Exchange { pair: (label(a, n)?, label(b, n)?), half_turns }
                    }
                })
            })
            .collect::<Result<Vec<_>, CliError>>()?;
        Ok(ControlPath::with_profile(start.to_vec(), segments, self.profile)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MoveSpec {
    Encircle { encircle: [usize; 2], power: i32 },
    /// Exchange of the strands at cut-order positions i and i+1.
    Exchange { exchange: usize, power: i32 },
}

/// {"moves": [{"encircle": [a, b], "power": ±1} | {"exchange": i, "power": ±1}]}.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WordSpec {
    pub moves: Vec<MoveSpec>,
}

impl WordSpec {
    pub fn to_word(&self, n: usize) -> Result<BraidWord, CliError> {
        let moves = self
            .moves
            .iter()
            .map(|m| {
                Ok(match *m {
                    MoveSpec::Encircle { encircle: [a, b], power } => {
                        Move::Encircle { a: label(a, n)?, b: label(b, n)?, power }
                    }
                    MoveSpec::Exchange { exchange, power } => {
                        if !(1..n).contains(&exchange) {
                            return Err(CliError::Validation(format!("exchange strand {exchange} outside 1..{n}")));
                        }
                        Move::Exchange { strand: exchange - 1, power }
                    }
                })
            })
            .collect::<Result<Vec<_>, CliError>>()?;
        Ok(BraidWord::new(moves))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModesReport {
    pub manifest: RunManifest,
    pub total_flux: f64,
    pub d: usize,
    pub d_f: usize,
    pub n: Vec<usize>,
    pub phi_prime: Vec<f64>,
    /// "subcritical", "critical" or "supercritical" per fluxon.
    pub classification: Vec<String>,
    pub summary: String,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricBlock {
    pub g: Vec<Vec<Pair>>,
    pub method: Method,
    pub eigenvalues: Vec<f64>,
    pub error_estimate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub manifest: RunManifest,
    pub d_f: usize,
    pub factorized: MetricBlock,
    pub bruteforce: Option<MetricBlock>,
    /// ‖g_bf − g_fac‖ / ‖g_fac‖ (Frobenius).
    pub discrepancy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HolonomyBlock {
    pub u: Vec<Vec<Pair>>,
    pub eigenvalues: Vec<Pair>,
    pub eigenphases: Vec<f64>,
    /// ‖u*gu − g‖ / ‖g‖ at the base point.
    pub drift: f64,
    pub steps: StepStats,
}

impl From<&HolonomyResult> for HolonomyBlock {
    fn from(h: &HolonomyResult) -> Self {
        Self {
            u: rows(&h.u),
            eigenvalues: h.eigenvalues.iter().copied().map(pair).collect(),
            eigenphases: h.eigenphases.clone(),
            drift: h.drift,
            steps: h.stats,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HolonomyReport {
    pub manifest: RunManifest,
    pub numeric: Option<HolonomyBlock>,
    pub analytic: Option<HolonomyBlock>,
    /// Largest entrywise |u_numeric − u_analytic|.
    pub discrepancy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyResult {
    pub name: String,
    pub cases: usize,
    pub worst: f64,
    pub tolerance: f64,
    pub passed: bool,
    /// Set when a case could not be evaluated; the property then fails.
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub manifest: RunManifest,
    pub level: String,
    pub properties: Vec<PropertyResult>,
    pub passed: bool,
}
