//! Complex special functions used by the three-fluxon closed forms.

mod elliptic;
mod gamma;
mod hyp2f1;
mod three_flux;

pub use elliptic::{agm, elliptic_k};
pub use gamma::{gamma, log_gamma, rgamma};
pub use hyp2f1::{hyp2f1, hyp2f1_reg, Hyp2F1Params};
pub use three_flux::{metric_half_fluxes, psi_analytic_3};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpecialError {
    #[error("Γ has a pole at the nonpositive integer {0}")]
    PoleAtNonpositiveInteger(f64),
    #[error("2F1 argument {0} lies on the branch cut [1, ∞)")]
    OnBranchCut(num_complex::Complex64),
    #[error("series did not converge (attained relative accuracy {attained:e})")]
    NotConverged { attained: f64 },
    #[error("K(m) is singular at m = 1")]
    SingularAtOne,
    #[error("metric is singular when fluxons collide (u = {0})")]
    SingularAtCollision(num_complex::Complex64),
    #[error("closed forms exist only for three fluxons, got {0}")]
    UnsupportedN(usize),
    #[error("closed forms exist only for one or two free modes, got {0}")]
    UnsupportedDf(usize),
    #[error("normalized position u = {0} is real; the reference paths overlap")]
    RealCrossRatio(num_complex::Complex64),
}
