//! Aharonov–Casher zero modes of point-like fluxons: mode counting, the
//! metric on the free-mode space, adiabatic connection and curvature, and
//! braiding holonomies checked against analytic monodromy matrices.

pub mod config;
pub mod linalg;
pub mod metric;
pub mod modes;
pub mod monodromy;
pub mod quadrature;
pub mod special;
pub mod transport;

pub use num_complex::Complex64;
