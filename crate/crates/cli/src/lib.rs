//! Command-line front end for fluxon-core: JSON in, JSON or CSV out.

pub mod commands;
pub mod error;
pub mod schema;
pub mod verify;

pub use error::CliError;
