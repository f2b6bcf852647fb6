//! Command-line driver for the `arbodyn` model: configuration and state
//! files, CSV and SVG output, run manifests and the reference checks.

pub mod commands;
pub mod config;
pub mod error;
pub mod manifest;
pub mod output;
pub mod selfcheck;
pub mod svg;

pub use commands::run;
pub use error::{CliError, Result};
