//! Arboviral disease control model with an imperfect vaccine, individual
//! protection and vector controls.
//!
//! The crate covers the vector field and its variants, threshold quantities,
//! equilibria, stability and bifurcation analysis, pulse-control simulation
//! and sensitivity analysis of the basic reproduction number.

pub mod bifurcation;
pub mod equilibria;
pub mod error;
pub mod model;
pub mod ode;
pub mod params;
pub mod poly;
pub mod sensitivity;
pub mod sim;
pub mod stability;
pub mod thresholds;

pub use error::{ModelError, Result};
pub use model::{ControlOverrides, Incidence, ModelVariant, State};
pub use params::{DerivedConstants, ModelParams, ParamId};
