use thiserror::Error;

/// Errors produced by the model, analysis and simulation routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error(
        "total human population {n_h} is below the floor {floor}; standard incidence is undefined"
    )]
    DegeneratePopulation { n_h: f64, floor: f64 },

    #[error("net reproductive number N = {net} <= 1: no vector population at equilibrium")]
    NoDiseaseFreeVectors { net: f64 },

    #[error("state is not an equilibrium (relative residual {residual:.3e})")]
    NotAnEquilibrium { residual: f64 },

    #[error("root finding failed for polynomial with coefficients {coefficients:?}")]
    RootFinding { coefficients: Vec<f64> },

    #[error("center-manifold kernel has dimension {dimension}, expected 1")]
    DegenerateBifurcation { dimension: usize },

    #[error("basic reproduction number is zero; normalized sensitivity index undefined")]
    UndefinedIndex,

    #[error("step size underflow at t = {t}")]
    StepSizeUnderflow { t: f64, last_state: Vec<f64> },

    #[error("negative state excursion {value:.3e} in component {component} at t = {t}")]
    Positivity {
        t: f64,
        component: usize,
        value: f64,
    },

    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl ModelError {
    /// True for errors caused by bad input rather than by a numerical breakdown.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            ModelError::InvalidParameter { .. }
                | ModelError::InvalidSchedule(_)
                | ModelError::InvalidConfig(_)
                | ModelError::NotAnEquilibrium { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, ModelError>;
