//! Exact event probabilities, condition checks, herd-set comparisons, Monte
//! Carlo cross-checks and parameter scans.

pub mod conditions;
pub mod enumerate;
pub mod events;
pub mod inclusion;
pub mod monte_carlo;
pub mod scan;

use crate::decision::DecisionError;
use crate::signal_model::{ModelError, Variant};

pub use conditions::{check_conditions, ConditionReport, NumericMode};
pub use enumerate::{discounted_correct, exact_probability, float_probability, ProbabilityResult};
pub use events::EventSpec;
pub use inclusion::{verify_herding_inclusion, InclusionReport};
pub use monte_carlo::{monte_carlo, MonteCarloResult};
pub use scan::{scan_parameters, ScanGrid, ScanReport};

pub const DEFAULT_HORIZON: usize = 10;
pub const DEFAULT_HORIZON_SIX_SIGNAL: usize = 7;
/// Hard limit on enumeration depth.
pub const HORIZON_CAP: usize = 14;

pub fn default_horizon(variant: Variant) -> usize {
    match variant {
        Variant::Baseline4 => DEFAULT_HORIZON,
        Variant::Appendix6 => DEFAULT_HORIZON_SIX_SIGNAL,
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AnalysisError {
    #[error("horizon {horizon} is too small: the request needs {needed} periods")]
    HorizonTooSmall { needed: usize, horizon: usize },
    #[error("horizon {horizon} exceeds the cap of {cap}")]
    HorizonCap { horizon: usize, cap: usize },
    #[error("conditioning event has probability zero")]
    ConditionProbabilityZero,
    #[error("parameter grid is empty")]
    EmptyGrid,
    #[error("invalid event: {0}")]
    InvalidEvent(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Decision(#[from] DecisionError),
}

pub(crate) fn check_horizon(needed: usize, horizon: usize) -> Result<(), AnalysisError> {
    if horizon > HORIZON_CAP {
        return Err(AnalysisError::HorizonCap { horizon, cap: HORIZON_CAP });
    }
    if needed > horizon {
        return Err(AnalysisError::HorizonTooSmall { needed, horizon });
    }
    Ok(())
}
