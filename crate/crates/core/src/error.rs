use thiserror::Error;

/// Errors raised when an operation's preconditions are not met.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("value {value} lies outside the support [{lower}, {upper}] of the valuation model")]
    OutsideSupport { value: f64, lower: f64, upper: f64 },

    #[error("hotspot {index} is unreachable: distance {distance} >= budget {budget}")]
    Unreachable { index: usize, distance: f64, budget: f64 },

    #[error("no hotspot is reachable with budget {budget}")]
    NoReachableHotspot { budget: f64 },

    #[error("schedule covers capacity {schedule_capacity} and horizon {schedule_horizon}, requested {capacity} and {horizon}")]
    ScheduleMismatch {
        schedule_capacity: usize,
        schedule_horizon: usize,
        capacity: usize,
        horizon: usize,
    },

    #[error("integration did not converge: halving the step still changed the result by {change:e}")]
    NotConverged { change: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}

pub(crate) fn check_probability(name: &'static str, p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(invalid(name, format!("{p} is not a probability in [0, 1]")))
    }
}

pub(crate) fn check_positive(name: &'static str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(invalid(name, format!("{x} must be positive and finite")))
    }
}

pub(crate) fn check_nonnegative(name: &'static str, x: f64) -> Result<()> {
    if x >= 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(invalid(name, format!("{x} must be nonnegative and finite")))
    }
}
