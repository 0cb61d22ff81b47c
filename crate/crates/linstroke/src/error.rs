//! Error type shared by the model, dynamics and optimizer layers.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    /// A parameter or configuration field violates its invariant. `name` is
    /// the field name as spelled in the owning struct.
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParam {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    /// A position falls outside the interval on which the gas forces are
    /// defined.
    #[error("position x = {x} m outside valid interval ({lo} m, {hi} m)")]
    OutOfDomain { x: f64, lo: f64, hi: f64 },

    /// The adaptive integrator could not make progress: the step size
    /// underflowed away from the guard band (typically unreachable error
    /// tolerances).
    #[error("integration step size underflow at t = {t} s, x = {x} m")]
    StepUnderflow { t: f64, x: f64 },

    /// No velocity zero crossing was found inside the integration horizon.
    #[error("no velocity zero crossing within t_max = {t_max} s (reached x = {x} m)")]
    HorizonExceeded { t_max: f64, x: f64 },

    /// An event bracket whose velocity does not change sign from positive
    /// to non-positive.
    #[error("event bracket does not straddle v = 0: v_lo = {v_lo}, v_hi = {v_hi}")]
    InvalidBracket { v_lo: f64, v_hi: f64 },

    /// An x_max evaluation inside the search loop failed; carries the
    /// offending bore scale.
    #[error("x_max evaluation failed at lambda = {lambda}: {source}")]
    EvalFailed {
        lambda: f64,
        #[source]
        source: Box<EngineError>,
    },
}

impl EngineError {
    pub(crate) fn invalid(name: &'static str, value: f64, reason: &'static str) -> Self {
        EngineError::InvalidParam {
            name,
            value,
            reason,
        }
    }
}
