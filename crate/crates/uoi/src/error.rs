//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by process construction, simulation, solvers and I/O.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter failed its range or validity check. `name` identifies the
    /// offending key so callers (and config-file users) can locate it.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// Config file or override entry could not be parsed.
    #[error("config error: {0}")]
    Config(String),

    /// A scheduled weight process was queried outside its defined intervals.
    #[error("weight schedule does not cover slot {slot}")]
    UncoveredSlot { slot: u64 },

    /// Delayed error recursion was given too short an increment history.
    #[error("increment history too short: need {needed} entries, got {got}")]
    MissingHistory { needed: usize, got: usize },

    /// Relative value iteration hit its iteration cap before the span of
    /// successive value differences dropped below tolerance.
    #[error("value iteration did not converge after {iterations} iterations (span {span:.3e})")]
    NonConvergence { iterations: usize, span: f64 },

    /// Stationary-distribution computation failed even after the damped
    /// power-iteration fallback.
    #[error("stationary distribution did not converge (residual {residual:.3e})")]
    StationaryResidual { residual: f64 },

    /// A tabular policy was constructed with no entries.
    #[error("policy table is empty")]
    EmptyTable,

    /// Policies were compared across runs whose stochastic environments differ.
    #[error("environment mismatch: {0}")]
    EnvironmentMismatch(String),

    /// A Pareto sweep was asked for an update rate outside (0, 1).
    #[error("target update rate {rate} is unreachable")]
    UnreachableRate { rate: f64 },

    /// The simulated state left the representable range.
    #[error("state overflowed to a non-finite value at slot {slot}")]
    NonFinite { slot: u64 },

    /// A persisted policy table failed to parse.
    #[error("malformed policy table: {0}")]
    MalformedTable(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
