//! Context-aware status updating at desk scale.
//!
//! A terminal reports a drifting status to a monitor over a lossy channel
//! under an average transmission budget. The urgency of information weights
//! the squared estimation error by a time-varying context weight, so slots
//! where accuracy matters more cost more. This crate implements the metric
//! recursions, an adaptive update-index policy with a virtual-queue frequency
//! guard, constrained-optimal baselines solved by relative value iteration,
//! the tracking-control reduction that motivates the metric, and a seeded
//! simulation engine that reproduces the associated experiments.
//!
//! # Layout
//!
//! - [`process`]: increment, weight and channel primitives on seeded streams
//! - [`metrics`]: error, age and urgency recursions
//! - [`policy`]: adaptive update-index rule, virtual queue, baselines
//! - [`mdp`]: discretized average-cost models, relative value iteration,
//!   exact evaluation, Lagrangian frontier sweep, policy tables
//! - [`sim`]: the slot loop, summaries, drift diagnostics
//! - [`tracking`]: remote tracking control of a scalar linear plant
//! - [`config`]: `key=value` scenario files with flag overrides
//! - [`report`]: CSV emission with reproducible config headers
//! - [`cli`]: the `uoi` binary's subcommands
//!
//! # Examples
//!
//! Each major capability has a runnable example:
//!
//! ```bash
//! cargo run --release --example sample_path       # adaptive policy through a critical period
//! cargo run --release --example tradeoff          # rate/urgency frontier, four policies
//! cargo run --release --example bound_check       # simulated averages vs the analytic bound
//! cargo run --release --example drift_diagnostic  # drift-plus-penalty average vs its bound
//! cargo run --release --example rvi_solve         # solve one model, inspect the threshold structure
//! cargo run --release --example policy_compare    # paired comparison on common random numbers
//! cargo run --release --example control_demo      # tracking error decomposition
//! ```
//!
//! The `uoi` binary wraps the same capabilities as subcommands
//! (`sample-path`, `tradeoff`, `bound-check`, `control-demo`, `rvi-solve`)
//! with CSV output; see the README.

pub mod cli;
pub mod config;
pub mod error;
pub mod mdp;
pub mod metrics;
pub mod policy;
pub mod process;
pub mod report;
pub mod rng;
pub mod sim;
pub mod tracking;

pub use error::{Error, Result};
pub use mdp::{
    build_mdp, evaluate_policy, lagrangian_sweep, relative_value_iteration, Discretization,
    MdpModel, MdpPolicy, Metric, ParetoPoint, SweepOptions,
};
pub use policy::{AdaptiveParams, PolicyDecision, PolicySpec, VirtualQueue};
pub use process::{Channel, IncrementProcess, WeightProcess, WeightSpan};
pub use rng::{derive_seed, RandomSource, Stream};
pub use sim::{
    compare_policies, drift_diagnostic, run, run_traced, theorem1_bound, RunSummary,
    ScenarioConfig, SlotState, TraceRecord,
};
pub use tracking::{run_tracking, PlantConfig, TrackingConfig, TrackingSummary};
