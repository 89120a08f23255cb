//! Update decision rules.
//!
//! The adaptive rule compares an update index (the expected reduction in
//! next-slot urgency from transmitting now) against `V` times a virtual
//! queue that tracks historical transmission usage. Stationary baselines
//! (randomized, periodic) and precomputed tabular policies sit behind the
//! same [`Policy::decide`] interface.

use crate::error::{Error, Result};
use crate::mdp::{AoiTablePolicy, UoiTablePolicy};
use crate::rng::{RandomSource, Stream};
use crate::sim::SlotState;

/// Virtual queue enforcing the average update-frequency budget `rho`:
/// each update adds `1 - rho`, each idle slot drains `rho`, floored at zero.
#[derive(Debug, Clone)]
pub struct VirtualQueue {
    h: f64,
    rho: f64,
}

impl VirtualQueue {
    pub fn new(rho: f64) -> Result<Self> {
        Self::with_initial(0.0, rho)
    }

    pub fn with_initial(h0: f64, rho: f64) -> Result<Self> {
        if !rho.is_finite() || rho <= 0.0 || rho > 1.0 {
            return Err(Error::invalid(
                "rho",
                format!("update-frequency budget must lie in (0, 1], got {rho}"),
            ));
        }
        if !h0.is_finite() || h0 < 0.0 {
            return Err(Error::invalid("h0", "initial queue length must be >= 0"));
        }
        Ok(VirtualQueue { h: h0, rho })
    }

    pub fn len(&self) -> f64 {
        self.h
    }

    pub fn is_empty(&self) -> bool {
        self.h == 0.0
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn step(&mut self, update: bool) {
        self.h = virtual_queue_step(self.h, self.rho, update);
    }
}

/// One step of the virtual-queue recursion: `max(h - rho + u, 0)`.
pub fn virtual_queue_step(h: f64, rho: f64, update: bool) -> f64 {
    let u = if update { 1.0 } else { 0.0 };
    (h - rho + u).max(0.0)
}

/// Parameters of the adaptive update-index policy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptiveParams {
    /// Weight of the virtual-queue threshold; larger `v` defers updates.
    pub v: f64,
    /// Mean context weight (known, taken from the weight process).
    pub mean_weight: f64,
    /// Channel success probability.
    pub p: f64,
    /// Update-frequency budget.
    pub rho: f64,
}

impl AdaptiveParams {
    pub fn new(v: f64, mean_weight: f64, p: f64, rho: f64) -> Result<Self> {
        if !v.is_finite() || v <= 0.0 {
            return Err(Error::invalid("v", format!("v must be > 0, got {v}")));
        }
        if !mean_weight.is_finite() || mean_weight < 0.0 {
            return Err(Error::invalid("mean_weight", "mean weight must be >= 0"));
        }
        if !p.is_finite() || p <= 0.0 || p > 1.0 {
            return Err(Error::invalid("p", format!("p must lie in (0, 1], got {p}")));
        }
        if !rho.is_finite() || rho <= 0.0 || rho > 1.0 {
            return Err(Error::invalid("rho", format!("rho must lie in (0, 1], got {rho}")));
        }
        Ok(AdaptiveParams {
            v,
            mean_weight,
            p,
            rho,
        })
    }

    /// Quadratic-error coefficient of the Lyapunov function, fixed at its
    /// bound-minimizing value `mean_weight * (1 - p*rho) / (p*rho)`.
    pub fn theta(&self) -> f64 {
        self.mean_weight * (1.0 - self.p * self.rho) / (self.p * self.rho)
    }
}

/// A decision together with the quantities that produced it (populated by the
/// adaptive rule, `None` for the baselines).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolicyDecision {
    pub update: bool,
    /// Update index `J`.
    pub index: Option<f64>,
    /// Threshold `V * H` the index was compared against.
    pub threshold: Option<f64>,
}

impl PolicyDecision {
    fn plain(update: bool) -> Self {
        PolicyDecision {
            update,
            index: None,
            threshold: None,
        }
    }
}

/// Update index: `(omega_next - mean_weight + mean_weight / (p*rho)) * p * q^2`,
/// the expected next-slot urgency saved by transmitting now.
pub fn update_index(omega_next: f64, params: &AdaptiveParams, q: f64) -> f64 {
    (omega_next - params.mean_weight + params.mean_weight / (params.p * params.rho))
        * params.p
        * q
        * q
}

/// Threshold rule: update exactly when the index strictly exceeds `v * h`.
/// Ties do not update.
pub fn adaptive_decide(index: f64, v: f64, h: f64) -> PolicyDecision {
    let threshold = v * h;
    PolicyDecision {
        update: index > threshold,
        index: Some(index),
        threshold: Some(threshold),
    }
}

/// Stationary randomized baseline: update with probability `prob` each slot.
pub fn randomized_decide(prob: f64, rng: &mut RandomSource) -> bool {
    rng.bernoulli(prob)
}

/// Deterministic baseline: update on slots divisible by `period`.
pub fn periodic_decide(t: u64, period: u64) -> bool {
    debug_assert!(period >= 1);
    t.is_multiple_of(period)
}

/// Config-level description of a policy; turned into a runtime [`Policy`] at
/// the start of each run.
#[derive(Debug, Clone, PartialEq)]
pub enum PolicySpec {
    /// Update-index rule with threshold weight `V` from the run config.
    Adaptive,
    /// Bernoulli(prob) updates; defaults to the budget `rho` when `None`.
    Randomized { prob: Option<f64> },
    /// Update every `period` slots starting at slot 0.
    Periodic { period: u64 },
    /// Never update.
    Never,
    /// Precomputed table over the quantized (error, weight, next weight) state.
    UoiTable(UoiTablePolicy),
    /// Precomputed table over the (truncated) age state.
    AoiTable(AoiTablePolicy),
}

impl PolicySpec {
    /// Short label used in comparison tables and CSV rows.
    pub fn label(&self) -> &'static str {
        match self {
            PolicySpec::Adaptive => "adaptive",
            PolicySpec::Randomized { .. } => "randomized",
            PolicySpec::Periodic { .. } => "periodic",
            PolicySpec::Never => "never",
            PolicySpec::UoiTable(_) => "uoi-optimal",
            PolicySpec::AoiTable(_) => "aoi-optimal",
        }
    }
}

/// Run-level inputs needed to instantiate a policy.
#[derive(Debug, Clone, Copy)]
pub struct PolicyContext {
    pub seed: u64,
    pub rho: f64,
    pub v: f64,
    pub mean_weight: f64,
    pub p: f64,
}

/// A live decision rule. Owns whatever mutable state it needs (an RNG for the
/// randomized baseline); everything else is pure in the slot state.
#[derive(Debug, Clone)]
pub enum Policy {
    Adaptive(AdaptiveParams),
    Randomized { prob: f64, rng: Box<RandomSource> },
    Periodic { period: u64 },
    Never,
    UoiTable(UoiTablePolicy),
    AoiTable(AoiTablePolicy),
}

impl Policy {
    pub fn from_spec(spec: &PolicySpec, ctx: &PolicyContext) -> Result<Policy> {
        Ok(match spec {
            PolicySpec::Adaptive => Policy::Adaptive(AdaptiveParams::new(
                ctx.v,
                ctx.mean_weight,
                ctx.p,
                ctx.rho,
            )?),
            PolicySpec::Randomized { prob } => {
                let prob = prob.unwrap_or(ctx.rho);
                if !(0.0..=1.0).contains(&prob) {
                    return Err(Error::invalid("prob", "update probability must lie in [0, 1]"));
                }
                Policy::Randomized {
                    prob,
                    rng: Box::new(RandomSource::new(ctx.seed, Stream::Policy)),
                }
            }
            PolicySpec::Periodic { period } => {
                if *period == 0 {
                    return Err(Error::invalid("period", "period must be >= 1"));
                }
                Policy::Periodic { period: *period }
            }
            PolicySpec::Never => Policy::Never,
            PolicySpec::UoiTable(table) => Policy::UoiTable(table.clone()),
            PolicySpec::AoiTable(table) => Policy::AoiTable(table.clone()),
        })
    }

    pub fn decide(&mut self, state: &SlotState) -> PolicyDecision {
        match self {
            Policy::Adaptive(params) => {
                let index = update_index(state.omega_next, params, state.q);
                adaptive_decide(index, params.v, state.h)
            }
            Policy::Randomized { prob, rng } => {
                PolicyDecision::plain(randomized_decide(*prob, rng))
            }
            Policy::Periodic { period } => PolicyDecision::plain(periodic_decide(state.t, *period)),
            Policy::Never => PolicyDecision::plain(false),
            Policy::UoiTable(table) => {
                PolicyDecision::plain(table.decide(state.q, state.omega, state.omega_next))
            }
            Policy::AoiTable(table) => PolicyDecision::plain(table.decide(state.age)),
        }
    }
}
