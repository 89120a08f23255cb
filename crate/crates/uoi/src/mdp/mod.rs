//! Average-cost MDP baselines.
//!
//! The single-terminal updating problem becomes Markovian in the state
//! `(error, weight, next weight)` once the error axis is discretized, so
//! constrained-optimal baselines are computable: build the model
//! ([`build_mdp`]), solve it by relative value iteration
//! ([`relative_value_iteration`]), evaluate policies exactly through the
//! stationary distribution of the induced chain ([`evaluate_policy`]), and
//! trace the rate/cost frontier with a Lagrangian sweep
//! ([`lagrangian_sweep`]).

mod build;
mod rvi;
mod sweep;
mod table;

pub use build::build_mdp;
pub use rvi::{evaluate_policy, relative_value_iteration, rvi_with_warm_start, DEFAULT_MAX_ITER, DEFAULT_TOL};
pub use sweep::{lagrangian_sweep, ParetoPoint, SweepOptions, SweepPolicy};
pub use table::{load_table, save_table, AoiTablePolicy, TablePolicy, UoiTablePolicy};

use std::sync::Arc;

use crate::error::{Error, Result};

/// Which long-run average the model's stage cost tracks.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    /// Context-weighted squared error.
    Uoi,
    /// Age of the freshest received status.
    Aoi,
}

/// Discretization of the continuous state for model building.
///
/// The error axis is a symmetric grid with an odd number of bins so that 0
/// (the post-reset error) is exactly on-grid; Gaussian mass beyond the edges
/// is lumped into the boundary bins. The age axis (used by the age-metric
/// model) is truncated at `age_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct Discretization {
    q_max: f64,
    q_bins: usize,
    weight_support: Vec<(f64, f64)>,
    age_max: u64,
}

impl Discretization {
    pub fn new(q_max: f64, q_bins: usize, weight_support: Vec<(f64, f64)>) -> Result<Self> {
        if !q_max.is_finite() || q_max <= 0.0 {
            return Err(Error::invalid("q_max", format!("must be > 0, got {q_max}")));
        }
        if q_bins < 3 || q_bins.is_multiple_of(2) {
            return Err(Error::invalid(
                "q_bins",
                format!("need an odd bin count >= 3, got {q_bins}"),
            ));
        }
        if weight_support.is_empty() {
            return Err(Error::invalid("weights", "weight support must be non-empty"));
        }
        let mut total = 0.0;
        for &(value, prob) in &weight_support {
            if !value.is_finite() || value < 0.0 {
                return Err(Error::invalid("weights", "weight values must be >= 0"));
            }
            if prob.is_nan() || prob < 0.0 {
                return Err(Error::invalid("weights", "weight probabilities must be >= 0"));
            }
            total += prob;
        }
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::invalid(
                "weights",
                format!("weight probabilities must sum to 1, got {total}"),
            ));
        }
        Ok(Discretization {
            q_max,
            q_bins,
            weight_support,
            age_max: 256,
        })
    }

    /// Desk-scale default: 201 bins out to `10 * sigma / sqrt(p * rho)`, which
    /// resolves both the post-reset peak and the tail for every operating
    /// point swept here, and an age axis deep enough for the same regime.
    pub fn default_for(sigma2: f64, p: f64, rho: f64) -> Result<Self> {
        let q_max = 10.0 * sigma2.sqrt() / (p * rho).sqrt();
        let age_max = ((40.0 / (p * rho)).ceil() as u64).clamp(64, 4096);
        Ok(Self::new(q_max, 201, vec![(1.0, 0.99), (100.0, 0.01)])?.with_age_max(age_max))
    }

    pub fn with_age_max(mut self, age_max: u64) -> Self {
        self.age_max = age_max.max(2);
        self
    }

    pub fn with_weight_support(mut self, weight_support: Vec<(f64, f64)>) -> Self {
        self.weight_support = weight_support;
        self
    }

    pub fn q_max(&self) -> f64 {
        self.q_max
    }

    pub fn q_bins(&self) -> usize {
        self.q_bins
    }

    pub fn weight_support(&self) -> &[(f64, f64)] {
        &self.weight_support
    }

    pub fn age_max(&self) -> u64 {
        self.age_max
    }

    pub fn step(&self) -> f64 {
        2.0 * self.q_max / (self.q_bins - 1) as f64
    }

    pub(crate) fn center(&self) -> usize {
        (self.q_bins - 1) / 2
    }

    /// Grid values, symmetric about an exact 0 at the center bin.
    pub fn grid(&self) -> Vec<f64> {
        let step = self.step();
        let center = self.center() as i64;
        (0..self.q_bins)
            .map(|i| (i as i64 - center) as f64 * step)
            .collect()
    }

    /// Nearest grid index for a continuous error value (clamped at the edges).
    pub fn q_index(&self, q: f64) -> usize {
        let center = self.center() as i64;
        let raw = (q / self.step()).round() as i64 + center;
        raw.clamp(0, self.q_bins as i64 - 1) as usize
    }

    /// Index of the support weight closest to `w`.
    pub fn weight_index(&self, w: f64) -> usize {
        let mut best = 0;
        let mut best_dist = f64::INFINITY;
        for (i, &(value, _)) in self.weight_support.iter().enumerate() {
            let d = (value - w).abs();
            if d < best_dist {
                best_dist = d;
                best = i;
            }
        }
        best
    }
}

/// What a model was built from; carried so solved policies can be projected
/// back onto the continuous simulation state.
#[derive(Debug, Clone, PartialEq)]
pub enum ModelMeta {
    Uoi {
        disc: Discretization,
        sigma2: f64,
        p: f64,
    },
    Aoi {
        age_max: u64,
        p: f64,
    },
    /// Hand-assembled model (tests, experiments).
    Custom,
}

/// A finite average-cost MDP with binary actions (idle / transmit).
///
/// The transition kernel is dense: one probability row per `(state, action)`.
/// The update price `lambda` enters only the stage cost, so models sharing a
/// kernel differ only by [`MdpModel::with_lambda`].
#[derive(Debug, Clone)]
pub struct MdpModel {
    n: usize,
    kernel: Arc<Vec<f64>>,
    base_cost: Vec<f64>,
    lambda: f64,
    meta: ModelMeta,
}

impl MdpModel {
    pub(crate) fn assemble(
        n: usize,
        kernel: Vec<f64>,
        base_cost: Vec<f64>,
        lambda: f64,
        meta: ModelMeta,
    ) -> Self {
        debug_assert_eq!(kernel.len(), 2 * n * n);
        debug_assert_eq!(base_cost.len(), 2 * n);
        MdpModel {
            n,
            kernel: Arc::new(kernel),
            base_cost,
            lambda,
            meta,
        }
    }

    /// Builds a model from explicit rows; for hand-assembled instances.
    /// `kernel[a][s]` is the probability row of `(state s, action a)` and
    /// `base_cost[a][s]` its stage cost before the update price.
    pub fn from_parts(
        kernel: [Vec<Vec<f64>>; 2],
        base_cost: [Vec<f64>; 2],
        lambda: f64,
    ) -> Result<Self> {
        let n = base_cost[0].len();
        if n == 0 || base_cost[1].len() != n || kernel[0].len() != n || kernel[1].len() != n {
            return Err(Error::invalid("model", "inconsistent state counts"));
        }
        let mut flat = vec![0.0; 2 * n * n];
        for a in 0..2 {
            for s in 0..n {
                let row = &kernel[a][s];
                if row.len() != n {
                    return Err(Error::invalid("model", "row length mismatch"));
                }
                flat[(a * n + s) * n..(a * n + s + 1) * n].copy_from_slice(row);
            }
        }
        let mut costs = vec![0.0; 2 * n];
        for a in 0..2 {
            for s in 0..n {
                costs[s * 2 + a] = base_cost[a][s];
            }
        }
        let model = MdpModel::assemble(n, flat, costs, lambda, ModelMeta::Custom);
        model.validate_rows()?;
        Ok(model)
    }

    pub fn n_states(&self) -> usize {
        self.n
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn meta(&self) -> &ModelMeta {
        &self.meta
    }

    pub fn transition_row(&self, s: usize, a: usize) -> &[f64] {
        let offset = (a * self.n + s) * self.n;
        &self.kernel[offset..offset + self.n]
    }

    /// Stage cost before the update price.
    pub fn base_cost(&self, s: usize, a: usize) -> f64 {
        self.base_cost[s * 2 + a]
    }

    /// Full stage cost `base + lambda * action`.
    pub fn stage_cost(&self, s: usize, a: usize) -> f64 {
        self.base_cost(s, a) + self.lambda * a as f64
    }

    /// Same kernel and base costs under a different update price.
    pub fn with_lambda(&self, lambda: f64) -> Self {
        MdpModel {
            n: self.n,
            kernel: Arc::clone(&self.kernel),
            base_cost: self.base_cost.clone(),
            lambda,
            meta: self.meta.clone(),
        }
    }

    /// Checks that every transition row is a probability vector and every
    /// stage cost is finite (and non-negative when `lambda >= 0`).
    pub fn validate_rows(&self) -> Result<()> {
        for a in 0..2 {
            for s in 0..self.n {
                let row = self.transition_row(s, a);
                let mut sum = 0.0;
                for &p in row {
                    if p < 0.0 {
                        return Err(Error::invalid(
                            "model",
                            format!("negative transition probability at ({s}, {a})"),
                        ));
                    }
                    sum += p;
                }
                if (sum - 1.0).abs() > 1e-9 {
                    return Err(Error::invalid(
                        "model",
                        format!("row ({s}, {a}) sums to {sum}"),
                    ));
                }
                let cost = self.stage_cost(s, a);
                if !cost.is_finite() || (self.lambda >= 0.0 && cost < 0.0) {
                    return Err(Error::invalid(
                        "model",
                        format!("stage cost at ({s}, {a}) is {cost}"),
                    ));
                }
            }
        }
        Ok(())
    }
}

/// A deterministic stationary policy together with its solver cost and its
/// exactly evaluated update rate.
#[derive(Debug, Clone, PartialEq)]
pub struct MdpPolicy {
    /// Action per state: `true` transmits.
    pub actions: Vec<bool>,
    /// Average cost (including the update price) reported by the solver.
    pub average_cost: f64,
    /// Stationary transmission frequency of the induced chain.
    pub average_update_rate: f64,
}
