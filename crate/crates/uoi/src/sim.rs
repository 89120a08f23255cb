//! Slot-by-slot simulation of the constrained updating problem, with
//! statistics aggregation and Lyapunov drift diagnostics.
//!
//! Per slot: the next context weight is revealed, the policy decides from
//! `(t, error, next weight, queue)`, the channel is drawn only on attempted
//! transmissions, and the error/age/queue recursions advance. The objective
//! accumulates the slot-t weight against the slot-t error; the drift
//! diagnostic tracks the next-slot pairing the adaptive policy optimizes.

use crate::error::{Error, Result};
use crate::metrics::{step_age, step_error, uoi};
use crate::policy::{Policy, PolicyContext, PolicyDecision, PolicySpec, VirtualQueue};
use crate::process::{Channel, IncrementProcess, WeightProcess};
use crate::rng::{RandomSource, Stream};

/// Everything a policy may condition on at decision time.
#[derive(Debug, Clone, Copy)]
pub struct SlotState {
    pub t: u64,
    /// Current estimation error.
    pub q: f64,
    /// Current context weight.
    pub omega: f64,
    /// Revealed weight of the next slot.
    pub omega_next: f64,
    /// Virtual-queue length.
    pub h: f64,
    /// Age of the freshest received status.
    pub age: u64,
}

/// All parameters of one reproducible run.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub horizon: u64,
    pub seed: u64,
    pub increments: IncrementProcess,
    pub weights: WeightProcess,
    pub channel: Channel,
    pub policy: PolicySpec,
    /// Average update-frequency budget.
    pub rho: f64,
    /// Virtual-queue threshold weight of the adaptive policy (also used by
    /// the drift diagnostic).
    pub v: f64,
    /// Optional inclusive slot range singled out in the per-period breakdown.
    pub critical_period: Option<(u64, u64)>,
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        if self.horizon < 1 {
            return Err(Error::invalid("t", "horizon must be >= 1"));
        }
        if !self.rho.is_finite() || self.rho <= 0.0 || self.rho > 1.0 {
            return Err(Error::invalid(
                "rho",
                format!("must lie in (0, 1], got {}", self.rho),
            ));
        }
        if !self.v.is_finite() || self.v <= 0.0 {
            return Err(Error::invalid("v", format!("must be > 0, got {}", self.v)));
        }
        if let IncrementProcess::Gaussian { variance, .. } = self.increments {
            if !variance.is_finite() || variance <= 0.0 {
                return Err(Error::invalid("sigma2", "variance must be > 0"));
            }
        }
        if !self.weights.covers(self.horizon) {
            return Err(Error::invalid(
                "weight",
                "schedule does not cover the horizon",
            ));
        }
        if let Some((start, end)) = self.critical_period {
            if start > end || end >= self.horizon {
                return Err(Error::invalid(
                    "critical",
                    format!("period {start}..{end} must fit inside the horizon"),
                ));
            }
        }
        Ok(())
    }

    /// Analytic mean weight over this run's horizon.
    pub fn mean_weight(&self) -> f64 {
        self.weights.mean(self.horizon)
    }

    /// Whether two configs share the stochastic environment (sample paths of
    /// increments, weights and channel), so policy comparisons are paired.
    pub fn same_environment(&self, other: &ScenarioConfig) -> bool {
        self.horizon == other.horizon
            && self.seed == other.seed
            && self.increments == other.increments
            && self.weights == other.weights
            && self.channel == other.channel
    }
}

/// Squared-error and update-rate breakdown of the critical period versus the
/// rest of the horizon.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeriodStats {
    pub critical_mean_sq_error: f64,
    pub ordinary_mean_sq_error: f64,
    pub critical_update_rate: f64,
}

/// Time averages of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary {
    /// Average context-weighted squared error (slot-t pairing).
    pub avg_uoi: f64,
    /// Batch-means standard error of `avg_uoi` (100 batches).
    pub uoi_stderr: f64,
    pub avg_aoi: f64,
    pub avg_update_rate: f64,
    pub updates: u64,
    /// Final virtual-queue length.
    pub final_h: f64,
    /// `H_T / T`; vanishes when the queue is mean rate stable.
    pub final_h_over_t: f64,
    /// Time average of the Lyapunov drift plus next-slot urgency penalty.
    pub avg_drift_plus_penalty: f64,
    pub per_period: Option<PeriodStats>,
}

/// One traced slot.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub t: u64,
    pub q: f64,
    pub omega: f64,
    pub h: f64,
    pub update: bool,
    /// Channel outcome, present only when a transmission was attempted.
    pub success: Option<bool>,
    /// Update index, present for the adaptive policy.
    pub index: Option<f64>,
    pub uoi: f64,
    pub age: u64,
}

/// Runs a scenario and returns its summary.
pub fn run(config: &ScenarioConfig) -> Result<RunSummary> {
    run_inner(config, None).map(|(summary, _)| summary)
}

/// Runs a scenario and additionally records one [`TraceRecord`] per slot.
pub fn run_traced(config: &ScenarioConfig) -> Result<(RunSummary, Vec<TraceRecord>)> {
    run_inner(config, Some(Vec::new())).map(|(summary, trace)| (summary, trace.unwrap_or_default()))
}

fn run_inner(
    config: &ScenarioConfig,
    mut trace: Option<Vec<TraceRecord>>,
) -> Result<(RunSummary, Option<Vec<TraceRecord>>)> {
    config.validate()?;
    let horizon = config.horizon;
    let p = config.channel.success_probability();
    let mean_weight = config.mean_weight();
    let ctx = PolicyContext {
        seed: config.seed,
        rho: config.rho,
        v: config.v,
        mean_weight,
        p,
    };
    let mut policy = Policy::from_spec(&config.policy, &ctx)?;

    let mut inc_rng = RandomSource::new(config.seed, Stream::Increment);
    let mut w_rng = RandomSource::new(config.seed, Stream::Weight);
    let mut ch_rng = RandomSource::new(config.seed, Stream::Channel);
    let mut queue = VirtualQueue::new(config.rho)?;

    let theta = mean_weight * (1.0 - p * config.rho) / (p * config.rho);
    let v = config.v;
    let lyapunov = |h: f64, q: f64| 0.5 * v * h * h + theta * q * q;

    let mut q = 0.0f64;
    let mut age = 1u64;
    let mut omega = config.weights.sample(0, &mut w_rng)?;

    let mut uoi_sum = 0.0;
    let mut age_sum = 0u64;
    let mut updates = 0u64;
    let mut penalty_sum = 0.0;
    let mut batches = BatchMeans::new(horizon);
    let mut period = config.critical_period.map(PeriodAccumulator::new);
    let initial_l = lyapunov(queue.len(), q);

    if let Some(t) = trace.as_mut() {
        t.reserve(horizon as usize);
    }

    for t in 0..horizon {
        // The policy conditions on the next slot's weight; the last slot has
        // no defined successor under a finite schedule, so it sees the
        // current weight again.
        let omega_next = if config.weights.defined_at(t + 1) {
            config.weights.sample(t + 1, &mut w_rng)?
        } else {
            omega
        };

        let state = SlotState {
            t,
            q,
            omega,
            omega_next,
            h: queue.len(),
            age,
        };
        let decision: PolicyDecision = policy.decide(&state);
        let success = if decision.update {
            Some(config.channel.sample(&mut ch_rng))
        } else {
            None
        };
        let delivered = success == Some(true);

        let slot_uoi = uoi(omega, q).expect("weights are validated non-negative");
        uoi_sum += slot_uoi;
        batches.add(t, slot_uoi);
        age_sum += age;
        if decision.update {
            updates += 1;
        }
        if let Some(acc) = period.as_mut() {
            acc.add(t, q, decision.update);
        }
        if let Some(records) = trace.as_mut() {
            records.push(TraceRecord {
                t,
                q,
                omega,
                h: queue.len(),
                update: decision.update,
                success,
                index: decision.index,
                uoi: slot_uoi,
                age,
            });
        }

        let a = config.increments.sample(&mut inc_rng);
        q = step_error(q, a, decision.update, delivered);
        if !q.is_finite() {
            return Err(Error::NonFinite { slot: t });
        }
        age = step_age(age, decision.update, delivered);
        queue.step(decision.update);
        penalty_sum += omega_next * q * q;
        omega = omega_next;
    }

    let t_f = horizon as f64;
    let final_h = queue.len();
    let summary = RunSummary {
        avg_uoi: uoi_sum / t_f,
        uoi_stderr: batches.stderr(),
        avg_aoi: age_sum as f64 / t_f,
        avg_update_rate: updates as f64 / t_f,
        updates,
        final_h,
        final_h_over_t: final_h / t_f,
        avg_drift_plus_penalty: (lyapunov(final_h, q) - initial_l) / t_f + penalty_sum / t_f,
        per_period: period.map(PeriodAccumulator::finish),
    };
    Ok((summary, trace))
}

/// Upper bound on the long-run average urgency of the adaptive policy:
/// `mean_weight * sigma2 / (p * rho) + v / 2`.
pub fn theorem1_bound(mean_weight: f64, sigma2: f64, p: f64, rho: f64, v: f64) -> f64 {
    assert!(p * rho > 0.0, "p * rho must be positive");
    mean_weight * sigma2 / (p * rho) + v / 2.0
}

/// Time average of `L_{t+1} - L_t + omega_{t+1} * q_{t+1}^2` over a trace,
/// with Lyapunov function `L = v/2 * h^2 + theta * q^2`. Needs at least two
/// records to see one transition.
pub fn drift_diagnostic(trace: &[TraceRecord], v: f64, theta: f64) -> Result<f64> {
    if trace.len() < 2 {
        return Err(Error::invalid(
            "trace",
            "drift diagnostic needs at least two slots",
        ));
    }
    let lyapunov = |r: &TraceRecord| 0.5 * v * r.h * r.h + theta * r.q * r.q;
    let mut acc = 0.0;
    for pair in trace.windows(2) {
        let penalty = pair[1].omega * pair[1].q * pair[1].q;
        acc += lyapunov(&pair[1]) - lyapunov(&pair[0]) + penalty;
    }
    Ok(acc / (trace.len() - 1) as f64)
}

/// Runs several policies against the same stochastic environment (common
/// random numbers: identical increment and weight sample paths; channel
/// outcomes drawn per policy, by attempt).
pub fn compare_policies(configs: &[ScenarioConfig]) -> Result<Vec<RunSummary>> {
    let Some(first) = configs.first() else {
        return Ok(Vec::new());
    };
    for (i, config) in configs.iter().enumerate().skip(1) {
        if !first.same_environment(config) {
            return Err(Error::EnvironmentMismatch(format!(
                "config {i} differs from config 0 in horizon, seed, or processes"
            )));
        }
    }
    configs.iter().map(run).collect()
}

struct BatchMeans {
    sums: Vec<f64>,
    counts: Vec<u64>,
    n_batches: u64,
    horizon: u64,
}

impl BatchMeans {
    fn new(horizon: u64) -> Self {
        let n_batches = horizon.min(100);
        BatchMeans {
            sums: vec![0.0; n_batches as usize],
            counts: vec![0; n_batches as usize],
            n_batches,
            horizon,
        }
    }

    fn add(&mut self, t: u64, value: f64) {
        let idx = (t as u128 * self.n_batches as u128 / self.horizon as u128) as usize;
        self.sums[idx] += value;
        self.counts[idx] += 1;
    }

    fn stderr(&self) -> f64 {
        if self.n_batches < 2 {
            return 0.0;
        }
        let means: Vec<f64> = self
            .sums
            .iter()
            .zip(&self.counts)
            .filter(|(_, &c)| c > 0)
            .map(|(s, &c)| s / c as f64)
            .collect();
        let n = means.len() as f64;
        if n < 2.0 {
            return 0.0;
        }
        let grand = means.iter().sum::<f64>() / n;
        let var = means.iter().map(|m| (m - grand) * (m - grand)).sum::<f64>() / (n - 1.0);
        (var / n).sqrt()
    }
}

struct PeriodAccumulator {
    start: u64,
    end: u64,
    critical_sq: f64,
    critical_n: u64,
    critical_updates: u64,
    ordinary_sq: f64,
    ordinary_n: u64,
}

impl PeriodAccumulator {
    fn new((start, end): (u64, u64)) -> Self {
        PeriodAccumulator {
            start,
            end,
            critical_sq: 0.0,
            critical_n: 0,
            critical_updates: 0,
            ordinary_sq: 0.0,
            ordinary_n: 0,
        }
    }

    fn add(&mut self, t: u64, q: f64, update: bool) {
        if self.start <= t && t <= self.end {
            self.critical_sq += q * q;
            self.critical_n += 1;
            if update {
                self.critical_updates += 1;
            }
        } else {
            self.ordinary_sq += q * q;
            self.ordinary_n += 1;
        }
    }

    fn finish(self) -> PeriodStats {
        PeriodStats {
            critical_mean_sq_error: self.critical_sq / self.critical_n.max(1) as f64,
            ordinary_mean_sq_error: self.ordinary_sq / self.ordinary_n.max(1) as f64,
            critical_update_rate: self.critical_updates as f64 / self.critical_n.max(1) as f64,
        }
    }
}
