//! Remote tracking control of a scalar linear plant.
//!
//! A controller steers the plant toward a reference using one-slot-old
//! status information: it keeps a model-propagated estimate of the plant
//! state, overridden whenever a status packet arrives, and applies the
//! control that would cancel the tracking error if the estimate were exact.
//! The weighted tracking error then decomposes into the weighted estimation
//! error (scaled by the plant gain) plus an irreducible noise floor, which is
//! what makes estimation-error scheduling the right lever for control
//! performance.

use crate::error::{Error, Result};
use crate::policy::{Policy, PolicyContext, PolicySpec, VirtualQueue};
use crate::process::{Channel, WeightProcess};
use crate::rng::{RandomSource, Stream};
use crate::sim::SlotState;

/// Reference trajectory the controller tracks.
#[derive(Debug, Clone, PartialEq)]
pub enum ReferenceSignal {
    Zero,
    Constant(f64),
    /// Explicit per-slot samples; the run must not outlive them.
    Samples(Vec<f64>),
}

impl ReferenceSignal {
    pub fn value_at(&self, t: u64) -> Result<f64> {
        match self {
            ReferenceSignal::Zero => Ok(0.0),
            ReferenceSignal::Constant(y) => Ok(*y),
            ReferenceSignal::Samples(ys) => {
                ys.get(t as usize).copied().ok_or_else(|| {
                    Error::invalid("reference", format!("no sample for slot {t}"))
                })
            }
        }
    }
}

/// Scalar plant `x_t = a x_{t-1} + b v_t + r_t` with zero-mean i.i.d. noise.
#[derive(Debug, Clone, PartialEq)]
pub struct PlantConfig {
    pub a: f64,
    pub b: f64,
    pub noise_variance: f64,
    pub reference: ReferenceSignal,
}

impl PlantConfig {
    pub fn validate(&self) -> Result<()> {
        if self.b == 0.0 || !self.b.is_finite() {
            return Err(Error::invalid("b", "control gain must be non-zero"));
        }
        if !self.a.is_finite() {
            return Err(Error::invalid("a", "plant gain must be finite"));
        }
        if !self.noise_variance.is_finite() || self.noise_variance < 0.0 {
            return Err(Error::invalid("noise_variance", "must be >= 0"));
        }
        Ok(())
    }
}

/// Control minimizing the expected squared tracking error given the estimate:
/// `(y - a * x_hat_prev) / b`.
pub fn optimal_control(x_hat_prev: f64, y: f64, a: f64, b: f64) -> Result<f64> {
    if b == 0.0 {
        return Err(Error::invalid("b", "control gain must be non-zero"));
    }
    Ok((y - a * x_hat_prev) / b)
}

/// Advances the controller's estimate: a received status overrides, otherwise
/// the model propagates (the noise is zero-mean, so this is the conditional
/// mean).
pub fn estimator_step(x_hat: f64, v: f64, a: f64, b: f64, received: Option<f64>) -> f64 {
    match received {
        Some(x) => x,
        None => a * x_hat + b * v,
    }
}

/// All parameters of one tracking run.
#[derive(Debug, Clone, PartialEq)]
pub struct TrackingConfig {
    pub plant: PlantConfig,
    pub weights: WeightProcess,
    pub channel: Channel,
    pub policy: PolicySpec,
    pub rho: f64,
    pub v: f64,
    pub horizon: u64,
    pub seed: u64,
}

/// Time averages of one tracking run.
#[derive(Debug, Clone, PartialEq)]
pub struct TrackingSummary {
    /// Average of `omega_t * (x_t - y_t)^2`.
    pub avg_weighted_tracking_error: f64,
    /// Average of `omega_t * (x_{t-1} - est_{t-1})^2`: the one-slot-old
    /// estimation error the controller acted on.
    pub avg_weighted_estimation_error: f64,
    /// Mean of `tracking - a^2 * estimation - mean_weight * noise_variance`
    /// per slot; vanishes in the long run.
    pub decomposition_gap: f64,
    /// Batch-means standard error of the gap (100 batches).
    pub gap_stderr: f64,
    pub avg_update_rate: f64,
}

/// One traced tracking slot.
#[derive(Debug, Clone, PartialEq)]
pub struct TrackingRecord {
    pub t: u64,
    pub x: f64,
    pub x_hat: f64,
    pub y: f64,
    pub control: f64,
    /// Error before any delivery this slot (what the policy decides on).
    pub pre_error: f64,
    /// Error after a possible delivery.
    pub post_error: f64,
    pub noise: f64,
    pub update: bool,
    pub delivered: bool,
}

pub fn run_tracking(config: &TrackingConfig) -> Result<TrackingSummary> {
    run_tracking_inner(config, None).map(|(s, _)| s)
}

pub fn run_tracking_traced(config: &TrackingConfig) -> Result<(TrackingSummary, Vec<TrackingRecord>)> {
    run_tracking_inner(config, Some(Vec::new())).map(|(s, t)| (s, t.unwrap_or_default()))
}

fn run_tracking_inner(
    config: &TrackingConfig,
    mut trace: Option<Vec<TrackingRecord>>,
) -> Result<(TrackingSummary, Option<Vec<TrackingRecord>>)> {
    config.plant.validate()?;
    if config.horizon < 1 {
        return Err(Error::invalid("t", "horizon must be >= 1"));
    }
    if !config.weights.covers(config.horizon) {
        return Err(Error::invalid("weight", "schedule does not cover the horizon"));
    }
    let p = config.channel.success_probability();
    let mean_weight = config.weights.mean(config.horizon);
    let ctx = PolicyContext {
        seed: config.seed,
        rho: config.rho,
        v: config.v,
        mean_weight,
        p,
    };
    let mut policy = Policy::from_spec(&config.policy, &ctx)?;
    let mut queue = VirtualQueue::new(config.rho)?;

    let mut noise_rng = RandomSource::new(config.seed, Stream::Increment);
    let mut w_rng = RandomSource::new(config.seed, Stream::Weight);
    let mut ch_rng = RandomSource::new(config.seed, Stream::Channel);
    let noise_std = config.plant.noise_variance.sqrt();
    let (a, b) = (config.plant.a, config.plant.b);
    let noise_floor = mean_weight * config.plant.noise_variance;

    // The controller starts synchronized: x_{-1} = est_{-1} = 0.
    let mut x_prev = 0.0f64;
    let mut x_hat_prev = 0.0f64;
    let mut post_error_prev = 0.0f64;
    let mut age = 1u64;
    let mut omega = config.weights.sample(0, &mut w_rng)?;

    let mut tracking_sum = 0.0;
    let mut estimation_sum = 0.0;
    let mut updates = 0u64;
    let mut gap = GapAccumulator::new(config.horizon);

    for t in 0..config.horizon {
        let omega_next = if config.weights.defined_at(t + 1) {
            config.weights.sample(t + 1, &mut w_rng)?
        } else {
            omega
        };
        let y = config.plant.reference.value_at(t)?;
        let control = optimal_control(x_hat_prev, y, a, b)?;
        let noise = if noise_std > 0.0 {
            noise_rng.gaussian(noise_std)
        } else {
            0.0
        };
        let x = a * x_prev + b * control + noise;
        if !x.is_finite() {
            return Err(Error::NonFinite { slot: t });
        }
        let propagated = estimator_step(x_hat_prev, control, a, b, None);
        let pre_error = x - propagated;

        let state = SlotState {
            t,
            q: pre_error,
            omega,
            omega_next,
            h: queue.len(),
            age,
        };
        let decision = policy.decide(&state);
        let delivered = decision.update && config.channel.sample(&mut ch_rng);
        let x_hat = if delivered { x } else { propagated };
        let post_error = x - x_hat;

        let tracking_err = omega * (x - y) * (x - y);
        let estimation_err = omega * post_error_prev * post_error_prev;
        tracking_sum += tracking_err;
        estimation_sum += estimation_err;
        gap.add(t, tracking_err - a * a * estimation_err - noise_floor);
        if decision.update {
            updates += 1;
        }
        if delivered {
            age = 1;
        } else {
            age += 1;
        }
        queue.step(decision.update);

        if let Some(records) = trace.as_mut() {
            records.push(TrackingRecord {
                t,
                x,
                x_hat,
                y,
                control,
                pre_error,
                post_error,
                noise,
                update: decision.update,
                delivered,
            });
        }

        x_prev = x;
        x_hat_prev = x_hat;
        post_error_prev = post_error;
        omega = omega_next;
    }

    let t_f = config.horizon as f64;
    let summary = TrackingSummary {
        avg_weighted_tracking_error: tracking_sum / t_f,
        avg_weighted_estimation_error: estimation_sum / t_f,
        decomposition_gap: gap.mean(),
        gap_stderr: gap.stderr(),
        avg_update_rate: updates as f64 / t_f,
    };
    Ok((summary, trace))
}

struct GapAccumulator {
    sums: Vec<f64>,
    counts: Vec<u64>,
    n_batches: u64,
    horizon: u64,
    total: f64,
}

impl GapAccumulator {
    fn new(horizon: u64) -> Self {
        let n_batches = horizon.min(100);
        GapAccumulator {
            sums: vec![0.0; n_batches as usize],
            counts: vec![0; n_batches as usize],
            n_batches,
            horizon,
            total: 0.0,
        }
    }

    fn add(&mut self, t: u64, value: f64) {
        let idx = (t as u128 * self.n_batches as u128 / self.horizon as u128) as usize;
        self.sums[idx] += value;
        self.counts[idx] += 1;
        self.total += value;
    }

    fn mean(&self) -> f64 {
        self.total / self.horizon as f64
    }

    fn stderr(&self) -> f64 {
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

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::step_error;
    use crate::rng::derive_seed;

    fn base_config() -> TrackingConfig {
        TrackingConfig {
            plant: PlantConfig {
                a: 1.0,
                b: 1.0,
                noise_variance: 1.0,
                reference: ReferenceSignal::Zero,
            },
            weights: WeightProcess::constant(1.0).unwrap(),
            channel: Channel::new(1.0).unwrap(),
            policy: PolicySpec::Periodic { period: 1 },
            rho: 0.25,
            v: 1.0,
            horizon: 1000,
            seed: 5,
        }
    }

    #[test]
    fn optimal_control_examples() {
        assert_eq!(optimal_control(1.0, 3.0, 1.0, 2.0).unwrap(), 1.0);
        // Already on target: a * x_hat == y needs no correction.
        assert_eq!(optimal_control(2.0, 5.0, 2.5, 4.0).unwrap(), 0.0);
        assert!(optimal_control(1.0, 1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn perturbed_control_pays_quadratically() {
        // Noise-free, perfectly informed slot: applying v* + eps instead of
        // v* raises the weighted squared tracking error by omega * b^2 eps^2.
        let (a, b, x_prev, y, omega) = (0.9, 2.0, 1.3, -0.7, 1.99);
        let v_star = optimal_control(x_prev, y, a, b).unwrap();
        let base = omega * (a * x_prev + b * v_star - y).powi(2);
        assert!(base < 1e-25);
        for eps in [-2.0, -0.5, -0.01, 0.01, 0.3, 1.7] {
            let err = omega * (a * x_prev + b * (v_star + eps) - y).powi(2);
            let expected = omega * b * b * eps * eps;
            assert!(
                (err - base - expected).abs() <= 1e-12 * expected.max(1.0),
                "eps = {eps}"
            );
        }
    }

    #[test]
    fn estimator_step_cases() {
        assert_eq!(estimator_step(2.0, 1.0, 1.0, 2.0, Some(5.0)), 5.0);
        assert_eq!(estimator_step(2.0, 1.0, 1.0, 2.0, None), 4.0);
    }

    #[test]
    fn full_information_tracks_exactly() {
        // Updates every slot over a perfect channel with no noise: the
        // controller cancels the reference error from the second slot on.
        let mut c = base_config();
        c.plant.noise_variance = 0.0;
        c.plant.reference = ReferenceSignal::Constant(3.0);
        let (summary, trace) = run_tracking_traced(&c).unwrap();
        assert_eq!(summary.avg_update_rate, 1.0);
        for record in &trace {
            assert!((record.x - 3.0).abs() < 1e-12);
            assert_eq!(record.post_error, 0.0);
        }
        assert!(summary.avg_weighted_tracking_error < 1e-20);
        assert!(summary.avg_weighted_estimation_error < 1e-20);
    }

    #[test]
    fn estimator_tracks_plant_under_constant_updates_with_noise() {
        let c = base_config();
        let (_, trace) = run_tracking_traced(&c).unwrap();
        for record in &trace {
            assert_eq!(record.x_hat, record.x);
        }
    }

    #[test]
    fn never_updating_grows_like_a_random_walk() {
        // With a = 1, b = 1, unit noise and no updates, the estimation error
        // is a random walk, so the average of its square over T slots has
        // mean (T - 1) / 2. Checked across seeds against the sample stderr.
        let horizon = 1000u64;
        let seeds = 400;
        let mut samples = Vec::with_capacity(seeds);
        for i in 0..seeds {
            let mut c = base_config();
            c.horizon = horizon;
            c.policy = PolicySpec::Never;
            c.seed = derive_seed(99, i as u64);
            let summary = run_tracking(&c).unwrap();
            samples.push(summary.avg_weighted_estimation_error);
        }
        let n = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / n;
        let var = samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
        let stderr = (var / n).sqrt();
        let expected = (horizon as f64 - 1.0) / 2.0;
        assert!(
            (mean - expected).abs() <= 3.0 * stderr,
            "mean {mean} vs expected {expected} (stderr {stderr})"
        );
    }

    #[test]
    fn decomposition_holds_within_three_stderr() {
        let mut c = base_config();
        c.horizon = 200_000;
        c.weights = WeightProcess::two_point(1.0, 100.0, 0.01).unwrap();
        c.channel = Channel::new(0.8).unwrap();
        c.policy = PolicySpec::Adaptive;
        c.plant = PlantConfig {
            a: 0.9,
            b: 2.0,
            noise_variance: 0.25,
            reference: ReferenceSignal::Constant(1.0),
        };
        let summary = run_tracking(&c).unwrap();
        assert!(
            summary.decomposition_gap.abs() <= 3.0 * summary.gap_stderr,
            "gap {} vs stderr {}",
            summary.decomposition_gap,
            summary.gap_stderr
        );
    }

    #[test]
    fn pre_delivery_error_follows_the_error_recursion() {
        // With a = 1 the pre-delivery error obeys the same recursion the
        // metrics module steps, with the noises as increments (shifted one
        // slot). Tolerance absorbs the different floating-point paths.
        let mut c = base_config();
        c.policy = PolicySpec::Periodic { period: 3 };
        c.channel = Channel::new(0.8).unwrap();
        c.horizon = 2000;
        let (_, trace) = run_tracking_traced(&c).unwrap();

        let mut q = trace[0].noise;
        for t in 0..trace.len() - 1 {
            assert!(
                (q - trace[t].pre_error).abs() < 1e-9,
                "slot {t}: {q} vs {}",
                trace[t].pre_error
            );
            q = step_error(q, trace[t + 1].noise, trace[t].update, trace[t].delivered);
        }
    }

    #[test]
    fn divergence_is_reported() {
        let mut c = base_config();
        c.plant.a = 4.0; // unstable plant, stale information
        c.plant.noise_variance = 1.0;
        c.policy = PolicySpec::Never;
        c.horizon = 2000;
        match run_tracking(&c) {
            Err(Error::NonFinite { .. }) => {}
            other => panic!("expected divergence, got {other:?}"),
        }
    }

    #[test]
    fn plant_validation() {
        let mut c = base_config();
        c.plant.b = 0.0;
        assert!(run_tracking(&c).is_err());
        let mut c = base_config();
        c.plant.noise_variance = -1.0;
        assert!(run_tracking(&c).is_err());
    }
}
