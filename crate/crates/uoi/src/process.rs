//! Stochastic primitives: error-increment process, context-weight process,
//! and the Bernoulli transmission channel.
//!
//! All three are immutable after construction and sample through a
//! [`RandomSource`](crate::rng::RandomSource) owned by the run, so replaying
//! a seed replays every draw bit for bit.

use crate::error::{Error, Result};
use crate::rng::RandomSource;

/// Per-slot increment `A_t` of the estimation error.
///
/// The zero-mean Gaussian variant models a status that evolves as a Wiener
/// process; the constant variant pins the increment (unit increments make the
/// error trajectory coincide with the age trajectory, which the equivalence
/// tests rely on).
#[derive(Debug, Clone, PartialEq)]
pub enum IncrementProcess {
    Gaussian { variance: f64, std_dev: f64 },
    Constant { value: f64 },
}

impl IncrementProcess {
    /// Zero-mean Gaussian increments with variance `sigma2 > 0`.
    pub fn gaussian(sigma2: f64) -> Result<Self> {
        if !sigma2.is_finite() || sigma2 <= 0.0 {
            return Err(Error::invalid(
                "sigma2",
                format!("variance must be finite and > 0, got {sigma2}"),
            ));
        }
        Ok(IncrementProcess::Gaussian {
            variance: sigma2,
            std_dev: sigma2.sqrt(),
        })
    }

    /// Deterministic increment, the same every slot.
    pub const fn constant(value: f64) -> Self {
        IncrementProcess::Constant { value }
    }

    pub fn variance(&self) -> f64 {
        match self {
            IncrementProcess::Gaussian { variance, .. } => *variance,
            IncrementProcess::Constant { .. } => 0.0,
        }
    }

    /// Draws one increment. Consumes randomness only for the Gaussian variant.
    pub fn sample(&self, rng: &mut RandomSource) -> f64 {
        match self {
            IncrementProcess::Gaussian { std_dev, .. } => rng.gaussian(*std_dev),
            IncrementProcess::Constant { value } => *value,
        }
    }
}

/// One interval of a scheduled weight process; bounds are inclusive slots.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightSpan {
    pub start: u64,
    pub end: u64,
    pub value: f64,
}

/// Context-aware weight process: how important estimation accuracy is at each
/// slot.
#[derive(Debug, Clone, PartialEq)]
pub enum WeightProcess {
    /// The same weight every slot.
    Constant(f64),
    /// I.i.d. two-point weight: `high` with probability `prob_high`, else `low`.
    TwoPointIid {
        low: f64,
        high: f64,
        prob_high: f64,
    },
    /// Deterministic schedule of disjoint, sorted intervals.
    Scheduled(Vec<WeightSpan>),
}

impl WeightProcess {
    pub fn constant(value: f64) -> Result<Self> {
        if !value.is_finite() || value < 0.0 {
            return Err(Error::invalid("weight", "weight values must be >= 0"));
        }
        Ok(WeightProcess::Constant(value))
    }

    pub fn two_point(low: f64, high: f64, prob_high: f64) -> Result<Self> {
        if !low.is_finite() || !high.is_finite() || low < 0.0 || high < 0.0 {
            return Err(Error::invalid("weight", "weight values must be >= 0"));
        }
        if !(0.0..=1.0).contains(&prob_high) {
            return Err(Error::invalid("weight", "prob_high must lie in [0, 1]"));
        }
        Ok(WeightProcess::TwoPointIid {
            low,
            high,
            prob_high,
        })
    }

    /// Builds a scheduled process. Intervals must be well-formed, sorted and
    /// disjoint; coverage of a run's horizon is checked by the run config.
    pub fn scheduled(spans: Vec<WeightSpan>) -> Result<Self> {
        if spans.is_empty() {
            return Err(Error::invalid("weight", "schedule needs at least one interval"));
        }
        for span in &spans {
            if span.start > span.end {
                return Err(Error::invalid(
                    "weight",
                    format!("interval {}..{} has start > end", span.start, span.end),
                ));
            }
            if !span.value.is_finite() || span.value < 0.0 {
                return Err(Error::invalid("weight", "weight values must be >= 0"));
            }
        }
        for pair in spans.windows(2) {
            if pair[1].start <= pair[0].end {
                return Err(Error::invalid(
                    "weight",
                    format!(
                        "intervals {}..{} and {}..{} overlap or are unsorted",
                        pair[0].start, pair[0].end, pair[1].start, pair[1].end
                    ),
                ));
            }
        }
        Ok(WeightProcess::Scheduled(spans))
    }

    /// Samples the weight of slot `t`. Scheduled processes reject slots that
    /// fall outside every interval.
    pub fn sample(&self, t: u64, rng: &mut RandomSource) -> Result<f64> {
        match self {
            WeightProcess::Constant(value) => Ok(*value),
            WeightProcess::TwoPointIid {
                low,
                high,
                prob_high,
            } => Ok(if rng.uniform() < *prob_high { *high } else { *low }),
            WeightProcess::Scheduled(spans) => spans
                .iter()
                .find(|s| s.start <= t && t <= s.end)
                .map(|s| s.value)
                .ok_or(Error::UncoveredSlot { slot: t }),
        }
    }

    /// Whether slot `t` has a defined weight.
    pub fn defined_at(&self, t: u64) -> bool {
        match self {
            WeightProcess::Scheduled(spans) => spans.iter().any(|s| s.start <= t && t <= s.end),
            _ => true,
        }
    }

    /// Whether every slot in `[0, horizon)` has a defined weight.
    pub fn covers(&self, horizon: u64) -> bool {
        match self {
            WeightProcess::Scheduled(spans) => {
                let mut next = 0u64;
                for span in spans {
                    if span.start > next {
                        return false;
                    }
                    next = next.max(span.end.saturating_add(1));
                    if next >= horizon {
                        return true;
                    }
                }
                next >= horizon
            }
            _ => true,
        }
    }

    /// Analytic mean weight over slots `[0, horizon)`. The horizon only
    /// matters for scheduled processes, where the mean is the
    /// interval-length-weighted average.
    pub fn mean(&self, horizon: u64) -> f64 {
        match self {
            WeightProcess::Constant(value) => *value,
            WeightProcess::TwoPointIid {
                low,
                high,
                prob_high,
            } => low * (1.0 - prob_high) + high * prob_high,
            WeightProcess::Scheduled(spans) => {
                if horizon == 0 {
                    return 0.0;
                }
                let mut acc = 0.0;
                for span in spans {
                    let lo = span.start.min(horizon);
                    let hi = (span.end + 1).min(horizon);
                    if hi > lo {
                        acc += (hi - lo) as f64 * span.value;
                    }
                }
                acc / horizon as f64
            }
        }
    }
}

/// Block-fading channel: each attempted transmission succeeds independently
/// with probability `p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Channel {
    success_probability: f64,
}

impl Channel {
    pub fn new(success_probability: f64) -> Result<Self> {
        if !success_probability.is_finite()
            || success_probability <= 0.0
            || success_probability > 1.0
        {
            return Err(Error::invalid(
                "p",
                format!("success probability must lie in (0, 1], got {success_probability}"),
            ));
        }
        Ok(Channel {
            success_probability,
        })
    }

    pub fn success_probability(&self) -> f64 {
        self.success_probability
    }

    /// Draws one channel state. Call only when a transmission is attempted,
    /// so idle slots never consume channel randomness.
    pub fn sample(&self, rng: &mut RandomSource) -> bool {
        rng.bernoulli(self.success_probability)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Stream;

    const N: usize = 1_000_000;

    #[test]
    fn gaussian_rejects_degenerate_variance() {
        assert!(IncrementProcess::gaussian(0.0).is_err());
        assert!(IncrementProcess::gaussian(-1.0).is_err());
        assert!(IncrementProcess::gaussian(f64::NAN).is_err());
    }

    #[test]
    fn gaussian_moments_match_configuration() {
        let proc = IncrementProcess::gaussian(1.0).unwrap();
        let mut rng = RandomSource::new(2024, Stream::Increment);
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for _ in 0..N {
            let a = proc.sample(&mut rng);
            sum += a;
            sum_sq += a * a;
        }
        let mean = sum / N as f64;
        let var = sum_sq / N as f64 - mean * mean;
        // 5 sigma / sqrt(N) band around zero mean.
        assert!(mean.abs() < 5.0 / (N as f64).sqrt(), "mean = {mean}");
        assert!((0.99..=1.01).contains(&var), "variance = {var}");
    }

    #[test]
    fn gaussian_replays_with_same_seed() {
        let proc = IncrementProcess::gaussian(2.5).unwrap();
        let mut a = RandomSource::new(9, Stream::Increment);
        let mut b = RandomSource::new(9, Stream::Increment);
        for _ in 0..100 {
            assert_eq!(proc.sample(&mut a).to_bits(), proc.sample(&mut b).to_bits());
        }
    }

    #[test]
    fn constant_weight_ignores_slot_and_rng() {
        let proc = WeightProcess::constant(1.0).unwrap();
        let mut rng = RandomSource::new(1, Stream::Weight);
        for t in [0, 17, 4999] {
            assert_eq!(proc.sample(t, &mut rng).unwrap(), 1.0);
        }
    }

    #[test]
    fn scheduled_weight_looks_up_interval() {
        let proc = WeightProcess::scheduled(vec![
            WeightSpan { start: 0, end: 4949, value: 1.0 },
            WeightSpan { start: 4950, end: 4999, value: 100.0 },
        ])
        .unwrap();
        let mut rng = RandomSource::new(1, Stream::Weight);
        assert_eq!(proc.sample(4960, &mut rng).unwrap(), 100.0);
        assert_eq!(proc.sample(0, &mut rng).unwrap(), 1.0);
        assert_eq!(proc.sample(4949, &mut rng).unwrap(), 1.0);
        assert!(matches!(
            proc.sample(5000, &mut rng),
            Err(Error::UncoveredSlot { slot: 5000 })
        ));
    }

    #[test]
    fn scheduled_weight_rejects_overlap_and_inversion() {
        assert!(WeightProcess::scheduled(vec![
            WeightSpan { start: 0, end: 10, value: 1.0 },
            WeightSpan { start: 10, end: 20, value: 2.0 },
        ])
        .is_err());
        assert!(WeightProcess::scheduled(vec![WeightSpan { start: 5, end: 4, value: 1.0 }]).is_err());
        assert!(WeightProcess::scheduled(vec![]).is_err());
    }

    #[test]
    fn scheduled_coverage() {
        let proc = WeightProcess::scheduled(vec![
            WeightSpan { start: 0, end: 4949, value: 1.0 },
            WeightSpan { start: 4950, end: 4999, value: 100.0 },
        ])
        .unwrap();
        assert!(proc.covers(5000));
        assert!(!proc.covers(5001));
        let gappy = WeightProcess::scheduled(vec![
            WeightSpan { start: 0, end: 10, value: 1.0 },
            WeightSpan { start: 12, end: 20, value: 2.0 },
        ])
        .unwrap();
        assert!(!gappy.covers(15));
        assert!(gappy.covers(5));
    }

    #[test]
    fn two_point_mean_is_analytic() {
        let proc = WeightProcess::two_point(1.0, 100.0, 0.01).unwrap();
        assert_eq!(proc.mean(12345), 1.0 * (1.0 - 0.01) + 100.0 * 0.01);
    }

    #[test]
    fn scheduled_mean_is_length_weighted() {
        let proc = WeightProcess::scheduled(vec![
            WeightSpan { start: 0, end: 4949, value: 1.0 },
            WeightSpan { start: 4950, end: 4999, value: 100.0 },
        ])
        .unwrap();
        let expected = (4950.0 * 1.0 + 50.0 * 100.0) / 5000.0;
        assert!((proc.mean(5000) - expected).abs() < 1e-12);
    }

    #[test]
    fn two_point_empirical_mean() {
        let proc = WeightProcess::two_point(1.0, 100.0, 0.01).unwrap();
        let mut rng = RandomSource::new(7, Stream::Weight);
        let mut sum = 0.0;
        for t in 0..N as u64 {
            sum += proc.sample(t, &mut rng).unwrap();
        }
        let mean = sum / N as f64;
        // Analytic mean is 1.99; the band is several standard errors wide.
        assert!((1.93..=2.05).contains(&mean), "mean = {mean}");
    }

    #[test]
    fn channel_rejects_out_of_range() {
        assert!(Channel::new(0.0).is_err());
        assert!(Channel::new(1.2).is_err());
        assert!(Channel::new(1.0).is_ok());
    }

    #[test]
    fn perfect_channel_always_succeeds() {
        let ch = Channel::new(1.0).unwrap();
        let mut rng = RandomSource::new(5, Stream::Channel);
        assert!((0..10_000).all(|_| ch.sample(&mut rng)));
    }

    #[test]
    fn channel_empirical_rate() {
        let ch = Channel::new(0.8).unwrap();
        let mut rng = RandomSource::new(11, Stream::Channel);
        let ok = (0..N).filter(|_| ch.sample(&mut rng)).count();
        let rate = ok as f64 / N as f64;
        // 3 sqrt(p(1-p)/N) around 0.8 is ~0.0012; band below is wider.
        assert!((0.796..=0.804).contains(&rate), "rate = {rate}");
    }

    #[test]
    fn channel_replays_with_same_seed() {
        let ch = Channel::new(0.8).unwrap();
        let mut a = RandomSource::new(13, Stream::Channel);
        let mut b = RandomSource::new(13, Stream::Channel);
        let xs: Vec<bool> = (0..1000).map(|_| ch.sample(&mut a)).collect();
        let ys: Vec<bool> = (0..1000).map(|_| ch.sample(&mut b)).collect();
        assert_eq!(xs, ys);
    }
}
