//! Property tests for the metric recursions, the decision rules, and the
//! config round trip.

use proptest::prelude::*;

use uoi::config::{config_entries, resolve_scenario};
use uoi::metrics::{step_age, step_error, step_error_delayed, uoi};
use uoi::policy::{adaptive_decide, update_index, virtual_queue_step, AdaptiveParams, PolicySpec};
use uoi::process::{Channel, IncrementProcess, WeightProcess, WeightSpan};
use uoi::sim::ScenarioConfig;

fn finite_q() -> impl Strategy<Value = f64> {
    prop_oneof![-1e6..1e6f64, -10.0..10.0f64]
}

proptest! {
    /// With unit increments, constant weight and matching initial state, the
    /// error trajectory equals the age trajectory under any decision and
    /// channel sequence; with weight 1 the urgency equals the squared error.
    #[test]
    fn error_age_equivalence(steps in proptest::collection::vec((any::<bool>(), any::<bool>()), 1..200)) {
        let mut q = 1.0f64;
        let mut age = 1u64;
        for (update, success) in steps {
            q = step_error(q, 1.0, update, success);
            age = step_age(age, update, success);
            prop_assert_eq!(q, age as f64);
            prop_assert_eq!(uoi(1.0, q).unwrap().to_bits(), (q * q).to_bits());
        }
    }

    /// Delayed delivery with a freshly generated packet agrees with the
    /// instantaneous recursion on every input.
    #[test]
    fn fresh_delayed_matches_instant(q in finite_q(), a in finite_q(), t in 0u64..1000) {
        let instant = step_error(q, a, true, true);
        let delayed = step_error_delayed(q, a, true, &[], t, t).unwrap();
        prop_assert_eq!(instant.to_bits(), delayed.to_bits());
    }

    /// The error step is linear in (q, a) for every action/channel outcome.
    #[test]
    fn error_step_is_linear(
        q1 in -1e3..1e3f64, a1 in -1e3..1e3f64,
        q2 in -1e3..1e3f64, a2 in -1e3..1e3f64,
        update in any::<bool>(), success in any::<bool>(),
    ) {
        let f = |q: f64, a: f64| step_error(q, a, update, success);
        let combined = f(q1 + q2, a1 + a2);
        prop_assert!((combined - f(q1, a1) - f(q2, a2)).abs() <= 1e-9 * combined.abs().max(1.0));
    }

    /// The update index ignores the sign of the error and scales
    /// quadratically in it; doubling the error exactly quadruples the index.
    #[test]
    fn update_index_even_and_quadratic(q in -1e3..1e3f64, omega_next in 0.0..200.0f64) {
        let params = AdaptiveParams::new(1.0, 1.99, 0.8, 0.25).unwrap();
        let j = update_index(omega_next, &params, q);
        prop_assert_eq!(j.to_bits(), update_index(omega_next, &params, -q).to_bits());
        prop_assert_eq!((4.0 * j).to_bits(), update_index(omega_next, &params, 2.0 * q).to_bits());
        prop_assert!(j >= 0.0);
    }

    /// The decision is monotone: growing |q| can only switch an update on,
    /// growing the queue can only switch it off.
    #[test]
    fn adaptive_decision_monotone(
        qs in proptest::collection::vec(0.0..50.0f64, 2),
        hs in proptest::collection::vec(0.0..100.0f64, 2),
        omega_next in 0.0..200.0f64,
        v in 0.01..10.0f64,
    ) {
        let params = AdaptiveParams::new(v, 1.99, 0.8, 0.25).unwrap();
        let (q_lo, q_hi) = (qs[0].min(qs[1]), qs[0].max(qs[1]));
        let (h_lo, h_hi) = (hs[0].min(hs[1]), hs[0].max(hs[1]));
        let u = |q: f64, h: f64| adaptive_decide(update_index(omega_next, &params, q), v, h).update;
        prop_assert!(u(q_hi, h_lo) || !u(q_lo, h_lo));
        prop_assert!(u(q_lo, h_lo) || !u(q_lo, h_hi));
    }

    /// Queue steps stay non-negative and move by at most max(rho, 1 - rho).
    #[test]
    fn virtual_queue_steps_are_bounded(h in 0.0..1e6f64, rho in 0.001..1.0f64, update in any::<bool>()) {
        let next = virtual_queue_step(h, rho, update);
        prop_assert!(next >= 0.0);
        // Slack scales with h: the subtraction rounds at ulp(h).
        prop_assert!((next - h).abs() <= rho.max(1.0 - rho) + 1e-12 * h.max(1.0));
    }
}

fn weight_strategy() -> impl Strategy<Value = WeightProcess> {
    prop_oneof![
        (0.0..100.0f64).prop_map(|w| WeightProcess::constant(w).unwrap()),
        (0.0..10.0f64, 10.0..200.0f64, 0.0..1.0f64)
            .prop_map(|(low, high, ph)| WeightProcess::two_point(low, high, ph).unwrap()),
        (1u64..5000, 0.0..10.0f64, 0.0..200.0f64).prop_map(|(split, w1, w2)| {
            WeightProcess::scheduled(vec![
                WeightSpan { start: 0, end: split, value: w1 },
                WeightSpan { start: split + 1, end: 10_000, value: w2 },
            ])
            .unwrap()
        }),
    ]
}

fn policy_strategy() -> impl Strategy<Value = PolicySpec> {
    prop_oneof![
        Just(PolicySpec::Adaptive),
        Just(PolicySpec::Randomized { prob: None }),
        (0.0..1.0f64).prop_map(|p| PolicySpec::Randomized { prob: Some(p) }),
        (1u64..100).prop_map(|period| PolicySpec::Periodic { period }),
        Just(PolicySpec::Never),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Any valid scenario survives the echo/parse round trip bit for bit.
    #[test]
    fn config_entries_round_trip(
        horizon in 1u64..10_000,
        seed in any::<u64>(),
        sigma2 in 0.01..100.0f64,
        p in 0.01..1.0f64,
        rho in 0.01..1.0f64,
        v in 0.01..100.0f64,
        weights in weight_strategy(),
        policy in policy_strategy(),
    ) {
        let config = ScenarioConfig {
            horizon,
            seed,
            increments: IncrementProcess::gaussian(sigma2).unwrap(),
            weights,
            channel: Channel::new(p).unwrap(),
            policy,
            rho,
            v,
            critical_period: None,
        };
        let entries = config_entries(&config);
        let overrides: Vec<(String, String)> = entries.clone();
        let resolved = resolve_scenario(&config, None, &overrides).unwrap();
        prop_assert_eq!(resolved.config, config);
        prop_assert_eq!(resolved.entries, entries);
    }
}
