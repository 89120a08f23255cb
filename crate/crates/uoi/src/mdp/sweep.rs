//! Lagrangian sweep over the update price: rate/cost frontier points.

use crate::error::{Error, Result};
use crate::mdp::{build_mdp, rvi_with_warm_start, Discretization, MdpModel, MdpPolicy, Metric};

#[derive(Debug, Clone, Copy)]
pub struct SweepOptions {
    /// Span tolerance handed to the value iteration.
    pub tol: f64,
    pub max_iter: usize,
    /// Accept a single policy whose stationary rate lands this close to the
    /// target; otherwise close the duality gap by mixing.
    pub rate_tol: f64,
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions {
            tol: super::DEFAULT_TOL,
            max_iter: super::DEFAULT_MAX_ITER,
            rate_tol: 0.005,
        }
    }
}

/// The policy backing a frontier point.
#[derive(Debug, Clone)]
pub enum SweepPolicy {
    Single(MdpPolicy),
    /// Time-sharing mix: run the lower-price (higher-rate) policy a fraction
    /// `alpha` of the time and the higher-price one otherwise. Rates and
    /// costs combine linearly, which matches the target rate exactly.
    Mixed {
        low_price: MdpPolicy,
        high_price: MdpPolicy,
        alpha: f64,
    },
}

impl SweepPolicy {
    /// Representative deterministic table (the budget-feasible side of a mix).
    pub fn primary(&self) -> &MdpPolicy {
        match self {
            SweepPolicy::Single(p) => p,
            SweepPolicy::Mixed { high_price, .. } => high_price,
        }
    }
}

/// One point of the rate/cost frontier.
#[derive(Debug, Clone)]
pub struct ParetoPoint {
    pub target_rate: f64,
    /// Final update price (the feasible side of the bracket for mixes).
    pub lambda: f64,
    /// Average metric cost at the matched rate, price excluded.
    pub avg_cost: f64,
    pub achieved_rate: f64,
    pub policy: SweepPolicy,
    /// False when the solver gave up somewhere along this point's bisection;
    /// the point then carries the best bracket end found.
    pub converged: bool,
}

struct Solved {
    lambda: f64,
    policy: MdpPolicy,
    base_cost: f64,
    h: Vec<f64>,
}

/// Sweeps the constrained frontier: for each target rate, bisect the update
/// price until the exactly evaluated stationary rate brackets the target,
/// then return the matching policy (mixing adjacent-price policies when no
/// single price lands inside the tolerance band).
pub fn lagrangian_sweep(
    disc: &Discretization,
    sigma2: f64,
    p: f64,
    metric: Metric,
    target_rates: &[f64],
    opts: &SweepOptions,
) -> Result<Vec<ParetoPoint>> {
    for &rate in target_rates {
        if !(rate > 0.0 && rate < 1.0) {
            return Err(Error::UnreachableRate { rate });
        }
    }
    let base = build_mdp(disc, sigma2, p, metric, 0.0)?;

    // Descending targets let each bisection warm-start from the previous
    // (nearby) price region; results are restored to input order at the end.
    let mut order: Vec<usize> = (0..target_rates.len()).collect();
    order.sort_by(|&i, &j| {
        target_rates[j]
            .partial_cmp(&target_rates[i])
            .expect("finite rates")
    });

    let free = solve(&base, 0.0, opts, None)?;
    let mut points: Vec<Option<ParetoPoint>> = vec![None; target_rates.len()];
    let mut warm = free.h.clone();
    for &idx in &order {
        let point = solve_target(&base, target_rates[idx], &free, &mut warm, opts);
        points[idx] = Some(point?);
    }
    Ok(points.into_iter().map(|p| p.expect("all targets solved")).collect())
}

fn solve(model: &MdpModel, lambda: f64, opts: &SweepOptions, warm: Option<Vec<f64>>) -> Result<Solved> {
    let priced = model.with_lambda(lambda);
    let (policy, h) = rvi_with_warm_start(&priced, opts.tol, opts.max_iter, warm)?;
    let (base_cost, _) = super::rvi::evaluate_actions(&priced, &policy.actions)?;
    Ok(Solved {
        lambda,
        policy,
        base_cost,
        h,
    })
}

fn point_from_single(target: f64, s: &Solved, converged: bool) -> ParetoPoint {
    ParetoPoint {
        target_rate: target,
        lambda: s.lambda,
        avg_cost: s.base_cost,
        achieved_rate: s.policy.average_update_rate,
        policy: SweepPolicy::Single(s.policy.clone()),
        converged,
    }
}

fn solve_target(
    base: &MdpModel,
    target: f64,
    free: &Solved,
    warm: &mut Vec<f64>,
    opts: &SweepOptions,
) -> Result<ParetoPoint> {
    if (free.policy.average_update_rate - target).abs() <= opts.rate_tol {
        return Ok(point_from_single(target, free, true));
    }
    if free.policy.average_update_rate < target {
        // Even a free update price transmits less often than requested: the
        // leftover transmissions are worthless (they fire at zero retained
        // error), so the frontier is flat from here to rate 1. Time-share
        // with the always-update policy to absorb the budget.
        let always_actions = vec![true; base.n_states()];
        let (always_cost, always_rate) =
            super::rvi::evaluate_actions(base, &always_actions)?;
        let always = MdpPolicy {
            actions: always_actions,
            average_cost: always_cost,
            average_update_rate: always_rate,
        };
        let rate_free = free.policy.average_update_rate;
        let alpha = ((target - rate_free) / (always_rate - rate_free)).clamp(0.0, 1.0);
        return Ok(ParetoPoint {
            target_rate: target,
            lambda: 0.0,
            avg_cost: alpha * always_cost + (1.0 - alpha) * free.base_cost,
            achieved_rate: alpha * always_rate + (1.0 - alpha) * rate_free,
            policy: SweepPolicy::Mixed {
                low_price: always,
                high_price: free.policy.clone(),
                alpha,
            },
            converged: true,
        });
    }

    let mut lo = clone_solved(free); // rate above target
    let mut hi: Option<Solved> = None; // rate at or below target

    // Expand the price until the rate falls to (or through) the target.
    let mut lambda = 1.0;
    for _ in 0..64 {
        match solve(base, lambda, opts, Some(warm.clone())) {
            Ok(s) => {
                *warm = s.h.clone();
                let rate = s.policy.average_update_rate;
                if (rate - target).abs() <= opts.rate_tol {
                    return Ok(point_from_single(target, &s, true));
                }
                if rate < target {
                    hi = Some(s);
                    break;
                }
                lo = s;
                lambda *= 2.0;
            }
            Err(Error::NonConvergence { .. }) => {
                return Ok(point_from_single(target, &lo, false));
            }
            Err(e) => return Err(e),
        }
    }
    let mut hi = match hi {
        Some(s) => s,
        // Even huge prices keep the rate above target: flag and report the
        // closest end.
        None => return Ok(point_from_single(target, &lo, false)),
    };

    for _ in 0..100 {
        if hi.lambda - lo.lambda <= 1e-12 * hi.lambda.max(1.0) {
            break;
        }
        let mid = 0.5 * (lo.lambda + hi.lambda);
        match solve(base, mid, opts, Some(warm.clone())) {
            Ok(s) => {
                *warm = s.h.clone();
                let rate = s.policy.average_update_rate;
                if (rate - target).abs() <= opts.rate_tol {
                    return Ok(point_from_single(target, &s, true));
                }
                if rate > target {
                    lo = s;
                } else {
                    hi = s;
                }
            }
            Err(Error::NonConvergence { .. }) => {
                return Ok(point_from_single(target, &hi, false));
            }
            Err(e) => return Err(e),
        }
    }

    // The rate jumps across the target at this price: time-share the two
    // bracketing policies so the average rate matches exactly.
    let rate_lo = lo.policy.average_update_rate;
    let rate_hi = hi.policy.average_update_rate;
    let alpha = if rate_lo > rate_hi {
        ((target - rate_hi) / (rate_lo - rate_hi)).clamp(0.0, 1.0)
    } else {
        0.0
    };
    Ok(ParetoPoint {
        target_rate: target,
        lambda: hi.lambda,
        avg_cost: alpha * lo.base_cost + (1.0 - alpha) * hi.base_cost,
        achieved_rate: alpha * rate_lo + (1.0 - alpha) * rate_hi,
        policy: SweepPolicy::Mixed {
            low_price: lo.policy,
            high_price: hi.policy,
            alpha,
        },
        converged: true,
    })
}

fn clone_solved(s: &Solved) -> Solved {
    Solved {
        lambda: s.lambda,
        policy: s.policy.clone(),
        base_cost: s.base_cost,
        h: s.h.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_disc() -> Discretization {
        Discretization::new(8.0, 41, vec![(1.0, 0.99), (100.0, 0.01)]).unwrap()
    }

    #[test]
    fn rejects_unreachable_targets() {
        let disc = small_disc();
        let opts = SweepOptions::default();
        assert!(matches!(
            lagrangian_sweep(&disc, 1.0, 0.8, Metric::Uoi, &[1.5], &opts),
            Err(Error::UnreachableRate { .. })
        ));
        assert!(matches!(
            lagrangian_sweep(&disc, 1.0, 0.8, Metric::Uoi, &[0.0], &opts),
            Err(Error::UnreachableRate { .. })
        ));
    }

    #[test]
    fn free_price_maximizes_rate_and_large_price_starves() {
        let disc = small_disc();
        let opts = SweepOptions::default();
        let model = build_mdp(&disc, 1.0, 0.8, Metric::Uoi, 0.0).unwrap();
        let free = solve(&model, 0.0, &opts, None).unwrap();
        // Free transmissions: update everywhere it helps, which is every
        // state with non-zero retained error.
        let w = disc.weight_support().len();
        for qi in 0..disc.q_bins() {
            if qi == disc.center() {
                continue;
            }
            for rest in 0..w * w {
                assert!(free.policy.actions[qi * w * w + rest], "idle at qi={qi}");
            }
        }
        assert!(
            free.policy.average_update_rate > 0.8,
            "free rate = {}",
            free.policy.average_update_rate
        );
        let dear = solve(&model, 1e7, &opts, None).unwrap();
        assert!(
            dear.policy.average_update_rate < 0.01,
            "dear rate = {}",
            dear.policy.average_update_rate
        );
    }

    #[test]
    fn widening_the_grid_barely_moves_the_optimum() {
        // Truncation insensitivity: once the half-width clears
        // 6 sigma / sqrt(p * rho), growing it at fixed bin width moves the
        // evaluated optimal cost by less than 1%.
        let (sigma2, p, rho, lambda) = (1.0f64, 0.8f64, 0.25f64, 1.0);
        let step = 0.25;
        let opts = SweepOptions::default();
        let mut costs = Vec::new();
        for factor in [6.0, 10.0] {
            let q_max_target = factor * sigma2.sqrt() / (p * rho).sqrt();
            let half_bins = (q_max_target / step).ceil() as usize;
            let q_bins = 2 * half_bins + 1;
            let q_max = half_bins as f64 * step;
            let disc =
                Discretization::new(q_max, q_bins, vec![(1.0, 0.99), (100.0, 0.01)]).unwrap();
            let model = build_mdp(&disc, sigma2, p, Metric::Uoi, lambda).unwrap();
            let solved = solve(&model, lambda, &opts, None).unwrap();
            costs.push(solved.base_cost);
        }
        let rel = (costs[1] - costs[0]).abs() / costs[0];
        assert!(rel < 0.01, "cost moved {rel:.4} ({} -> {})", costs[0], costs[1]);
    }

    #[test]
    fn targets_above_the_free_rate_are_time_shared() {
        let disc = small_disc();
        let opts = SweepOptions::default();
        let points = lagrangian_sweep(&disc, 1.0, 0.8, Metric::Uoi, &[0.98], &opts).unwrap();
        let point = &points[0];
        assert!(point.converged);
        assert!((point.achieved_rate - 0.98).abs() < 1e-9);
        match &point.policy {
            SweepPolicy::Mixed { alpha, .. } => assert!((0.0..=1.0).contains(alpha)),
            SweepPolicy::Single(p) => panic!("expected a mix, got rate {}", p.average_update_rate),
        }
        // The flat part of the frontier: same cost as the free-price solve.
        let model = build_mdp(&disc, 1.0, 0.8, Metric::Uoi, 0.0).unwrap();
        let free = solve(&model, 0.0, &opts, None).unwrap();
        assert!((point.avg_cost - free.base_cost).abs() < 1e-9 * free.base_cost.max(1.0));
    }

    #[test]
    fn frontier_cost_is_monotone_in_rate() {
        let disc = small_disc();
        let opts = SweepOptions::default();
        let targets = [0.1, 0.2, 0.3, 0.4, 0.5];
        let points = lagrangian_sweep(&disc, 1.0, 0.8, Metric::Uoi, &targets, &opts).unwrap();
        assert_eq!(points.len(), targets.len());
        for pair in points.windows(2) {
            assert!(
                pair[1].avg_cost <= pair[0].avg_cost + 1e-9,
                "cost rose from {} (rate {}) to {} (rate {})",
                pair[0].avg_cost,
                pair[0].target_rate,
                pair[1].avg_cost,
                pair[1].target_rate
            );
        }
        for point in &points {
            assert!(point.converged);
            assert!((point.achieved_rate - point.target_rate).abs() <= opts.rate_tol + 1e-12);
        }
    }
}
