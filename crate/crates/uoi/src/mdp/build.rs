//! Model construction for the discretized updating problem.

use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::mdp::{Discretization, Metric, MdpModel, ModelMeta};

/// Builds the discretized average-cost model.
///
/// Error-metric states are `(q, w, w_next)` triples indexed as
/// `(q_i * W + w_i) * W + wn_i`; age-metric states are ages `1..=age_max`
/// (weights play no role in age dynamics). Transitions compose the
/// action/channel reset (transmitting resets the error to the center bin with
/// probability `p`), the Gaussian increment folded onto the grid with
/// out-of-range mass lumped into the edge bins, and the weight shift (the
/// revealed next weight becomes current, a fresh one is drawn). The stage
/// cost is the expected next-slot metric under the same folded kernel, plus
/// `lambda` per transmission.
pub fn build_mdp(
    disc: &Discretization,
    sigma2: f64,
    p: f64,
    metric: Metric,
    lambda: f64,
) -> Result<MdpModel> {
    if !sigma2.is_finite() || sigma2 <= 0.0 {
        return Err(Error::invalid("sigma2", format!("must be > 0, got {sigma2}")));
    }
    if !p.is_finite() || p <= 0.0 || p > 1.0 {
        return Err(Error::invalid("p", format!("must lie in (0, 1], got {p}")));
    }
    if !lambda.is_finite() || lambda < 0.0 {
        return Err(Error::invalid("lambda", format!("must be >= 0, got {lambda}")));
    }
    match metric {
        Metric::Uoi => build_uoi(disc, sigma2, p, lambda),
        Metric::Aoi => build_aoi(disc.age_max(), p, lambda),
    }
}

/// Grid-folded Gaussian step: `rows[i][j]` is the probability that an error
/// at grid point `i` lands in bin `j` after one zero-mean increment, with the
/// tails folded into the first and last bins. Each row sums to exactly 1 by
/// telescoping of the CDF evaluations.
fn increment_rows(disc: &Discretization, sigma2: f64) -> Vec<Vec<f64>> {
    let bins = disc.q_bins();
    let grid = disc.grid();
    let half_step = disc.step() / 2.0;
    let sigma = sigma2.sqrt();
    let normal = Normal::new(0.0, 1.0).expect("unit normal");

    let mut rows = Vec::with_capacity(bins);
    let mut cdfs = vec![0.0; bins + 1];
    for i in 0..bins {
        cdfs[0] = 0.0;
        cdfs[bins] = 1.0;
        for j in 1..bins {
            cdfs[j] = normal.cdf((grid[j] - half_step - grid[i]) / sigma);
        }
        let row: Vec<f64> = (0..bins).map(|j| (cdfs[j + 1] - cdfs[j]).max(0.0)).collect();
        rows.push(row);
    }
    rows
}

fn build_uoi(disc: &Discretization, sigma2: f64, p: f64, lambda: f64) -> Result<MdpModel> {
    let bins = disc.q_bins();
    let center = disc.center();
    let support = disc.weight_support().to_vec();
    let w = support.len();
    let n = bins * w * w;
    let grid = disc.grid();

    let inc = increment_rows(disc, sigma2);

    // Expected next-slot squared error on the truncated grid.
    let second_moment = |row: &[f64]| -> f64 {
        row.iter().zip(&grid).map(|(m, q)| m * q * q).sum()
    };
    let eq2_no_reset: Vec<f64> = inc.iter().map(|r| second_moment(r)).collect();
    let eq2_reset = eq2_no_reset[center];

    let state_index = |qi: usize, wi: usize, wni: usize| (qi * w + wi) * w + wni;

    let mut kernel = vec![0.0; 2 * n * n];
    let mut base_cost = vec![0.0; 2 * n];
    for qi in 0..bins {
        for wi in 0..w {
            for wni in 0..w {
                let s = state_index(qi, wi, wni);
                let omega_next = support[wni].0;
                for a in 0..2 {
                    let offset = (a * n + s) * n;
                    for qj in 0..bins {
                        // Transmit: reset to center with probability p, else
                        // evolve from the retained error.
                        let q_mass = if a == 1 {
                            p * inc[center][qj] + (1.0 - p) * inc[qi][qj]
                        } else {
                            inc[qi][qj]
                        };
                        if q_mass == 0.0 {
                            continue;
                        }
                        // Next state: revealed weight becomes current, fresh
                        // next weight drawn from the support.
                        for (wk, &(_, prob)) in support.iter().enumerate() {
                            kernel[offset + state_index(qj, wni, wk)] = q_mass * prob;
                        }
                    }
                    let eq2 = if a == 1 {
                        p * eq2_reset + (1.0 - p) * eq2_no_reset[qi]
                    } else {
                        eq2_no_reset[qi]
                    };
                    base_cost[s * 2 + a] = omega_next * eq2;
                }
            }
        }
    }

    Ok(MdpModel::assemble(
        n,
        kernel,
        base_cost,
        lambda,
        ModelMeta::Uoi {
            disc: disc.clone(),
            sigma2,
            p,
        },
    ))
}

fn build_aoi(age_max: u64, p: f64, lambda: f64) -> Result<MdpModel> {
    if age_max < 2 {
        return Err(Error::invalid("age_max", "need at least two age states"));
    }
    let n = age_max as usize;
    let mut kernel = vec![0.0; 2 * n * n];
    let mut base_cost = vec![0.0; 2 * n];
    for s in 0..n {
        // State s holds age s + 1; ages saturate at age_max.
        let aged = (s + 1).min(n - 1);
        let next_age = (aged + 1) as f64;

        kernel[s * n + aged] = 1.0;
        base_cost[s * 2] = next_age;

        let offset = (n + s) * n;
        kernel[offset] += p;
        kernel[offset + aged] += 1.0 - p;
        base_cost[s * 2 + 1] = p * 1.0 + (1.0 - p) * next_age;
    }
    Ok(MdpModel::assemble(
        n,
        kernel,
        base_cost,
        lambda,
        ModelMeta::Aoi { age_max, p },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_disc() -> Discretization {
        Discretization::new(5.0, 21, vec![(1.0, 0.99), (100.0, 0.01)]).unwrap()
    }

    #[test]
    fn rejects_bad_inputs() {
        let disc = small_disc();
        assert!(build_mdp(&disc, 0.0, 0.8, Metric::Uoi, 0.0).is_err());
        assert!(build_mdp(&disc, 1.0, 0.0, Metric::Uoi, 0.0).is_err());
        assert!(build_mdp(&disc, 1.0, 1.5, Metric::Uoi, 0.0).is_err());
        assert!(build_mdp(&disc, 1.0, 0.8, Metric::Uoi, -1.0).is_err());
    }

    #[test]
    fn every_row_is_a_probability_vector() {
        let disc = small_disc();
        for metric in [Metric::Uoi, Metric::Aoi] {
            let model = build_mdp(&disc, 1.0, 0.8, metric, 0.5).unwrap();
            model.validate_rows().unwrap();
        }
    }

    #[test]
    fn idle_row_is_the_increment_convolution() {
        let disc = small_disc();
        let model = build_mdp(&disc, 1.0, 0.8, Metric::Uoi, 0.0).unwrap();
        let inc = increment_rows(&disc, 1.0);
        let w = 2;
        // State (qi = 3, wi = 0, wni = 1), action 0: the q-marginal must equal
        // the increment row, the current weight must become the revealed one.
        let s = (3 * w) * w + 1;
        let row = model.transition_row(s, 0);
        for qj in 0..disc.q_bins() {
            let mut marginal = 0.0;
            for wi in 0..w {
                for wk in 0..w {
                    marginal += row[(qj * w + wi) * w + wk];
                }
            }
            assert!((marginal - inc[3][qj]).abs() < 1e-12);
            // No mass on states whose current weight differs from wni = 1.
            for wk in 0..w {
                assert_eq!(row[(qj * w) * w + wk], 0.0);
            }
        }
    }

    #[test]
    fn perfect_channel_reset_recenters_the_error() {
        let disc = small_disc();
        let model = build_mdp(&disc, 1.0, 1.0, Metric::Uoi, 0.0).unwrap();
        let inc = increment_rows(&disc, 1.0);
        let w = 2;
        let center = disc.center();
        let s = (17 * w + 1) * w; // far-from-center error state
        let row = model.transition_row(s, 1);
        for qj in 0..disc.q_bins() {
            let mut marginal = 0.0;
            for wi in 0..w {
                for wk in 0..w {
                    marginal += row[(qj * w + wi) * w + wk];
                }
            }
            assert!((marginal - inc[center][qj]).abs() < 1e-12);
        }
    }

    #[test]
    fn stage_cost_pairs_revealed_weight_with_next_error() {
        let disc = small_disc();
        let model = build_mdp(&disc, 1.0, 0.8, Metric::Uoi, 0.25).unwrap();
        let inc = increment_rows(&disc, 1.0);
        let grid = disc.grid();
        let w = 2;
        let qi = 15;
        let s = (qi * w) * w + 1; // wni = 1 -> omega_next = 100
        let eq2: f64 = inc[qi].iter().zip(&grid).map(|(m, q)| m * q * q).sum();
        assert!((model.base_cost(s, 0) - 100.0 * eq2).abs() < 1e-9);
        assert!((model.stage_cost(s, 1) - (model.base_cost(s, 1) + 0.25)).abs() < 1e-15);
    }

    #[test]
    fn age_model_dynamics() {
        let disc = small_disc().with_age_max(5);
        let model = build_mdp(&disc, 1.0, 0.8, Metric::Aoi, 0.0).unwrap();
        assert_eq!(model.n_states(), 5);
        model.validate_rows().unwrap();

        // Idle from age 2 (state 1) moves to age 3 (state 2).
        let row = model.transition_row(1, 0);
        assert_eq!(row[2], 1.0);
        // Transmit from age 2: to age 1 w.p. 0.8, else age 3.
        let row = model.transition_row(1, 1);
        assert!((row[0] - 0.8).abs() < 1e-15);
        assert!((row[2] - 0.2).abs() < 1e-15);
        // Ages saturate: idle at age_max stays at age_max.
        let row = model.transition_row(4, 0);
        assert_eq!(row[4], 1.0);
        // Stage cost is the expected next age.
        assert!((model.base_cost(1, 0) - 3.0).abs() < 1e-15);
        assert!((model.base_cost(1, 1) - (0.8 + 0.2 * 3.0)).abs() < 1e-15);
    }
}
