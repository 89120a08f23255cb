//! Rate/urgency frontier at reduced scale: the adaptive policy against the
//! randomized baseline and the two solver baselines.
//!
//! The solved error-metric policy is the benchmark; the adaptive rule lands
//! within a few percent of it, while the age-optimal policy (blind to the
//! context weights) pays severalfold more urgency at the same budget.
//!
//! ```bash
//! cargo run --release --example tradeoff
//! ```

use uoi::mdp::{lagrangian_sweep, Discretization, Metric, SweepOptions, SweepPolicy};
use uoi::policy::PolicySpec;
use uoi::process::{Channel, IncrementProcess, WeightProcess};
use uoi::rng::derive_seed;
use uoi::sim::{run, ScenarioConfig};

fn main() -> uoi::Result<()> {
    let (p, sigma2, v) = (0.8, 1.0, 1.0);
    let horizon = 200_000;
    let opts = SweepOptions::default();

    println!("{:>5} {:>12} {:>12} {:>12} {:>12}", "rho", "adaptive", "randomized", "uoi-opt", "aoi-opt");
    for (i, rho) in [0.1, 0.25, 0.4].into_iter().enumerate() {
        let env = ScenarioConfig {
            horizon,
            seed: derive_seed(1, i as u64),
            increments: IncrementProcess::gaussian(sigma2)?,
            weights: WeightProcess::two_point(1.0, 100.0, 0.01)?,
            channel: Channel::new(p)?,
            policy: PolicySpec::Adaptive,
            rho,
            v,
            critical_period: None,
        };

        let adaptive = run(&env)?.avg_uoi;
        let mut randomized_env = env.clone();
        randomized_env.policy = PolicySpec::Randomized { prob: None };
        let randomized = run(&randomized_env)?.avg_uoi;

        // 101 bins keep the demo quick; the full runs use 201.
        let disc = Discretization::new(
            10.0 * sigma2.sqrt() / (p * rho).sqrt(),
            101,
            vec![(1.0, 0.99), (100.0, 0.01)],
        )?
        .with_age_max(((40.0 / (p * rho)).ceil() as u64).clamp(64, 4096));

        let mut solved = Vec::new();
        for metric in [Metric::Uoi, Metric::Aoi] {
            let point = &lagrangian_sweep(&disc, sigma2, p, metric, &[rho], &opts)?[0];
            let mut table_env = env.clone();
            table_env.policy = match (&point.policy, metric) {
                (SweepPolicy::Single(pol), Metric::Uoi) => PolicySpec::UoiTable(
                    uoi::mdp::UoiTablePolicy::from_policy(&disc, pol)?,
                ),
                (SweepPolicy::Single(pol), Metric::Aoi) => {
                    PolicySpec::AoiTable(uoi::mdp::AoiTablePolicy::from_policy(pol)?)
                }
                (SweepPolicy::Mixed { high_price, .. }, Metric::Uoi) => PolicySpec::UoiTable(
                    uoi::mdp::UoiTablePolicy::from_policy(&disc, high_price)?,
                ),
                (SweepPolicy::Mixed { high_price, .. }, Metric::Aoi) => {
                    PolicySpec::AoiTable(uoi::mdp::AoiTablePolicy::from_policy(high_price)?)
                }
            };
            solved.push(run(&table_env)?.avg_uoi);
        }

        println!(
            "{:>5} {:>12.4} {:>12.4} {:>12.4} {:>12.4}",
            rho, adaptive, randomized, solved[0], solved[1]
        );
    }
    Ok(())
}
