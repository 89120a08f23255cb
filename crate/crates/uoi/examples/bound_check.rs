//! Simulated urgency averages against the analytic guarantee
//! `mean_weight * sigma2 / (p * rho) + v / 2`.
//!
//! ```bash
//! cargo run --release --example bound_check
//! ```

use uoi::policy::PolicySpec;
use uoi::process::{Channel, IncrementProcess, WeightProcess};
use uoi::rng::derive_seed;
use uoi::sim::{run, theorem1_bound, ScenarioConfig};

fn main() -> uoi::Result<()> {
    let horizon = 100_000;
    let sigma2 = 1.0;
    println!(
        "{:>4} {:>5} {:>5} {:>10} {:>10} {:>8}",
        "p", "rho", "v", "avg_uoi", "bound", "status"
    );
    let mut index = 0;
    for p in [0.8, 1.0] {
        for rho in [0.1, 0.25, 0.5] {
            for v in [0.1, 1.0, 10.0] {
                let config = ScenarioConfig {
                    horizon,
                    seed: derive_seed(2, index),
                    increments: IncrementProcess::gaussian(sigma2)?,
                    weights: WeightProcess::two_point(1.0, 100.0, 0.01)?,
                    channel: Channel::new(p)?,
                    policy: PolicySpec::Adaptive,
                    rho,
                    v,
                    critical_period: None,
                };
                index += 1;
                let summary = run(&config)?;
                let bound = theorem1_bound(config.mean_weight(), sigma2, p, rho, v);
                let ok = summary.avg_uoi <= bound + 3.0 * summary.uoi_stderr;
                println!(
                    "{:>4} {:>5} {:>5} {:>10.4} {:>10.4} {:>8}",
                    p,
                    rho,
                    v,
                    summary.avg_uoi,
                    bound,
                    if ok { "PASS" } else { "FAIL" }
                );
            }
        }
    }
    Ok(())
}
