//! Paired policy comparison on common random numbers.
//!
//! All runs share one seed, so every policy sees bit-identical increment and
//! weight sample paths; channel outcomes are drawn per attempt. Differences
//! in average urgency are then differences between policies, not between
//! sample paths.
//!
//! ```bash
//! cargo run --release --example policy_compare
//! ```

use uoi::policy::PolicySpec;
use uoi::process::{Channel, IncrementProcess, WeightProcess};
use uoi::sim::{compare_policies, ScenarioConfig};

fn main() -> uoi::Result<()> {
    let rho = 0.25;
    let base = ScenarioConfig {
        horizon: 500_000,
        seed: 42,
        increments: IncrementProcess::gaussian(1.0)?,
        weights: WeightProcess::two_point(1.0, 100.0, 0.01)?,
        channel: Channel::new(0.8)?,
        policy: PolicySpec::Adaptive,
        rho,
        v: 1.0,
        critical_period: None,
    };

    let specs = [
        PolicySpec::Adaptive,
        PolicySpec::Randomized { prob: None },
        PolicySpec::Periodic { period: 4 },
    ];
    let configs: Vec<ScenarioConfig> = specs
        .iter()
        .map(|spec| {
            let mut config = base.clone();
            config.policy = spec.clone();
            config
        })
        .collect();

    let summaries = compare_policies(&configs)?;
    println!("shared seed {}, budget rho = {rho}", base.seed);
    println!(
        "{:>12} {:>10} {:>10} {:>8} {:>9}",
        "policy", "avg_uoi", "stderr", "rate", "avg_age"
    );
    for (spec, summary) in specs.iter().zip(&summaries) {
        println!(
            "{:>12} {:>10.4} {:>10.4} {:>8.4} {:>9.3}",
            spec.label(),
            summary.avg_uoi,
            summary.uoi_stderr,
            summary.avg_update_rate,
            summary.avg_aoi
        );
    }
    Ok(())
}
