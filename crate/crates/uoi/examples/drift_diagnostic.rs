//! Empirical Lyapunov drift-plus-penalty average against its per-slot bound.
//!
//! The adaptive policy greedily minimizes the one-slot drift of
//! `L = v/2 * H^2 + theta * Q^2` plus the next-slot urgency; the time average
//! of that quantity must stay under `mean_weight * sigma2 / (p*rho) + v/2`,
//! which is exactly how the long-run urgency guarantee is obtained.
//!
//! ```bash
//! cargo run --release --example drift_diagnostic
//! ```

use uoi::policy::PolicySpec;
use uoi::process::{Channel, IncrementProcess, WeightProcess};
use uoi::rng::derive_seed;
use uoi::sim::{drift_diagnostic, run_traced, theorem1_bound, ScenarioConfig};

fn main() -> uoi::Result<()> {
    let (p, v, sigma2) = (0.8, 1.0, 1.0);
    println!(
        "{:>5} {:>14} {:>14} {:>12}",
        "rho", "drift+penalty", "running bound", "avg urgency"
    );
    for (i, rho) in [0.1, 0.25, 0.5].into_iter().enumerate() {
        let config = ScenarioConfig {
            horizon: 200_000,
            seed: derive_seed(3, i as u64),
            increments: IncrementProcess::gaussian(sigma2)?,
            weights: WeightProcess::two_point(1.0, 100.0, 0.01)?,
            channel: Channel::new(p)?,
            policy: PolicySpec::Adaptive,
            rho,
            v,
            critical_period: None,
        };
        let (summary, trace) = run_traced(&config)?;
        let mean_weight = config.mean_weight();
        let theta = mean_weight * (1.0 - p * rho) / (p * rho);
        let diagnostic = drift_diagnostic(&trace, v, theta)?;
        let bound = theorem1_bound(mean_weight, sigma2, p, rho, v);
        println!(
            "{:>5} {:>14.4} {:>14.4} {:>12.4}",
            rho, diagnostic, bound, summary.avg_uoi
        );
        assert!(diagnostic <= bound, "diagnostic above the bound");
    }
    Ok(())
}
