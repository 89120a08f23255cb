//! One adaptive run through a critical period.
//!
//! The context weight is 1 for the first 4950 slots and 100 for the final
//! 50. Watch the policy spend its banked transmission budget exactly where
//! accuracy matters: the critical-period update rate jumps well above the
//! 0.25 average and the squared error drops.
//!
//! ```bash
//! cargo run --release --example sample_path
//! ```

use uoi::config::{config_entries, sample_path_defaults};
use uoi::report::trace_csv;
use uoi::sim::run_traced;

fn main() -> uoi::Result<()> {
    let mut config = sample_path_defaults();
    config.seed = 7;

    let (summary, trace) = run_traced(&config)?;
    let stats = summary.per_period.expect("critical period configured");

    println!("horizon {} slots, budget rho = {}", config.horizon, config.rho);
    println!(
        "overall:  avg urgency {:.3}, avg age {:.3}, update rate {:.4}, H_T/T {:.5}",
        summary.avg_uoi, summary.avg_aoi, summary.avg_update_rate, summary.final_h_over_t
    );
    println!(
        "ordinary: mean squared error {:.3}",
        stats.ordinary_mean_sq_error
    );
    println!(
        "critical: mean squared error {:.3}, update rate {:.4}",
        stats.critical_mean_sq_error, stats.critical_update_rate
    );

    println!("\nlast slots before and inside the critical window:");
    println!("{:>5} {:>8} {:>7} {:>8} {:>3} {:>9}", "t", "Q", "omega", "H", "U", "J");
    for record in trace.iter().skip(4945).take(12) {
        println!(
            "{:>5} {:>8.3} {:>7} {:>8.3} {:>3} {:>9.2}",
            record.t,
            record.q,
            record.omega,
            record.h,
            u8::from(record.update),
            record.index.unwrap_or(f64::NAN),
        );
    }

    let path = std::env::temp_dir().join("uoi_sample_path.csv");
    std::fs::write(&path, trace_csv(&config_entries(&config), &summary, &trace))?;
    println!("\nfull trace written to {}", path.display());
    Ok(())
}
