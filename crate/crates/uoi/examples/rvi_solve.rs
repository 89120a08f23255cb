//! Solve one constrained model and inspect the optimal policy's structure.
//!
//! The error-metric optimum is a threshold rule in |error| for each weight
//! pair: transmit once the error clears a level that depends on how urgent
//! the next slot is. The revealed next weight matters most: a looming
//! weight-100 slot pulls the threshold close to zero.
//!
//! ```bash
//! cargo run --release --example rvi_solve
//! ```

use uoi::mdp::{build_mdp, evaluate_policy, relative_value_iteration, Discretization, Metric};

fn main() -> uoi::Result<()> {
    let (sigma2, p, lambda) = (1.0, 0.8, 3.0);
    let disc = Discretization::new(15.0, 121, vec![(1.0, 0.99), (100.0, 0.01)])?;
    let model = build_mdp(&disc, sigma2, p, Metric::Uoi, lambda)?;

    let policy = relative_value_iteration(&model, 1e-8, 100_000)?;
    let (avg_cost, avg_rate) = evaluate_policy(&model, &policy)?;
    println!("update price lambda = {lambda}");
    println!(
        "solver average cost {:.5}; evaluated: urgency {:.5} at rate {:.5}",
        policy.average_cost, avg_cost, avg_rate
    );

    let grid = disc.grid();
    let w = disc.weight_support().len();
    println!("\nsmallest |error| that triggers a transmission:");
    println!("{:>10} {:>10} {:>12}", "omega", "omega_next", "threshold");
    for wi in 0..w {
        for wni in 0..w {
            let threshold = grid
                .iter()
                .enumerate()
                .filter(|&(qi, q)| *q >= 0.0 && policy.actions[(qi * w + wi) * w + wni])
                .map(|(_, q)| *q)
                .fold(f64::INFINITY, f64::min);
            println!(
                "{:>10} {:>10} {:>12.3}",
                disc.weight_support()[wi].0,
                disc.weight_support()[wni].0,
                threshold
            );
        }
    }
    Ok(())
}
