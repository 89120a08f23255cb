//! Subcommand implementations behind the `uoi` binary.
//!
//! Each subcommand resolves its configuration (defaults, then an optional
//! `key=value` file, then flags), echoes the resolved entries, runs, writes a
//! CSV whose header embeds those entries, and reports a summary. Exit codes:
//! 0 on success with all checks passing, 1 on errors, 2 when a requested
//! check fails or a solver point does not converge.

use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use crate::config::{
    resolve_scenario, sample_path_defaults, tradeoff_defaults, ResolvedScenario,
};
use crate::error::{Error, Result};
use crate::mdp::{
    lagrangian_sweep, load_table, relative_value_iteration, save_table,
    AoiTablePolicy, Discretization, Metric, SweepOptions, SweepPolicy, TablePolicy,
    UoiTablePolicy, DEFAULT_MAX_ITER, DEFAULT_TOL,
};
use crate::policy::PolicySpec;
use crate::process::WeightProcess;
use crate::report::{
    bound_csv, control_csv, format_period_stats, tradeoff_csv, trace_csv, BoundRow, ControlRow,
    TradeoffRow,
};
use crate::rng::derive_seed;
use crate::sim::{run, run_traced, theorem1_bound, ScenarioConfig};
use crate::tracking::{run_tracking, PlantConfig, ReferenceSignal, TrackingConfig};

/// Environment variable selecting the default output directory.
pub const OUT_DIR_ENV: &str = "UOI_OUT_DIR";

#[derive(Debug, Parser)]
#[command(
    name = "uoi",
    version,
    about = "Context-aware status updating: simulation, adaptive policies, and solver baselines"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Trace one run through a critical period and emit the per-slot CSV.
    SamplePath(SamplePathArgs),
    /// Sweep the rate/urgency frontier for four policies.
    Tradeoff(TradeoffArgs),
    /// Check simulated urgency averages against the analytic bound.
    BoundCheck(BoundCheckArgs),
    /// Tracking-control demo: error decomposition of a scalar plant.
    ControlDemo(ControlDemoArgs),
    /// Solve one constrained model and persist its policy table.
    RviSolve(RviSolveArgs),
}

/// Scenario-shaped flags shared by the simulation subcommands; each maps to
/// the config key of the same name and overrides file values.
#[derive(Debug, Args, Default)]
pub struct ScenarioArgs {
    /// Config file with one key=value per line (# comments).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Horizon in slots.
    #[arg(long)]
    pub t: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Increment variance (shorthand for --increment gaussian:<v>).
    #[arg(long)]
    pub sigma2: Option<f64>,
    /// Increment process, e.g. gaussian:1 or constant:1.
    #[arg(long)]
    pub increment: Option<String>,
    /// Channel success probability.
    #[arg(long)]
    pub p: Option<f64>,
    /// Average update-frequency budget.
    #[arg(long)]
    pub rho: Option<f64>,
    /// Virtual-queue threshold weight of the adaptive policy.
    #[arg(long)]
    pub v: Option<f64>,
    /// Weight process, e.g. two-point:1,100,0.01 or scheduled:0-99=1,100-199=50.
    #[arg(long)]
    pub weight: Option<String>,
    /// Policy: adaptive, randomized[:prob], periodic:<k>, never,
    /// uoi-table:<path>, aoi-table:<path>.
    #[arg(long)]
    pub policy: Option<String>,
    /// Critical period <start>-<end> (inclusive), or none.
    #[arg(long)]
    pub critical: Option<String>,
}

impl ScenarioArgs {
    fn overrides(&self) -> Vec<(String, String)> {
        let mut out = Vec::new();
        let mut push = |key: &str, value: Option<String>| {
            if let Some(v) = value {
                out.push((key.to_string(), v));
            }
        };
        push("t", self.t.map(|v| v.to_string()));
        push("seed", self.seed.map(|v| v.to_string()));
        push("sigma2", self.sigma2.map(|v| v.to_string()));
        push("increment", self.increment.clone());
        push("p", self.p.map(|v| v.to_string()));
        push("rho", self.rho.map(|v| v.to_string()));
        push("v", self.v.map(|v| v.to_string()));
        push("weight", self.weight.clone());
        push("policy", self.policy.clone());
        push("critical", self.critical.clone());
        out
    }

    fn resolve(&self, defaults: &ScenarioConfig) -> Result<ResolvedScenario> {
        let file_text = match &self.config {
            Some(path) => Some(fs::read_to_string(path)?),
            None => None,
        };
        resolve_scenario(defaults, file_text.as_deref(), &self.overrides())
    }
}

#[derive(Debug, Args)]
pub struct SamplePathArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    /// Output CSV path (default: sample_path.csv in $UOI_OUT_DIR or .).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TradeoffArgs {
    /// Comma-separated update-frequency budgets.
    #[arg(long, default_value = "0.1,0.15,0.2,0.25,0.3,0.35,0.4,0.45,0.5")]
    pub rhos: String,
    /// Slots simulated per point and policy.
    #[arg(long, default_value_t = 1_000_000)]
    pub t: u64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 1.0)]
    pub v: f64,
    #[arg(long, default_value_t = 0.8)]
    pub p: f64,
    #[arg(long, default_value_t = 1.0)]
    pub sigma2: f64,
    /// Weight process (constant:<w> or two-point:<low>,<high>,<probHigh>).
    #[arg(long, default_value = "two-point:1,100,0.01")]
    pub weight: String,
    /// Error-axis bins of the solver grid (odd).
    #[arg(long, default_value_t = 201)]
    pub q_bins: usize,
    /// Error-axis half-width; default 10 * sigma / sqrt(p * rho) per point.
    #[arg(long)]
    pub q_max: Option<f64>,
    /// Age-axis truncation; default 40 / (p * rho) per point, clamped.
    #[arg(long)]
    pub age_max: Option<u64>,
    /// Skip the solver baselines (adaptive and randomized rows only).
    #[arg(long)]
    pub skip_solver: bool,
    /// Directory for persisted policy tables; solved points are reloaded
    /// from here on the next run.
    #[arg(long)]
    pub cache_dir: Option<PathBuf>,
    /// Output CSV path (default: tradeoff.csv in $UOI_OUT_DIR or .).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BoundCheckArgs {
    #[arg(long, default_value = "0.8,1")]
    pub p_grid: String,
    #[arg(long, default_value = "0.1,0.25,0.5")]
    pub rho_grid: String,
    #[arg(long, default_value = "0.1,1,10")]
    pub v_grid: String,
    #[arg(long, default_value_t = 1_000_000)]
    pub t: u64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 1.0)]
    pub sigma2: f64,
    #[arg(long, default_value = "two-point:1,100,0.01")]
    pub weight: String,
    /// Output CSV path (default: bound_check.csv in $UOI_OUT_DIR or .).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ControlDemoArgs {
    /// Plant gain; omit to run the built-in presets.
    #[arg(long)]
    pub a: Option<f64>,
    /// Control gain.
    #[arg(long)]
    pub b: Option<f64>,
    /// Plant noise variance.
    #[arg(long)]
    pub noise_var: Option<f64>,
    #[arg(long, default_value_t = 1_000_000)]
    pub t: u64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.8)]
    pub p: f64,
    #[arg(long, default_value_t = 0.25)]
    pub rho: f64,
    #[arg(long, default_value_t = 1.0)]
    pub v: f64,
    #[arg(long, default_value = "two-point:1,100,0.01")]
    pub weight: String,
    /// Update policy for the status link.
    #[arg(long, default_value = "adaptive")]
    pub policy: String,
    /// Output CSV path (default: control_demo.csv in $UOI_OUT_DIR or .).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct RviSolveArgs {
    /// Metric: uoi or aoi.
    #[arg(long, default_value = "uoi")]
    pub metric: String,
    /// Target stationary update rate in (0, 1); bisected over the price.
    #[arg(long)]
    pub rho: Option<f64>,
    /// Fixed update price (skips the bisection).
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long, default_value_t = 0.8)]
    pub p: f64,
    #[arg(long, default_value_t = 1.0)]
    pub sigma2: f64,
    #[arg(long, default_value = "two-point:1,100,0.01")]
    pub weight: String,
    #[arg(long, default_value_t = 201)]
    pub q_bins: usize,
    #[arg(long)]
    pub q_max: Option<f64>,
    #[arg(long)]
    pub age_max: Option<u64>,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    pub tol: f64,
    #[arg(long, default_value_t = DEFAULT_MAX_ITER)]
    pub max_iter: usize,
    /// Output table path (default: <metric>_policy.table in $UOI_OUT_DIR or .).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Entry point for the binary: dispatches and maps errors to exit codes.
pub fn run_cli(cli: Cli) -> i32 {
    let outcome = match cli.command {
        Command::SamplePath(args) => cmd_sample_path(&args),
        Command::Tradeoff(args) => cmd_tradeoff(&args),
        Command::BoundCheck(args) => cmd_bound_check(&args),
        Command::ControlDemo(args) => cmd_control_demo(&args),
        Command::RviSolve(args) => cmd_rvi_solve(&args),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn out_path(out: &Option<PathBuf>, default_name: &str) -> PathBuf {
    match out {
        Some(path) => path.clone(),
        None => {
            let dir = std::env::var_os(OUT_DIR_ENV)
                .map(PathBuf::from)
                .unwrap_or_else(|| PathBuf::from("."));
            dir.join(default_name)
        }
    }
}

fn echo_entries(entries: &[(String, String)]) {
    let line: Vec<String> = entries.iter().map(|(k, v)| format!("{k}={v}")).collect();
    println!("config: {}", line.join(" "));
}

pub fn cmd_sample_path(args: &SamplePathArgs) -> Result<i32> {
    let resolved = args.scenario.resolve(&sample_path_defaults())?;
    echo_entries(&resolved.entries);
    let (summary, trace) = run_traced(&resolved.config)?;
    let csv = trace_csv(&resolved.entries, &summary, &trace);
    let path = out_path(&args.out, "sample_path.csv");
    fs::write(&path, csv)?;
    println!(
        "avg_uoi={} avg_aoi={} avg_update_rate={} H_T/T={}",
        summary.avg_uoi, summary.avg_aoi, summary.avg_update_rate, summary.final_h_over_t
    );
    if let Some(stats) = &summary.per_period {
        println!("{}", format_period_stats(stats));
    }
    println!("trace written to {}", path.display());
    Ok(0)
}

/// Stationary weight support for the solver, derived from the weight process.
fn solver_weight_support(weights: &WeightProcess) -> Result<Vec<(f64, f64)>> {
    match weights {
        WeightProcess::Constant(w) => Ok(vec![(*w, 1.0)]),
        WeightProcess::TwoPointIid {
            low,
            high,
            prob_high,
        } => Ok(vec![(*low, 1.0 - prob_high), (*high, *prob_high)]),
        WeightProcess::Scheduled(_) => Err(Error::Config(
            "scheduled weights have no stationary support; the solver needs constant or two-point weights"
                .into(),
        )),
    }
}

struct SolvedTables {
    policy: TableOrMix,
    status: String,
}

enum TableOrMix {
    Single(TablePolicy),
    Mixed {
        low: TablePolicy,
        high: TablePolicy,
        alpha: f64,
    },
}

fn cache_name(metric: Metric, args: &TradeoffArgs, rho: f64, disc: &Discretization) -> String {
    let tag = match metric {
        Metric::Uoi => format!(
            "uoi-p{}-s{}-rho{}-bins{}-qmax{}",
            args.p,
            args.sigma2,
            rho,
            disc.q_bins(),
            disc.q_max()
        ),
        Metric::Aoi => format!("aoi-p{}-rho{}-amax{}", args.p, rho, disc.age_max()),
    };
    format!("{tag}.table")
}

fn solve_point(
    metric: Metric,
    disc: &Discretization,
    args: &TradeoffArgs,
    rho: f64,
) -> Result<SolvedTables> {
    if let Some(dir) = &args.cache_dir {
        let path = dir.join(cache_name(metric, args, rho, disc));
        if path.exists() {
            return Ok(SolvedTables {
                policy: TableOrMix::Single(load_table(&path)?),
                status: "ok(cached)".into(),
            });
        }
    }
    let opts = SweepOptions::default();
    let points = lagrangian_sweep(disc, args.sigma2, args.p, metric, &[rho], &opts)?;
    let point = &points[0];
    let status = if point.converged {
        "ok".to_string()
    } else {
        "solver-unconverged".to_string()
    };
    let to_table = |policy: &crate::mdp::MdpPolicy| -> Result<TablePolicy> {
        Ok(match metric {
            Metric::Uoi => TablePolicy::Uoi(UoiTablePolicy::from_policy(disc, policy)?),
            Metric::Aoi => TablePolicy::Aoi(AoiTablePolicy::from_policy(policy)?),
        })
    };
    let policy = match &point.policy {
        SweepPolicy::Single(p) => {
            let table = to_table(p)?;
            if point.converged {
                if let Some(dir) = &args.cache_dir {
                    fs::create_dir_all(dir)?;
                    let path = dir.join(cache_name(metric, args, rho, disc));
                    save_table(
                        &path,
                        &table,
                        &[
                            ("lambda".into(), point.lambda.to_string()),
                            ("g".into(), p.average_cost.to_string()),
                            ("rate".into(), p.average_update_rate.to_string()),
                        ],
                    )?;
                }
            }
            TableOrMix::Single(table)
        }
        SweepPolicy::Mixed {
            low_price,
            high_price,
            alpha,
        } => TableOrMix::Mixed {
            low: to_table(low_price)?,
            high: to_table(high_price)?,
            alpha: *alpha,
        },
    };
    Ok(SolvedTables { policy, status })
}

fn table_to_spec(table: &TablePolicy) -> PolicySpec {
    match table {
        TablePolicy::Uoi(t) => PolicySpec::UoiTable(t.clone()),
        TablePolicy::Aoi(t) => PolicySpec::AoiTable(t.clone()),
    }
}

/// Simulates a solved table (or a time-sharing mix of two) on the continuous
/// environment; mixes combine linearly.
fn simulate_tables(env: &ScenarioConfig, solved: &TableOrMix) -> Result<(f64, f64, f64)> {
    match solved {
        TableOrMix::Single(table) => {
            let mut config = env.clone();
            config.policy = table_to_spec(table);
            let summary = run(&config)?;
            Ok((summary.avg_uoi, summary.avg_update_rate, summary.uoi_stderr))
        }
        TableOrMix::Mixed { low, high, alpha } => {
            let mut config = env.clone();
            config.policy = table_to_spec(low);
            let a = run(&config)?;
            config.policy = table_to_spec(high);
            let b = run(&config)?;
            let uoi = alpha * a.avg_uoi + (1.0 - alpha) * b.avg_uoi;
            let rate = alpha * a.avg_update_rate + (1.0 - alpha) * b.avg_update_rate;
            let stderr = (alpha * alpha * a.uoi_stderr * a.uoi_stderr
                + (1.0 - alpha) * (1.0 - alpha) * b.uoi_stderr * b.uoi_stderr)
                .sqrt();
            Ok((uoi, rate, stderr))
        }
    }
}

pub fn cmd_tradeoff(args: &TradeoffArgs) -> Result<i32> {
    let rhos = parse_list(&args.rhos, "rhos")?;
    let weights = crate::config::resolve_scenario(
        &tradeoff_defaults(),
        None,
        &[("weight".to_string(), args.weight.clone())],
    )?
    .config
    .weights;
    if !args.skip_solver {
        solver_weight_support(&weights)?;
    }

    let points: Vec<Result<Vec<TradeoffRow>>> = rhos
        .par_iter()
        .enumerate()
        .map(|(i, &rho)| tradeoff_point(args, &weights, rho, i))
        .collect();

    let mut rows = Vec::new();
    for point in points {
        rows.extend(point?);
    }

    let entries = tradeoff_entries(args);
    let csv = tradeoff_csv(&entries, &rows);
    let path = out_path(&args.out, "tradeoff.csv");
    fs::write(&path, csv)?;

    echo_entries(&entries);
    println!("rho      policy        avg_uoi      rate      stderr    status");
    for r in &rows {
        println!(
            "{:<8} {:<13} {:<12.5} {:<9.5} {:<9.5} {}",
            r.rho, r.policy, r.avg_uoi, r.avg_update_rate, r.stderr, r.status
        );
    }
    println!("frontier written to {}", path.display());
    let all_ok = rows.iter().all(|r| r.status.starts_with("ok"));
    Ok(if all_ok { 0 } else { 2 })
}

fn tradeoff_entries(args: &TradeoffArgs) -> Vec<(String, String)> {
    vec![
        ("rhos".into(), args.rhos.clone()),
        ("t".into(), args.t.to_string()),
        ("seed".into(), args.seed.to_string()),
        ("v".into(), args.v.to_string()),
        ("p".into(), args.p.to_string()),
        ("sigma2".into(), args.sigma2.to_string()),
        ("weight".into(), args.weight.clone()),
        ("q_bins".into(), args.q_bins.to_string()),
        (
            "q_max".into(),
            args.q_max.map(|v| v.to_string()).unwrap_or_else(|| "auto".into()),
        ),
        (
            "age_max".into(),
            args.age_max.map(|v| v.to_string()).unwrap_or_else(|| "auto".into()),
        ),
        ("skip_solver".into(), args.skip_solver.to_string()),
    ]
}

fn point_disc(args: &TradeoffArgs, support: Vec<(f64, f64)>, rho: f64) -> Result<Discretization> {
    let q_max = args
        .q_max
        .unwrap_or_else(|| 10.0 * args.sigma2.sqrt() / (args.p * rho).sqrt());
    let age_max = args
        .age_max
        .unwrap_or_else(|| ((40.0 / (args.p * rho)).ceil() as u64).clamp(64, 4096));
    Ok(Discretization::new(q_max, args.q_bins, support)?.with_age_max(age_max))
}

fn tradeoff_point(
    args: &TradeoffArgs,
    weights: &WeightProcess,
    rho: f64,
    index: usize,
) -> Result<Vec<TradeoffRow>> {
    let seed = derive_seed(args.seed, index as u64);
    let mut env = tradeoff_defaults();
    env.horizon = args.t;
    env.seed = seed;
    env.increments = crate::process::IncrementProcess::gaussian(args.sigma2)?;
    env.weights = weights.clone();
    env.channel = crate::process::Channel::new(args.p)?;
    env.rho = rho;
    env.v = args.v;

    let mut rows = Vec::new();
    let row = |policy: &str, uoi: f64, rate: f64, stderr: f64, status: String| TradeoffRow {
        rho,
        policy: policy.to_string(),
        avg_uoi: uoi,
        avg_update_rate: rate,
        stderr,
        status,
    };

    let mut adaptive = env.clone();
    adaptive.policy = PolicySpec::Adaptive;
    let s = run(&adaptive)?;
    rows.push(row("adaptive", s.avg_uoi, s.avg_update_rate, s.uoi_stderr, "ok".into()));

    let mut randomized = env.clone();
    randomized.policy = PolicySpec::Randomized { prob: None };
    let s = run(&randomized)?;
    rows.push(row("randomized", s.avg_uoi, s.avg_update_rate, s.uoi_stderr, "ok".into()));

    if !args.skip_solver {
        let support = solver_weight_support(weights)?;
        for metric in [Metric::Uoi, Metric::Aoi] {
            let label = match metric {
                Metric::Uoi => "uoi-optimal",
                Metric::Aoi => "aoi-optimal",
            };
            let disc = point_disc(args, support.clone(), rho)?;
            match solve_point(metric, &disc, args, rho) {
                Ok(solved) => {
                    let (uoi, rate, stderr) = simulate_tables(&env, &solved.policy)?;
                    rows.push(row(label, uoi, rate, stderr, solved.status));
                }
                Err(Error::NonConvergence { .. }) => {
                    rows.push(row(label, f64::NAN, f64::NAN, f64::NAN, "solver-unconverged".into()));
                }
                Err(e) => return Err(e),
            }
        }
    }
    Ok(rows)
}

pub fn cmd_bound_check(args: &BoundCheckArgs) -> Result<i32> {
    let p_grid = parse_list(&args.p_grid, "p-grid")?;
    let rho_grid = parse_list(&args.rho_grid, "rho-grid")?;
    let v_grid = parse_list(&args.v_grid, "v-grid")?;
    let weights = crate::config::resolve_scenario(
        &tradeoff_defaults(),
        None,
        &[("weight".to_string(), args.weight.clone())],
    )?
    .config
    .weights;

    let mut combos = Vec::new();
    for &p in &p_grid {
        for &rho in &rho_grid {
            for &v in &v_grid {
                combos.push((p, rho, v));
            }
        }
    }

    let rows: Vec<Result<BoundRow>> = combos
        .par_iter()
        .enumerate()
        .map(|(i, &(p, rho, v))| {
            let mut env = tradeoff_defaults();
            env.horizon = args.t;
            env.seed = derive_seed(args.seed, i as u64);
            env.increments = crate::process::IncrementProcess::gaussian(args.sigma2)?;
            env.weights = weights.clone();
            env.channel = crate::process::Channel::new(p)?;
            env.rho = rho;
            env.v = v;
            env.policy = PolicySpec::Adaptive;
            let summary = run(&env)?;
            let bound = theorem1_bound(env.mean_weight(), args.sigma2, p, rho, v);
            let margin = bound - summary.avg_uoi;
            Ok(BoundRow {
                p,
                rho,
                v,
                avg_uoi: summary.avg_uoi,
                stderr: summary.uoi_stderr,
                bound,
                margin,
                pass: summary.avg_uoi <= bound + 3.0 * summary.uoi_stderr,
            })
        })
        .collect();
    let rows: Result<Vec<BoundRow>> = rows.into_iter().collect();
    let rows = rows?;

    let entries = vec![
        ("p_grid".into(), args.p_grid.clone()),
        ("rho_grid".into(), args.rho_grid.clone()),
        ("v_grid".into(), args.v_grid.clone()),
        ("t".into(), args.t.to_string()),
        ("seed".into(), args.seed.to_string()),
        ("sigma2".into(), args.sigma2.to_string()),
        ("weight".into(), args.weight.clone()),
    ];
    let csv = bound_csv(&entries, &rows);
    let path = out_path(&args.out, "bound_check.csv");
    fs::write(&path, csv)?;

    echo_entries(&entries);
    println!("p     rho    v      avg_uoi    bound      margin     status");
    for r in &rows {
        println!(
            "{:<5} {:<6} {:<6} {:<10.5} {:<10.5} {:<10.5} {}",
            r.p,
            r.rho,
            r.v,
            r.avg_uoi,
            r.bound,
            r.margin,
            if r.pass { "PASS" } else { "FAIL" }
        );
    }
    println!("report written to {}", path.display());
    Ok(if rows.iter().all(|r| r.pass) { 0 } else { 2 })
}

pub fn cmd_control_demo(args: &ControlDemoArgs) -> Result<i32> {
    let plants: Vec<(f64, f64, f64)> = match (args.a, args.b, args.noise_var) {
        (None, None, None) => vec![(1.0, 1.0, 1.0), (0.9, 2.0, 0.25)],
        (a, b, nv) => vec![(a.unwrap_or(1.0), b.unwrap_or(1.0), nv.unwrap_or(1.0))],
    };
    let weights = crate::config::resolve_scenario(
        &tradeoff_defaults(),
        None,
        &[("weight".to_string(), args.weight.clone())],
    )?
    .config
    .weights;
    let policy = crate::config::resolve_scenario(
        &tradeoff_defaults(),
        None,
        &[("policy".to_string(), args.policy.clone())],
    )?
    .config
    .policy;

    let mut rows = Vec::new();
    for (i, &(a, b, noise_variance)) in plants.iter().enumerate() {
        let config = TrackingConfig {
            plant: PlantConfig {
                a,
                b,
                noise_variance,
                reference: ReferenceSignal::Zero,
            },
            weights: weights.clone(),
            channel: crate::process::Channel::new(args.p)?,
            policy: policy.clone(),
            rho: args.rho,
            v: args.v,
            horizon: args.t,
            seed: derive_seed(args.seed, i as u64),
        };
        let summary = run_tracking(&config)?;
        rows.push(ControlRow {
            a,
            b,
            noise_variance,
            tracking_error: summary.avg_weighted_tracking_error,
            estimation_error: summary.avg_weighted_estimation_error,
            gap: summary.decomposition_gap,
            gap_stderr: summary.gap_stderr,
            update_rate: summary.avg_update_rate,
            pass: summary.decomposition_gap.abs() <= 3.0 * summary.gap_stderr,
        });
    }

    let entries = vec![
        ("t".into(), args.t.to_string()),
        ("seed".into(), args.seed.to_string()),
        ("p".into(), args.p.to_string()),
        ("rho".into(), args.rho.to_string()),
        ("v".into(), args.v.to_string()),
        ("weight".into(), args.weight.clone()),
        ("policy".into(), args.policy.clone()),
    ];
    let csv = control_csv(&entries, &rows);
    let path = out_path(&args.out, "control_demo.csv");
    fs::write(&path, csv)?;

    echo_entries(&entries);
    for r in &rows {
        println!(
            "plant a={} b={} var={}: tracking={:.5} estimation={:.5} gap={:.5} (stderr {:.5}) rate={:.4} {}",
            r.a,
            r.b,
            r.noise_variance,
            r.tracking_error,
            r.estimation_error,
            r.gap,
            r.gap_stderr,
            r.update_rate,
            if r.pass { "PASS" } else { "FAIL" }
        );
    }
    println!("report written to {}", path.display());
    Ok(if rows.iter().all(|r| r.pass) { 0 } else { 2 })
}

pub fn cmd_rvi_solve(args: &RviSolveArgs) -> Result<i32> {
    let metric = match args.metric.as_str() {
        "uoi" => Metric::Uoi,
        "aoi" => Metric::Aoi,
        other => {
            return Err(Error::Config(format!(
                "invalid value for `metric`: `{other}` (expected uoi or aoi)"
            )))
        }
    };
    let weights = crate::config::resolve_scenario(
        &tradeoff_defaults(),
        None,
        &[("weight".to_string(), args.weight.clone())],
    )?
    .config
    .weights;
    let support = solver_weight_support(&weights)?;

    let rho_for_grid = args.rho.unwrap_or(0.25);
    let q_max = args
        .q_max
        .unwrap_or_else(|| 10.0 * args.sigma2.sqrt() / (args.p * rho_for_grid).sqrt());
    let age_max = args
        .age_max
        .unwrap_or_else(|| ((40.0 / (args.p * rho_for_grid)).ceil() as u64).clamp(64, 4096));
    let disc = Discretization::new(q_max, args.q_bins, support)?.with_age_max(age_max);

    let (table, extra) = match (args.lambda, args.rho) {
        (Some(lambda), _) => {
            let model = crate::mdp::build_mdp(&disc, args.sigma2, args.p, metric, lambda)?;
            let policy = relative_value_iteration(&model, args.tol, args.max_iter)?;
            println!(
                "lambda={} g={} rate={}",
                lambda, policy.average_cost, policy.average_update_rate
            );
            let table = match metric {
                Metric::Uoi => TablePolicy::Uoi(UoiTablePolicy::from_policy(&disc, &policy)?),
                Metric::Aoi => TablePolicy::Aoi(AoiTablePolicy::from_policy(&policy)?),
            };
            let extra = vec![
                ("lambda".to_string(), lambda.to_string()),
                ("g".to_string(), policy.average_cost.to_string()),
                ("rate".to_string(), policy.average_update_rate.to_string()),
            ];
            (table, extra)
        }
        (None, Some(rho)) => {
            let opts = SweepOptions {
                tol: args.tol,
                max_iter: args.max_iter,
                ..SweepOptions::default()
            };
            let points = lagrangian_sweep(&disc, args.sigma2, args.p, metric, &[rho], &opts)?;
            let point = &points[0];
            if !point.converged {
                return Err(Error::NonConvergence {
                    iterations: args.max_iter,
                    span: f64::NAN,
                });
            }
            let policy = point.policy.primary();
            println!(
                "target_rate={} lambda={} avg_cost={} achieved_rate={}",
                rho, point.lambda, point.avg_cost, point.achieved_rate
            );
            if let SweepPolicy::Mixed { alpha, .. } = &point.policy {
                println!(
                    "note: exact rate needs time-sharing (alpha={alpha}); persisting the budget-feasible table"
                );
            }
            let table = match metric {
                Metric::Uoi => TablePolicy::Uoi(UoiTablePolicy::from_policy(&disc, policy)?),
                Metric::Aoi => TablePolicy::Aoi(AoiTablePolicy::from_policy(policy)?),
            };
            let extra = vec![
                ("lambda".to_string(), point.lambda.to_string()),
                ("g".to_string(), policy.average_cost.to_string()),
                ("rate".to_string(), policy.average_update_rate.to_string()),
            ];
            (table, extra)
        }
        (None, None) => {
            return Err(Error::Config(
                "rvi-solve needs either --rho <target> or --lambda <price>".into(),
            ))
        }
    };

    let default_name = format!("{}_policy.table", args.metric);
    let path = out_path(&args.out, &default_name);
    save_table(&path, &table, &extra)?;
    println!("policy table written to {}", path.display());
    Ok(0)
}

fn parse_list(text: &str, name: &'static str) -> Result<Vec<f64>> {
    let values: std::result::Result<Vec<f64>, _> =
        text.split(',').map(|v| v.trim().parse()).collect();
    let values =
        values.map_err(|_| Error::Config(format!("invalid value for `{name}`: `{text}`")))?;
    if values.is_empty() {
        return Err(Error::Config(format!("`{name}` must list at least one value")));
    }
    Ok(values)
}
