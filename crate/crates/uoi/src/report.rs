//! CSV emission.
//!
//! Every CSV starts with a `#`-prefixed header embedding the resolved
//! configuration and seed, so the file is self-describing: feeding the header
//! entries back through the config layer reproduces it bit for bit. Values
//! use the shortest round-tripping float representation.

use crate::sim::{PeriodStats, RunSummary, TraceRecord};

/// Formats the standard header block: a title line plus one `key=value`
/// comment per resolved entry.
pub fn header(title: &str, entries: &[(String, String)]) -> String {
    let mut out = String::new();
    out.push_str(&format!("# uoi {title}\n"));
    for (key, value) in entries {
        out.push_str(&format!("# {key}={value}\n"));
    }
    out
}

/// Extracts the `key=value` entries back out of a CSV header.
pub fn parse_header(text: &str) -> Vec<(String, String)> {
    text.lines()
        .take_while(|line| line.starts_with('#'))
        .filter_map(|line| {
            let meta = line.trim_start_matches('#').trim();
            meta.split_once('=')
                .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
        })
        .collect()
}

/// Per-slot trace: columns `t,Q,omega,H,U,S,J,uoi,age`. `S` is empty when no
/// transmission was attempted, `J` is empty for policies without an index.
pub fn trace_csv(entries: &[(String, String)], summary: &RunSummary, trace: &[TraceRecord]) -> String {
    let mut out = header("sample-path trace v1", entries);
    push_summary_comments(&mut out, summary);
    out.push_str("t,Q,omega,H,U,S,J,uoi,age\n");
    for r in trace {
        let s = match r.success {
            None => String::new(),
            Some(true) => "1".to_string(),
            Some(false) => "0".to_string(),
        };
        let j = r.index.map(|j| j.to_string()).unwrap_or_default();
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            r.t,
            r.q,
            r.omega,
            r.h,
            u8::from(r.update),
            s,
            j,
            r.uoi,
            r.age
        ));
    }
    out
}

fn push_summary_comments(out: &mut String, summary: &RunSummary) {
    out.push_str(&format!(
        "# summary avg_uoi={} avg_aoi={} avg_update_rate={} final_h_over_t={}\n",
        summary.avg_uoi, summary.avg_aoi, summary.avg_update_rate, summary.final_h_over_t
    ));
    if let Some(p) = &summary.per_period {
        out.push_str(&format!(
            "# period critical_mse={} ordinary_mse={} critical_update_rate={}\n",
            p.critical_mean_sq_error, p.ordinary_mean_sq_error, p.critical_update_rate
        ));
    }
}

/// One tradeoff frontier row.
#[derive(Debug, Clone)]
pub struct TradeoffRow {
    pub rho: f64,
    pub policy: String,
    pub avg_uoi: f64,
    pub avg_update_rate: f64,
    pub stderr: f64,
    /// `ok`, or a flag such as `solver-unconverged`.
    pub status: String,
}

/// Frontier CSV: columns `rho,policy,avg_uoi,avg_update_rate,stderr,status`,
/// rows already in deterministic (rho, policy) order.
pub fn tradeoff_csv(entries: &[(String, String)], rows: &[TradeoffRow]) -> String {
    let mut out = header("tradeoff v1", entries);
    out.push_str("rho,policy,avg_uoi,avg_update_rate,stderr,status\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.rho, r.policy, r.avg_uoi, r.avg_update_rate, r.stderr, r.status
        ));
    }
    out
}

/// One bound-check row.
#[derive(Debug, Clone)]
pub struct BoundRow {
    pub p: f64,
    pub rho: f64,
    pub v: f64,
    pub avg_uoi: f64,
    pub stderr: f64,
    pub bound: f64,
    pub margin: f64,
    pub pass: bool,
}

/// Bound report CSV: `p,rho,v,avg_uoi,stderr,bound,margin,status`.
pub fn bound_csv(entries: &[(String, String)], rows: &[BoundRow]) -> String {
    let mut out = header("bound-check v1", entries);
    out.push_str("p,rho,v,avg_uoi,stderr,bound,margin,status\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.p,
            r.rho,
            r.v,
            r.avg_uoi,
            r.stderr,
            r.bound,
            r.margin,
            if r.pass { "PASS" } else { "FAIL" }
        ));
    }
    out
}

/// One tracking-control row.
#[derive(Debug, Clone)]
pub struct ControlRow {
    pub a: f64,
    pub b: f64,
    pub noise_variance: f64,
    pub tracking_error: f64,
    pub estimation_error: f64,
    pub gap: f64,
    pub gap_stderr: f64,
    pub update_rate: f64,
    pub pass: bool,
}

/// Tracking report CSV:
/// `a,b,noise_variance,avg_tracking_error,avg_estimation_error,gap,gap_stderr,update_rate,status`.
pub fn control_csv(entries: &[(String, String)], rows: &[ControlRow]) -> String {
    let mut out = header("control-demo v1", entries);
    out.push_str(
        "a,b,noise_variance,avg_tracking_error,avg_estimation_error,gap,gap_stderr,update_rate,status\n",
    );
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            r.a,
            r.b,
            r.noise_variance,
            r.tracking_error,
            r.estimation_error,
            r.gap,
            r.gap_stderr,
            r.update_rate,
            if r.pass { "PASS" } else { "FAIL" }
        ));
    }
    out
}

/// Human-readable per-period summary block for terminal output.
pub fn format_period_stats(stats: &PeriodStats) -> String {
    format!(
        "critical period: mean squared error {:.4}, update rate {:.4}\nordinary period: mean squared error {:.4}",
        stats.critical_mean_sq_error, stats.critical_update_rate, stats.ordinary_mean_sq_error
    )
}
