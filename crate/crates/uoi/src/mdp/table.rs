//! Tabular policies projected onto the continuous simulation state, plus a
//! flat-file format so solved tables survive between invocations.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::mdp::{Discretization, MdpPolicy};

/// Solved error-metric policy: action per quantized `(q, w, w_next)` state.
#[derive(Debug, Clone, PartialEq)]
pub struct UoiTablePolicy {
    q_bins: usize,
    step: f64,
    weight_values: Vec<f64>,
    actions: Vec<bool>,
}

impl UoiTablePolicy {
    pub fn from_raw(
        q_bins: usize,
        step: f64,
        weight_values: Vec<f64>,
        actions: Vec<bool>,
    ) -> Result<Self> {
        if actions.is_empty() {
            return Err(Error::EmptyTable);
        }
        if q_bins == 0 || weight_values.is_empty() || !step.is_finite() || step <= 0.0 {
            return Err(Error::invalid("table", "degenerate grid"));
        }
        let expected = q_bins * weight_values.len() * weight_values.len();
        if actions.len() != expected {
            return Err(Error::invalid(
                "table",
                format!("need {expected} actions, got {}", actions.len()),
            ));
        }
        Ok(UoiTablePolicy {
            q_bins,
            step,
            weight_values,
            actions,
        })
    }

    /// Projects a solved policy through the discretization it was built on.
    pub fn from_policy(disc: &Discretization, policy: &MdpPolicy) -> Result<Self> {
        Self::from_raw(
            disc.q_bins(),
            disc.step(),
            disc.weight_support().iter().map(|&(v, _)| v).collect(),
            policy.actions.clone(),
        )
    }

    /// Looks up the action for a continuous state: nearest error bin (clamped
    /// at the grid edges) and nearest support weights.
    pub fn decide(&self, q: f64, omega: f64, omega_next: f64) -> bool {
        let w = self.weight_values.len();
        let center = (self.q_bins - 1) / 2;
        let qi = ((q / self.step).round() as i64 + center as i64)
            .clamp(0, self.q_bins as i64 - 1) as usize;
        let wi = self.nearest_weight(omega);
        let wni = self.nearest_weight(omega_next);
        self.actions[(qi * w + wi) * w + wni]
    }

    fn nearest_weight(&self, value: f64) -> usize {
        let mut best = 0;
        let mut best_dist = f64::INFINITY;
        for (i, &v) in self.weight_values.iter().enumerate() {
            let d = (v - value).abs();
            if d < best_dist {
                best_dist = d;
                best = i;
            }
        }
        best
    }

    pub fn actions(&self) -> &[bool] {
        &self.actions
    }
}

/// Solved age-metric policy: action per age, saturating at the table depth.
#[derive(Debug, Clone, PartialEq)]
pub struct AoiTablePolicy {
    age_max: u64,
    actions: Vec<bool>,
}

impl AoiTablePolicy {
    pub fn from_raw(actions: Vec<bool>) -> Result<Self> {
        if actions.is_empty() {
            return Err(Error::EmptyTable);
        }
        Ok(AoiTablePolicy {
            age_max: actions.len() as u64,
            actions,
        })
    }

    pub fn from_policy(policy: &MdpPolicy) -> Result<Self> {
        Self::from_raw(policy.actions.clone())
    }

    pub fn decide(&self, age: u64) -> bool {
        let idx = age.clamp(1, self.age_max) - 1;
        self.actions[idx as usize]
    }

    pub fn age_max(&self) -> u64 {
        self.age_max
    }
}

/// Either flavor of persisted table.
#[derive(Debug, Clone, PartialEq)]
pub enum TablePolicy {
    Uoi(UoiTablePolicy),
    Aoi(AoiTablePolicy),
}

/// Writes a policy as a flat text table: `#`-prefixed grid metadata, then one
/// `state-indices action` row per state. `extra` lines (solver cost, price)
/// are carried as informational metadata.
pub fn save_table(path: &Path, table: &TablePolicy, extra: &[(String, String)]) -> Result<()> {
    let mut out = String::new();
    out.push_str("# policy-table v1\n");
    match table {
        TablePolicy::Uoi(t) => {
            out.push_str("# metric=uoi\n");
            out.push_str(&format!("# qbins={}\n", t.q_bins));
            out.push_str(&format!("# step={}\n", t.step));
            let weights: Vec<String> = t.weight_values.iter().map(|v| v.to_string()).collect();
            out.push_str(&format!("# weights={}\n", weights.join(",")));
            for (key, value) in extra {
                out.push_str(&format!("# {key}={value}\n"));
            }
            out.push_str("# columns: q_index w_index w_next_index action\n");
            let w = t.weight_values.len();
            for qi in 0..t.q_bins {
                for wi in 0..w {
                    for wni in 0..w {
                        let action = t.actions[(qi * w + wi) * w + wni];
                        out.push_str(&format!("{qi} {wi} {wni} {}\n", u8::from(action)));
                    }
                }
            }
        }
        TablePolicy::Aoi(t) => {
            out.push_str("# metric=aoi\n");
            out.push_str(&format!("# age_max={}\n", t.age_max));
            for (key, value) in extra {
                out.push_str(&format!("# {key}={value}\n"));
            }
            out.push_str("# columns: age_index action\n");
            for (i, action) in t.actions.iter().enumerate() {
                out.push_str(&format!("{i} {}\n", u8::from(*action)));
            }
        }
    }
    let mut file = fs::File::create(path)?;
    file.write_all(out.as_bytes())?;
    Ok(())
}

pub fn load_table(path: &Path) -> Result<TablePolicy> {
    let text = fs::read_to_string(path)?;
    let mut metric: Option<String> = None;
    let mut q_bins: Option<usize> = None;
    let mut step: Option<f64> = None;
    let mut weights: Option<Vec<f64>> = None;
    let mut age_max: Option<usize> = None;
    let mut rows: Vec<(Vec<usize>, bool)> = Vec::new();

    for (line_no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(meta) = line.strip_prefix('#') {
            let meta = meta.trim();
            if let Some((key, value)) = meta.split_once('=') {
                match key.trim() {
                    "metric" => metric = Some(value.trim().to_string()),
                    "qbins" => q_bins = Some(parse_num(value, line_no)?),
                    "step" => step = Some(parse_num(value, line_no)?),
                    "age_max" => age_max = Some(parse_num(value, line_no)?),
                    "weights" => {
                        let parsed: std::result::Result<Vec<f64>, _> =
                            value.trim().split(',').map(|v| v.trim().parse()).collect();
                        weights = Some(parsed.map_err(|_| {
                            Error::MalformedTable(format!("bad weights list on line {line_no}"))
                        })?);
                    }
                    _ => {}
                }
            }
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let (indices, action) = fields.split_at(fields.len().saturating_sub(1));
        let action = match action.first() {
            Some(&"0") => false,
            Some(&"1") => true,
            _ => {
                return Err(Error::MalformedTable(format!(
                    "bad action on line {line_no}"
                )))
            }
        };
        let indices: std::result::Result<Vec<usize>, _> =
            indices.iter().map(|v| v.parse()).collect();
        let indices = indices
            .map_err(|_| Error::MalformedTable(format!("bad state index on line {line_no}")))?;
        rows.push((indices, action));
    }

    match metric.as_deref() {
        Some("uoi") => {
            let q_bins = q_bins.ok_or_else(|| Error::MalformedTable("missing qbins".into()))?;
            let step = step.ok_or_else(|| Error::MalformedTable("missing step".into()))?;
            let weights = weights.ok_or_else(|| Error::MalformedTable("missing weights".into()))?;
            let w = weights.len();
            let n = q_bins * w * w;
            let mut actions = vec![None; n];
            for (indices, action) in rows {
                if indices.len() != 3 {
                    return Err(Error::MalformedTable("expected 3 state indices".into()));
                }
                let (qi, wi, wni) = (indices[0], indices[1], indices[2]);
                if qi >= q_bins || wi >= w || wni >= w {
                    return Err(Error::MalformedTable("state index out of range".into()));
                }
                actions[(qi * w + wi) * w + wni] = Some(action);
            }
            let actions: Option<Vec<bool>> = actions.into_iter().collect();
            let actions =
                actions.ok_or_else(|| Error::MalformedTable("missing state rows".into()))?;
            Ok(TablePolicy::Uoi(UoiTablePolicy::from_raw(
                q_bins, step, weights, actions,
            )?))
        }
        Some("aoi") => {
            let age_max =
                age_max.ok_or_else(|| Error::MalformedTable("missing age_max".into()))?;
            let mut actions = vec![None; age_max];
            for (indices, action) in rows {
                if indices.len() != 1 || indices[0] >= age_max {
                    return Err(Error::MalformedTable("bad age index".into()));
                }
                actions[indices[0]] = Some(action);
            }
            let actions: Option<Vec<bool>> = actions.into_iter().collect();
            let actions =
                actions.ok_or_else(|| Error::MalformedTable("missing age rows".into()))?;
            Ok(TablePolicy::Aoi(AoiTablePolicy::from_raw(actions)?))
        }
        other => Err(Error::MalformedTable(format!(
            "unknown metric {other:?}"
        ))),
    }
}

fn parse_num<T: std::str::FromStr>(value: &str, line: usize) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| Error::MalformedTable(format!("bad numeric value on line {line}")))
}
