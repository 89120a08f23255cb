//! Per-slot recursions for estimation error, age, and the urgency metric.
//!
//! These are pure functions; the simulation engine and the tracking loop both
//! advance their state through them.

use crate::error::{Error, Result};

/// Advances the estimation error by one slot under instantaneous delivery:
/// a successful update (`update && success`) discards the retained error, and
/// the fresh increment `a` always lands afterwards.
///
/// Equals `(1 - U*S) * q + a`.
pub fn step_error(q: f64, a: f64, update: bool, success: bool) -> f64 {
    if update && success {
        a
    } else {
        q + a
    }
}

/// Error recursion with delivery of a possibly stale packet generated at slot
/// `g_next`. `history[i]` must hold the increment of slot `g_next + i`; on
/// delivery the error collapses to the increments accumulated since the
/// packet was generated.
///
/// Returns `(1 - D) * q + a_t + D * sum(history[g_next..t])`.
pub fn step_error_delayed(
    q: f64,
    a_t: f64,
    delivered: bool,
    history: &[f64],
    g_next: u64,
    t: u64,
) -> Result<f64> {
    if g_next > t {
        return Err(Error::invalid(
            "g_next",
            format!("generation slot {g_next} is after current slot {t}"),
        ));
    }
    let needed = (t - g_next) as usize;
    if history.len() < needed {
        return Err(Error::MissingHistory {
            needed,
            got: history.len(),
        });
    }
    if delivered {
        let retained: f64 = history[..needed].iter().sum();
        Ok(a_t + retained)
    } else {
        Ok(q + a_t)
    }
}

/// Urgency of the current slot: context weight times squared error.
pub fn uoi(omega: f64, q: f64) -> Result<f64> {
    if omega.is_nan() || omega < 0.0 {
        return Err(Error::invalid(
            "omega",
            format!("weight must be >= 0, got {omega}"),
        ));
    }
    Ok(omega * q * q)
}

/// Advances the age of the freshest received status. Delivery happens within
/// the slot, so the post-delivery age is 1, never 0.
pub fn step_age(age: u64, update: bool, success: bool) -> u64 {
    if update && success {
        1
    } else {
        age + 1
    }
}
