use alloc::vec::Vec;

use super::{ucb1_index_unchecked, Action, ArmStats, Observation};
use crate::error::{Error, Result};

/// `max(1, ceil(ln(n) / c))` arms queried before any exploitation.
pub fn upfront_arm_count(c: f64, horizon: u64) -> Result<u64> {
    if !(c > 0.0 && c <= 1.0) {
        return Err(Error::domain("c", c, "0 < c <= 1"));
    }
    let raw = libm::ceil(libm::log(horizon.max(1) as f64) / c);
    Ok((raw as u64).max(1))
}

/// Baseline that needs `c` and `n` in advance: it queries
/// [`upfront_arm_count`] arms, pulls each once, then runs UCB1 over that
/// fixed set with the global clock.
#[derive(Debug, Clone)]
pub struct UpfrontUcb {
    target: u64,
    t: u64,
    arms: Vec<ArmStats>,
    awaiting_new: bool,
}

impl UpfrontUcb {
    pub fn new(c: f64, horizon: u64) -> Result<Self> {
        Ok(Self::with_arm_count(upfront_arm_count(c, horizon)?))
    }

    pub fn with_arm_count(target: u64) -> Self {
        Self {
            target: target.max(1),
            t: 0,
            arms: Vec::new(),
            awaiting_new: false,
        }
    }

    pub fn arm_count(&self) -> u64 {
        self.target
    }

    pub fn step(&mut self, last: Option<Observation>) -> Result<Action> {
        self.t += 1;
        if let Some(obs) = last {
            if core::mem::replace(&mut self.awaiting_new, false) {
                self.arms.push(ArmStats::first(obs));
            } else {
                // Labels are issued in query order, so the set is sorted.
                let idx = self
                    .arms
                    .binary_search_by_key(&obs.label, |s| s.label)
                    .map_err(|_| Error::UnknownArm { label: obs.label.0 })?;
                self.arms[idx].record(obs.reward);
            }
        }
        if (self.arms.len() as u64) < self.target {
            self.awaiting_new = true;
            return Ok(Action::QueryNew);
        }
        let ln_t = libm::log((self.t - 1) as f64);
        let mut best = self.arms[0];
        let mut best_index = f64::NEG_INFINITY;
        for s in &self.arms {
            let idx = ucb1_index_unchecked(s.sum, s.count, ln_t);
            if idx > best_index {
                best_index = idx;
                best = *s;
            }
        }
        Ok(Action::PullExisting(best.label))
    }
}
