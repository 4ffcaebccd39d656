use alloc::collections::VecDeque;

use super::{ucb1_index_unchecked, Action, ArmStats, Observation};
use crate::error::{Error, Result};
use crate::instance::ArmLabel;
use crate::rng::RngState;

/// Discard threshold `4 sqrt(m ln m)` on the corrupted difference walk.
pub fn alg2_threshold(m: u64) -> f64 {
    let m = m as f64;
    4.0 * libm::sqrt(m * libm::log(m))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Side {
    A,
    B,
}

/// Nested UCB with adaptive resampling.
///
/// An epoch draws two new arms and a fresh standard normal offset `z`, then
/// plays UCB1 on the pair with the within-epoch clock. Before every UCB
/// step the pair is discarded if `|z + sum_{j<=m} (X_a,j - X_b,j)|` falls
/// strictly below [`alg2_threshold`]`(m)`, where `m` is the smaller of the two
/// sample counts. A discard spends that same step on the first query of the
/// next epoch.
#[derive(Debug, Clone)]
pub struct Alg2 {
    corruption: bool,
    epochs: u64,
    epoch_time: u64,
    z: f64,
    m: u64,
    diff: f64,
    a: Option<ArmStats>,
    b: Option<ArmStats>,
    /// Rewards of the arm that is ahead, beyond index `m`.
    backlog: VecDeque<f64>,
    backlog_side: Side,
    awaiting_new: bool,
    last_discard_m: Option<u64>,
}

impl Default for Alg2 {
    fn default() -> Self {
        Self::new(true)
    }
}

impl Alg2 {
    pub fn new(corruption: bool) -> Self {
        Self {
            corruption,
            epochs: 0,
            epoch_time: 0,
            z: 0.0,
            m: 0,
            diff: 0.0,
            a: None,
            b: None,
            backlog: VecDeque::new(),
            backlog_side: Side::A,
            awaiting_new: false,
            last_discard_m: None,
        }
    }

    pub fn epochs_opened(&self) -> u64 {
        self.epochs
    }

    /// Minimum per-arm sample count of the current pair, as used by the test.
    pub fn m(&self) -> u64 {
        self.m
    }

    /// The `m` at which the most recent pair was discarded.
    pub fn last_discard_m(&self) -> Option<u64> {
        self.last_discard_m
    }

    pub fn z(&self) -> f64 {
        self.z
    }

    /// Pull counts of the current pair.
    pub fn pair_counts(&self) -> (u64, u64) {
        (self.a.map_or(0, |s| s.count), self.b.map_or(0, |s| s.count))
    }

    /// `z + sum_{j<=m} (X_a,j - X_b,j)`.
    pub fn statistic(&self) -> f64 {
        self.z + self.diff
    }

    /// Whether the discard test would fire on the next step.
    pub fn would_discard(&self) -> bool {
        self.m >= 1 && libm::fabs(self.statistic()) < alg2_threshold(self.m)
    }

    fn open_epoch(&mut self, rng: &mut RngState) -> Action {
        self.epochs += 1;
        self.epoch_time = 1;
        self.z = if self.corruption { rng.sample_gaussian() } else { 0.0 };
        self.m = 0;
        self.diff = 0.0;
        self.a = None;
        self.b = None;
        self.backlog.clear();
        self.awaiting_new = true;
        Action::QueryNew
    }

    fn record(&mut self, obs: Observation) -> Result<()> {
        let side = if core::mem::replace(&mut self.awaiting_new, false) {
            if self.a.is_none() {
                self.a = Some(ArmStats::first(obs));
                Side::A
            } else {
                self.b = Some(ArmStats::first(obs));
                Side::B
            }
        } else {
            match (self.a.as_mut(), self.b.as_mut()) {
                (Some(s), _) if s.label == obs.label => {
                    s.record(obs.reward);
                    Side::A
                }
                (_, Some(s)) if s.label == obs.label => {
                    s.record(obs.reward);
                    Side::B
                }
                _ => return Err(Error::UnknownArm { label: obs.label.0 }),
            }
        };
        // Pair the new reward with the oldest unmatched one of the other arm.
        if self.backlog.is_empty() || self.backlog_side == side {
            self.backlog_side = side;
            self.backlog.push_back(obs.reward);
        } else {
            let other = self.backlog.pop_front().unwrap_or_default();
            self.diff += match side {
                Side::A => obs.reward - other,
                Side::B => other - obs.reward,
            };
            self.m += 1;
        }
        Ok(())
    }

    pub fn step(&mut self, last: Option<Observation>, rng: &mut RngState) -> Result<Action> {
        if let Some(obs) = last {
            self.record(obs)?;
        }
        let (a, b) = match (self.a, self.b) {
            (None, _) if !self.awaiting_new => return Ok(self.open_epoch(rng)),
            (Some(a), Some(b)) => (a, b),
            _ => {
                self.epoch_time += 1;
                self.awaiting_new = true;
                return Ok(Action::QueryNew);
            }
        };
        self.epoch_time += 1;
        if self.would_discard() {
            self.last_discard_m = Some(self.m);
            return Ok(self.open_epoch(rng));
        }
        let ln_t = libm::log((self.epoch_time - 1) as f64);
        let ia = ucb1_index_unchecked(a.sum, a.count, ln_t);
        let ib = ucb1_index_unchecked(b.sum, b.count, ln_t);
        let pick: ArmLabel = if ia > ib || (ia == ib && a.label < b.label) {
            a.label
        } else {
            b.label
        };
        Ok(Action::PullExisting(pick))
    }
}
