use super::{Action, ArmStats, Observation};
use crate::error::{Error, Result};
use crate::instance::ArmLabel;

/// Per-arm sample size of one exploration epoch: `max(1, ceil(2 ln(n) / delta^2))`.
pub fn alg1_epoch_half_length(horizon: u64, delta: f64) -> Result<u64> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::domain("delta", delta, "0 < delta <= 1"));
    }
    if horizon == 0 {
        return Err(Error::domain("n", 0.0, "n >= 1"));
    }
    let raw = libm::ceil(2.0 * libm::log(horizon as f64) / (delta * delta));
    Ok((raw as u64).max(1))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairVerdict {
    Identical,
    Distinct,
}

/// Identical iff `|sum_diff| < delta * m`.
pub fn alg1_test(sum_diff: f64, m: u64, delta: f64) -> PairVerdict {
    if libm::fabs(sum_diff) < delta * m as f64 {
        PairVerdict::Identical
    } else {
        PairVerdict::Distinct
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Phase {
    Exploring {
        a: Option<ArmStats>,
        b: Option<ArmStats>,
    },
    Committed(ArmLabel),
}

/// Explore-then-commit over freshly drawn pairs.
///
/// Each epoch queries two new arms and plays them alternately until both
/// have `m` samples. A pair whose reward sums differ by less than `delta * m`
/// is discarded; otherwise the policy commits to the larger sum for the rest
/// of the horizon (ties go to the lower label). If the horizon runs out
/// mid-epoch the pair is simply played until the end.
#[derive(Debug, Clone)]
pub struct Alg1 {
    horizon: u64,
    delta: f64,
    m: u64,
    t: u64,
    epochs: u64,
    awaiting_new: bool,
    phase: Phase,
}

impl Alg1 {
    pub fn new(horizon: u64, delta: f64) -> Result<Self> {
        let m = alg1_epoch_half_length(horizon, delta)?;
        Ok(Self::with_half_length(horizon, delta, m))
    }

    /// Same policy with an explicit `m`, for hand-sized traces.
    pub fn with_half_length(horizon: u64, delta: f64, m: u64) -> Self {
        Self {
            horizon,
            delta,
            m: m.max(1),
            t: 0,
            epochs: 0,
            awaiting_new: false,
            phase: Phase::Exploring { a: None, b: None },
        }
    }

    pub fn half_length(&self) -> u64 {
        self.m
    }

    pub fn epochs_opened(&self) -> u64 {
        self.epochs
    }

    pub fn committed(&self) -> Option<ArmLabel> {
        match self.phase {
            Phase::Committed(l) => Some(l),
            Phase::Exploring { .. } => None,
        }
    }

    /// Pull counts of the current pair while exploring.
    pub fn pair_counts(&self) -> Option<(u64, u64)> {
        match &self.phase {
            Phase::Exploring { a, b } => Some((
                a.map_or(0, |s| s.count),
                b.map_or(0, |s| s.count),
            )),
            Phase::Committed(_) => None,
        }
    }

    fn record(&mut self, obs: Observation) -> Result<()> {
        let awaiting = core::mem::replace(&mut self.awaiting_new, false);
        match &mut self.phase {
            Phase::Committed(l) if *l == obs.label => Ok(()),
            Phase::Committed(_) => Err(Error::UnknownArm { label: obs.label.0 }),
            Phase::Exploring { a, b } => {
                if awaiting {
                    let slot = if a.is_none() { a } else { b };
                    *slot = Some(ArmStats::first(obs));
                    return Ok(());
                }
                match (a.as_mut(), b.as_mut()) {
                    (Some(s), _) if s.label == obs.label => s.record(obs.reward),
                    (_, Some(s)) if s.label == obs.label => s.record(obs.reward),
                    _ => return Err(Error::UnknownArm { label: obs.label.0 }),
                }
                Ok(())
            }
        }
    }

    fn query(&mut self) -> Action {
        self.awaiting_new = true;
        Action::QueryNew
    }

    pub fn step(&mut self, last: Option<Observation>) -> Result<Action> {
        if self.t >= self.horizon {
            return Err(Error::PastHorizon {
                horizon: self.horizon,
            });
        }
        self.t += 1;
        if let Some(obs) = last {
            self.record(obs)?;
        }
        let (a, b) = match &self.phase {
            Phase::Committed(l) => return Ok(Action::PullExisting(*l)),
            Phase::Exploring { a, b } => (*a, *b),
        };
        let (a, b) = match (a, b) {
            (None, _) => {
                self.epochs += 1;
                return Ok(self.query());
            }
            (Some(_), None) => return Ok(self.query()),
            (Some(a), Some(b)) => (a, b),
        };
        if a.count >= self.m && b.count >= self.m {
            return Ok(match alg1_test(a.sum - b.sum, self.m, self.delta) {
                PairVerdict::Identical => {
                    self.phase = Phase::Exploring { a: None, b: None };
                    self.epochs += 1;
                    self.query()
                }
                PairVerdict::Distinct => {
                    let best = if a.sum > b.sum || (a.sum == b.sum && a.label < b.label) {
                        a.label
                    } else {
                        b.label
                    };
                    self.phase = Phase::Committed(best);
                    Action::PullExisting(best)
                }
            });
        }
        // a, b, a, b, ...
        Ok(Action::PullExisting(if a.count <= b.count { a.label } else { b.label }))
    }
}
