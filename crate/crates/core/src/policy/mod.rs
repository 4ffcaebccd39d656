//! Decision policies as step-wise state machines.
//!
//! Each call to `step` consumes the feedback from the previous time step and
//! returns exactly one [`Action`]. When a policy asks for a new arm, the
//! simulator queries the reservoir, pulls the new arm once, and reports the
//! fresh label back through the next [`Observation`].
//!
//! [`Alg1`], [`Alg2`] and [`UpfrontUcb`] only ever see labels and rewards.
//! [`OraclePolicy`] is the one policy that is told arm types.

mod alg1;
mod alg2;
mod oracle;
mod upfront;

pub use alg1::{alg1_epoch_half_length, alg1_test, Alg1, PairVerdict};
pub use alg2::{alg2_threshold, Alg2};
pub use oracle::OraclePolicy;
pub use upfront::{upfront_arm_count, UpfrontUcb};

use crate::error::{Error, Result};
use crate::instance::ArmLabel;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Action {
    PullExisting(ArmLabel),
    QueryNew,
}

/// What the policy learns after its action was carried out.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation {
    pub label: ArmLabel,
    pub reward: f64,
}

/// Policy selection and parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum PolicySpec {
    /// Non-adaptive explore-then-commit with gap parameter `delta`.
    Alg1 { delta: f64 },
    /// Nested UCB. `corruption` disables the Gaussian offset when false,
    /// which only exists to reproduce the degenerate-reward failure.
    Alg2 { corruption: bool },
    /// Full-information oracle that sees arm types.
    Oracle,
    /// Query `ceil(ln(n) / c)` arms upfront, then UCB1 over them.
    Upfront { c: f64 },
}

impl PolicySpec {
    pub fn name(&self) -> &'static str {
        match self {
            PolicySpec::Alg1 { .. } => "alg1",
            PolicySpec::Alg2 { .. } => "alg2",
            PolicySpec::Oracle => "oracle",
            PolicySpec::Upfront { .. } => "upfront",
        }
    }
}

/// UCB1 index `sum/count + sqrt(2 ln(t-1) / count)`.
pub fn ucb1_index(reward_sum: f64, count: u64, t: u64) -> Result<f64> {
    if count == 0 {
        return Err(Error::domain("count", 0.0, "at least one pull"));
    }
    if t < 2 {
        return Err(Error::domain("t", t as f64, "t >= 2"));
    }
    Ok(ucb1_index_unchecked(reward_sum, count, libm::log((t - 1) as f64)))
}

#[inline]
pub(crate) fn ucb1_index_unchecked(reward_sum: f64, count: u64, ln_t_minus_1: f64) -> f64 {
    let n = count as f64;
    reward_sum / n + libm::sqrt(2.0 * ln_t_minus_1 / n)
}

/// Pull statistics of an arm a policy is tracking.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct ArmStats {
    pub label: ArmLabel,
    pub count: u64,
    pub sum: f64,
}

impl ArmStats {
    pub fn first(obs: Observation) -> Self {
        Self {
            label: obs.label,
            count: 1,
            sum: obs.reward,
        }
    }

    pub fn record(&mut self, reward: f64) {
        self.count += 1;
        self.sum += reward;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ucb1_index_examples() {
        let want = 0.6 + (2.0 * 10f64.ln() / 5.0).sqrt();
        assert!((ucb1_index(3.0, 5, 11).unwrap() - 1.559_705_182_437_616).abs() < 1e-12);
        assert!((ucb1_index(3.0, 5, 11).unwrap() - want).abs() < 1e-15);
        assert_eq!(ucb1_index(0.0, 1, 2).unwrap(), 0.0);
        assert!((ucb1_index(1.0, 1, 3).unwrap() - 2.177_410_022_515_475).abs() < 1e-12);
        assert!(ucb1_index(1.0, 0, 3).is_err());
        assert!(ucb1_index(1.0, 1, 1).is_err());
    }
}
