//! Arm reservoirs whose share of optimal arms decays with calendar time
//! (exogenous) or with the number of arms already drawn (endogenous).

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::instance::ArmType;
use crate::rng::RngState;

/// Probability that a freshly queried arm is optimal.
#[derive(Debug, Clone, PartialEq)]
pub enum ReservoirSchedule {
    /// `alpha(t) = c * t^-gamma`.
    ExogenousPower { c: f64, gamma: f64 },
    /// `alpha(t) = values[min(t, len) - 1]`.
    ExogenousTable { values: Vec<f64> },
    /// `alpha(t) = g(J_{t-1})` with `g(u) = c * (u + 1)^-gamma`.
    EndogenousPower { c: f64, gamma: f64 },
    /// `alpha(t) = c`.
    Constant { c: f64 },
}

fn check_c(c: f64) -> Result<()> {
    if c > 0.0 && c < 1.0 {
        Ok(())
    } else {
        Err(Error::Schedule(format!("c = {c} must lie in (0, 1)")))
    }
}

fn check_gamma(gamma: f64) -> Result<()> {
    if gamma >= 0.0 && gamma.is_finite() {
        Ok(())
    } else {
        Err(Error::Schedule(format!("gamma = {gamma} must be finite and >= 0")))
    }
}

impl ReservoirSchedule {
    pub fn exogenous_power(c: f64, gamma: f64) -> Result<Self> {
        check_c(c)?;
        check_gamma(gamma)?;
        Ok(Self::ExogenousPower { c, gamma })
    }

    pub fn endogenous_power(c: f64, gamma: f64) -> Result<Self> {
        check_c(c)?;
        check_gamma(gamma)?;
        Ok(Self::EndogenousPower { c, gamma })
    }

    pub fn constant(c: f64) -> Result<Self> {
        check_c(c)?;
        Ok(Self::Constant { c })
    }

    /// A finite schedule, clamped to its last entry beyond its length.
    ///
    /// Entries may reach 1 so that tests can force the type of early arms.
    pub fn table(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Schedule("table schedule needs at least one entry".into()));
        }
        for (i, &v) in values.iter().enumerate() {
            if !(v > 0.0 && v <= 1.0) {
                return Err(Error::Schedule(format!("table entry {i} = {v} must lie in (0, 1]")));
            }
            if i > 0 && v > values[i - 1] {
                return Err(Error::Schedule(format!("table entry {i} = {v} increases")));
            }
        }
        Ok(Self::ExogenousTable { values })
    }

    /// `alpha(1)`, the largest value the schedule ever takes.
    pub fn c(&self) -> f64 {
        match self {
            Self::ExogenousPower { c, .. } | Self::EndogenousPower { c, .. } | Self::Constant { c } => *c,
            Self::ExogenousTable { values } => values[0],
        }
    }

    pub fn gamma(&self) -> Option<f64> {
        match self {
            Self::ExogenousPower { gamma, .. } | Self::EndogenousPower { gamma, .. } => Some(*gamma),
            Self::Constant { .. } => Some(0.0),
            Self::ExogenousTable { .. } => None,
        }
    }

    pub fn is_endogenous(&self) -> bool {
        matches!(self, Self::EndogenousPower { .. })
    }

    /// Probability that an arm queried at time `t` (1-based), after `queries`
    /// earlier queries, is optimal.
    #[inline]
    pub fn alpha_at(&self, t: u64, queries: u64) -> f64 {
        debug_assert!(t >= 1);
        match self {
            Self::ExogenousPower { c, gamma } => {
                if *gamma == 0.0 {
                    *c
                } else {
                    c * libm::pow(t as f64, -gamma)
                }
            }
            Self::EndogenousPower { c, gamma } => g_power(*c, *gamma, queries),
            Self::Constant { c } => *c,
            Self::ExogenousTable { values } => {
                let idx = (t.max(1) as usize).min(values.len()) - 1;
                values[idx]
            }
        }
    }

    /// `g(u)` of an endogenous schedule.
    pub fn g(&self, u: u64) -> Result<f64> {
        match self {
            Self::EndogenousPower { c, gamma } => Ok(g_power(*c, *gamma, u)),
            _ => Err(Error::Schedule("g(u) is only defined for endogenous schedules".into())),
        }
    }

    /// Draws the type of a new arm and counts the query. `state.time` must
    /// already hold the current time step; it is left untouched.
    #[inline]
    pub fn query_new_arm(&self, state: &mut ReservoirState, rng: &mut RngState) -> ArmType {
        let alpha = self.alpha_at(state.time, state.queries);
        state.queries += 1;
        if rng.bernoulli_unchecked(alpha) {
            ArmType::Optimal
        } else {
            ArmType::Inferior
        }
    }
}

#[inline]
fn g_power(c: f64, gamma: f64, u: u64) -> f64 {
    if gamma == 0.0 {
        c
    } else {
        c * libm::pow((u + 1) as f64, -gamma)
    }
}

/// Running query count `J` and the current time step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReservoirState {
    pub queries: u64,
    pub time: u64,
}

impl Default for ReservoirState {
    fn default() -> Self {
        Self { queries: 0, time: 1 }
    }
}
