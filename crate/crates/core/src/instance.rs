//! The two arm types and their reward distributions.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::rng::RngState;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ArmType {
    Optimal,
    Inferior,
}

/// Arms are labelled in the order they were first queried, starting at 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ArmLabel(pub u64);

/// Reward distribution of one arm type. All support points lie in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub enum RewardDist {
    Bernoulli(f64),
    Deterministic(f64),
    /// Finite support. Built through [`RewardDist::discrete`], which stores
    /// cumulative probabilities.
    Discrete { values: Vec<f64>, cumulative: Vec<f64> },
}

impl RewardDist {
    pub fn bernoulli(p: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&p) {
            Ok(Self::Bernoulli(p))
        } else {
            Err(Error::Instance(format!("Bernoulli mean {p} outside [0, 1]")))
        }
    }

    pub fn deterministic(v: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&v) {
            Ok(Self::Deterministic(v))
        } else {
            Err(Error::Instance(format!("deterministic reward {v} outside [0, 1]")))
        }
    }

    /// `(value, probability)` pairs; probabilities must sum to one.
    pub fn discrete(support: &[(f64, f64)]) -> Result<Self> {
        if support.is_empty() {
            return Err(Error::Instance("discrete support is empty".into()));
        }
        let mut values = Vec::with_capacity(support.len());
        let mut cumulative = Vec::with_capacity(support.len());
        let mut acc = 0.0;
        for &(v, p) in support {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Instance(format!("support value {v} outside [0, 1]")));
            }
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::Instance(format!("support probability {p} outside [0, 1]")));
            }
            acc += p;
            values.push(v);
            cumulative.push(acc);
        }
        if (acc - 1.0).abs() > 1e-9 {
            return Err(Error::Instance(format!("support probabilities sum to {acc}, not 1")));
        }
        Ok(Self::Discrete { values, cumulative })
    }

    pub fn mean(&self) -> f64 {
        match self {
            Self::Bernoulli(p) => *p,
            Self::Deterministic(v) => *v,
            Self::Discrete { values, cumulative } => {
                let mut prev = 0.0;
                let mut m = 0.0;
                for (v, c) in values.iter().zip(cumulative) {
                    m += v * (c - prev);
                    prev = *c;
                }
                m
            }
        }
    }

    #[inline]
    pub fn sample(&self, rng: &mut RngState) -> f64 {
        match self {
            Self::Bernoulli(p) => {
                if rng.bernoulli_unchecked(*p) {
                    1.0
                } else {
                    0.0
                }
            }
            Self::Deterministic(v) => *v,
            Self::Discrete { values, cumulative } => {
                let u = rng.uniform();
                let idx = cumulative.partition_point(|&c| c <= u).min(values.len() - 1);
                values[idx]
            }
        }
    }
}

/// Means, gap and reward distributions of the optimal and inferior types.
#[derive(Debug, Clone, PartialEq)]
pub struct InstanceSpec {
    mu1: f64,
    mu2: f64,
    optimal: RewardDist,
    inferior: RewardDist,
}

impl InstanceSpec {
    /// Requires `mean(optimal) > mean(inferior)`.
    pub fn new(optimal: RewardDist, inferior: RewardDist) -> Result<Self> {
        let (mu1, mu2) = (optimal.mean(), inferior.mean());
        if !(mu1 > mu2) {
            return Err(Error::Instance(format!(
                "optimal mean {mu1} must exceed inferior mean {mu2}"
            )));
        }
        Ok(Self {
            mu1,
            mu2,
            optimal,
            inferior,
        })
    }

    pub fn bernoulli(mu1: f64, mu2: f64) -> Result<Self> {
        Self::new(RewardDist::bernoulli(mu1)?, RewardDist::bernoulli(mu2)?)
    }

    pub fn deterministic(mu1: f64, mu2: f64) -> Result<Self> {
        Self::new(RewardDist::deterministic(mu1)?, RewardDist::deterministic(mu2)?)
    }

    pub fn mu1(&self) -> f64 {
        self.mu1
    }

    pub fn mu2(&self) -> f64 {
        self.mu2
    }

    /// The gap `mu1 - mu2`.
    pub fn delta(&self) -> f64 {
        self.mu1 - self.mu2
    }

    pub fn mean(&self, ty: ArmType) -> f64 {
        match ty {
            ArmType::Optimal => self.mu1,
            ArmType::Inferior => self.mu2,
        }
    }

    pub fn dist(&self, ty: ArmType) -> &RewardDist {
        match ty {
            ArmType::Optimal => &self.optimal,
            ArmType::Inferior => &self.inferior,
        }
    }
}

/// An arm issued by the reservoir. Its type stays inside the simulator.
#[derive(Debug, Clone, PartialEq)]
pub struct ArmInstance {
    label: ArmLabel,
    arm_type: ArmType,
    pull_count: u64,
    reward_sum: f64,
}

impl ArmInstance {
    pub fn new(label: ArmLabel, arm_type: ArmType) -> Self {
        Self {
            label,
            arm_type,
            pull_count: 0,
            reward_sum: 0.0,
        }
    }

    pub fn label(&self) -> ArmLabel {
        self.label
    }

    pub(crate) fn arm_type(&self) -> ArmType {
        self.arm_type
    }

    pub fn pull_count(&self) -> u64 {
        self.pull_count
    }

    pub fn reward_sum(&self) -> f64 {
        self.reward_sum
    }

    #[inline]
    pub fn pull(&mut self, spec: &InstanceSpec, rng: &mut RngState) -> f64 {
        let x = spec.dist(self.arm_type).sample(rng);
        self.pull_count += 1;
        self.reward_sum += x;
        x
    }
}
