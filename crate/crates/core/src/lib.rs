//! Simulation core for two-type countable-armed bandits whose arm reservoir
//! loses optimal arms over time.
//!
//! The crate is `no_std` (it needs `alloc`) and contains everything that is
//! pure computation:
//!
//! - [`rng`]: a counter-based Philox stream per replication, so results do
//!   not depend on scheduling.
//! - [`normal`]: the standard Gaussian upper tail, linear and log scale.
//! - [`reservoir`]: exogenous (time-indexed) and endogenous (query-indexed)
//!   probabilities of drawing an optimal arm.
//! - [`instance`]: the two arm types and their reward distributions.
//! - [`policy`]: explore-then-commit over arm pairs, nested UCB with Gaussian
//!   corruption, the full-information oracle and the upfront-query baseline.
//! - [`theory`]: closed-form constants and regret bounds.
//! - [`sim`]: single replications, aggregation and the Monte Carlo
//!   estimators used to check the theory.
//!
//! IO, parallel execution and the command line live in the `cabsim` crate.
#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod error;
pub mod instance;
pub mod normal;
pub mod policy;
pub mod reservoir;
pub mod rng;
pub mod sim;
pub mod theory;

pub use error::{Error, Result};
pub use instance::{ArmInstance, ArmLabel, ArmType, InstanceSpec, RewardDist};
pub use policy::{Action, Observation, PolicySpec};
pub use reservoir::{ReservoirSchedule, ReservoirState};
pub use rng::{make_rng, RngState};
pub use sim::{RegretCurve, RegretTrace, SimulationConfig};
