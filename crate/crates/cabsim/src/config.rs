//! JSON experiment configuration.
//!
//! ```json
//! {
//!   "instance": {"mu1": 0.6, "mu2": 0.5, "family": "bernoulli"},
//!   "schedule": {"kind": "exogenous_power", "c": 0.5, "gamma": 0.4},
//!   "policy": {"policy": "alg1", "delta": 0.05},
//!   "horizon": 100000,
//!   "replications": 2000,
//!   "seed": 1
//! }
//! ```
//!
//! `grid` is optional and defaults to a geometric grid with ratio 1.2.

use std::path::Path;

use cabsim_core::sim::{geometric_grid, DEFAULT_GRID_RATIO};
use cabsim_core::{InstanceSpec, PolicySpec, ReservoirSchedule, RewardDist, SimulationConfig};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub instance: InstanceConfig,
    pub schedule: ScheduleConfig,
    pub policy: PolicyConfig,
    pub horizon: u64,
    pub replications: u64,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<Vec<u64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceConfig {
    pub mu1: f64,
    pub mu2: f64,
    pub family: Family,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Bernoulli,
    Deterministic,
    /// `{"discrete": {"optimal": [[v, p], ...], "inferior": [[v, p], ...]}}`
    Discrete(DiscreteSupport),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiscreteSupport {
    pub optimal: Vec<(f64, f64)>,
    pub inferior: Vec<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ScheduleConfig {
    ExogenousPower { c: f64, gamma: f64 },
    EndogenousPower { c: f64, gamma: f64 },
    Constant { c: f64 },
    Table { values: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "lowercase", deny_unknown_fields)]
pub enum PolicyConfig {
    Alg1 {
        delta: f64,
    },
    Alg2 {
        #[serde(default = "yes")]
        corruption: bool,
    },
    Oracle,
    Upfront {
        c: f64,
    },
}

fn yes() -> bool {
    true
}

impl InstanceConfig {
    pub fn to_spec(&self) -> Result<InstanceSpec> {
        let spec = match &self.family {
            Family::Bernoulli => InstanceSpec::bernoulli(self.mu1, self.mu2)?,
            Family::Deterministic => InstanceSpec::deterministic(self.mu1, self.mu2)?,
            Family::Discrete(s) => {
                let spec = InstanceSpec::new(RewardDist::discrete(&s.optimal)?, RewardDist::discrete(&s.inferior)?)?;
                for (declared, actual, name) in [(self.mu1, spec.mu1(), "mu1"), (self.mu2, spec.mu2(), "mu2")] {
                    if (declared - actual).abs() > 1e-9 {
                        return Err(CliError::Config(format!(
                            "{name} = {declared} but the discrete support has mean {actual}"
                        )));
                    }
                }
                spec
            }
        };
        Ok(spec)
    }
}

impl ScheduleConfig {
    pub fn to_schedule(&self) -> Result<ReservoirSchedule> {
        Ok(match self {
            ScheduleConfig::ExogenousPower { c, gamma } => ReservoirSchedule::exogenous_power(*c, *gamma)?,
            ScheduleConfig::EndogenousPower { c, gamma } => ReservoirSchedule::endogenous_power(*c, *gamma)?,
            ScheduleConfig::Constant { c } => ReservoirSchedule::constant(*c)?,
            ScheduleConfig::Table { values } => ReservoirSchedule::table(values.clone())?,
        })
    }
}

impl PolicyConfig {
    pub fn to_spec(&self) -> PolicySpec {
        match *self {
            PolicyConfig::Alg1 { delta } => PolicySpec::Alg1 { delta },
            PolicyConfig::Alg2 { corruption } => PolicySpec::Alg2 { corruption },
            PolicyConfig::Oracle => PolicySpec::Oracle,
            PolicyConfig::Upfront { c } => PolicySpec::Upfront { c },
        }
    }
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// The recording grid, filled in with the default when absent.
    pub fn resolved_grid(&self) -> Vec<u64> {
        self.grid
            .clone()
            .unwrap_or_else(|| geometric_grid(self.horizon, DEFAULT_GRID_RATIO))
    }

    /// Validated core config.
    pub fn to_sim(&self) -> Result<SimulationConfig> {
        let cfg = SimulationConfig {
            instance: self.instance.to_spec()?,
            schedule: self.schedule.to_schedule()?,
            policy: self.policy.to_spec(),
            horizon: self.horizon,
            replications: self.replications,
            seed: self.seed,
            grid: self.resolved_grid(),
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str = r#"{
        "instance": {"mu1": 0.6, "mu2": 0.5, "family": "bernoulli"},
        "schedule": {"kind": "exogenous_power", "c": 0.5, "gamma": 0.4},
        "policy": {"policy": "alg1", "delta": 0.05},
        "horizon": 1000, "replications": 10, "seed": 3
    }"#;

    #[test]
    fn parses_base_config() {
        let cfg = ConfigFile::parse(BASE).unwrap();
        let sim = cfg.to_sim().unwrap();
        assert_eq!(sim.horizon, 1000);
        assert_eq!(*sim.grid.last().unwrap(), 1000);
        assert_eq!(sim.policy, PolicySpec::Alg1 { delta: 0.05 });
    }

    #[test]
    fn parses_every_variant() {
        let text = r#"{
            "instance": {"mu1": 0.5, "mu2": 0.35, "family": {"discrete": {
                "optimal": [[0.2, 0.5], [0.8, 0.5]], "inferior": [[0.0, 0.5], [0.7, 0.5]]}}},
            "schedule": {"kind": "table", "values": [0.5, 0.25]},
            "policy": {"policy": "alg2"},
            "horizon": 10, "replications": 1, "seed": 0, "grid": [5, 10]
        }"#;
        let sim = ConfigFile::parse(text).unwrap().to_sim().unwrap();
        assert_eq!(sim.policy, PolicySpec::Alg2 { corruption: true });
        assert_eq!(sim.grid, vec![5, 10]);
        for (sched, policy) in [
            (r#"{"kind": "endogenous_power", "c": 0.5, "gamma": 1}"#, r#"{"policy": "oracle"}"#),
            (r#"{"kind": "constant", "c": 0.3}"#, r#"{"policy": "upfront", "c": 0.3}"#),
        ] {
            let text = BASE
                .replace(r#"{"kind": "exogenous_power", "c": 0.5, "gamma": 0.4}"#, sched)
                .replace(r#"{"policy": "alg1", "delta": 0.05}"#, policy);
            ConfigFile::parse(&text).unwrap().to_sim().unwrap();
        }
    }

    #[test]
    fn rejects_bad_configs() {
        let bad_mean = BASE.replace("\"mu2\": 0.5", "\"mu2\": 0.7");
        assert!(matches!(ConfigFile::parse(&bad_mean).unwrap().to_sim(), Err(CliError::Core(_))));
        let unknown = BASE.replace("\"seed\": 3", "\"seed\": 3, \"colour\": 1");
        assert!(matches!(ConfigFile::parse(&unknown), Err(CliError::Config(_))));
        let grid = BASE.replace("\"seed\": 3", "\"seed\": 3, \"grid\": [1, 500]");
        assert!(ConfigFile::parse(&grid).unwrap().to_sim().is_err());
        let c = BASE.replace("\"c\": 0.5", "\"c\": 1.5");
        assert!(ConfigFile::parse(&c).unwrap().to_sim().is_err());
    }

    #[test]
    fn discrete_means_must_match() {
        let text = BASE.replace(
            "\"family\": \"bernoulli\"",
            r#""family": {"discrete": {"optimal": [[1.0, 1.0]], "inferior": [[0.5, 1.0]]}}"#,
        );
        assert!(matches!(ConfigFile::parse(&text).unwrap().to_sim(), Err(CliError::Config(_))));
    }
}
