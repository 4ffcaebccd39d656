//! Parallel execution. Replication `r` always runs on stream `r`, and results
//! are reduced in replication order, so the thread count never changes the
//! numbers.

use std::str::FromStr;

use cabsim_core::sim::{
    homogeneous_stop_trial, oracle_first_success, persistence_trial, run_replication, OracleCheck, Proportion, StopTimeEstimate,
};
use cabsim_core::theory::{oracle_absorption_prob, Horizon};
use cabsim_core::{make_rng, InstanceSpec, RegretCurve, ReservoirSchedule, RewardDist, SimulationConfig};
use rayon::prelude::*;

use crate::config::{ConfigFile, PolicyConfig, ScheduleConfig};
use crate::error::{CliError, Result};

fn pool(threads: Option<usize>) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))
}

/// Runs all replications of `config` on `threads` workers (all cores when `None`).
pub fn run_experiment(config: &SimulationConfig, threads: Option<usize>) -> Result<RegretCurve> {
    config.validate()?;
    let traces = pool(threads)?.install(|| {
        (0..config.replications)
            .into_par_iter()
            .map(|r| run_replication(config, r))
            .collect::<cabsim_core::Result<Vec<_>>>()
    })?;
    Ok(RegretCurve::from_traces(&traces, config.digest())?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Gamma,
    C,
    DeltaParam,
    Horizon,
    Policy,
}

impl FromStr for Axis {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "gamma" => Axis::Gamma,
            "c" => Axis::C,
            "delta_param" => Axis::DeltaParam,
            "horizon" => Axis::Horizon,
            "policy" => Axis::Policy,
            _ => {
                return Err(CliError::Config(format!(
                    "unknown sweep axis {s:?}; expected gamma, c, delta_param, horizon or policy"
                )))
            }
        })
    }
}

impl Axis {
    pub fn name(self) -> &'static str {
        match self {
            Axis::Gamma => "gamma",
            Axis::C => "c",
            Axis::DeltaParam => "delta_param",
            Axis::Horizon => "horizon",
            Axis::Policy => "policy",
        }
    }

    /// `base` with this axis set to `value`.
    pub fn apply(self, base: &ConfigFile, value: &str) -> Result<ConfigFile> {
        let mut cfg = base.clone();
        let number = || {
            value
                .parse::<f64>()
                .map_err(|_| CliError::Config(format!("sweep value {value:?} is not a number")))
        };
        match self {
            Axis::Gamma => {
                let g = number()?;
                cfg.schedule = match cfg.schedule {
                    ScheduleConfig::ExogenousPower { c, .. } | ScheduleConfig::Constant { c } => {
                        ScheduleConfig::ExogenousPower { c, gamma: g }
                    }
                    ScheduleConfig::EndogenousPower { c, .. } => ScheduleConfig::EndogenousPower { c, gamma: g },
                    ScheduleConfig::Table { .. } => {
                        return Err(CliError::Config("a table schedule has no gamma to sweep".into()))
                    }
                };
            }
            Axis::C => {
                let v = number()?;
                match &mut cfg.schedule {
                    ScheduleConfig::ExogenousPower { c, .. }
                    | ScheduleConfig::EndogenousPower { c, .. }
                    | ScheduleConfig::Constant { c } => *c = v,
                    ScheduleConfig::Table { .. } => {
                        return Err(CliError::Config("a table schedule has no c to sweep".into()))
                    }
                }
                // The upfront baseline is told c ex ante.
                if let PolicyConfig::Upfront { c } = &mut cfg.policy {
                    *c = v;
                }
            }
            Axis::DeltaParam => match &mut cfg.policy {
                PolicyConfig::Alg1 { delta } => *delta = number()?,
                _ => return Err(CliError::Config("delta_param only applies to alg1".into())),
            },
            Axis::Horizon => {
                cfg.horizon = value
                    .parse()
                    .map_err(|_| CliError::Config(format!("horizon {value:?} is not a positive integer")))?;
                cfg.grid = None;
            }
            Axis::Policy => {
                cfg.policy = match value {
                    "alg1" => PolicyConfig::Alg1 {
                        delta: match base.policy {
                            PolicyConfig::Alg1 { delta } => delta,
                            _ => (base.instance.mu1 - base.instance.mu2) / 2.0,
                        },
                    },
                    "alg2" => PolicyConfig::Alg2 { corruption: true },
                    "oracle" => PolicyConfig::Oracle,
                    "upfront" => PolicyConfig::Upfront {
                        c: match &base.schedule {
                            ScheduleConfig::ExogenousPower { c, .. }
                            | ScheduleConfig::EndogenousPower { c, .. }
                            | ScheduleConfig::Constant { c } => *c,
                            ScheduleConfig::Table { values } => values[0],
                        },
                    },
                    _ => return Err(CliError::Config(format!("unknown policy {value:?}"))),
                };
            }
        }
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub value: String,
    pub config: ConfigFile,
    pub curve: RegretCurve,
}

/// One curve per value. Every point keeps the base seed, so replication `r`
/// sees the same random streams at every value.
pub fn sweep(base: &ConfigFile, axis: Axis, values: &[String], threads: Option<usize>) -> Result<Vec<SweepPoint>> {
    let configs = values
        .iter()
        .map(|v| axis.apply(base, v).map(|c| (v.clone(), c)))
        .collect::<Result<Vec<_>>>()?;
    configs
        .into_iter()
        .map(|(value, config)| {
            let curve = run_experiment(&config.to_sim()?, threads)?;
            Ok(SweepPoint { value, config, curve })
        })
        .collect()
}

/// Reward family of a standalone estimator, for one arm mean.
pub fn family_dist(family: &str, mean: f64) -> Result<RewardDist> {
    Ok(match family {
        "bernoulli" => RewardDist::bernoulli(mean)?,
        "deterministic" => RewardDist::deterministic(mean)?,
        _ => {
            return Err(CliError::Config(format!(
                "unknown family {family:?}; expected bernoulli or deterministic"
            )))
        }
    })
}

pub fn persistence(
    instance: &InstanceSpec,
    truncation: u64,
    reps: u64,
    seed: u64,
    threads: Option<usize>,
) -> Result<Proportion> {
    let hits = pool(threads)?.install(|| {
        (0..reps)
            .into_par_iter()
            .filter(|&r| persistence_trial(instance, truncation, &mut make_rng(seed, r)))
            .count()
    });
    Ok(Proportion::new(hits as u64, reps))
}

pub fn stop_time(dist: &RewardDist, cap: u64, reps: u64, seed: u64, threads: Option<usize>) -> Result<StopTimeEstimate> {
    let outcomes: Vec<Option<u64>> = pool(threads)?.install(|| {
        (0..reps)
            .into_par_iter()
            .map(|r| homogeneous_stop_trial(dist, cap, &mut make_rng(seed, r)))
            .collect()
    });
    Ok(StopTimeEstimate::from_outcomes(&outcomes))
}

/// Parallel counterpart of [`cabsim_core::sim::oracle_check`]; same numbers.
pub fn oracle_check(
    schedule: &ReservoirSchedule,
    n: u64,
    reps: u64,
    seed: u64,
    threads: Option<usize>,
) -> Result<OracleCheck> {
    let analytic = oracle_absorption_prob(schedule, Horizon::Finite(n))?;
    let instance = InstanceSpec::bernoulli(0.6, 0.5)?;
    let misses = pool(threads)?.install(|| {
        (0..reps)
            .into_par_iter()
            .filter(|&r| oracle_first_success(&instance, schedule, n, seed, r).is_none())
            .count() as u64
    });
    Ok(OracleCheck {
        empirical: Proportion::new(misses, reps),
        analytic,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> ConfigFile {
        ConfigFile::parse(
            r#"{
            "instance": {"mu1": 0.6, "mu2": 0.5, "family": "bernoulli"},
            "schedule": {"kind": "constant", "c": 0.5},
            "policy": {"policy": "alg1", "delta": 0.1},
            "horizon": 2000, "replications": 16, "seed": 9
        }"#,
        )
        .unwrap()
    }

    #[test]
    fn thread_count_does_not_change_the_curve() {
        let cfg = base().to_sim().unwrap();
        let one = run_experiment(&cfg, Some(1)).unwrap();
        let four = run_experiment(&cfg, Some(4)).unwrap();
        assert_eq!(one, four);
        assert_eq!(one, cabsim_core::sim::run_experiment_sequential(&cfg).unwrap());
    }

    #[test]
    fn axis_parsing() {
        assert_eq!("delta_param".parse::<Axis>().unwrap(), Axis::DeltaParam);
        assert!(matches!("mu".parse::<Axis>(), Err(CliError::Config(_))));
    }

    #[test]
    fn apply_axes() {
        let b = base();
        let g = Axis::Gamma.apply(&b, "0.4").unwrap();
        assert_eq!(g.schedule, ScheduleConfig::ExogenousPower { c: 0.5, gamma: 0.4 });
        let h = Axis::Horizon.apply(&b, "500").unwrap();
        assert_eq!(h.horizon, 500);
        let p = Axis::Policy.apply(&b, "upfront").unwrap();
        assert_eq!(p.policy, PolicyConfig::Upfront { c: 0.5 });
        let c = Axis::C.apply(&p, "0.25").unwrap();
        assert_eq!(c.policy, PolicyConfig::Upfront { c: 0.25 });
        assert!(Axis::DeltaParam.apply(&p, "0.1").is_err());
        assert!(Axis::Gamma.apply(&b, "x").is_err());
        assert!(Axis::Policy.apply(&b, "greedy").is_err());
        let d = Axis::Policy.apply(&Axis::Policy.apply(&b, "alg2").unwrap(), "alg1").unwrap();
        assert!(matches!(d.policy, PolicyConfig::Alg1 { delta } if (delta - 0.05).abs() < 1e-12));
    }

    #[test]
    fn sweep_cardinality_and_common_numbers() {
        let b = base();
        assert!(sweep(&b, Axis::Gamma, &[], Some(1)).unwrap().is_empty());
        let values: Vec<String> = ["0", "0.4"].iter().map(|s| s.to_string()).collect();
        let mut points = Vec::new();
        for policy in ["alg1", "alg2"] {
            let base = Axis::Policy.apply(&b, policy).unwrap();
            points.extend(sweep(&base, Axis::Gamma, &values, Some(1)).unwrap());
        }
        assert_eq!(points.len(), 4);
        assert!(points.iter().all(|p| p.config.seed == 9));
    }

    #[test]
    fn parallel_estimators_match_sequential() {
        let inst = InstanceSpec::bernoulli(0.6, 0.5).unwrap();
        let a = persistence(&inst, 200, 500, 4, Some(2)).unwrap();
        let b = cabsim_core::sim::estimate_persistence_probability(&inst, 200, 500, 4);
        assert_eq!(a, b);
        let d = RewardDist::bernoulli(0.5).unwrap();
        let s = stop_time(&d, 1000, 500, 4, Some(2)).unwrap();
        assert_eq!(s, cabsim_core::sim::estimate_homogeneous_stop_time(&d, 1000, 500, 4));
        let sched = ReservoirSchedule::exogenous_power(0.5, 2.0).unwrap();
        let o = oracle_check(&sched, 1000, 300, 4, Some(2)).unwrap();
        assert_eq!(o, cabsim_core::sim::oracle_check(&sched, 1000, 300, 4).unwrap());
    }
}
