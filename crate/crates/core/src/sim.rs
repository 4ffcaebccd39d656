//! Single replications, aggregation across replications, and the Monte Carlo
//! estimators behind the theory checks.

use alloc::format;
use alloc::vec::Vec;
use core::hash::{Hash, Hasher};

use crate::error::{Error, Result};
use crate::instance::{ArmInstance, ArmLabel, ArmType, InstanceSpec, RewardDist};
use crate::policy::{
    alg2_threshold, Action, Alg1, Alg2, Observation, OraclePolicy, PolicySpec, UpfrontUcb,
};
use crate::reservoir::{ReservoirSchedule, ReservoirState};
use crate::rng::{make_rng, RngState};

/// Everything that determines an experiment's numbers.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    pub instance: InstanceSpec,
    pub schedule: ReservoirSchedule,
    pub policy: PolicySpec,
    pub horizon: u64,
    pub replications: u64,
    pub seed: u64,
    /// Sorted, unique checkpoints ending at `horizon`.
    pub grid: Vec<u64>,
}

pub const DEFAULT_GRID_RATIO: f64 = 1.2;

/// `1, ceil(r), ceil(r^2), ...` up to `n`, deduplicated, always ending at `n`.
pub fn geometric_grid(n: u64, ratio: f64) -> Vec<u64> {
    let mut grid = Vec::new();
    if n == 0 {
        return grid;
    }
    let mut x = 1.0f64;
    loop {
        let t = libm::ceil(x - 1e-9) as u64;
        if t >= n {
            break;
        }
        if grid.last() != Some(&t) {
            grid.push(t);
        }
        x *= ratio;
    }
    grid.push(n);
    grid
}

impl SimulationConfig {
    /// Builds a config on the default geometric grid.
    pub fn new(
        instance: InstanceSpec,
        schedule: ReservoirSchedule,
        policy: PolicySpec,
        horizon: u64,
        replications: u64,
        seed: u64,
    ) -> Result<Self> {
        let cfg = Self {
            instance,
            schedule,
            policy,
            horizon,
            replications,
            seed,
            grid: geometric_grid(horizon, DEFAULT_GRID_RATIO),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_grid(mut self, grid: Vec<u64>) -> Result<Self> {
        self.grid = grid;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.horizon < 1 {
            return Err(Error::Config("horizon must be >= 1".into()));
        }
        if self.replications < 1 {
            return Err(Error::Config("replications must be >= 1".into()));
        }
        if self.grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("recording grid must be strictly increasing".into()));
        }
        if self.grid.first().is_some_and(|&t| t < 1) {
            return Err(Error::Config("recording grid starts at t = 1".into()));
        }
        if self.grid.last() != Some(&self.horizon) {
            return Err(Error::Config(format!(
                "recording grid must end at the horizon {}",
                self.horizon
            )));
        }
        match self.policy {
            PolicySpec::Alg1 { delta } => {
                crate::policy::alg1_epoch_half_length(self.horizon, delta)?;
            }
            PolicySpec::Upfront { c } => {
                crate::policy::upfront_arm_count(c, self.horizon)?;
            }
            PolicySpec::Alg2 { .. } | PolicySpec::Oracle => {}
        }
        Ok(())
    }

    /// Stable 64-bit FNV-1a digest of every field.
    pub fn digest(&self) -> u64 {
        let mut h = Fnv1a::default();
        hash_dist(self.instance.dist(ArmType::Optimal), &mut h);
        hash_dist(self.instance.dist(ArmType::Inferior), &mut h);
        match &self.schedule {
            ReservoirSchedule::ExogenousPower { c, gamma } => (0u8, c.to_bits(), gamma.to_bits()).hash(&mut h),
            ReservoirSchedule::EndogenousPower { c, gamma } => (1u8, c.to_bits(), gamma.to_bits()).hash(&mut h),
            ReservoirSchedule::Constant { c } => (2u8, c.to_bits()).hash(&mut h),
            ReservoirSchedule::ExogenousTable { values } => {
                3u8.hash(&mut h);
                values.iter().for_each(|v| v.to_bits().hash(&mut h));
            }
        }
        match self.policy {
            PolicySpec::Alg1 { delta } => (0u8, delta.to_bits()).hash(&mut h),
            PolicySpec::Alg2 { corruption } => (1u8, corruption).hash(&mut h),
            PolicySpec::Oracle => 2u8.hash(&mut h),
            PolicySpec::Upfront { c } => (3u8, c.to_bits()).hash(&mut h),
        }
        (self.horizon, self.replications, self.seed).hash(&mut h);
        self.grid.hash(&mut h);
        h.finish()
    }
}

fn hash_dist(d: &RewardDist, h: &mut Fnv1a) {
    match d {
        RewardDist::Bernoulli(p) => (0u8, p.to_bits()).hash(h),
        RewardDist::Deterministic(v) => (1u8, v.to_bits()).hash(h),
        RewardDist::Discrete { values, cumulative } => {
            2u8.hash(h);
            for (v, c) in values.iter().zip(cumulative) {
                (v.to_bits(), c.to_bits()).hash(h);
            }
        }
    }
}

struct Fnv1a(u64);

impl Default for Fnv1a {
    fn default() -> Self {
        Fnv1a(0xcbf2_9ce4_8422_2325)
    }
}

impl Hasher for Fnv1a {
    fn finish(&self) -> u64 {
        self.0
    }

    fn write(&mut self, bytes: &[u8]) {
        for b in bytes {
            self.0 ^= u64::from(*b);
            self.0 = self.0.wrapping_mul(0x0100_0000_01b3);
        }
    }
}

/// State of one replication at a recording checkpoint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Checkpoint {
    pub t: u64,
    /// `sum (mu1 - mean of the pulled arm's type)`.
    pub pseudo_regret: f64,
    /// `sum (mu1 - observed reward)`; may be negative.
    pub realized_regret: f64,
    pub queries: u64,
    pub committed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegretTrace {
    pub points: Vec<Checkpoint>,
    /// Oracle only: the step at which an optimal arm was first pulled.
    pub first_success: Option<u64>,
    /// ALG1 / ALG2 only: epochs opened.
    pub epochs: Option<u64>,
    pub pulls: u64,
}

enum Runner {
    Alg1(Alg1),
    Alg2(Alg2),
    Oracle(OraclePolicy),
    Upfront(UpfrontUcb),
}

impl Runner {
    fn new(spec: &PolicySpec, horizon: u64) -> Result<Self> {
        Ok(match *spec {
            PolicySpec::Alg1 { delta } => Runner::Alg1(Alg1::new(horizon, delta)?),
            PolicySpec::Alg2 { corruption } => Runner::Alg2(Alg2::new(corruption)),
            PolicySpec::Oracle => Runner::Oracle(OraclePolicy::new()),
            PolicySpec::Upfront { c } => Runner::Upfront(UpfrontUcb::new(c, horizon)?),
        })
    }

    fn committed(&self) -> bool {
        match self {
            Runner::Alg1(p) => p.committed().is_some(),
            Runner::Oracle(p) => p.committed().is_some(),
            Runner::Alg2(_) | Runner::Upfront(_) => false,
        }
    }
}

/// Simulates one path of `config` on stream `rep_id`.
///
/// A `QueryNew` action draws a type from the reservoir and pulls the new arm
/// once in the same step. Reservoir draws, rewards and policy noise read
/// separate forks of the replication's stream, so every policy sees the same
/// reservoir and reward randomness for a given `rep_id`.
pub fn run_replication(config: &SimulationConfig, rep_id: u64) -> Result<RegretTrace> {
    let root = make_rng(config.seed, rep_id);
    let mut reservoir_rng = root.fork(0);
    let mut reward_rng = root.fork(1);
    let mut policy_rng = root.fork(2);

    let instance = &config.instance;
    let mu1 = instance.mu1();
    let mut runner = Runner::new(&config.policy, config.horizon)?;
    let mut state = ReservoirState::default();
    let mut arms: Vec<ArmInstance> = Vec::new();
    let mut last: Option<(Observation, ArmType)> = None;
    let mut pseudo = 0.0;
    let mut realized = 0.0;
    let mut points = Vec::with_capacity(config.grid.len());
    let mut next_checkpoint = config.grid.iter().copied().peekable();

    for t in 1..=config.horizon {
        state.time = t;
        let obs = last.map(|(o, _)| o);
        let action = match &mut runner {
            Runner::Alg1(p) => p.step(obs)?,
            Runner::Alg2(p) => p.step(obs, &mut policy_rng)?,
            Runner::Oracle(p) => p.step(last),
            Runner::Upfront(p) => p.step(obs)?,
        };
        let idx = match action {
            Action::QueryNew => {
                let ty = config.schedule.query_new_arm(&mut state, &mut reservoir_rng);
                arms.push(ArmInstance::new(ArmLabel(arms.len() as u64), ty));
                arms.len() - 1
            }
            Action::PullExisting(label) => {
                let idx = label.0 as usize;
                if idx >= arms.len() {
                    return Err(Error::UnknownArm { label: label.0 });
                }
                idx
            }
        };
        let arm = &mut arms[idx];
        let reward = arm.pull(instance, &mut reward_rng);
        let ty = arm.arm_type();
        pseudo += mu1 - instance.mean(ty);
        realized += mu1 - reward;
        last = Some((Observation { label: arm.label(), reward }, ty));

        if next_checkpoint.peek() == Some(&t) {
            next_checkpoint.next();
            points.push(Checkpoint {
                t,
                pseudo_regret: pseudo,
                realized_regret: realized,
                queries: state.queries,
                committed: runner.committed(),
            });
        }
    }

    let (first_success, epochs) = match &mut runner {
        Runner::Oracle(p) => {
            p.finish(last);
            (p.first_success(), None)
        }
        Runner::Alg1(p) => (None, Some(p.epochs_opened())),
        Runner::Alg2(p) => (None, Some(p.epochs_opened())),
        Runner::Upfront(_) => (None, None),
    };
    Ok(RegretTrace {
        points,
        first_success,
        epochs,
        pulls: config.horizon,
    })
}

/// Mean and standard error of both regrets at each checkpoint.
#[derive(Debug, Clone, PartialEq)]
pub struct RegretCurve {
    pub checkpoints: Vec<u64>,
    pub mean_pseudo_regret: Vec<f64>,
    pub stderr_pseudo: Vec<f64>,
    pub mean_realized_regret: Vec<f64>,
    pub stderr_realized: Vec<f64>,
    pub mean_queries: Vec<f64>,
    pub replications: u64,
    pub config_digest: u64,
}

impl RegretCurve {
    /// Reduces traces in the order given; all traces must share a grid.
    pub fn from_traces(traces: &[RegretTrace], config_digest: u64) -> Result<Self> {
        let checkpoints: Vec<u64> = traces
            .first()
            .map(|tr| tr.points.iter().map(|p| p.t).collect())
            .unwrap_or_default();
        if traces.iter().any(|tr| {
            tr.points.len() != checkpoints.len() || tr.points.iter().zip(&checkpoints).any(|(p, &t)| p.t != t)
        }) {
            return Err(Error::Config("traces were recorded on different grids".into()));
        }
        let k = checkpoints.len();
        let mut curve = RegretCurve {
            checkpoints,
            mean_pseudo_regret: Vec::with_capacity(k),
            stderr_pseudo: Vec::with_capacity(k),
            mean_realized_regret: Vec::with_capacity(k),
            stderr_realized: Vec::with_capacity(k),
            mean_queries: Vec::with_capacity(k),
            replications: traces.len() as u64,
            config_digest,
        };
        for i in 0..k {
            let (m, s) = mean_stderr(traces.iter().map(|tr| tr.points[i].pseudo_regret));
            curve.mean_pseudo_regret.push(m);
            curve.stderr_pseudo.push(s);
            let (m, s) = mean_stderr(traces.iter().map(|tr| tr.points[i].realized_regret));
            curve.mean_realized_regret.push(m);
            curve.stderr_realized.push(s);
            let (m, _) = mean_stderr(traces.iter().map(|tr| tr.points[i].queries as f64));
            curve.mean_queries.push(m);
        }
        Ok(curve)
    }

    pub fn len(&self) -> usize {
        self.checkpoints.len()
    }

    pub fn is_empty(&self) -> bool {
        self.checkpoints.is_empty()
    }

    /// Final mean pseudo-regret and its standard error.
    pub fn final_pseudo(&self) -> Option<(f64, f64)> {
        Some((*self.mean_pseudo_regret.last()?, *self.stderr_pseudo.last()?))
    }
}

/// Two-pass sample mean and standard error of the mean (0 for one sample).
pub fn mean_stderr(xs: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let (n, sum) = xs.clone().fold((0u64, 0.0), |(n, s), x| (n + 1, s + x));
    if n == 0 {
        return (0.0, 0.0);
    }
    let mean = sum / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let ss: f64 = xs.map(|x| (x - mean) * (x - mean)).sum();
    (mean, libm::sqrt(ss / (n - 1) as f64 / n as f64))
}

/// Runs every replication of `config` in order on the current thread.
pub fn run_experiment_sequential(config: &SimulationConfig) -> Result<RegretCurve> {
    config.validate()?;
    let traces = (0..config.replications)
        .map(|r| run_replication(config, r))
        .collect::<Result<Vec<_>>>()?;
    RegretCurve::from_traces(&traces, config.digest())
}

/// A Monte Carlo probability with its binomial standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Proportion {
    pub value: f64,
    pub stderr: f64,
    pub successes: u64,
    pub trials: u64,
}

impl Proportion {
    pub fn new(successes: u64, trials: u64) -> Self {
        let p = if trials == 0 { 0.0 } else { successes as f64 / trials as f64 };
        let stderr = if trials == 0 { 0.0 } else { libm::sqrt(p * (1.0 - p) / trials as f64) };
        Self {
            value: p,
            stderr,
            successes,
            trials,
        }
    }
}

/// Whether `|z + sum_{j<=m} (X1_j - X2_j)| >= 4 sqrt(m ln m)` holds for every
/// `m <= truncation` on one sampled path of a heterogeneous pair.
pub fn persistence_trial(instance: &InstanceSpec, truncation: u64, rng: &mut RngState) -> bool {
    let z = rng.sample_gaussian();
    let good = instance.dist(ArmType::Optimal);
    let bad = instance.dist(ArmType::Inferior);
    let mut walk = z;
    for m in 1..=truncation {
        walk += good.sample(rng) - bad.sample(rng);
        if libm::fabs(walk) < alg2_threshold(m) {
            return false;
        }
    }
    true
}

/// Fraction of `reps` paths (trial `i` on stream `i`) that never cross below
/// the threshold up to `truncation`.
pub fn estimate_persistence_probability(
    instance: &InstanceSpec,
    truncation: u64,
    reps: u64,
    seed: u64,
) -> Proportion {
    let hits = (0..reps)
        .filter(|&r| persistence_trial(instance, truncation, &mut make_rng(seed, r)))
        .count() as u64;
    Proportion::new(hits, reps)
}

/// First `m >= 2` with `|z + sum_{j<=m} (X_j - X'_j)| < 4 sqrt(m ln m)` for
/// two arms sharing `dist`, or `None` if no stop happens by `cap`.
pub fn homogeneous_stop_trial(dist: &RewardDist, cap: u64, rng: &mut RngState) -> Option<u64> {
    let mut walk = rng.sample_gaussian();
    for m in 1..=cap {
        walk += dist.sample(rng) - dist.sample(rng);
        if libm::fabs(walk) < alg2_threshold(m) {
            return Some(m);
        }
    }
    None
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StopTimeEstimate {
    /// Mean stopping time among stopped paths.
    pub mean: f64,
    pub stderr: f64,
    pub stopped: u64,
    pub trials: u64,
    /// Fraction of paths that reached the cap without stopping.
    pub cap_fraction: f64,
}

impl StopTimeEstimate {
    pub fn from_outcomes(outcomes: &[Option<u64>]) -> Self {
        let stops = outcomes.iter().filter_map(|o| o.map(|m| m as f64));
        let (mean, stderr) = mean_stderr(stops);
        let stopped = outcomes.iter().filter(|o| o.is_some()).count() as u64;
        let trials = outcomes.len() as u64;
        Self {
            mean,
            stderr,
            stopped,
            trials,
            cap_fraction: if trials == 0 { 0.0 } else { (trials - stopped) as f64 / trials as f64 },
        }
    }
}

pub fn estimate_homogeneous_stop_time(dist: &RewardDist, cap: u64, reps: u64, seed: u64) -> StopTimeEstimate {
    let outcomes: Vec<Option<u64>> = (0..reps)
        .map(|r| homogeneous_stop_trial(dist, cap, &mut make_rng(seed, r)))
        .collect();
    StopTimeEstimate::from_outcomes(&outcomes)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EpochFate {
    /// The pair was dropped when the minimum sample count was `m`.
    Discarded { m: u64 },
    /// The minimum sample count reached the target with the pair alive.
    Survived,
    /// The step budget ran out first.
    Unresolved,
}

/// Runs the nested-UCB policy on one pair of the given types until the pair
/// is dropped or its minimum sample count reaches `target_m`.
pub fn alg2_epoch_fate(
    instance: &InstanceSpec,
    types: (ArmType, ArmType),
    corruption: bool,
    target_m: u64,
    max_steps: u64,
    rng: &mut RngState,
) -> Result<EpochFate> {
    let mut policy_rng = rng.fork(2);
    let mut policy = Alg2::new(corruption);
    let mut arms: Vec<ArmInstance> = Vec::with_capacity(2);
    let mut last = None;
    for _ in 0..max_steps {
        let action = policy.step(last, &mut policy_rng)?;
        let idx = match action {
            Action::QueryNew if arms.len() == 2 => {
                return Ok(EpochFate::Discarded {
                    m: policy.last_discard_m().unwrap_or(0),
                })
            }
            Action::QueryNew => {
                let ty = if arms.is_empty() { types.0 } else { types.1 };
                arms.push(ArmInstance::new(ArmLabel(arms.len() as u64), ty));
                arms.len() - 1
            }
            Action::PullExisting(l) => l.0 as usize,
        };
        let reward = arms[idx].pull(instance, rng);
        last = Some(Observation { label: arms[idx].label(), reward });
        if policy.m() >= target_m && !policy.would_discard() {
            return Ok(EpochFate::Survived);
        }
    }
    Ok(EpochFate::Unresolved)
}

/// The oracle's first-success time `Y` on stream `rep_id`, or `None` if it
/// exceeds `n`. Stops at `Y` instead of playing out the horizon; the value
/// equals `run_replication(..).first_success` for the same streams.
pub fn oracle_first_success(
    instance: &InstanceSpec,
    schedule: &ReservoirSchedule,
    n: u64,
    seed: u64,
    rep_id: u64,
) -> Option<u64> {
    let root = make_rng(seed, rep_id);
    let mut reservoir_rng = root.fork(0);
    let mut reward_rng = root.fork(1);
    let mut policy = OraclePolicy::new();
    let mut state = ReservoirState::default();
    let mut last = None;
    let mut label = 0;
    for t in 1..=n {
        state.time = t;
        if let Action::PullExisting(_) = policy.step(last) {
            return policy.first_success();
        }
        let ty = schedule.query_new_arm(&mut state, &mut reservoir_rng);
        let mut arm = ArmInstance::new(ArmLabel(label), ty);
        label += 1;
        let reward = arm.pull(instance, &mut reward_rng);
        last = Some((Observation { label: arm.label(), reward }, ty));
    }
    policy.finish(last);
    policy.first_success()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleCheck {
    /// Fraction of replications with `Y > n`.
    pub empirical: Proportion,
    pub analytic: f64,
}

/// Runs the full-information oracle `reps` times and compares the fraction
/// of runs that never find an optimal arm within `n` steps with the product
/// formula.
pub fn oracle_check(schedule: &ReservoirSchedule, n: u64, reps: u64, seed: u64) -> Result<OracleCheck> {
    let analytic = crate::theory::oracle_absorption_prob(schedule, crate::theory::Horizon::Finite(n))?;
    let instance = InstanceSpec::bernoulli(0.6, 0.5)?;
    let misses = (0..reps)
        .filter(|&r| oracle_first_success(&instance, schedule, n, seed, r).is_none())
        .count() as u64;
    Ok(OracleCheck {
        empirical: Proportion::new(misses, reps),
        analytic,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn config(policy: PolicySpec, schedule: ReservoirSchedule, n: u64, reps: u64) -> SimulationConfig {
        SimulationConfig::new(InstanceSpec::bernoulli(0.6, 0.5).unwrap(), schedule, policy, n, reps, 42).unwrap()
    }

    #[test]
    fn grid_shape() {
        let g = geometric_grid(1000, 1.2);
        assert_eq!(g[0], 1);
        assert_eq!(*g.last().unwrap(), 1000);
        assert!(g.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(geometric_grid(1, 1.2), vec![1]);
        assert!(geometric_grid(0, 1.2).is_empty());
    }

    #[test]
    fn rejects_bad_grids() {
        let c = config(PolicySpec::Oracle, ReservoirSchedule::constant(0.5).unwrap(), 100, 1);
        assert!(c.clone().with_grid(vec![1, 50]).is_err());
        assert!(c.clone().with_grid(vec![50, 10, 100]).is_err());
        assert!(c.clone().with_grid(vec![0, 100]).is_err());
        assert!(c.with_grid(vec![10, 100]).is_ok());
    }

    #[test]
    fn oracle_on_forced_optimal_first_arm_has_no_regret() {
        let sched = ReservoirSchedule::table(vec![1.0, 0.5]).unwrap();
        let c = config(PolicySpec::Oracle, sched, 500, 1);
        let tr = run_replication(&c, 0).unwrap();
        assert!(tr.points.iter().all(|p| p.pseudo_regret == 0.0));
        assert_eq!(tr.first_success, Some(1));
        assert_eq!(tr.points.last().unwrap().queries, 1);
    }

    #[test]
    fn pseudo_regret_is_capped_and_monotone() {
        for policy in [
            PolicySpec::Alg1 { delta: 0.1 },
            PolicySpec::Alg2 { corruption: true },
            PolicySpec::Oracle,
            PolicySpec::Upfront { c: 0.5 },
        ] {
            let c = config(policy, ReservoirSchedule::exogenous_power(0.5, 0.4).unwrap(), 1000, 5);
            for r in 0..5 {
                let tr = run_replication(&c, r).unwrap();
                assert_eq!(tr.points.len(), c.grid.len());
                for w in tr.points.windows(2) {
                    assert!(w[1].pseudo_regret >= w[0].pseudo_regret);
                    assert!(w[1].queries >= w[0].queries);
                }
                for p in &tr.points {
                    assert!(p.pseudo_regret <= 0.1 * p.t as f64 + 1e-9);
                }
                assert!(tr.points.last().unwrap().pseudo_regret <= 100.0 + 1e-9);
            }
        }
    }

    #[test]
    fn alg1_hand_traced_path() {
        // First arm optimal, everything after inferior; deterministic rewards.
        let inst = InstanceSpec::deterministic(0.6, 0.5).unwrap();
        let sched = ReservoirSchedule::table(vec![1.0, f64::MIN_POSITIVE]).unwrap();
        let n = 100_000;
        let c = SimulationConfig::new(inst, sched, PolicySpec::Alg1 { delta: 0.05 }, n, 1, 7).unwrap();
        let m = crate::policy::alg1_epoch_half_length(n, 0.05).unwrap();
        let tr = run_replication(&c, 0).unwrap();
        let last = tr.points.last().unwrap();
        assert!((last.pseudo_regret - 0.1 * m as f64).abs() < 1e-6);
        assert_eq!(last.queries, 2);
        assert!(last.committed);
        assert_eq!(tr.epochs, Some(1));
    }

    #[test]
    fn alg1_queries_twice_per_epoch_and_stops_after_commit() {
        let c = config(PolicySpec::Alg1 { delta: 0.1 }, ReservoirSchedule::constant(0.5).unwrap(), 10_000, 20);
        for r in 0..20 {
            let tr = run_replication(&c, r).unwrap();
            let epochs = tr.epochs.unwrap();
            let q = tr.points.last().unwrap().queries;
            assert!(q == 2 * epochs || q + 1 == 2 * epochs, "q={q} epochs={epochs}");
            assert_eq!(tr.pulls, 10_000);
            let first_commit = tr.points.iter().position(|p| p.committed);
            if let Some(i) = first_commit {
                assert!(tr.points[i..].iter().all(|p| p.queries == tr.points[i].queries));
            }
        }
    }

    #[test]
    fn alg2_queries_twice_per_epoch() {
        let c = config(PolicySpec::Alg2 { corruption: true }, ReservoirSchedule::constant(0.5).unwrap(), 5000, 10);
        for r in 0..10 {
            let tr = run_replication(&c, r).unwrap();
            let epochs = tr.epochs.unwrap();
            let q = tr.points.last().unwrap().queries;
            assert!(q == 2 * epochs || q + 1 == 2 * epochs);
        }
    }

    #[test]
    fn replication_is_deterministic() {
        let c = config(PolicySpec::Alg2 { corruption: true }, ReservoirSchedule::constant(0.5).unwrap(), 2000, 3);
        assert_eq!(run_replication(&c, 2).unwrap(), run_replication(&c, 2).unwrap());
        assert_ne!(run_replication(&c, 1).unwrap(), run_replication(&c, 2).unwrap());
    }

    #[test]
    fn single_replication_curve_has_zero_stderr() {
        let c = config(PolicySpec::Alg1 { delta: 0.1 }, ReservoirSchedule::constant(0.5).unwrap(), 500, 1);
        let curve = run_experiment_sequential(&c).unwrap();
        let tr = run_replication(&c, 0).unwrap();
        assert_eq!(curve.replications, 1);
        assert!(curve.stderr_pseudo.iter().all(|&s| s == 0.0));
        for (p, m) in tr.points.iter().zip(&curve.mean_pseudo_regret) {
            assert_eq!(p.pseudo_regret, *m);
        }
    }

    #[test]
    fn oracle_mean_regret_matches_geometric_wait() {
        // Y ~ Geometric(1/2): E[Y] = 2, so the oracle pays 0.1 * (E[Y] - 1).
        let c = config(PolicySpec::Oracle, ReservoirSchedule::constant(0.5).unwrap(), 1000, 10_000);
        let curve = run_experiment_sequential(&c).unwrap();
        let (mean, se) = curve.final_pseudo().unwrap();
        assert!((mean - 0.1).abs() <= 3.0 * se, "{mean} +- {se}");
        let ys: Vec<f64> = (0..10_000)
            .map(|r| run_replication(&c, r).unwrap().first_success.unwrap() as f64)
            .collect();
        let ey = ys.iter().sum::<f64>() / ys.len() as f64;
        assert!((ey - 2.0).abs() < 0.05, "{ey}");
    }

    #[test]
    fn oracle_shortcut_matches_full_replication() {
        let sched = ReservoirSchedule::exogenous_power(0.5, 1.5).unwrap();
        let c = config(PolicySpec::Oracle, sched.clone(), 50, 1);
        let mut seen_none = false;
        for r in 0..2000 {
            let full = run_replication(&c, r).unwrap().first_success;
            seen_none |= full.is_none();
            assert_eq!(full, oracle_first_success(&c.instance, &sched, 50, c.seed, r));
        }
        assert!(seen_none);
        // Y = n exactly still counts as found.
        let half = ReservoirSchedule::constant(0.5).unwrap();
        let c = config(PolicySpec::Oracle, half.clone(), 3, 1);
        let hits = (0..200)
            .filter(|&r| {
                let full = run_replication(&c, r).unwrap().first_success;
                assert_eq!(full, oracle_first_success(&c.instance, &half, 3, c.seed, r));
                full == Some(3)
            })
            .count();
        assert!(hits > 0);
    }

    #[test]
    fn persistence_edges() {
        let inst = InstanceSpec::bernoulli(0.6, 0.5).unwrap();
        assert_eq!(estimate_persistence_probability(&inst, 1, 100, 1).value, 1.0);
        let short = estimate_persistence_probability(&inst, 100, 20_000, 3);
        let long = estimate_persistence_probability(&inst, 10_000, 20_000, 3);
        assert!(long.value <= short.value);
    }

    #[test]
    fn deterministic_homogeneous_pair_stops_where_threshold_passes_z() {
        let dist = RewardDist::deterministic(0.6).unwrap();
        for r in 0..1000 {
            let mut rng = make_rng(5, r);
            let z = rng.clone().sample_gaussian();
            let m = homogeneous_stop_trial(&dist, 1_000_000, &mut rng).unwrap();
            let want = (2..).find(|&m| z.abs() < alg2_threshold(m)).unwrap();
            assert_eq!(m, want);
        }
    }

    #[test]
    fn alg2_fate_without_corruption() {
        let inst = InstanceSpec::deterministic(0.6, 0.5).unwrap();
        for r in 0..100 {
            let fate = alg2_epoch_fate(
                &inst,
                (ArmType::Optimal, ArmType::Inferior),
                false,
                100,
                1_000_000,
                &mut make_rng(8, r),
            )
            .unwrap();
            assert_eq!(fate, EpochFate::Discarded { m: 2 });
        }
    }

    #[test]
    fn digest_tracks_fields() {
        let a = config(PolicySpec::Alg1 { delta: 0.1 }, ReservoirSchedule::constant(0.5).unwrap(), 500, 1);
        let mut b = a.clone();
        assert_eq!(a.digest(), b.digest());
        b.seed += 1;
        assert_ne!(a.digest(), b.digest());
    }
}
