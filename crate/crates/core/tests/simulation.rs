use cabsim_core::policy::upfront_arm_count;
use cabsim_core::sim::{
    geometric_grid, mean_stderr, oracle_check, run_experiment_sequential, run_replication, RegretCurve,
};
use cabsim_core::theory::{self, Horizon};
use cabsim_core::{InstanceSpec, PolicySpec, ReservoirSchedule, SimulationConfig};
use proptest::prelude::*;

fn config(policy: PolicySpec, schedule: ReservoirSchedule, n: u64, reps: u64, seed: u64) -> SimulationConfig {
    SimulationConfig::new(InstanceSpec::bernoulli(0.6, 0.5).unwrap(), schedule, policy, n, reps, seed).unwrap()
}

const POLICIES: [PolicySpec; 4] = [
    PolicySpec::Alg1 { delta: 0.1 },
    PolicySpec::Alg2 { corruption: true },
    PolicySpec::Oracle,
    PolicySpec::Upfront { c: 0.5 },
];

#[test]
fn realized_and_pseudo_regret_agree_in_mean() {
    for policy in POLICIES {
        let c = config(policy.clone(), ReservoirSchedule::constant(0.5).unwrap(), 2000, 2000, 11);
        let curve = run_experiment_sequential(&c).unwrap();
        let k = curve.len() - 1;
        let se = curve.stderr_pseudo[k].hypot(curve.stderr_realized[k]);
        let gap = (curve.mean_realized_regret[k] - curve.mean_pseudo_regret[k]).abs();
        assert!(gap <= 4.0 * se, "{}: gap {gap} vs se {se}", policy.name());
    }
}

#[test]
fn aggregate_stays_within_per_replication_range() {
    let c = config(PolicySpec::Alg2 { corruption: true }, ReservoirSchedule::exogenous_power(0.5, 0.4).unwrap(), 3000, 40, 2);
    let traces: Vec<_> = (0..40).map(|r| run_replication(&c, r).unwrap()).collect();
    let curve = RegretCurve::from_traces(&traces, c.digest()).unwrap();
    for i in 0..curve.len() {
        let vals: Vec<f64> = traces.iter().map(|t| t.points[i].pseudo_regret).collect();
        let lo = vals.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert!(curve.mean_pseudo_regret[i] >= lo - 1e-9 && curve.mean_pseudo_regret[i] <= hi + 1e-9);
        assert!(curve.stderr_pseudo[i] >= 0.0 && curve.stderr_realized[i] >= 0.0);
        if i > 0 {
            assert!(curve.mean_pseudo_regret[i] >= curve.mean_pseudo_regret[i - 1]);
        }
    }
    assert_eq!(curve, run_experiment_sequential(&c).unwrap());
}

#[test]
fn upfront_baseline_queries_its_whole_set_once() {
    let n = 5000;
    let k = upfront_arm_count(0.5, n).unwrap();
    let c = config(PolicySpec::Upfront { c: 0.5 }, ReservoirSchedule::constant(0.5).unwrap(), n, 20, 3);
    for r in 0..20 {
        let tr = run_replication(&c, r).unwrap();
        assert_eq!(tr.points.last().unwrap().queries, k);
        assert!(tr.points.iter().all(|p| p.queries <= k));
    }
}

#[test]
fn policies_share_reservoir_and_reward_streams() {
    // With a table that makes every arm optimal, the oracle and ALG1 both
    // pay nothing, whatever else the streams hold.
    for policy in POLICIES {
        let c = config(policy, ReservoirSchedule::table(vec![1.0]).unwrap(), 1000, 3, 5);
        for r in 0..3 {
            assert_eq!(run_replication(&c, r).unwrap().points.last().unwrap().pseudo_regret, 0.0);
        }
    }
}

#[test]
fn endogenous_depletion_costs_more_than_static_reservoir() {
    let stat = config(PolicySpec::Alg1 { delta: 0.1 }, ReservoirSchedule::endogenous_power(0.5, 0.0).unwrap(), 20_000, 300, 6);
    let deplete = SimulationConfig {
        schedule: ReservoirSchedule::endogenous_power(0.5, 2.0).unwrap(),
        ..stat.clone()
    };
    let a = run_experiment_sequential(&stat).unwrap().final_pseudo().unwrap();
    let b = run_experiment_sequential(&deplete).unwrap().final_pseudo().unwrap();
    assert!(b.0 - a.0 > 3.0 * a.1.hypot(b.1), "{a:?} vs {b:?}");
}

#[test]
fn oracle_check_small_horizon_agrees_with_product() {
    let sched = ReservoirSchedule::exogenous_power(0.5, 1.0).unwrap();
    let chk = oracle_check(&sched, 200, 4000, 17).unwrap();
    let want = theory::oracle_absorption_prob(&sched, Horizon::Finite(200)).unwrap();
    assert_eq!(chk.analytic, want);
    assert!((chk.empirical.value - want).abs() <= 3.0 * chk.empirical.stderr);
}

#[test]
fn mean_stderr_known_values() {
    let (m, s) = mean_stderr([1.0, 2.0, 3.0, 4.0].into_iter());
    assert_eq!(m, 2.5);
    assert!((s - (5.0f64 / 12.0).sqrt()).abs() < 1e-15);
    assert_eq!(mean_stderr([7.0].into_iter()), (7.0, 0.0));
}

proptest! {
    #[test]
    fn grid_is_valid_for_any_horizon(n in 1u64..5_000_000) {
        let g = geometric_grid(n, 1.2);
        prop_assert_eq!(g[0], 1);
        prop_assert_eq!(*g.last().unwrap(), n);
        prop_assert!(g.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn bounds_grow_with_horizon(n in 10u64..1_000_000_000, gamma in 0.0f64..0.9) {
        let at = |n| theory::BoundInputs {
            delta_gap: 0.1, delta_param: 0.1, c: 0.5, gamma, n, beta_override: None,
        };
        prop_assert!(theory::bound_thm2(&at(2 * n)).unwrap() > theory::bound_thm2(&at(n)).unwrap());
        prop_assert!(theory::bound_thm4(&at(2 * n)).unwrap() > theory::bound_thm4(&at(n)).unwrap());
    }
}
