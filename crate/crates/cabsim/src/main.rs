use std::path::PathBuf;
use std::process::ExitCode;

use cabsim::config::{ConfigFile, ScheduleConfig};
use cabsim::output::{Format, Sink};
use cabsim::runner::{self, Axis};
use cabsim::Result;
use cabsim_core::theory::{self, Beta, BoundInputs, Horizon, DEFAULT_MAX_TERMS};
use cabsim_core::{InstanceSpec, ReservoirSchedule};
use clap::{Parser, Subcommand};
use serde_json::json;

#[derive(Parser)]
#[command(name = "cabsim", version, about = "Countable-armed bandit simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every replication of a config and write the aggregated regret curve.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        /// Worker threads; all cores when omitted.
        #[arg(long)]
        threads: Option<usize>,
        /// Overrides the seed in the config file.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run one experiment per value of a parameter, with common random numbers.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// gamma, c, delta_param, horizon or policy.
        #[arg(long)]
        axis: String,
        #[arg(long, value_delimiter = ',', num_args = 0..)]
        values: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Print every theory constant for the given inputs as JSON.
    Bounds {
        /// Gap between the two arm means.
        #[arg(long)]
        delta: f64,
        /// Gap parameter given to the explore-then-commit policy.
        #[arg(long = "delta-param")]
        delta_param: f64,
        #[arg(long)]
        c: f64,
        #[arg(long)]
        gamma: f64,
        #[arg(long)]
        n: u64,
        /// Use this persistence probability instead of the closed form.
        #[arg(long = "beta-override")]
        beta_override: Option<f64>,
        #[arg(long = "truncation-eps", default_value_t = 1e-12)]
        truncation_eps: f64,
    },
    /// Estimate the probability that a heterogeneous pair is never discarded.
    Persistence {
        #[arg(long)]
        delta: f64,
        /// bernoulli or deterministic.
        #[arg(long)]
        family: String,
        #[arg(long)]
        trunc: u64,
        #[arg(long)]
        reps: u64,
        #[arg(long)]
        seed: u64,
        /// Mean of the better arm; the other arm has mean mu1 - delta.
        #[arg(long, default_value_t = 0.6)]
        mu1: f64,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Estimate the discard time of a pair of identical arms.
    Stoptime {
        #[arg(long)]
        family: String,
        #[arg(long)]
        cap: u64,
        #[arg(long)]
        reps: u64,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 0.5)]
        mean: f64,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Compare the oracle's empirical P(Y > n) with the product formula.
    OracleCheck {
        /// Schedule as JSON, e.g. '{"kind":"exogenous_power","c":0.5,"gamma":2}'.
        #[arg(long)]
        schedule: String,
        #[arg(long)]
        n: u64,
        #[arg(long)]
        reps: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        threads: Option<usize>,
    },
}

fn finite(x: f64) -> serde_json::Value {
    if x.is_finite() {
        json!(x)
    } else {
        serde_json::Value::Null
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Simulate {
            config,
            out,
            format,
            threads,
            seed,
        } => {
            let mut file = ConfigFile::load(&config)?;
            if let Some(s) = seed {
                file.seed = s;
            }
            let curve = runner::run_experiment(&file.to_sim()?, threads)?;
            Sink::new(out.as_deref()).write_curve(&file, &curve, format)
        }
        Command::Sweep {
            config,
            axis,
            values,
            out,
            format,
            threads,
        } => {
            let axis: Axis = axis.parse()?;
            let file = ConfigFile::load(&config)?;
            let points = runner::sweep(&file, axis, &values, threads)?;
            Sink::new(out.as_deref()).write_sweep(axis, &points, format)
        }
        Command::Bounds {
            delta,
            delta_param,
            c,
            gamma,
            n,
            beta_override,
            truncation_eps,
        } => {
            let inputs = BoundInputs {
                delta_gap: delta,
                delta_param,
                c,
                gamma,
                n,
                beta_override: beta_override.map(Beta::Linear),
            };
            inputs.validate()?;
            let t0 = theory::t_zero(delta)?;
            let alpha_n = c * (n as f64).powf(-gamma);
            let thm3 = theory::bound_thm3(&inputs, alpha_n)?;
            let thm5 = theory::bound_thm5(
                &inputs,
                &ReservoirSchedule::endogenous_power(c, gamma)?,
                None,
                truncation_eps,
                DEFAULT_MAX_TERMS,
            )?;
            let absorption =
                theory::oracle_absorption_prob(&ReservoirSchedule::exogenous_power(c, gamma)?, Horizon::Finite(n))?;
            Sink::new(None).write_value(&json!({
                "t0": t0,
                "f_t0": theory::f_envelope(t0 as f64)?,
                "log_beta": inputs.log_beta()?,
                "thm2": finite(theory::bound_thm2(&inputs)?),
                "thm3_log": thm3.ln_value,
                "thm4": finite(theory::bound_thm4(&inputs)?),
                "thm5": thm5.bound.value,
                "thm5_log": thm5.bound.ln_value,
                "thm5_truncated": thm5.truncated,
                "absorption": absorption,
            }))
        }
        Command::Persistence {
            delta,
            family,
            trunc,
            reps,
            seed,
            mu1,
            threads,
        } => {
            let instance = InstanceSpec::new(
                runner::family_dist(&family, mu1)?,
                runner::family_dist(&family, mu1 - delta)?,
            )?;
            let p = runner::persistence(&instance, trunc, reps, seed, threads)?;
            Sink::new(None).write_value(&json!({
                "estimate": p.value,
                "stderr": p.stderr,
                "successes": p.successes,
                "trials": p.trials,
                "log_beta_closed_form": theory::log_beta_delta(instance.delta())?,
            }))
        }
        Command::Stoptime {
            family,
            cap,
            reps,
            seed,
            mean,
            threads,
        } => {
            let dist = runner::family_dist(&family, mean)?;
            let s = runner::stop_time(&dist, cap, reps, seed, threads)?;
            Sink::new(None).write_value(&json!({
                "mean": s.mean,
                "stderr": s.stderr,
                "stopped": s.stopped,
                "trials": s.trials,
                "cap_fraction": s.cap_fraction,
            }))
        }
        Command::OracleCheck {
            schedule,
            n,
            reps,
            seed,
            threads,
        } => {
            let schedule: ScheduleConfig = serde_json::from_str(&schedule)?;
            let check = runner::oracle_check(&schedule.to_schedule()?, n, reps, seed, threads)?;
            let e = check.empirical;
            Sink::new(None).write_value(&json!({
                "empirical": e.value,
                "stderr": e.stderr,
                "analytic": check.analytic,
                "trials": e.trials,
                "within_3_stderr": (e.value - check.analytic).abs() <= 3.0 * e.stderr,
            }))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("cabsim: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
