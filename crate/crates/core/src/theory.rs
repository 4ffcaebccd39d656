//! Closed-form constants and regret bounds.
//!
//! The persistence constant `beta` is far below the smallest positive double
//! for every gap in `(0, 1]`, so it is carried as a natural logarithm and the
//! bounds that divide by it are available in log scale.

use crate::error::{Error, Result};
use crate::normal::log_gaussian_upper_tail;
use crate::reservoir::ReservoirSchedule;

/// Products below this are reported as exactly zero.
const LN_ABSORPTION_FLOOR: f64 = -690.775_527_898_213_7; // ln(1e-300)
/// Terms of an exogenous product summed one by one before switching to an
/// Euler-Maclaurin tail.
const EXACT_TERMS: u64 = 1_000_000;
/// Default cap on the number of series terms in [`bound_thm5`].
pub const DEFAULT_MAX_TERMS: u64 = 100_000_000;

/// A probability that may be too small for linear scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Beta {
    Linear(f64),
    Log(f64),
}

impl Beta {
    pub fn ln(self) -> f64 {
        match self {
            Beta::Linear(b) => libm::log(b),
            Beta::Log(l) => l,
        }
    }

    fn validate(self) -> Result<Self> {
        match self {
            Beta::Linear(b) if b > 0.0 && b < 1.0 => Ok(self),
            Beta::Log(l) if l < 0.0 && l > f64::NEG_INFINITY => Ok(self),
            Beta::Linear(b) => Err(Error::domain("beta", b, "0 < beta < 1")),
            Beta::Log(l) => Err(Error::domain("ln beta", l, "finite and < 0")),
        }
    }
}

/// `ceil((64/D^2) ln^2(64/D^2))`.
pub fn t_zero(delta_gap: f64) -> Result<u64> {
    check_gap(delta_gap)?;
    let r = 64.0 / (delta_gap * delta_gap);
    let l = libm::log(r);
    Ok(libm::ceil(r * l * l) as u64)
}

/// `x + 4 sqrt(x ln x)`.
pub fn f_envelope(x: f64) -> Result<f64> {
    if !(x >= 1.0) || x.is_infinite() {
        return Err(Error::domain("x", x, "finite x >= 1"));
    }
    Ok(x + 4.0 * libm::sqrt(x * libm::log(x)))
}

/// `ln(P(Z > f(T0)) / 2)`, the log of the persistence lower bound.
pub fn log_beta_delta(delta_gap: f64) -> Result<f64> {
    let v = f_envelope(t_zero(delta_gap)? as f64)?;
    Ok(log_gaussian_upper_tail(v)? - core::f64::consts::LN_2)
}

/// `k!`, exact up to `k = 34`.
pub fn factorial(k: u32) -> Result<u128> {
    (1..=u128::from(k))
        .try_fold(1u128, |acc, i| acc.checked_mul(i))
        .ok_or(Error::domain("k", f64::from(k), "k <= 34"))
}

fn check_gap(delta_gap: f64) -> Result<()> {
    if delta_gap > 0.0 && delta_gap <= 1.0 {
        Ok(())
    } else {
        Err(Error::domain("delta", delta_gap, "0 < delta <= 1"))
    }
}

/// Hypotheses shared by the bound calculators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundInputs {
    pub delta_gap: f64,
    pub delta_param: f64,
    pub c: f64,
    pub gamma: f64,
    pub n: u64,
    pub beta_override: Option<Beta>,
}

impl BoundInputs {
    pub fn validate(&self) -> Result<()> {
        check_gap(self.delta_gap)?;
        if !(self.delta_param > 0.0 && self.delta_param <= self.delta_gap) {
            return Err(Error::domain("delta_param", self.delta_param, "0 < delta_param <= delta"));
        }
        if !(self.c > 0.0 && self.c < 1.0) {
            return Err(Error::domain("c", self.c, "0 < c < 1"));
        }
        if !(self.gamma >= 0.0 && self.gamma < 1.0) {
            return Err(Error::domain("gamma", self.gamma, "0 <= gamma < 1"));
        }
        if self.n < 1 {
            return Err(Error::domain("n", 0.0, "n >= 1"));
        }
        if let Some(b) = self.beta_override {
            b.validate()?;
        }
        Ok(())
    }

    /// `ln beta`: the override if present, otherwise the closed form.
    pub fn log_beta(&self) -> Result<f64> {
        match self.beta_override {
            Some(b) => Ok(b.validate()?.ln()),
            None => log_beta_delta(self.delta_gap),
        }
    }

    fn exponent(&self) -> f64 {
        1.0 / (1.0 - self.gamma)
    }

    /// `F(ceil(gamma / (1 - gamma)))` as a float.
    fn factorial_term(&self) -> Result<f64> {
        // 0.8 / 0.2 evaluates to 4.000000000000001; snap such round-off first.
        let ratio = self.gamma / (1.0 - self.gamma);
        let k = libm::ceil(ratio - 1e-9 * ratio.max(1.0));
        if k > 34.0 {
            return Err(Error::domain("gamma", self.gamma, "ceil(gamma/(1-gamma)) <= 34"));
        }
        Ok(factorial(k as u32)? as f64)
    }

    fn ln_n(&self) -> f64 {
        libm::log(self.n as f64)
    }
}

/// Explore-then-commit under an exogenous power schedule:
/// `24 D (8/(d^2 c))^(1/(1-g)) F(ceil(g/(1-g))) (ln n)^(1/(1-g))`.
pub fn bound_thm2(inputs: &BoundInputs) -> Result<f64> {
    inputs.validate()?;
    let p = inputs.exponent();
    let base = 8.0 / (inputs.delta_param * inputs.delta_param * inputs.c);
    Ok(24.0
        * inputs.delta_gap
        * libm::pow(base, p)
        * inputs.factorial_term()?
        * libm::pow(inputs.ln_n(), p))
}

/// Explore-then-commit under an endogenous power schedule:
/// `(48 D / d^2) (4/c)^(1/(1-g)) F(ceil(g/(1-g))) ln n`.
pub fn bound_thm4(inputs: &BoundInputs) -> Result<f64> {
    inputs.validate()?;
    let lead = 48.0 * inputs.delta_gap / (inputs.delta_param * inputs.delta_param);
    Ok(lead * libm::pow(4.0 / inputs.c, inputs.exponent()) * inputs.factorial_term()? * inputs.ln_n())
}

/// A bound that may only be representable in log scale.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogBound {
    pub ln_value: f64,
    /// `exp(ln_value)` when finite.
    pub value: Option<f64>,
}

impl LogBound {
    fn from_ln(ln_value: f64) -> Self {
        let v = libm::exp(ln_value);
        Self {
            ln_value,
            value: v.is_finite().then_some(v),
        }
    }
}

/// Nested UCB under an exogenous schedule: `(8 / (D beta)) ln(n) / alpha(n)`.
pub fn bound_thm3(inputs: &BoundInputs, alpha_n: f64) -> Result<LogBound> {
    inputs.validate()?;
    if !(alpha_n > 0.0 && alpha_n < 1.0) {
        return Err(Error::domain("alpha_n", alpha_n, "0 < alpha(n) < 1"));
    }
    let ln = libm::log(8.0 / inputs.delta_gap) - inputs.log_beta()? + libm::log(inputs.ln_n())
        - libm::log(alpha_n);
    Ok(LogBound::from_ln(ln))
}

/// Output of [`bound_thm5`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesBound {
    pub bound: LogBound,
    /// `ln S` with `S = sum_k exp(-beta sum_{j<k} g(2j))`.
    pub ln_series: f64,
    pub terms: u64,
    /// True when the series hit the term cap before converging.
    pub truncated: bool,
}

/// Nested UCB under an endogenous schedule:
/// `(16 c / D) S ln n`, `S = sum_{k>=0} exp(-beta sum_{j<k} g(2j))`.
///
/// Terms are added until one falls below `truncation_eps` times the partial
/// sum, or `max_terms` is reached (then `truncated` is set). A constant `g`
/// whose series would exceed the cap is summed in closed form instead.
pub fn bound_thm5(
    inputs: &BoundInputs,
    schedule: &ReservoirSchedule,
    beta: Option<Beta>,
    truncation_eps: f64,
    max_terms: u64,
) -> Result<SeriesBound> {
    inputs.validate()?;
    let (c, gamma) = match schedule {
        ReservoirSchedule::EndogenousPower { c, gamma } => (*c, *gamma),
        _ => return Err(Error::Schedule("the series bound needs an endogenous schedule".into())),
    };
    if !(truncation_eps > 0.0) {
        return Err(Error::domain("truncation_eps", truncation_eps, "> 0"));
    }
    let ln_beta = match beta {
        Some(b) => b.validate()?.ln(),
        None => inputs.log_beta()?,
    };
    let beta_lin = libm::exp(ln_beta);
    let ln_lead = libm::log(16.0 * c / inputs.delta_gap) + libm::log(inputs.ln_n());

    // Geometric case: S = 1 / (1 - exp(-beta c)).
    let ratio_gap = beta_lin * c;
    if gamma == 0.0 && (ratio_gap == 0.0 || 1.0 / ratio_gap > max_terms as f64) {
        let ln_series = if ratio_gap > 1e-300 {
            -libm::log(-libm::expm1(-ratio_gap))
        } else {
            -(ln_beta + libm::log(c))
        };
        return Ok(SeriesBound {
            bound: LogBound::from_ln(ln_lead + ln_series),
            ln_series,
            terms: 0,
            truncated: false,
        });
    }

    let mut partial = 0.0;
    let mut exponent_sum = 0.0;
    let mut k = 0u64;
    let mut truncated = true;
    while k < max_terms {
        let term = libm::exp(-beta_lin * exponent_sum);
        partial += term;
        k += 1;
        if term < truncation_eps * partial {
            truncated = false;
            break;
        }
        exponent_sum += schedule.g(2 * (k - 1))?;
    }
    let ln_series = libm::log(partial);
    Ok(SeriesBound {
        bound: LogBound::from_ln(ln_lead + ln_series),
        ln_series,
        terms: k,
        truncated,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Horizon {
    Finite(u64),
    Infinite,
}

/// `P(Y > n) = prod_{t=1}^{n} (1 - alpha(t))`, the chance that a policy
/// drawing a new arm every step never meets an optimal one.
pub fn oracle_absorption_prob(schedule: &ReservoirSchedule, horizon: Horizon) -> Result<f64> {
    let ln = ln_oracle_absorption_prob(schedule, horizon)?;
    Ok(if ln < LN_ABSORPTION_FLOOR { 0.0 } else { libm::exp(ln) })
}

/// Natural log of [`oracle_absorption_prob`]; `-inf` when the product is 0.
pub fn ln_oracle_absorption_prob(schedule: &ReservoirSchedule, horizon: Horizon) -> Result<f64> {
    let ln1m = |a: f64| if a >= 1.0 { f64::NEG_INFINITY } else { libm::log1p(-a) };
    match schedule {
        ReservoirSchedule::EndogenousPower { .. } => {
            Err(Error::Schedule("the absorption product needs an exogenous schedule".into()))
        }
        ReservoirSchedule::Constant { c } => Ok(match horizon {
            Horizon::Finite(n) => n as f64 * ln1m(*c),
            Horizon::Infinite => f64::NEG_INFINITY,
        }),
        ReservoirSchedule::ExogenousTable { values } => {
            let last = values[values.len() - 1];
            let (head, tail) = match horizon {
                Horizon::Finite(n) => {
                    let n = n as usize;
                    let head = n.min(values.len());
                    (head, (n - head) as f64)
                }
                Horizon::Infinite => (values.len(), f64::INFINITY),
            };
            let mut ln: f64 = values[..head].iter().map(|&a| ln1m(a)).sum();
            if tail > 0.0 {
                ln += tail * ln1m(last);
            }
            Ok(ln)
        }
        ReservoirSchedule::ExogenousPower { c, gamma } => {
            if *gamma == 0.0 {
                return ln_oracle_absorption_prob(&ReservoirSchedule::Constant { c: *c }, horizon);
            }
            let exact_end = match horizon {
                Horizon::Finite(n) => n.min(EXACT_TERMS),
                Horizon::Infinite => EXACT_TERMS,
            };
            let mut ln = 0.0;
            for t in 1..=exact_end {
                ln += ln1m(c * libm::pow(t as f64, -gamma));
                if ln < LN_ABSORPTION_FLOOR {
                    return Ok(f64::NEG_INFINITY);
                }
            }
            let tail = match horizon {
                Horizon::Finite(n) if n <= EXACT_TERMS => 0.0,
                Horizon::Finite(n) => power_log_tail(*c, *gamma, exact_end as f64, Some(n as f64)),
                Horizon::Infinite if *gamma <= 1.0 => f64::NEG_INFINITY,
                Horizon::Infinite => power_log_tail(*c, *gamma, exact_end as f64, None),
            };
            Ok(ln + tail)
        }
    }
}

/// Euler-Maclaurin estimate of `sum_{t=from+1}^{to} ln(1 - c t^-gamma)`,
/// `to = None` meaning infinity (only valid for `gamma > 1`).
fn power_log_tail(c: f64, gamma: f64, from: f64, to: Option<f64>) -> f64 {
    let h = |t: f64| libm::log1p(-c * libm::pow(t, -gamma));
    let dh = |t: f64| {
        let a = c * libm::pow(t, -gamma);
        gamma * a / (t * (1.0 - a))
    };
    // int_from^to ln(1 - c t^-g) dt = -sum_k c^k/k int t^(-k g) dt
    let mut integral = 0.0;
    let mut ck = 1.0;
    for k in 1..=200u32 {
        ck *= c;
        let kg = f64::from(k) * gamma;
        let piece = if (1.0 - kg).abs() < 1e-12 {
            match to {
                Some(to) => libm::log(to / from),
                None => f64::INFINITY,
            }
        } else {
            let upper = to.map_or(0.0, |to| libm::pow(to, 1.0 - kg));
            (upper - libm::pow(from, 1.0 - kg)) / (1.0 - kg)
        };
        let term = ck / f64::from(k) * piece;
        integral -= term;
        if term.abs() <= 1e-17 * integral.abs() {
            break;
        }
    }
    let (h_to, dh_to) = to.map_or((0.0, 0.0), |to| (h(to), dh(to)));
    integral + 0.5 * (h_to - h(from)) + (dh_to - dh(from)) / 12.0
}
